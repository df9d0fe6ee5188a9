#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string bin() {
    const char* b = std::getenv("CDOP_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args) {
    std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Parses the CSV payload (skipping the version comment and header row) into
// rows of string fields.
std::vector<std::vector<std::string>> csv_rows(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.rfind("# cdop-csv", 0) == 0) continue;
        if (first) {
            first = false;  // header row
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    return rows;
}

}  // namespace

TEST_CASE("eval: grid size, symmetry, determinism, versioned header") {
    write_file("cli_eval.json",
               R"({"kernel":"bessel","alpha":0.5,"grid":{"x":[-1,0,2],"y":[-1,0,2]},)"
               R"("bits":192,"out":"cli_eval.csv"})");
    CHECK(run("eval --config cli_eval.json") == 0);

    std::string raw = slurp("cli_eval.csv");
    CHECK(raw.rfind("# cdop-csv v1 eval\n", 0) == 0);

    auto rows = csv_rows("cli_eval.csv");
    REQUIRE(rows.size() == 9);
    // symmetry: row (i,j) and row (j,i) carry the same kernel value
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) CHECK(rows[3 * i + j][2] == rows[3 * j + i][2]);

    CHECK(run("eval --config cli_eval.json --out cli_eval2.csv") == 0);
    std::string again = slurp("cli_eval2.csv");
    CHECK(slurp("cli_eval.csv") == again);
}

TEST_CASE("eval: deformed ensemble diagonal stays inside [0, 1]") {
    write_file("cli_diag.json",
               R"({"kernel":"deformed-bessel","alpha":4.0,"utilde":[0.3],)"
               R"("grid":{"x":[-2,1,3],"y":[-2,1,3]},"out":"cli_diag.csv"})");
    CHECK(run("eval --config cli_diag.json") == 0);
    auto rows = csv_rows("cli_diag.csv");
    REQUIRE(rows.size() == 9);
    for (size_t i = 0; i < 3; ++i) {
        double d = std::stod(rows[4 * i][2]);
        CHECK(d >= -1e-20);
        CHECK(d <= 1.0 + 1e-20);
    }
}

TEST_CASE("exit codes: configuration errors and numerical degeneracy") {
    CHECK(run("eval --config cli_missing.json") == 2);

    write_file("cli_badjson.json", "{not json");
    CHECK(run("eval --config cli_badjson.json") == 2);

    write_file("cli_badkernel.json",
               R"({"kernel":"nope","grid":{"x":[0],"y":[0]},"out":"x.csv"})");
    CHECK(run("eval --config cli_badkernel.json") == 2);

    // evaluating a deformed kernel on its own deformation point is the
    // guarded removable singularity: numerical degeneracy, exit 3
    write_file("cli_guard.json",
               R"({"kernel":"deformed-bessel","alpha":1.0,"utilde":[0.3],)"
               R"("grid":{"x":[0.3],"y":[2.0]},"out":"cli_guard.csv"})");
    CHECK(run("eval --config cli_guard.json") == 3);

    CHECK(run("bogus-subcommand") == 2);
}

TEST_CASE("verify: clean suites pass, fuzzed inputs are caught") {
    write_file("cli_verify.json", R"({"suite":"specfun","out":"cli_verify.ndjson"})");
    CHECK(run("verify --config cli_verify.json") == 0);

    // one JSON object per line with the expected fields
    std::ifstream in("cli_verify.ndjson");
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        CHECK(line.find("\"suite\"") != std::string::npos);
        CHECK(line.find("\"residual\"") != std::string::npos);
        CHECK(line.find("\"pass\"") != std::string::npos);
        ++lines;
    }
    CHECK(lines >= 3);

    CHECK(run("verify --config cli_verify.json --fuzz-bits 16 --out cli_fuzz.ndjson") == 1);
}

TEST_CASE("converge-thm1: errors shrink at the expected first-order rate") {
    write_file("cli_thm1.json",
               R"({"alpha":1.0,"utilde":[0.3],"N_list":[20,40],)"
               R"("grid":[[1.0,2.0]],"out":"cli_thm1.csv"})");
    CHECK(run("converge-thm1 --config cli_thm1.json") == 0);
    auto rows = csv_rows("cli_thm1.csv");
    REQUIRE(rows.size() == 2);
    double e20 = std::stod(rows[0][5]), e40 = std::stod(rows[1][5]);
    double ratio = std::stod(rows[1][6]);
    CHECK(e40 < e20);
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);

    write_file("cli_thm1bad.json",
               R"({"alpha":1.0,"N_list":[40,20],"grid":[[1.0,2.0]],"out":"x.csv"})");
    CHECK(run("converge-thm1 --config cli_thm1bad.json") == 2);
}

TEST_CASE("converge-gamma: scaled kernels approach the limit") {
    write_file("cli_gamma.json",
               R"({"z":0.2,"zp":0.6,"u":0.2,"xi_list":[0.9,0.99],)"
               R"("grid":[[0.5,2.5]],"out":"cli_gamma.csv"})");
    CHECK(run("converge-gamma --config cli_gamma.json") == 0);
    auto rows = csv_rows("cli_gamma.csv");
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][5]) < std::stod(rows[0][5]));
}

TEST_CASE("sample: seeded reproducibility and histogram output") {
    write_file("cli_samp.json",
               R"({"family":"charlier","a":1.0,"N":2,"truncation":30,)"
               R"("num_samples":40,"seed":11,"out":"cli_s1.ndjson"})");
    CHECK(run("sample --config cli_samp.json") == 0);
    CHECK(run("sample --config cli_samp.json --out cli_s2.ndjson") == 0);
    CHECK(slurp("cli_s1.ndjson") == slurp("cli_s2.ndjson"));

    CHECK(run("sample --config cli_samp.json --seed 12 --out cli_s3.ndjson") == 0);
    CHECK(slurp("cli_s1.ndjson") != slurp("cli_s3.ndjson"));

    auto hist = csv_rows("cli_s1.ndjson.hist.csv");
    REQUIRE(hist.size() == 31);
    long total = 0;
    for (auto& row : hist) total += std::stol(row[1]);
    CHECK(total == 2 * 40);  // N points per sample
}

TEST_CASE("oracle-compare: brute sums sit within the certified tail") {
    write_file("cli_oc.json",
               R"({"target":"plancherel","alpha":0.5,"cutoff":12,)"
               R"("point_sets":[[0],[1,-2]],"out":"cli_oc.csv"})");
    CHECK(run("oracle-compare --config cli_oc.json") == 0);
    auto rows = csv_rows("cli_oc.csv");
    REQUIRE(rows.size() == 2);
    for (auto& row : rows)
        CHECK(std::stod(row[3]) < std::stod(row[4]) + 1e-8);

    write_file("cli_ocz.json",
               R"({"target":"zmeasure","z":0.2,"zp":0.6,"xi":0.2,"cutoff":14,)"
               R"("point_sets":[[0.5],[0.5,-1.5]],"out":"cli_ocz.csv"})");
    CHECK(run("oracle-compare --config cli_ocz.json") == 0);
}
