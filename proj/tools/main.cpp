// Command-line front end: kernel evaluation, invariant verification, the two
// convergence experiments, exact sampling, and brute-force oracle comparison.
// Every command is a pure function of (JSON config, seed); reruns with the
// same inputs produce byte-identical output files.
//
// Exit codes: 0 success, 1 invariant failure, 2 configuration error,
// 3 numerical degeneracy.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdop/christoffel.hpp"
#include "cdop/errors.hpp"
#include "cdop/kernels.hpp"
#include "cdop/oracle.hpp"
#include "cdop/orthopoly.hpp"
#include "cdop/verify.hpp"

using json = nlohmann::json;
using namespace cdop;

namespace {

constexpr const char* kCsvVersion = "cdop-csv v1";

struct Cli {
    std::string config_path;
    long bits_override = 0;
    long long seed_override = -1;
    std::string out_override;
    std::string suite = "all";       // verify only
    unsigned fuzz_bits = 0;          // verify only
};

json load_config(const Cli& cli) {
    json cfg = json::object();
    if (!cli.config_path.empty()) {
        std::ifstream in(cli.config_path);
        if (!in) throw ConfigError("cannot open config file: " + cli.config_path);
        try {
            in >> cfg;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    if (cli.bits_override > 0) cfg["bits"] = cli.bits_override;
    if (cli.seed_override >= 0) cfg["seed"] = cli.seed_override;
    if (!cli.out_override.empty()) cfg["out"] = cli.out_override;
    return cfg;
}

PrecisionContext context_of(const json& cfg) {
    long bits = cfg.value("bits", 256L);
    return PrecisionContext(bits);
}

// Fixed-width decimal serialization so output depends only on the mantissa.
std::string fmt(const Real& x, const PrecisionContext& ctx) {
    return x.str(static_cast<size_t>(ctx.mantissa_bits * 0.30103) + 2);
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::ofstream open_out(const json& cfg, const std::string& fallback) {
    std::string path = cfg.value("out", fallback);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

Real jreal(const json& j, const PrecisionContext& ctx) {
    if (j.is_string()) return ctx.make(j.get<std::string>());
    return ctx.make(j.get<double>());
}

Complex jcomplex(const json& j, const PrecisionContext& ctx) {
    if (j.is_array()) {
        if (j.size() != 2) throw ConfigError("complex parameter must be [re, im]");
        return Complex(jreal(j[0], ctx), jreal(j[1], ctx));
    }
    return Complex(jreal(j, ctx));
}

std::vector<Real> jreal_list(const json& j, const PrecisionContext& ctx) {
    std::vector<Real> out;
    for (const json& e : j) out.push_back(jreal(e, ctx));
    return out;
}

const json& need(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) throw ConfigError("config is missing required field '" + key + "'");
    return cfg.at(key);
}

kernels::ZParams zparams_of(const json& cfg, const PrecisionContext& ctx) {
    return kernels::ZParams::make(jcomplex(need(cfg, "z"), ctx), jcomplex(need(cfg, "zp"), ctx),
                                  jreal(need(cfg, "xi"), ctx), ctx);
}

// Builds the kernel named by config["kernel"] for eval / oracle-compare.
KernelHandle kernel_of(const json& cfg, const PrecisionContext& ctx) {
    std::string kind = need(cfg, "kernel").get<std::string>();
    if (kind == "bessel") return kernels::discrete_bessel_kernel(jreal(need(cfg, "alpha"), ctx), ctx);
    if (kind == "deformed-bessel")
        return kernels::deformed_bessel_kernel(jreal(need(cfg, "alpha"), ctx),
                                               jreal_list(cfg.value("utilde", json::array()), ctx),
                                               ctx);
    if (kind == "zmeas")
        return kernels::zmeas_deformed_kernel(zparams_of(cfg, ctx),
                                              jreal_list(cfg.value("u", json::array()), ctx), ctx);
    if (kind == "gamma") {
        kernels::ZParams zp = zparams_of(cfg, ctx);
        if (!cfg.contains("u")) return kernels::gamma_kernel_undeformed(zp, ctx);
        return kernels::gamma_deformed_kernel(
            kernels::GammaDeformParams::make(zp, jreal(cfg.at("u"), ctx), ctx), ctx);
    }
    if (kind == "charlier" || kind == "meixner") {
        orthopoly::WeightFamily fam =
            kind == "charlier"
                ? orthopoly::WeightFamily::charlier(jreal(need(cfg, "a"), ctx))
                : orthopoly::WeightFamily::meixner(jreal(need(cfg, "beta"), ctx),
                                                   jreal(need(cfg, "xi"), ctx));
        christoffel::EnsembleSpec spec{
            fam, need(cfg, "N").get<long>(),
            christoffel::DeformationSpec::make(jreal_list(cfg.value("u", json::array()), ctx))};
        return christoffel::deformed_kernel(spec, ctx);
    }
    throw ConfigError("unknown kernel family '" + kind + "'");
}

int cmd_eval(const json& cfg) {
    PrecisionContext ctx = context_of(cfg);
    KernelHandle K = kernel_of(cfg, ctx);
    const json& grid = need(cfg, "grid");
    std::vector<Real> xs = jreal_list(need(grid, "x"), ctx);
    std::vector<Real> ys = jreal_list(need(grid, "y"), ctx);

    std::ofstream out = open_out(cfg, "eval.csv");
    out << "# " << kCsvVersion << " eval\n";
    out << "x,y,K\n";
    for (const Real& x : xs)
        for (const Real& y : ys)
            out << fmt(x, ctx) << ',' << fmt(y, ctx) << ',' << fmt(K(x, y), ctx) << '\n';
    return 0;
}

int cmd_converge_thm1(const json& cfg) {
    PrecisionContext base = context_of(cfg);
    Real alpha = jreal(need(cfg, "alpha"), base);
    std::vector<Real> utilde = jreal_list(cfg.value("utilde", json::array()), base);
    std::vector<long> Ns = need(cfg, "N_list").get<std::vector<long>>();
    for (size_t i = 0; i + 1 < Ns.size(); ++i)
        if (Ns[i + 1] <= Ns[i]) throw ConfigError("N_list must be strictly increasing");

    std::vector<std::pair<double, double>> grid;
    for (const json& p : need(cfg, "grid")) grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());

    KernelHandle lim = kernels::deformed_bessel_kernel(alpha, utilde, base);

    std::ofstream out = open_out(cfg, "converge_thm1.csv");
    out << "# " << kCsvVersion << " converge-thm1\n";
    out << "N,x,y,K_N,K_limit,error,ratio\n";
    std::map<std::pair<double, double>, Real> prev_err;
    for (long N : Ns) {
        // The finite-N Charlier evaluation cancels digits that grow linearly
        // with N, so the working mantissa is widened with N.
        PrecisionContext ctx(std::max(base.mantissa_bits, 256L + 16L * N));
        std::vector<Real> u;
        for (const Real& t : utilde) u.push_back(ctx.make(t.str(40)) + ctx.make(N));
        christoffel::EnsembleSpec spec{
            orthopoly::WeightFamily::charlier(ctx.make(alpha.str(40)) / ctx.make(N)), N,
            christoffel::DeformationSpec::make(u)};
        KernelHandle K = christoffel::deformed_kernel(spec, ctx);
        for (auto [x, y] : grid) {
            Real kn = K(ctx.make(x) + ctx.make(N), ctx.make(y) + ctx.make(N));
            Real kl = lim(base.make(x), base.make(y));
            Real err = abs(base.make(kn.str(60)) - kl);
            out << N << ',' << fmt(base.make(x), base) << ',' << fmt(base.make(y), base) << ','
                << fmt(base.make(kn.str(60)), base) << ',' << fmt(kl, base) << ','
                << fmt(err, base) << ',';
            auto it = prev_err.find({x, y});
            if (it != prev_err.end()) out << fmt(it->second / err, base);
            out << '\n';
            prev_err[{x, y}] = err;
        }
    }
    return 0;
}

int cmd_converge_gamma(const json& cfg) {
    PrecisionContext ctx = context_of(cfg);
    Complex z = jcomplex(need(cfg, "z"), ctx), zz = jcomplex(need(cfg, "zp"), ctx);
    std::vector<Real> xis = jreal_list(need(cfg, "xi_list"), ctx);
    for (size_t i = 0; i + 1 < xis.size(); ++i)
        if (!(xis[i] < xis[i + 1])) throw ConfigError("xi_list must increase toward 1");
    bool deformed = cfg.contains("u");

    std::vector<std::pair<double, double>> grid;
    for (const json& p : need(cfg, "grid")) grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());

    // The limit is taken against a reference xi only through (z, z'); the
    // ZParams carrier needs some admissible xi to classify the series.
    kernels::ZParams ref = kernels::ZParams::make(z, zz, ctx.make(0.5), ctx);
    KernelHandle lim = deformed
                           ? kernels::gamma_deformed_kernel(
                                 kernels::GammaDeformParams::make(ref, jreal(cfg.at("u"), ctx), ctx),
                                 ctx)
                           : kernels::gamma_kernel_undeformed(ref, ctx);

    std::ofstream out = open_out(cfg, "converge_gamma.csv");
    out << "# " << kCsvVersion << " converge-gamma\n";
    out << "xi,x,y,scaled_K,K_limit,error,ratio\n";
    std::map<std::pair<double, double>, Real> prev_err;
    for (const Real& xi : xis) {
        kernels::ZParams zp = kernels::ZParams::make(z, zz, xi, ctx);
        std::vector<Real> u;
        if (deformed) u.push_back(jreal(cfg.at("u"), ctx));
        KernelHandle K = kernels::zmeas_deformed_kernel(zp, u, ctx);
        // The deformed kernel is rescaled by (1 - xi)^{2k}; k = 0 has no
        // prefactor.
        Real scale = deformed ? (ctx.one() - xi) * (ctx.one() - xi) : ctx.one();
        for (auto [x, y] : grid) {
            Real kv = scale * K(ctx.make(x), ctx.make(y));
            Real kl = lim(ctx.make(x), ctx.make(y));
            Real err = abs(kv - kl);
            out << fmt(xi, ctx) << ',' << fmt(ctx.make(x), ctx) << ',' << fmt(ctx.make(y), ctx)
                << ',' << fmt(kv, ctx) << ',' << fmt(kl, ctx) << ',' << fmt(err, ctx) << ',';
            auto it = prev_err.find({x, y});
            if (it != prev_err.end()) out << fmt(it->second / err, ctx);
            out << '\n';
            prev_err[{x, y}] = err;
        }
    }
    return 0;
}

int cmd_verify(const json& cfg, const std::string& suite, unsigned fuzz_bits) {
    PrecisionContext ctx = context_of(cfg);
    std::string s = cfg.value("suite", suite);
    unsigned fb = cfg.value("fuzz_bits", fuzz_bits);
    std::vector<verify::CheckResult> rs = verify::run_suite(s, ctx, fb);

    std::ofstream out = open_out(cfg, "verify.ndjson");
    bool ok = true;
    for (const verify::CheckResult& r : rs) {
        json line = {{"suite", r.suite},
                     {"name", r.name},
                     {"residual", r.residual},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass}};
        out << line.dump() << '\n';
        std::cout << (r.pass ? "pass" : "FAIL") << "  " << r.suite << ": " << r.name
                  << "  (residual " << r.residual << ", tolerance " << r.tolerance << ")\n";
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

int cmd_sample(const json& cfg) {
    PrecisionContext ctx = context_of(cfg);
    std::string family = cfg.value("family", "charlier");
    orthopoly::WeightFamily fam =
        family == "charlier"
            ? orthopoly::WeightFamily::charlier(jreal(need(cfg, "a"), ctx))
            : orthopoly::WeightFamily::meixner(jreal(need(cfg, "beta"), ctx),
                                               jreal(need(cfg, "xi"), ctx));
    long N = need(cfg, "N").get<long>();
    christoffel::EnsembleSpec spec{
        fam, N, christoffel::DeformationSpec::make(jreal_list(cfg.value("u", json::array()), ctx))};
    long truncation = need(cfg, "truncation").get<long>();
    long num = need(cfg, "num_samples").get<long>();
    unsigned long long seed = cfg.value("seed", 1ULL);

    oracle::OpeSampler sampler(spec, truncation, ctx);

    std::string out_path = cfg.value("out", std::string("samples.ndjson"));
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open output file: " + out_path);
    std::vector<long> counts(static_cast<size_t>(truncation) + 1, 0);
    for (long i = 0; i < num; ++i) {
        std::vector<long> pts = sampler.sample(seed + static_cast<unsigned long long>(i));
        json line = {{"sample", i}, {"points", pts}};
        out << line.dump() << '\n';
        for (long p : pts) counts[static_cast<size_t>(p)] += 1;
    }

    // Summary histogram with the exact one-point function for comparison.
    KernelHandle K = christoffel::deformed_kernel(spec, ctx);
    std::ofstream hist(out_path + ".hist.csv");
    if (!hist) throw ConfigError("cannot open output file: " + out_path + ".hist.csv");
    hist << "# " << kCsvVersion << " sample-histogram\n";
    hist << "x,count,frequency,kernel_diagonal\n";
    for (long x = 0; x <= truncation; ++x)
        hist << x << ',' << counts[static_cast<size_t>(x)] << ','
             << fmt(ctx.make(counts[static_cast<size_t>(x)]) / ctx.make(num), ctx) << ','
             << fmt(K(ctx.make(x), ctx.make(x)), ctx) << '\n';
    return 0;
}

// Determinant of the kernel minor on the listed points.
Real kernel_minor(const KernelHandle& K, const std::vector<Real>& pts,
                  const PrecisionContext& ctx) {
    size_t n = pts.size();
    std::vector<std::vector<Real>> m(n, std::vector<Real>(n, ctx.zero()));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) m[i][j] = K(pts[i], pts[j]);
    // Gaussian elimination without pivot search; the minors here are tiny.
    Real det = ctx.one();
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        for (size_t r = c + 1; r < n; ++r)
            if (abs(m[r][c]) > abs(m[p][c])) p = r;
        if (p != c) {
            std::swap(m[p], m[c]);
            det = -det;
        }
        if (m[c][c].is_zero()) return ctx.zero();
        det = det * m[c][c];
        for (size_t r = c + 1; r < n; ++r) {
            Real f = m[r][c] / m[c][c];
            for (size_t cc = c; cc < n; ++cc) m[r][cc] = m[r][cc] - f * m[c][cc];
        }
    }
    return det;
}

int cmd_oracle_compare(const json& cfg) {
    PrecisionContext ctx = context_of(cfg);
    std::string target = need(cfg, "target").get<std::string>();
    unsigned cutoff = need(cfg, "cutoff").get<unsigned>();

    std::ofstream out = open_out(cfg, "oracle_compare.csv");
    out << "# " << kCsvVersion << " oracle-compare\n";
    out << "points,brute,kernel_minor,abs_error,tail_bound\n";

    bool ok = true;
    if (target == "plancherel") {
        Real alpha = jreal(need(cfg, "alpha"), ctx);
        KernelHandle K = kernels::discrete_bessel_kernel(alpha, ctx);
        for (const json& jpts : need(cfg, "point_sets")) {
            std::vector<long> pts = jpts.get<std::vector<long>>();
            oracle::BruteResult r = oracle::brute_plancherel_corr(alpha, pts, cutoff, ctx);
            std::vector<Real> rp;
            std::ostringstream label;
            for (size_t i = 0; i < pts.size(); ++i) {
                rp.push_back(ctx.make(pts[i]));
                label << (i ? ";" : "") << pts[i];
            }
            Real det = kernel_minor(K, rp, ctx);
            Real err = abs(r.value - det);
            ok = ok && err < r.tail + ctx.make(1e-8);
            out << csv_quote(label.str()) << ',' << fmt(r.value, ctx) << ',' << fmt(det, ctx)
                << ',' << fmt(err, ctx) << ',' << fmt(r.tail, ctx) << '\n';
        }
    } else if (target == "zmeasure") {
        kernels::ZParams zp = zparams_of(cfg, ctx);
        std::vector<Real> u = jreal_list(cfg.value("u", json::array()), ctx);
        oracle::ZDeform d{u};
        KernelHandle K = kernels::zmeas_deformed_kernel(zp, u, ctx);
        Real slack = ctx.make(cfg.value("tail_slack", 1.0));
        for (const json& jpts : need(cfg, "point_sets")) {
            std::vector<Real> pts = jreal_list(jpts, ctx);
            oracle::BruteResult r =
                oracle::brute_zmeasure_corr(zp, pts, cutoff, u.empty() ? nullptr : &d, ctx);
            std::ostringstream label;
            for (size_t i = 0; i < pts.size(); ++i) label << (i ? ";" : "") << pts[i].str(8);
            Real det = kernel_minor(K, pts, ctx);
            Real err = abs(r.value - det);
            ok = ok && err < slack * r.tail + ctx.make(1e-8);
            out << csv_quote(label.str()) << ',' << fmt(r.value, ctx) << ',' << fmt(det, ctx)
                << ',' << fmt(err, ctx) << ',' << fmt(r.tail, ctx) << '\n';
        }
    } else {
        throw ConfigError("unknown oracle-compare target '" + target + "'");
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extended-precision deformed discrete ensemble kernels"};
    app.require_subcommand(1);

    Cli cli;
    std::string active;
    for (const char* name : {"eval", "converge-thm1", "converge-gamma", "verify", "sample",
                             "oracle-compare"}) {
        CLI::App* sub = app.add_subcommand(name, name);
        sub->add_option("--config", cli.config_path, "JSON config file");
        sub->add_option("--bits", cli.bits_override, "override mantissa bits");
        sub->add_option("--seed", cli.seed_override, "override RNG seed");
        sub->add_option("--out", cli.out_override, "override output path");
        if (std::string(name) == "verify") {
            sub->add_option("--suite", cli.suite, "suite name (default all)");
            sub->add_option("--fuzz-bits", cli.fuzz_bits,
                            "perturb inputs by 2^-bits (negative control)");
        }
        sub->callback([&active, name] { active = name; });
    }

    try {
        app.parse(argc, argv);
        json cfg = load_config(cli);
        if (active == "eval") return cmd_eval(cfg);
        if (active == "converge-thm1") return cmd_converge_thm1(cfg);
        if (active == "converge-gamma") return cmd_converge_gamma(cfg);
        if (active == "verify") return cmd_verify(cfg, cli.suite, cli.fuzz_bits);
        if (active == "sample") return cmd_sample(cfg);
        if (active == "oracle-compare") return cmd_oracle_compare(cfg);
        return 2;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical degeneracy: " << e.what() << '\n';
        return 3;
    }
}
