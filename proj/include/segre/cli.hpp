#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <segre/bounds.hpp>
#include <segre/corpus.hpp>
#include <segre/gamma_table.hpp>
#include <segre/pipeline.hpp>
#include <segre/wronskian.hpp>

#ifndef SEGRE_VERSION
#define SEGRE_VERSION "0.0.0"
#endif

namespace segre::cli
{

using nlohmann::json;

inline constexpr int schema_version = 1;
inline constexpr const char *tool_version = SEGRE_VERSION;

// Process exit codes. Verdict codes come first; 64 and up follow sysexits.
namespace exit_code
{
inline constexpr int satisfied = 0;
inline constexpr int obstructed = 1;
inline constexpr int inconclusive = 2;
inline constexpr int ok = 0;
inline constexpr int check_failed = 1; // selfcheck with a failing invariant
inline constexpr int usage = 64;
inline constexpr int data = 65;
inline constexpr int no_input = 66;
inline constexpr int internal = 70;
inline constexpr int cant_create = 73;
} // namespace exit_code

struct usage_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

// A parse_error rewritten with line, column and a caret excerpt.
struct annotated_parse_error : error {
    using error::error;
};

struct RunConfig {
    std::string command;
    std::string phi;   // inline DSL
    std::string input; // or a file in the same DSL
    std::optional<int> n, N, order, samples;
    std::uint64_t seed = 1;
    std::string mode = "auto";
    std::string gamma_table; // empty: the built-in table
    std::string output;      // empty: stdout
    bool quick = false;
    bool timings = false;
};

struct Outcome {
    int code = 0;
    json report;
};

// ---------------------------------------------------------------- helpers

inline json to_json(const GaussianRational &x) { return x.to_string(); }

inline json to_json(const std::vector<GaussianRational> &v)
{
    json a = json::array();
    for (const auto &x : v) {
        a.push_back(x.to_string());
    }
    return a;
}

inline json to_json(const Multiindex &m) { return json(std::vector<int>(m.begin(), m.end())); }

inline json to_json(const std::vector<Multiindex> &v)
{
    json a = json::array();
    for (const auto &m : v) {
        a.push_back(to_json(m));
    }
    return a;
}

inline json to_json(const ExactMatrix &m)
{
    json a = json::array();
    for (const auto &row : m) {
        a.push_back(to_json(row));
    }
    return a;
}

inline json to_json(const SamplePoint &p)
{
    return {{"z0", to_json(p.z0)}, {"a0", to_json(p.a0)}, {"u0", to_json(p.u0)}, {"w0", to_json(p.w0)}, {"xi0", to_json(p.xi0)}};
}

inline json to_json(const mpz_class &z) { return z.get_str(); }

// Text with a caret under the offending column.
inline std::string caret(const std::string &line, std::size_t col)
{
    return "  " + line + "\n  " + std::string(std::min(col, line.size()), ' ') + "^";
}

struct Germ {
    std::string name;
    std::string text;
    RealDefining h;
    GaussianRational offset; // phi(0) before translation
};

// One defining function per file. Lines starting with '#' are comments;
// "# name: X" and "# n: K" are read as headers.
inline Germ load_germ(const RunConfig &c)
{
    if (c.phi.empty() == c.input.empty()) {
        throw usage_error("give exactly one of --phi and --input");
    }
    Germ g;
    std::optional<int> n = c.n;
    std::vector<std::string> lines; // body lines of the file
    if (!c.phi.empty()) {
        g.name = "inline";
        g.text = c.phi;
        lines.push_back(c.phi);
    } else {
        std::ifstream in(c.input);
        if (!in) {
            throw io_error("cannot open input file '" + c.input + "'");
        }
        g.name = c.input;
        std::string line;
        while (std::getline(in, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first != std::string::npos && line[first] == '#') {
                std::string body = line.substr(first + 1);
                body.erase(0, body.find_first_not_of(" \t"));
                auto header = [&](const std::string &key) -> std::optional<std::string> {
                    if (body.rfind(key + ":", 0) != 0) {
                        return std::nullopt;
                    }
                    std::string v = body.substr(key.size() + 1);
                    v.erase(0, v.find_first_not_of(" \t"));
                    v.erase(v.find_last_not_of(" \t\r") + 1);
                    return v;
                };
                if (auto v = header("name")) {
                    g.name = *v;
                } else if (auto v = header("n")) {
                    int fn = 0;
                    try {
                        fn = std::stoi(*v);
                    } catch (const std::exception &) {
                        throw data_error(c.input + ": bad '# n:' header '" + *v + "'");
                    }
                    if (n && *n != fn) {
                        throw usage_error("--n " + std::to_string(*n) + " contradicts '# n: " + *v + "' in " + c.input);
                    }
                    n = fn;
                }
                lines.push_back(""); // keep line numbers aligned
                continue;
            }
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            lines.push_back(line);
        }
        std::string joined;
        for (std::size_t k = 0; k < lines.size(); ++k) {
            joined += (k ? "\n" : "") + lines[k];
        }
        if (joined.find_first_not_of(" \t\n") == std::string::npos) {
            throw data_error(c.input + ": no defining function found");
        }
        g.text = joined;
    }
    try {
        const int dim = n.value_or(1);
        if (dim < 1 || dim > 3) {
            throw domain_error("CR dimension n must be between 1 and 3");
        }
        RealDefining raw{dim, parse_series(g.text, real_vars(dim), corpus_cap)};
        check_reality(raw);
        // Move the base point to the origin: v -> v - phi(0), i.e. w -> w - i phi(0).
        g.offset = raw.phi.constant_term();
        raw.phi = raw.phi - TruncatedSeries::constant(raw.phi.vars(), raw.phi.cap(), g.offset);
        g.h = std::move(raw);
    } catch (const parse_error &e) {
        // map the offset back to a line and column
        std::size_t pos = e.position, line = 0;
        while (line + 1 < lines.size() && pos > lines[line].size()) {
            pos -= lines[line].size() + 1;
            ++line;
        }
        std::string where = c.phi.empty() ? c.input + ":" + std::to_string(line + 1) + ":" + std::to_string(pos + 1) + ": "
                                          : "";
        throw annotated_parse_error(where + e.what() + "\n" + caret(lines[line], pos));
    }
    // normalised text, so equal germs echo equally
    g.text = g.h.phi.to_string();
    return g;
}

inline GammaTable load_table(const RunConfig &c)
{
    return c.gamma_table.empty() ? default_gamma_table() : load_gamma_table(c.gamma_table);
}

inline EvalMode parse_mode(const std::string &m)
{
    if (m == "point") {
        return EvalMode::point;
    }
    if (m == "series") {
        return EvalMode::series;
    }
    if (m == "both") {
        return EvalMode::both;
    }
    if (m == "auto") {
        return EvalMode::automatic;
    }
    throw usage_error("--mode must be one of auto, point, series, both");
}

inline int need(const std::optional<int> &v, const char *flag)
{
    if (!v) {
        throw usage_error(std::string("missing ") + flag);
    }
    return *v;
}

inline void require_range(int v, int lo, int hi, const char *flag)
{
    if (v < lo || v > hi) {
        throw usage_error(std::string(flag) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                          std::to_string(v));
    }
}

inline json config_echo(const RunConfig &c)
{
    json j;
    j["seed"] = c.seed;
    auto put = [&](const char *k, const std::optional<int> &v) {
        if (v) {
            j[k] = *v;
        }
    };
    put("n", c.n);
    put("N", c.N);
    put("order", c.order);
    put("samples", c.samples);
    if (!c.phi.empty()) {
        j["phi"] = c.phi;
    }
    if (!c.input.empty()) {
        j["input"] = c.input;
    }
    if (!c.gamma_table.empty()) {
        j["gamma_table"] = c.gamma_table;
    }
    if (c.command == "check") {
        j["mode"] = c.mode;
    }
    if (c.quick) {
        j["quick"] = true;
    }
    return j;
}

inline json base_report(const RunConfig &c, int table_version)
{
    json r;
    r["schema"] = "segre-report";
    r["schema_version"] = schema_version;
    r["tool_version"] = tool_version;
    r["gamma_table_version"] = table_version;
    r["command"] = c.command;
    r["config"] = config_echo(c);
    return r;
}

inline json germ_json(const Germ &g)
{
    json j{{"name", g.name}, {"n", g.h.n}, {"phi", g.text}};
    if (!g.offset.is_zero()) {
        j["translated_by"] = to_json(g.offset);
    }
    return j;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- check

inline json verdict_json(const Verdict &v)
{
    json j;
    j["n"] = v.n;
    j["N"] = v.N;
    j["conclusion"] = to_string(v.conclusion);
    j["summary"] = v.summary;
    j["transversality_automatic"] = v.transversality_automatic;
    j["resampled"] = v.resampled;
    j["sample_status"] = v.sample_status;
    j["product_series_valuation"] = v.product_series_valuation ? json(*v.product_series_valuation) : json(nullptr);
    j["series_order"] = v.options.order;
    j["mode"] = to_string(v.options.mode);
    json samples = json::array();
    for (const auto &p : v.samples) {
        samples.push_back(to_json(p));
    }
    j["samples"] = samples;
    json factors = json::array();
    for (const auto &f : v.factors) {
        json fj;
        fj["m"] = f.m;
        fj["alphas"] = to_json(f.alphas);
        fj["d"] = f.d;
        fj["s"] = f.s;
        fj["available"] = f.available;
        if (!f.note.empty()) {
            fj["note"] = f.note;
        }
        fj["gammas"] = to_json(f.gammas);
        fj["values"] = to_json(f.values);
        fj["series_run"] = f.series_run;
        if (f.series_run) {
            fj["series_valuation"] = f.series_valuation;
        }
        factors.push_back(fj);
    }
    j["factors"] = factors;
    return j;
}

inline int exit_for(Conclusion c)
{
    switch (c) {
    case Conclusion::satisfied:
        return exit_code::satisfied;
    case Conclusion::obstructed:
        return exit_code::obstructed;
    default:
        return exit_code::inconclusive;
    }
}

inline Outcome cmd_check(const RunConfig &c)
{
    const Germ g = load_germ(c);
    PipelineOptions opt;
    opt.order = c.order.value_or(4);
    opt.samples = c.samples.value_or(20);
    opt.seed = c.seed;
    opt.mode = parse_mode(c.mode);
    opt.table = load_table(c);
    const int N = need(c.N, "--N");
    if (N < g.h.n) {
        throw usage_error("--N must be at least --n");
    }
    require_range(opt.order, 0, 12, "--order");
    require_range(opt.samples, 0, 1000, "--samples");
    Verdict v = full_pipeline(g.h, N, opt);
    Outcome out{exit_for(v.conclusion), base_report(c, opt.table.version)};
    out.report["germ"] = germ_json(g);
    out.report["verdict"] = verdict_json(v);
    if (c.timings) {
        out.report["timings"] = v.timings;
    }
    return out;
}

// ---------------------------------------------------------------- assoc-pde

inline Outcome cmd_assoc_pde(const RunConfig &c)
{
    const Germ g = load_germ(c);
    const int order = c.order.value_or(6);
    require_range(order, 1, 16, "--order");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = g.h.n;
    const ComplexDefining r = real_to_complex(g.h, order + 2);
    const DerivedPde d = derive_pde(r); // reports Levi degeneracy
    Outcome out{exit_code::ok, base_report(c, gamma_table_version)};
    out.report["germ"] = germ_json(g);
    json res;
    res["levi_determinant"] = to_json(levi_determinant(r));
    res["xi0"] = to_json(d.system.xi0);
    res["rho"] = r.rho.to_string();
    res["rho_cap"] = r.rho.cap();
    res["phi_cap"] = d.system.cap();
    const VarList jv = jet_vars(n);
    const int cap = d.system.cap();
    std::vector<TruncatedSeries> at_z0;
    for (int k = 0; k < n; ++k) {
        at_z0.push_back(TruncatedSeries(jv, cap));
    }
    at_z0.push_back(TruncatedSeries::variable(jv, cap, "w"));
    for (int k = 1; k <= n; ++k) {
        at_z0.push_back(TruncatedSeries::variable(jv, cap, "xi" + std::to_string(k)));
    }
    json phis = json::array();
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const TruncatedSeries &p = d.system.phi[std::size_t(i)][std::size_t(j)];
            phis.push_back({{"i", i + 1}, {"j", j + 1}, {"series", p.to_string()}, {"at_z0", compose(p, at_z0).to_string()}});
        }
    }
    res["phi"] = phis;
    res["variables"] = jv;
    out.report["assoc_pde"] = res;
    if (c.timings) {
        out.report["timings"] = {{"assoc_pde", seconds_since(t0)}};
    }
    return out;
}

// ---------------------------------------------------------------- obstruction

// Raw point-mode matrices of every factor at seeded samples. Samples are
// drawn exactly as in `check`, so determinants agree with its values.
inline Outcome cmd_obstruction(const RunConfig &c)
{
    const Germ g = load_germ(c);
    const int n = g.h.n;
    const int N = c.N.value_or(n);
    if (N < n) {
        throw usage_error("--N must be at least --n");
    }
    const int samples = c.samples.value_or(1);
    require_range(samples, 1, 100, "--samples");
    const GammaTable table = load_table(c);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<ObstructionSpec> specs;
    json factors = json::array();
    for (int m = n; m <= N; ++m) {
        std::set<int> seen;
        for (auto &alphas : enumerate_alpha_choices(n, m)) {
            ObstructionSpec spec = make_spec(n, m, alphas);
            if (!seen.insert(spec.d()).second) {
                continue;
            }
            const auto *gm = lookup_gammas(table, spec);
            if (!gm) {
                factors.push_back({{"m", m}, {"d", spec.d()}, {"available", false}});
                continue;
            }
            spec.gammas = *gm;
            validate_spec(spec);
            specs.push_back(spec);
        }
    }
    int order = 0, xi_cap = 0;
    for (const auto &s : specs) {
        order = std::max(order, s.k() - 1);
        xi_cap = std::max(xi_cap, s.max_gamma());
    }
    std::vector<json> per_spec(specs.size(), json::array());
    ExactRng rng(c.seed);
    json pts = json::array();
    int drawn = 0, attempts = 0;
    while (drawn < samples && !specs.empty()) {
        if (++attempts > 10 * samples + 10) {
            throw nondegeneracy_error("no Levi-nondegenerate sample point found", "0");
        }
        SamplePoint p = SamplePoint::draw(rng, n);
        FiberJets fj;
        try {
            fj = sample_fiber(g.h, p, order, xi_cap);
        } catch (const nondegeneracy_error &) {
            continue;
        }
        JetEvaluator ev(fj);
        for (std::size_t k = 0; k < specs.size(); ++k) {
            const ExactMatrix mat = point_matrix(specs[k], build_row0(specs[k], ev));
            per_spec[k].push_back({{"matrix", to_json(mat)}, {"determinant", to_json(det_exact(mat))}});
        }
        pts.push_back(to_json(p));
        ++drawn;
    }
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto &s = specs[k];
        std::vector<std::string> basis;
        for (const auto &b : s.basis) {
            basis.push_back(monomial_name(b));
        }
        factors.push_back({{"m", s.m},
                           {"d", s.d()},
                           {"available", true},
                           {"alphas", to_json(s.alphas)},
                           {"gammas", to_json(s.gammas)},
                           {"basis", basis},
                           {"s", s.s()},
                           {"at_samples", per_spec[k]}});
    }
    Outcome out{exit_code::ok, base_report(c, table.version)};
    out.report["germ"] = germ_json(g);
    out.report["obstruction"] = {{"N", N}, {"samples", pts}, {"factors", factors}};
    if (c.timings) {
        out.report["timings"] = {{"obstruction", seconds_since(t0)}};
    }
    return out;
}

// ---------------------------------------------------------------- bounds

inline json bound_json(const BoundReport &b)
{
    json j{{"n", b.n},
           {"m", b.m},
           {"p", to_json(b.p)},
           {"s_bound", to_json(b.s_bound)},
           {"nu", to_json(b.nu)},
           {"mu", to_json(b.mu)},
           {"weighted_cap", b.weighted_cap}};
    j["sharp"] = b.sharp ? json{{"order", *b.sharp}, {"note", "refined third-order operator; generic bound shown as nu"}}
                         : json(nullptr);
    return j;
}

inline Outcome cmd_bounds(const RunConfig &c)
{
    const int n = need(c.n, "--n");
    const int N = need(c.N, "--N");
    if (n < 1 || N < n) {
        throw usage_error("bounds need 1 <= n <= N");
    }
    require_range(N, 1, 40, "--N");
    Outcome out{exit_code::ok, base_report(c, gamma_table_version)};
    json rows = json::array();
    for (int m = n; m <= N; ++m) {
        rows.push_back(bound_json(bound_report(n, m)));
    }
    out.report["bounds"] = {{"rows", rows}, {"mu", to_json(mu_of(n, N))}};
    if (auto s = sharp_order(n, N)) {
        out.report["bounds"]["sharp"] = *s;
    }
    return out;
}

// ---------------------------------------------------------------- wronskian

// First l with dim E_l = dim E_{l+1}, or L when the profile never stalls.
inline int stabilisation_index(const SpanProfile &p)
{
    const int L = int(p.dims.size());
    int l = 1;
    while (l < L && p.dims[std::size_t(l - 1)] != p.dims[std::size_t(l)]) {
        ++l;
    }
    return l;
}

// Segre-graph family of an n = 1 germ seen from a seeded sample point,
// with its span profile and the extracted constant annihilator.
inline Outcome cmd_wronskian(const RunConfig &c)
{
    const Germ g = load_germ(c);
    if (g.h.n != 1) {
        throw usage_error("wronskian supports n = 1 only");
    }
    const int L = c.order.value_or(16);
    require_range(L, 1, 24, "--order");
    const auto t0 = std::chrono::steady_clock::now();
    ExactRng rng(c.seed);
    SamplePoint p;
    ComplexDefining r;
    for (int attempt = 0;; ++attempt) {
        if (attempt == 20) {
            throw nondegeneracy_error("no Levi-nondegenerate sample point found", "0");
        }
        p = SamplePoint::draw(rng, 1);
        r = complexify(recentered_phi(g.h.phi, p.z0, p.a0, p.u0), 1, L + 7);
        if (!levi_determinant(r).is_zero()) {
            break;
        }
    }
    const VectorFamily fam = segre_graph_family(r, L + 4);
    const std::vector<GaussianRational> origin{0};
    const SpanProfile prof = span_dims(fam, origin, L);
    const int l = stabilisation_index(prof);
    const Dependence d = extract_dependence(fam, origin, l);
    json res;
    res["sample"] = {{"z0", to_json(p.z0)}, {"a0", to_json(p.a0)}, {"u0", to_json(p.u0)}};
    res["components"] = int(fam.components.size());
    res["profile"] = prof.dims;
    res["l"] = l;
    res["found"] = d.found;
    res["reason"] = d.reason;
    res["lambda"] = to_json(d.lambda);
    res["alphas"] = to_json(d.alphas);
    res["columns"] = d.columns;
    res["extra"] = d.extra;
    Outcome out{exit_code::ok, base_report(c, gamma_table_version)};
    out.report["germ"] = germ_json(g);
    out.report["wronskian"] = res;
    if (c.timings) {
        out.report["timings"] = {{"wronskian", seconds_since(t0)}};
    }
    return out;
}

// ---------------------------------------------------------------- corpus

inline Outcome cmd_corpus(const RunConfig &c)
{
    const int order = c.order.value_or(10);
    require_range(order, 1, 20, "--order");
    json entries = json::array();
    for (const auto &e : corpus()) {
        json j{{"name", e.name}, {"n", e.germ.n}, {"phi", e.text}};
        j["levi_determinant"] = to_json(levi_determinant(real_to_complex(e.germ, 3)));
        if (e.certificate) {
            std::vector<std::string> comps;
            for (const auto &s : e.certificate->components) {
                comps.push_back(s.to_string());
            }
            j["certificate"] = {{"m", e.certificate->m},
                                {"signature_l", e.certificate->signature_l},
                                {"components", comps},
                                {"verified_to_order", verify_certificate(e.germ, *e.certificate, order) ? json(order)
                                                                                                          : json(nullptr)}};
        } else {
            j["certificate"] = nullptr;
        }
        entries.push_back(j);
    }
    Outcome out{exit_code::ok, base_report(c, gamma_table_version)};
    out.report["corpus"] = entries;
    return out;
}

// ---------------------------------------------------------------- selfcheck

struct Invariant {
    std::string name;
    std::function<std::string()> run; // empty string: pass, else the failure
};

// Invariants over the corpus, the gamma table, the two row builders and
// the dependence extraction. Every random choice derives from `seed`.
inline std::vector<Invariant> invariants(const std::optional<GammaTable> &table, std::uint64_t seed, bool quick)
{
    std::vector<Invariant> out;
    auto with_table = [&](std::function<std::string(const GammaTable &)> f) {
        return [table, f]() -> std::string { return table ? f(*table) : "gamma table unavailable"; };
    };

    out.push_back({"gamma_table.nonsingular", with_table([quick](const GammaTable &t) -> std::string {
                       for (const auto &[key, gammas] : t.entries) {
                           const auto [n, m, d] = key;
                           if (quick && n > 1) {
                               continue;
                           }
                           std::optional<ObstructionSpec> spec;
                           for (auto &alphas : enumerate_alpha_choices(n, m)) {
                               ObstructionSpec s = make_spec(n, m, alphas);
                               if (s.d() == d) {
                                   spec = std::move(s);
                                   break;
                               }
                           }
                           const std::string tag = "(" + std::to_string(n) + "," + std::to_string(m) + "," +
                                                   std::to_string(d) + ")";
                           if (!spec) {
                               return "entry " + tag + " matches no alpha choice";
                           }
                           lookup_gammas(t, *spec);
                           spec->gammas = gammas;
                           validate_spec(*spec);
                           // the table was searched on this system
                           PdeSystem sys = random_formal_system(n, 8, 11, spec->max_gamma() + spec->k() - 1);
                           if (det_at(*spec, fiber_jets(sys, spec->k() - 1)).is_zero()) {
                               return "entry " + tag + " gives a singular matrix on the reference system";
                           }
                       }
                       return "";
                   })});

    out.push_back({"bounds.values", []() -> std::string {
                       if (p_of(2, 1) != 3 || p_of(2, 2) != 5 || s_bound(2, 1) != 84 || nu_of(1, 2) != 87 ||
                           nu_of(1, 1) != 12 || sharp_order(1, 2) != 18) {
                           return "bound arithmetic disagrees with the reference values";
                       }
                       for (int N = 1; N <= 6; ++N) {
                           for (int n = 1; n <= N; ++n) {
                               if (mu_of(n, N) != nu_of(n, N)) {
                                   return "mu != nu at (" + std::to_string(n) + "," + std::to_string(N) + ")";
                               }
                           }
                       }
                       return "";
                   }});

    out.push_back({"corpus.certificates", [quick]() -> std::string {
                       for (const auto &e : corpus()) {
                           if (e.certificate && !verify_certificate(e.germ, *e.certificate, quick ? 6 : 10)) {
                               return e.name + ": certificate fails";
                           }
                       }
                       return "";
                   }});

    out.push_back({"corpus.certified_satisfied", with_table([seed, quick](const GammaTable &t) -> std::string {
                       const auto c = corpus();
                       std::vector<std::string> names{"sphere", "abs4"};
                       if (!quick) {
                           names.push_back("quadric_n1_l1");
                           names.push_back("abs6");
                       }
                       PipelineOptions opt;
                       opt.samples = quick ? 1 : 3;
                       opt.seed = seed;
                       opt.mode = EvalMode::point;
                       opt.table = t;
                       for (const auto &name : names) {
                           Verdict v = full_pipeline(corpus_entry(c, name).germ, 2, opt);
                           if (v.conclusion != Conclusion::satisfied) {
                               return name + " at N = 2: " + to_string(v.conclusion) + " (" + v.summary + ")";
                           }
                       }
                       return "";
                   })});

    out.push_back({"obstruction.witness", with_table([seed](const GammaTable &t) -> std::string {
                       PipelineOptions opt;
                       opt.samples = 1;
                       opt.seed = seed;
                       opt.mode = EvalMode::point;
                       opt.table = t;
                       Verdict v = full_pipeline(corpus_entry(corpus(), "abs4").germ, 1, opt);
                       return v.conclusion == Conclusion::obstructed ? "" : "abs4 at N = 1 is " + to_string(v.conclusion);
                   })});

    out.push_back({"obstruction.hand_equals_generic", [seed, quick]() -> std::string {
                       const ObstructionSpec spec = make_spec(1, 2, {{1}, {2}, {3}}, consecutive_gammas(15));
                       for (std::uint64_t k = 0; k < (quick ? 1u : 3u); ++k) {
                           PdeSystem sys = random_formal_system(1, 8, seed + k, 17);
                           const FiberJets fj = fiber_jets(sys, 1);
                           JetEvaluator ev(fj);
                           auto generic = build_row0(spec, ev);
                           auto hand = pq_row0(ev);
                           for (std::size_t t = 0; t < hand.size(); ++t) {
                               if (lower_to(generic[t], hand[t].cap()) != hand[t]) {
                                   return "column " + std::to_string(t) + " differs for system seed " +
                                          std::to_string(seed + k);
                               }
                           }
                       }
                       return "";
                   }});

    out.push_back({"obstruction.point_equals_series", [seed]() -> std::string {
                       const ObstructionSpec spec = make_spec(1, 1, {{1}, {2}}, consecutive_gammas(5));
                       PdeSystem sys = random_formal_system(1, 6, seed, spec.max_gamma());
                       const GaussianRational p = det_at(spec, fiber_jets(sys, 0));
                       const GaussianRational s = det_series_mode(spec, sys, 0).constant_term();
                       return p == s ? "" : "point " + p.to_string() + " vs series " + s.to_string();
                   }});

    out.push_back({"assoc_pde.cramer_and_segre", [seed]() -> std::string {
                       const auto c = corpus();
                       for (const char *name : {"abs4", "random_n1_d4"}) {
                           const ComplexDefining r = real_to_complex(corpus_entry(c, name).germ, 8);
                           const DerivedPde d = derive_pde(r);
                           std::string why;
                           if (!cramer_cross_check(r, d.system, 3, &why)) {
                               return std::string(name) + ": " + why;
                           }
                           ExactRng rng(seed);
                           if (!segre_solution_check(r, d.system, rng.point(1), rng.gaussian(), 4)) {
                               return std::string(name) + ": Segre graph does not solve the PDE";
                           }
                       }
                       return "";
                   }});

    out.push_back({"appendix2.bordered_lemma", [seed, quick]() -> std::string {
                       ExactRng rng(seed);
                       const int trials = quick ? 50 : 200;
                       for (int trial = 0; trial < trials; ++trial) {
                           const std::size_t s = std::size_t(rng.integer(1, 5));
                           ExactMatrix B;
                           do {
                               B.assign(s, {});
                               for (auto &row : B) {
                                   row = rng.point(s, 3, 2);
                               }
                           } while (det_exact(B).is_zero());
                           std::vector<GaussianRational> a(s);
                           if (rng.integer(0, 1) == 1) {
                               a[std::size_t(rng.integer(0, long(s) - 1))] = rng.gaussian(3, 2);
                           }
                           bool zero = true;
                           for (const auto &x : a) {
                               zero = zero && x.is_zero();
                           }
                           if (bordered_vanishing_implies_zero(B, a) != zero) {
                               return "trial " + std::to_string(trial);
                           }
                       }
                       return "";
                   }});

    out.push_back({"appendix2.planted_dependence", [seed]() -> std::string {
                       const VarList xy{"x", "y"};
                       ExactRng rng(seed);
                       for (int trial = 0; trial < 3; ++trial) {
                           std::vector<TruncatedSeries> hs;
                           for (int i = 0; i < 3; ++i) {
                               std::vector<std::pair<Multiindex, GaussianRational>> terms;
                               for (int a = 0; a <= 3; ++a) {
                                   for (int b = 0; a + b <= 3; ++b) {
                                       terms.push_back({{a, b}, rng.gaussian(9, 9)});
                                   }
                               }
                               hs.push_back(TruncatedSeries::from_terms(xy, 10, terms, true));
                           }
                           const auto lambda = rng.point(4, 9, 9);
                           TruncatedSeries acc(xy, 10);
                           for (int i = 0; i < 3; ++i) {
                               acc += lambda[std::size_t(i)] * hs[std::size_t(i)];
                           }
                           hs.push_back(-(lambda[3].inverse() * acc));
                           const VectorFamily fam = VectorFamily::coordinate(hs);
                           const Dependence d = extract_dependence(fam, {0, 0}, stabilisation_index(span_dims(fam, {0, 0}, 4)));
                           if (!d.found) {
                               return "trial " + std::to_string(trial) + ": " + d.reason;
                           }
                           for (std::size_t i = 0; i < 4; ++i) {
                               if (d.lambda[i] * lambda[0] != lambda[i]) {
                                   return "trial " + std::to_string(trial) + ": wrong annihilator";
                               }
                           }
                       }
                       return "";
                   }});

    out.push_back({"appendix2.segre_oracle", [seed, quick]() -> std::string {
                       const int L = 16;
                       ExactRng rng(seed);
                       std::vector<std::string> names{"abs4"};
                       if (!quick) {
                           names.push_back("abs6");
                       }
                       for (const auto &name : names) {
                           SamplePoint p = SamplePoint::draw(rng, 1);
                           const ComplexDefining r =
                               complexify(recentered_phi(corpus_entry(corpus(), name).germ.phi, p.z0, p.a0, p.u0), 1, L + 7);
                           const VectorFamily fam = segre_graph_family(r, L + 4);
                           const Dependence d =
                               extract_dependence(fam, {0}, stabilisation_index(span_dims(fam, {0}, L)));
                           if (!d.found) {
                               return name + ": " + d.reason;
                           }
                       }
                       return "";
                   }});
    return out;
}

inline Outcome cmd_selfcheck(const RunConfig &c)
{
    std::optional<GammaTable> table;
    std::string load_failure;
    try {
        table = load_table(c);
    } catch (const error &e) {
        load_failure = e.what();
    }
    json results = json::array();
    json timings;
    bool all = true;
    results.push_back({{"name", "gamma_table.loads"}, {"passed", load_failure.empty()}, {"detail", load_failure}});
    all = load_failure.empty();
    for (const auto &inv : invariants(table, c.seed, c.quick)) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string fail;
        try {
            fail = inv.run();
        } catch (const std::exception &e) {
            fail = std::string("threw: ") + e.what();
        }
        timings[inv.name] = seconds_since(t0);
        results.push_back({{"name", inv.name}, {"passed", fail.empty()}, {"detail", fail}});
        all = all && fail.empty();
    }
    Outcome out{all ? exit_code::ok : exit_code::check_failed, base_report(c, table ? table->version : 0)};
    out.report["selfcheck"] = {{"passed", all}, {"invariants", results}};
    if (c.timings) {
        out.report["timings"] = timings;
    }
    return out;
}

// ---------------------------------------------------------------- driver

inline Outcome dispatch(const RunConfig &c)
{
    if (c.command == "check") {
        return cmd_check(c);
    }
    if (c.command == "assoc-pde") {
        return cmd_assoc_pde(c);
    }
    if (c.command == "obstruction") {
        return cmd_obstruction(c);
    }
    if (c.command == "bounds") {
        return cmd_bounds(c);
    }
    if (c.command == "wronskian") {
        return cmd_wronskian(c);
    }
    if (c.command == "corpus") {
        return cmd_corpus(c);
    }
    if (c.command == "selfcheck") {
        return cmd_selfcheck(c);
    }
    throw usage_error("unknown command '" + c.command + "'");
}

// Runs one command and maps failures to exit codes; `out` receives the
// report unless --output names a file, `err` receives diagnostics.
inline int run_config(const RunConfig &c, std::ostream &out, std::ostream &err)
{
    Outcome o;
    try {
        o = dispatch(c);
    } catch (const usage_error &e) {
        err << "segre: usage error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const io_error &e) {
        err << "segre: " << e.what() << "\n";
        return exit_code::no_input;
    } catch (const annotated_parse_error &e) {
        err << "segre: parse error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const parse_error &e) {
        err << "segre: parse error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const nondegeneracy_error &e) {
        err << "segre: degenerate input: " << e.what() << "\n";
        return exit_code::data;
    } catch (const domain_error &e) {
        err << "segre: invalid input: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const internal_error &e) {
        err << "segre: internal error: " << e.what() << "\n";
        return exit_code::internal;
    } catch (const error &e) {
        err << "segre: input error: " << e.what() << "\n";
        return exit_code::data;
    }
    const std::string text = o.report.dump(2) + "\n";
    if (c.output.empty()) {
        out << text;
    } else {
        std::ofstream f(c.output, std::ios::binary);
        if (!f || !(f << text)) {
            err << "segre: cannot write '" << c.output << "'\n";
            return exit_code::cant_create;
        }
    }
    return o.code;
}

inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Exact obstructions to embedding real hypersurfaces into hyperquadrics", "segre"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);
    RunConfig c;

    auto germ_flags = [&](CLI::App *s) {
        s->add_option("--phi", c.phi, "defining function v = phi(z, c, u) in the DSL");
        s->add_option("--input", c.input, "file holding one defining function");
        s->add_option("--n", c.n, "CR dimension (default 1 or the file header)");
    };
    auto common = [&](CLI::App *s) {
        s->add_option("--seed", c.seed, "RNG seed (recorded in the report)");
        s->add_option("--output", c.output, "write the report here instead of stdout");
        s->add_flag("--timings", c.timings, "add wall-clock timings (reports are then no longer reproducible)");
    };
    const std::vector<std::string> modes{"auto", "point", "series", "both"};

    auto *check = app.add_subcommand("check", "run the full obstruction pipeline");
    germ_flags(check);
    check->add_option("--N", c.N, "target hyperquadric dimension")->required();
    check->add_option("--order", c.order, "series truncation order (default 4)");
    check->add_option("--samples", c.samples, "exact sample points (default 20)");
    check->add_option("--mode", c.mode, "evaluation mode")->check(CLI::IsMember(modes));
    check->add_option("--gamma-table", c.gamma_table, "gamma table JSON (default: built in)");
    common(check);

    auto *pde = app.add_subcommand("assoc-pde", "derive rho and the associated PDE Phi");
    germ_flags(pde);
    pde->add_option("--order", c.order, "truncation order of Phi (default 6)");
    common(pde);

    auto *obs = app.add_subcommand("obstruction", "raw point-mode matrices of every factor");
    germ_flags(obs);
    obs->add_option("--N", c.N, "target dimension (default n)");
    obs->add_option("--samples", c.samples, "sample points (default 1)");
    obs->add_option("--gamma-table", c.gamma_table, "gamma table JSON (default: built in)");
    common(obs);

    auto *bnd = app.add_subcommand("bounds", "order bounds p, s, nu, mu for n <= m <= N");
    bnd->add_option("--n", c.n)->required();
    bnd->add_option("--N", c.N)->required();
    common(bnd);

    auto *wr = app.add_subcommand("wronskian", "dependence of the Segre-graph family (n = 1)");
    germ_flags(wr);
    wr->add_option("--order", c.order, "highest derivative order L (default 16)");
    common(wr);

    auto *cor = app.add_subcommand("corpus", "list built-in germs and verify their certificates");
    cor->add_option("--order", c.order, "certificate verification order (default 10)");
    common(cor);

    auto *self = app.add_subcommand("selfcheck", "run the invariant suite");
    self->add_flag("--quick", c.quick, "reduced suite");
    self->add_option("--gamma-table", c.gamma_table, "gamma table JSON to check");
    common(self);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError &e) {
        // help and --version exit 0, everything else is a usage error
        return app.exit(e, out, err) == 0 ? exit_code::ok : exit_code::usage;
    }
    for (auto *s : app.get_subcommands()) {
        c.command = s->get_name();
    }
    return run_config(c, out, err);
}

} // namespace segre::cli
