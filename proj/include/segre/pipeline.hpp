#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <segre/assoc_pde.hpp>
#include <segre/gamma_table.hpp>
#include <segre/hypersurface.hpp>
#include <segre/obstruction.hpp>
#include <segre/rng.hpp>

namespace segre
{

enum class EvalMode { automatic, point, series, both };
enum class Conclusion { satisfied, obstructed, inconclusive };

inline std::string to_string(Conclusion c)
{
    switch (c) {
    case Conclusion::satisfied:
        return "OBSTRUCTION_SATISFIED";
    case Conclusion::obstructed:
        return "OBSTRUCTED";
    default:
        return "INCONCLUSIVE";
    }
}

inline std::string to_string(EvalMode m)
{
    switch (m) {
    case EvalMode::point:
        return "point";
    case EvalMode::series:
        return "series";
    case EvalMode::both:
        return "both";
    default:
        return "auto";
    }
}

// A point (z0, a0, u0) of the complexified hypersurface. The jet point it
// stands for is (z0, w0, xi0) with w0 = u0 + i phi(z0, a0, u0) and xi0 the
// central 1-jet of the recentred germ; both are filled in on evaluation.
struct SamplePoint {
    std::vector<GaussianRational> z0, a0;
    GaussianRational u0;
    GaussianRational w0;
    std::vector<GaussianRational> xi0;

    static SamplePoint origin(int n)
    {
        return {std::vector<GaussianRational>(std::size_t(n)), std::vector<GaussianRational>(std::size_t(n)), {}, {}, {}};
    }
    static SamplePoint draw(ExactRng &rng, int n)
    {
        SamplePoint p;
        p.z0 = rng.point(std::size_t(n));
        p.a0 = rng.point(std::size_t(n));
        p.u0 = rng.gaussian();
        return p;
    }
};

// Fiber jets of the germ seen from a sample point. Throws
// nondegeneracy_error when the recentred germ is Levi-degenerate there.
inline FiberJets sample_fiber(const RealDefining &h, SamplePoint &p, int order, int xi_cap)
{
    const int n = h.n;
    TruncatedSeries phi = recentered_phi(h.phi, p.z0, p.a0, p.u0);
    std::vector<GaussianRational> at = p.z0;
    at.insert(at.end(), p.a0.begin(), p.a0.end());
    at.push_back(p.u0);
    p.w0 = p.u0 + GaussianRational::i() * h.phi.evaluate(at);
    FiberJets fj = fiber_jets(complexify(phi, n, xi_cap + order + 2), order, xi_cap);
    p.xi0 = fj.xi0;
    return fj;
}

struct PipelineOptions {
    int order = 4;   // series truncation order
    int samples = 20;
    std::uint64_t seed = 1;
    EvalMode mode = EvalMode::automatic;
    GammaTable table = default_gamma_table();
    int series_max_s = 15; // automatic mode runs series only up to this s
};

// One factor D(alpha) of the layer m.
struct FactorReport {
    int m = 0;
    std::vector<Multiindex> alphas;
    int d = 0;
    int s = -1; // -1 when the basis was not built
    std::vector<Multiindex> gammas;
    bool available = false;
    std::string note;
    std::vector<GaussianRational> values; // one per sample, in point mode
    bool series_run = false;
    int series_valuation = 0; // order + 1 when the series vanishes to `order`
};

struct Verdict {
    int n = 1;
    int N = 1;
    PipelineOptions options;
    std::vector<SamplePoint> samples;
    int resampled = 0;
    std::vector<FactorReport> factors;
    std::vector<std::string> sample_status; // "zero", "nonzero", "unknown"
    std::optional<int> product_series_valuation;
    Conclusion conclusion = Conclusion::inconclusive;
    std::string summary;
    bool transversality_automatic = false;
    std::map<std::string, double> timings;
};

namespace detail
{

class StageTimer
{
public:
    explicit StageTimer(std::map<std::string, double> &sink) : sink_(sink) {}
    void operator()(const std::string &stage)
    {
        auto now = std::chrono::steady_clock::now();
        sink_[stage] += std::chrono::duration<double>(now - last_).count();
        last_ = now;
    }

private:
    std::map<std::string, double> &sink_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

} // namespace detail

// phi -> rho -> Phi, then every factor D(n, m; alpha) for n <= m <= N,
// evaluated at exact random samples (and as series when selected). The
// product is never expanded: it vanishes at a sample iff some factor does.
inline Verdict full_pipeline(const RealDefining &h, int N, const PipelineOptions &opt = {})
{
    const int n = h.n;
    if (N < n) {
        throw domain_error("target dimension N must satisfy N >= n");
    }
    if (opt.order < 0 || opt.samples < 0) {
        throw domain_error("order and samples must be non-negative");
    }
    Verdict v;
    v.n = n;
    v.N = N;
    v.options = opt;
    v.transversality_automatic = N < 2 * n;
    detail::StageTimer tick(v.timings);

    {
        ComplexDefining r0 = real_to_complex(h, 3);
        GaussianRational levi = levi_determinant(r0);
        if (levi.is_zero()) {
            throw nondegeneracy_error("Levi-degenerate base point (Levi determinant " + levi.to_string() + ")",
                                      levi.to_string());
        }
    }

    // Factors, with one spec per distinct (m, d): the basis and gammas only
    // depend on those, so factors sharing them have equal determinants.
    std::map<std::pair<int, int>, ObstructionSpec> specs;
    for (int m = n; m <= N; ++m) {
        for (auto &alphas : enumerate_alpha_choices(n, m)) {
            FactorReport f;
            f.m = m;
            f.alphas = alphas;
            for (const auto &a : alphas) {
                f.d += degree(a);
            }
            const auto *g = opt.table.find(n, m, f.d);
            if (!g) {
                f.note = "no gamma sequence for (n, m, d) = (" + std::to_string(n) + ", " + std::to_string(m) + ", " +
                         std::to_string(f.d) + ")";
            } else {
                auto it = specs.find({m, f.d});
                if (it == specs.end()) {
                    ObstructionSpec spec = make_spec(n, m, alphas);
                    lookup_gammas(opt.table, spec);
                    spec.gammas = *g;
                    validate_spec(spec);
                    it = specs.emplace(std::make_pair(m, f.d), std::move(spec)).first;
                }
                f.available = true;
                f.s = it->second.s();
                f.gammas = *g;
            }
            v.factors.push_back(std::move(f));
        }
    }
    tick("setup");

    const bool want_points = opt.mode != EvalMode::series;
    auto wants_series = [&](const ObstructionSpec &s) {
        return opt.mode == EvalMode::series || opt.mode == EvalMode::both ||
               (opt.mode == EvalMode::automatic && s.s() <= opt.series_max_s);
    };

    // point mode
    if (want_points && !specs.empty()) {
        int order = 0, xi_cap = 0;
        for (const auto &[key, s] : specs) {
            order = std::max(order, s.k() - 1);
            xi_cap = std::max(xi_cap, s.max_gamma());
        }
        ExactRng rng(opt.seed);
        std::map<std::pair<int, int>, std::vector<GaussianRational>> values;
        const int max_attempts = 10 * opt.samples + 10;
        int attempts = 0;
        while (int(v.samples.size()) < opt.samples) {
            if (++attempts > max_attempts) {
                throw nondegeneracy_error("no Levi-nondegenerate sample point found in " + std::to_string(max_attempts) +
                                              " attempts",
                                          "0");
            }
            SamplePoint p = SamplePoint::draw(rng, n);
            FiberJets fj;
            try {
                fj = sample_fiber(h, p, order, xi_cap);
            } catch (const nondegeneracy_error &) {
                ++v.resampled;
                continue;
            }
            for (const auto &[key, s] : specs) {
                values[key].push_back(det_at(s, fj));
            }
            v.samples.push_back(std::move(p));
        }
        for (auto &f : v.factors) {
            if (f.available) {
                f.values = values.at({f.m, f.d});
            }
        }
        tick("point");
    }

    // series mode
    {
        int need = -1;
        for (const auto &[key, s] : specs) {
            if (wants_series(s)) {
                need = std::max(need, s.max_gamma() + s.k() - 1 + opt.order);
            }
        }
        if (need >= 0) {
            const PdeSystem sys = derive_pde(real_to_complex(h, std::max(need, 1) + 2)).system;
            std::map<std::pair<int, int>, int> val;
            for (const auto &[key, s] : specs) {
                if (wants_series(s)) {
                    TruncatedSeries det = det_series_mode(s, sys, opt.order);
                    val[key] = det.is_zero() ? opt.order + 1 : det.valuation();
                }
            }
            for (auto &f : v.factors) {
                auto it = val.find({f.m, f.d});
                if (f.available && it != val.end()) {
                    f.series_run = true;
                    f.series_valuation = it->second;
                }
            }
            tick("series");
        }
    }

    // aggregation
    bool any_nonzero = false, any_unknown = false;
    for (std::size_t i = 0; i < v.samples.size(); ++i) {
        bool zero = false, unknown = false;
        for (const auto &f : v.factors) {
            if (!f.available) {
                unknown = true;
            } else if (f.values[i].is_zero()) {
                zero = true;
            }
        }
        const char *st = zero ? "zero" : unknown ? "unknown" : "nonzero";
        v.sample_status.push_back(st);
        any_nonzero = any_nonzero || (!zero && !unknown);
        any_unknown = any_unknown || (!zero && unknown);
    }
    // The series ring is a domain below the cap: valuations add.
    bool all_series = !v.factors.empty();
    int total = 0;
    bool some_zero_series = false;
    for (const auto &f : v.factors) {
        if (f.series_run) {
            total += f.series_valuation;
            some_zero_series = some_zero_series || f.series_valuation > opt.order;
        } else {
            all_series = false;
        }
    }
    if (some_zero_series || all_series) {
        v.product_series_valuation = std::min(total, opt.order + 1);
    }
    const bool series_nonzero = all_series && total <= opt.order;
    const bool series_zero = v.product_series_valuation && *v.product_series_valuation > opt.order;

    const std::string where = std::to_string(v.samples.size()) + " exact sample" + (v.samples.size() == 1 ? "" : "s");
    if (any_nonzero || series_nonzero) {
        v.conclusion = Conclusion::obstructed;
        if (any_nonzero) {
            std::size_t i = 0;
            while (v.sample_status[i] != "nonzero") {
                ++i;
            }
            v.summary = "every factor is exactly nonzero at sample " + std::to_string(i);
        } else {
            v.summary = "the product series has a nonzero term of degree " + std::to_string(total);
        }
    } else if (any_unknown || (v.samples.empty() && !series_zero)) {
        v.conclusion = Conclusion::inconclusive;
        std::string why;
        for (const auto &f : v.factors) {
            if (!f.available) {
                why = f.note;
                break;
            }
        }
        v.summary = why.empty() ? "no evaluation could decide the product" : "product undecided: " + why;
    } else {
        v.conclusion = Conclusion::satisfied;
        v.summary = "product vanishes at " + where;
        if (series_zero) {
            v.summary += " and as a series to order " + std::to_string(opt.order);
        }
    }
    return v;
}

} // namespace segre
