#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <segre/errors.hpp>
#include <segre/hypersurface.hpp>
#include <segre/linalg.hpp>
#include <segre/prolong.hpp>
#include <segre/rng.hpp>
#include <segre/series.hpp>

namespace segre
{

// A map H = (h_1..h_N) together with n derivations
// Lambda_j = sum_v fields[j][v] d/dx_v, all over one variable list.
struct VectorFamily {
    std::vector<TruncatedSeries> components;
    std::vector<std::vector<TruncatedSeries>> fields;

    int n() const { return int(fields.size()); }
    int N() const { return int(components.size()); }
    const VarList &vars() const { return components.at(0).vars(); }

    // Lambda = d/dx_v for each variable, in order.
    static VectorFamily coordinate(std::vector<TruncatedSeries> comps)
    {
        VectorFamily f{std::move(comps), {}};
        const auto &ref = f.components.at(0);
        for (int v = 0; v < ref.nvars(); ++v) {
            std::vector<TruncatedSeries> row;
            for (int u = 0; u < ref.nvars(); ++u) {
                row.push_back(TruncatedSeries::constant(ref.vars(), ref.cap(), u == v ? 1 : 0));
            }
            f.fields.push_back(std::move(row));
        }
        return f;
    }
};

// dim E_l(q) for l = 1..L.
struct SpanProfile {
    std::vector<int> dims;
    bool stable = true; // false when sampled points disagreed
};

struct Dependence {
    bool found = false;
    std::vector<GaussianRational> lambda; // first nonzero entry is 1
    std::vector<Multiindex> alphas;       // rows spanning E_l
    std::vector<int> columns;             // j_1..j_m with nonzero minor
    int extra = -1;                       // the column playing h_{m+1}
    SpanProfile profile;
    std::string reason;
};

namespace detail
{

inline void check_family(const VectorFamily &fam)
{
    if (fam.components.empty() || fam.fields.empty()) {
        throw domain_error("vector family needs components and fields");
    }
    const auto &ref = fam.components[0];
    for (const auto &c : fam.components) {
        if (c.vars() != ref.vars()) {
            throw alignment_error("family components over different variables");
        }
    }
    for (const auto &f : fam.fields) {
        if (int(f.size()) != ref.nvars()) {
            throw domain_error("field needs one coefficient per variable");
        }
    }
}

inline TruncatedSeries apply_derivation(const std::vector<TruncatedSeries> &coeffs, const TruncatedSeries &f)
{
    TruncatedSeries acc;
    bool first = true;
    for (int v = 0; v < f.nvars(); ++v) {
        const TruncatedSeries &c = coeffs[std::size_t(v)];
        if (c.is_zero()) {
            continue;
        }
        auto [cc, df] = align(c, f.derivative(v));
        TruncatedSeries term = cc * df;
        if (first) {
            acc = term;
            first = false;
        } else {
            auto [x, y] = align(acc, term);
            acc = x + y;
        }
    }
    if (first) {
        return TruncatedSeries(f.vars(), f.is_polynomial() ? f.cap() : std::max(f.cap() - 1, 0));
    }
    return acc;
}

// Every Lambda^alpha H for 1 <= |alpha| <= L, with
// Lambda^alpha = Lambda_1^{alpha_1} ... Lambda_n^{alpha_n}.
class LambdaTower
{
public:
    LambdaTower(const VectorFamily &fam) : fam_(fam) {}

    const std::vector<TruncatedSeries> &at(const Multiindex &alpha)
    {
        auto it = cache_.find(alpha);
        if (it != cache_.end()) {
            return it->second;
        }
        if (degree(alpha) == 0) {
            return cache_.emplace(alpha, fam_.components).first->second;
        }
        // the outermost operator is Lambda_i for the first nonzero alpha_i
        std::size_t i = 0;
        while (alpha[i] == 0) {
            ++i;
        }
        Multiindex inner = alpha;
        --inner[i];
        std::vector<TruncatedSeries> out;
        for (const auto &h : at(inner)) {
            out.push_back(apply_derivation(fam_.fields[i], h));
        }
        return cache_.emplace(alpha, std::move(out)).first->second;
    }

private:
    const VectorFamily &fam_;
    std::map<Multiindex, std::vector<TruncatedSeries>> cache_;
};

inline std::vector<GaussianRational> values_at_origin(const std::vector<TruncatedSeries> &row)
{
    std::vector<GaussianRational> v;
    for (const auto &s : row) {
        if (s.cap() < 0) {
            throw cap_exhausted("derivative tower ran past the cap");
        }
        v.push_back(s.constant_term());
    }
    return v;
}

// Multiindices with 1 <= |alpha| <= L, unit indices first, then graded.
inline std::vector<Multiindex> tower_indices(int n, int L)
{
    std::vector<Multiindex> out;
    for (int l = 1; l <= L; ++l) {
        for (auto &a : multiindices_of_degree(n, l)) {
            out.push_back(a);
        }
    }
    return out;
}

// The family recentred at q (data must be polynomial unless q = 0).
inline VectorFamily recentre(const VectorFamily &fam, const std::vector<GaussianRational> &q)
{
    if (std::all_of(q.begin(), q.end(), [](const GaussianRational &x) { return x.is_zero(); })) {
        return fam;
    }
    VectorFamily out;
    for (const auto &c : fam.components) {
        out.components.push_back(taylor_shift(c, q));
    }
    for (const auto &f : fam.fields) {
        std::vector<TruncatedSeries> row;
        for (const auto &c : f) {
            row.push_back(taylor_shift(c, q));
        }
        out.fields.push_back(std::move(row));
    }
    return out;
}

} // namespace detail

// Exact dims of E_1(q) .. E_L(q).
inline SpanProfile span_dims(const VectorFamily &fam, const std::vector<GaussianRational> &q, int L)
{
    detail::check_family(fam);
    if (int(q.size()) != fam.components[0].nvars()) {
        throw domain_error("point dimension does not match the family");
    }
    if (L < 1) {
        throw domain_error("span_dims needs L >= 1");
    }
    const VectorFamily local = detail::recentre(fam, q);
    detail::LambdaTower tower(local);
    SpanProfile p;
    ExactMatrix rows;
    for (int l = 1; l <= L; ++l) {
        for (const auto &a : multiindices_of_degree(fam.n(), l)) {
            rows.push_back(detail::values_at_origin(tower.at(a)));
        }
        p.dims.push_back(int(rank_exact(rows)));
    }
    return p;
}

// Generic ranks: the maximum over `points` seeded random points, with one
// escalation round of as many fresh points when they disagree.
inline SpanProfile span_dims_generic(const VectorFamily &fam, int L, std::uint64_t seed, int points = 3)
{
    ExactRng rng(seed);
    const std::size_t dim = std::size_t(fam.components.at(0).nvars());
    SpanProfile best;
    bool disagree = false;
    for (int round = 0; round < 2; ++round) {
        for (int k = 0; k < points; ++k) {
            SpanProfile p = span_dims(fam, rng.point(dim, 9, 9), L);
            if (best.dims.empty()) {
                best = p;
                continue;
            }
            disagree = disagree || p.dims != best.dims;
            for (std::size_t l = 0; l < p.dims.size(); ++l) {
                best.dims[l] = std::max(best.dims[l], p.dims[l]);
            }
        }
        if (!disagree) {
            break;
        }
        if (round == 0) {
            disagree = false; // judge the escalation round on its own
        }
    }
    best.stable = !disagree;
    return best;
}

// Constants lambda, not all zero, with sum_i lambda_i Lambda_j h_i = 0 for
// every j, built from ratios of m x m minors at q as in the stabilisation
// argument: c_{i0} = det(.., h_extra) / det(.., h_{i0}) over the rows
// alpha^1..alpha^m spanning E_l(q). The identity is verified on the series
// before returning.
inline Dependence extract_dependence(const VectorFamily &fam, const std::vector<GaussianRational> &q, int l)
{
    if (l < 1) {
        throw domain_error("extract_dependence needs l >= 1");
    }
    Dependence out;
    out.profile = span_dims(fam, q, l + 1);
    const int n = fam.n(), N = fam.N();
    const auto &dims = out.profile.dims;
    const int m = dims[std::size_t(l - 1)];
    if (dims[std::size_t(l)] != m) {
        out.reason = "E_" + std::to_string(l) + " has not stabilised (" + std::to_string(m) + " < " +
                     std::to_string(dims[std::size_t(l)]) + ")";
        return out;
    }
    if (m >= N) {
        out.reason = "E_" + std::to_string(l) + " is everything (dimension " + std::to_string(m) + ")";
        return out;
    }

    const VectorFamily local = detail::recentre(fam, q);
    detail::LambdaTower tower(local);
    std::vector<GaussianRational> lambda(static_cast<std::size_t>(N));
    if (dims[0] != n) {
        // Outside the theorem (H is not an immersion at q): any kernel
        // vector of the stacked rows will do, subject to the same check.
        ExactMatrix all;
        for (const auto &a : detail::tower_indices(n, l)) {
            all.push_back(detail::values_at_origin(tower.at(a)));
        }
        lambda = kernel_exact(all, std::size_t(N)).at(0);
        out.reason = "dim E_1 = " + std::to_string(dims[0]) + " < " + std::to_string(n) + ", plain kernel vector";
    } else {
        // rows alpha^1..alpha^m, greedily, unit indices first
        ExactMatrix rows;
        for (const auto &a : detail::tower_indices(n, l)) {
            ExactMatrix trial = rows;
            trial.push_back(detail::values_at_origin(tower.at(a)));
            if (rank_exact(trial) > rows.size()) {
                rows = std::move(trial);
                out.alphas.push_back(a);
            }
        }
        ExactMatrix red = rows;
        for (auto c : row_reduce(red)) {
            out.columns.push_back(int(c));
        }
        for (int c = 0; c < N && out.extra < 0; ++c) {
            if (std::find(out.columns.begin(), out.columns.end(), c) == out.columns.end()) {
                out.extra = c;
            }
        }
        auto minor = [&](const std::vector<int> &cols) {
            ExactMatrix mm(static_cast<std::size_t>(m));
            for (int r = 0; r < m; ++r) {
                for (int c : cols) {
                    mm[std::size_t(r)].push_back(rows[std::size_t(r)][std::size_t(c)]);
                }
            }
            return det_exact(mm);
        };
        lambda[std::size_t(out.extra)] = 1;
        for (int i0 : out.columns) {
            std::vector<int> rest;
            for (int c : out.columns) {
                if (c != i0) {
                    rest.push_back(c);
                }
            }
            std::vector<int> num = rest, den = rest;
            num.push_back(out.extra);
            den.push_back(i0);
            lambda[std::size_t(i0)] = -(minor(num) / minor(den));
        }
    }

    // verification: sum lambda_i Lambda_j h_i must vanish as a series
    for (int j = 0; j < n; ++j) {
        Multiindex e(std::size_t(n), 0);
        e[std::size_t(j)] = 1;
        const auto &row = tower.at(e);
        TruncatedSeries acc(row[0].vars(), row[0].cap());
        for (int i = 0; i < N; ++i) {
            if (!lambda[std::size_t(i)].is_zero()) {
                auto [x, y] = align(acc, lambda[std::size_t(i)] * row[std::size_t(i)]);
                acc = x + y;
            }
        }
        if (!acc.is_zero()) {
            throw internal_error("extracted constants fail to annihilate Lambda_" + std::to_string(j + 1) +
                                 " H; the point is not generic");
        }
    }
    std::size_t lead = 0;
    while (lambda[lead].is_zero()) {
        ++lead;
    }
    const GaussianRational inv = lambda[lead].inverse();
    for (auto &x : lambda) {
        x *= inv;
    }
    out.lambda = std::move(lambda);
    out.found = true;
    return out;
}

// Bordered determinants det(b_{i_1}, .., b_{i_{s-1}}, a) over all (s-1)-subsets
// of the columns of a nonsingular B. Returns whether they all vanish, after
// checking that this agrees with a = 0.
inline bool bordered_vanishing_implies_zero(const ExactMatrix &B, const std::vector<GaussianRational> &a)
{
    const std::size_t s = detail::require_square(B);
    if (a.size() != s || s == 0) {
        throw domain_error("bordered determinants need an s-vector and a nonempty s x s matrix");
    }
    if (det_exact(B).is_zero()) {
        throw nondegeneracy_error("bordered determinants need a nonsingular matrix", "0");
    }
    bool all_zero = true;
    for (std::size_t skip = 0; skip < s && all_zero; ++skip) {
        ExactMatrix m(s);
        for (std::size_t r = 0; r < s; ++r) {
            for (std::size_t c = 0; c < s; ++c) {
                if (c != skip) {
                    m[r].push_back(B[r][c]);
                }
            }
            m[r].push_back(a[r]);
        }
        all_zero = det_exact(m).is_zero();
    }
    const bool a_zero = std::all_of(a.begin(), a.end(), [](const GaussianRational &x) { return x.is_zero(); });
    if (all_zero != a_zero) {
        throw internal_error("bordered determinant test disagrees with the zero test");
    }
    return all_zero;
}

// The 16 third-order functions along the Segre graph w(z) = rho(z, 0, 0)
// of an n = 1 germ: with xi = w', Phi = w'' and Phi_z + xi Phi_w + Phi_xi Phi
// = w''' along solutions, they are (w''' w'^j)_{j<3}, (w'^j)_{j<7},
// (w'' w'^j)_{j<4}, (w''^2 w'^j)_{j<2}. The constant w'^0 = 1 is dropped,
// so a dependence of Lambda H under Lambda = d/dz is a dependence of all 16.
inline VectorFamily segre_graph_family(const ComplexDefining &r, int cap)
{
    if (r.n != 1) {
        throw domain_error("the third-order family needs n = 1");
    }
    const VarList zv{"z1"};
    TruncatedSeries rho = lower_to(r.rho, cap + 3);
    if (rho.cap() < cap + 3 && rho.is_polynomial()) {
        rho = rho.with_cap(cap + 3);
    }
    std::vector<TruncatedSeries> graph{TruncatedSeries::variable(zv, rho.cap(), "z1"), TruncatedSeries(zv, rho.cap()),
                                       TruncatedSeries(zv, rho.cap())};
    const TruncatedSeries w = compose(rho, graph);
    const TruncatedSeries d3 = w.derivative(0).derivative(0).derivative(0);
    const int top = std::min(cap, d3.cap());
    const TruncatedSeries w1 = lower_to(w.derivative(0), top);
    const TruncatedSeries w2 = lower_to(w.derivative(0).derivative(0), top);
    const TruncatedSeries w3 = lower_to(d3, top);
    std::vector<TruncatedSeries> pw{TruncatedSeries::constant(zv, w1.cap(), 1)};
    for (int j = 1; j <= 6; ++j) {
        pw.push_back(pw.back() * w1);
    }
    VectorFamily fam;
    for (int j = 0; j <= 2; ++j) {
        fam.components.push_back(w3 * pw[std::size_t(j)]);
    }
    for (int j = 1; j <= 6; ++j) {
        fam.components.push_back(pw[std::size_t(j)]);
    }
    for (int j = 0; j <= 3; ++j) {
        fam.components.push_back(w2 * pw[std::size_t(j)]);
    }
    for (int j = 0; j <= 1; ++j) {
        fam.components.push_back(w2 * w2 * pw[std::size_t(j)]);
    }
    int low = cap;
    for (const auto &c : fam.components) {
        low = std::min(low, c.cap());
    }
    for (auto &c : fam.components) {
        c = lower_to(c, low);
    }
    fam.fields = {{TruncatedSeries::constant(zv, low, 1)}};
    return fam;
}

} // namespace segre
