#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <segre/assoc_pde.hpp>
#include <segre/errors.hpp>
#include <segre/linalg.hpp>
#include <segre/prolong.hpp>
#include <segre/rng.hpp>
#include <segre/series.hpp>

namespace segre
{

// One factor D(alpha | gamma) of the obstruction operator for target
// dimension m: the basis h_0..h_s of jet monomials and the xi-derivative
// multiindices gamma^1..gamma^s generating rows 1..s.
struct ObstructionSpec {
    int n = 1;
    int m = 1;
    std::vector<Multiindex> alphas; // m+1 jet multiindices of length n
    std::vector<Multiindex> gammas; // s multiindices of length n (empty until known)
    std::vector<JetMonomial> basis;

    int k() const { return m - n + 1; }
    int s() const { return int(basis.size()) - 1; }
    int d() const
    {
        int t = 0;
        for (const auto &a : alphas) {
            t += degree(a);
        }
        return t;
    }
    int max_gamma() const
    {
        int t = 0;
        for (const auto &g : gammas) {
            t = std::max(t, degree(g));
        }
        return t;
    }
};

namespace detail
{

inline Multiindex unit_index(int n, int i)
{
    Multiindex e(std::size_t(n), 0);
    e[std::size_t(i)] = 1;
    return e;
}

inline std::string index_text(const Multiindex &a)
{
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (i ? "," : "") + std::to_string(a[i]);
    }
    return s + ")";
}

} // namespace detail

// Admissible alpha-tuples: alpha^i = e_i for i <= n and, for n < i <= m+1,
// distinct multiindices with 1 <= |alpha^i| <= i - n + 1. Tuples that are
// permutations of each other give the same operator, so each set is listed
// once, in jet order.
inline std::vector<std::vector<Multiindex>> enumerate_alpha_choices(int n, int m)
{
    if (n < 1 || m < n) {
        throw domain_error("alpha choices need m >= n >= 1");
    }
    std::vector<Multiindex> head;
    for (int i = 0; i < n; ++i) {
        head.push_back(detail::unit_index(n, i));
    }
    std::vector<Multiindex> pool;
    for (int l = 1; l <= m - n + 2; ++l) {
        for (auto &a : multiindices_of_degree(n, l)) {
            if (l > 1) {
                pool.push_back(a);
            }
        }
    }
    std::sort(pool.begin(), pool.end(), jet_less);
    std::vector<std::vector<Multiindex>> out;
    std::vector<Multiindex> cur = head;
    auto rec = [&](auto &self, std::size_t from) -> void {
        const int i = int(cur.size()) + 1; // 1-based slot being filled
        if (i > m + 1) {
            out.push_back(cur);
            return;
        }
        for (std::size_t p = from; p < pool.size(); ++p) {
            if (degree(pool[p]) > i - n + 1) {
                continue;
            }
            cur.push_back(pool[p]);
            self(self, p + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

// Basis h_0..h_s for a factor: the 16 monomials of the third-order relation
// when (n, m) = (1, 2); otherwise every monomial in the jets of order
// <= k+1 with weighted and plain degree at most d = sum |alpha^i|.
inline std::vector<JetMonomial> obstruction_basis(int n, int m, const std::vector<Multiindex> &alphas)
{
    if (n == 1 && m == 2) {
        return pq_basis();
    }
    int d = 0;
    for (const auto &a : alphas) {
        d += degree(a);
    }
    return enumerate_monomials(n, m - n + 1, d, d);
}

inline void validate_spec(const ObstructionSpec &spec)
{
    const int n = spec.n;
    if (n < 1 || spec.m < n) {
        throw domain_error("obstruction spec needs m >= n >= 1");
    }
    if (int(spec.alphas.size()) != spec.m + 1) {
        throw domain_error("obstruction spec needs m+1 alphas");
    }
    for (int i = 0; i < spec.m + 1; ++i) {
        const Multiindex &a = spec.alphas[std::size_t(i)];
        if (int(a.size()) != n) {
            throw domain_error("alpha " + detail::index_text(a) + " has the wrong length");
        }
        if (i < n && a != detail::unit_index(n, i)) {
            throw domain_error("alpha^" + std::to_string(i + 1) + " must be the unit index");
        }
        if (i >= n && (degree(a) < 1 || degree(a) > i + 1 - n + 1)) {
            throw domain_error("alpha^" + std::to_string(i + 1) + " violates 1 <= |alpha| <= " + std::to_string(i + 2 - n));
        }
        for (int j = 0; j < i; ++j) {
            if (spec.alphas[std::size_t(j)] == a) {
                throw domain_error("alphas must be distinct");
            }
        }
    }
    if (spec.basis.empty()) {
        throw domain_error("obstruction spec has an empty basis");
    }
    if (!spec.gammas.empty()) {
        if (spec.gammas.size() != std::size_t(spec.s())) {
            throw domain_error("obstruction spec needs s = " + std::to_string(spec.s()) + " gammas, got " +
                               std::to_string(spec.gammas.size()));
        }
        for (std::size_t j = 0; j < spec.gammas.size(); ++j) {
            const Multiindex &g = spec.gammas[j];
            if (int(g.size()) != n || degree(g) < 1 || degree(g) > int(j) + 1) {
                throw domain_error("gamma^" + std::to_string(j + 1) + " = " + detail::index_text(g) +
                                   " violates 1 <= |gamma^j| <= j");
            }
            for (std::size_t i = 0; i < j; ++i) {
                if (spec.gammas[i] == g) {
                    throw domain_error("gammas must be distinct");
                }
            }
        }
    }
}

inline ObstructionSpec make_spec(int n, int m, std::vector<Multiindex> alphas, std::vector<Multiindex> gammas = {})
{
    ObstructionSpec spec{n, m, std::move(alphas), std::move(gammas), {}};
    if (int(spec.alphas.size()) == m + 1) {
        spec.basis = obstruction_basis(n, m, spec.alphas);
    }
    validate_spec(spec);
    return spec;
}

// gamma^j = (j) for j = 1..s
inline std::vector<Multiindex> consecutive_gammas(int s)
{
    std::vector<Multiindex> g;
    for (int j = 1; j <= s; ++j) {
        g.push_back(Multiindex{j});
    }
    return g;
}

// Row 0: the substituted monomials h~_t.
inline std::vector<TruncatedSeries> build_row0(const ObstructionSpec &spec, JetEvaluator &ev)
{
    if (ev.n() != spec.n) {
        throw domain_error("system dimension does not match the obstruction spec");
    }
    const ProlongationTable table = build_prolongation(spec.n, spec.k());
    std::vector<TruncatedSeries> row;
    for (const auto &h : spec.basis) {
        row.push_back(substitute_prolongation(h, table, ev));
    }
    return row;
}

inline std::vector<TruncatedSeries> build_row0(const ObstructionSpec &spec, const PdeSystem &sys)
{
    JetEvaluator ev(sys, false);
    return build_row0(spec, ev);
}

// The hand-written n = 1, m = 2 row: with Q = Phi_z + xi Phi_w + Phi_xi Phi,
// (Q xi^j)_{j<3}, (xi^j)_{j<7}, (Phi xi^j)_{j<4}, (Phi^2 xi^j)_{j<2}.
inline std::vector<TruncatedSeries> pq_row0(JetEvaluator &ev)
{
    if (ev.n() != 1) {
        throw domain_error("the third-order row needs n = 1");
    }
    const TruncatedSeries &xi = ev.value(xi_symbol(0));
    const TruncatedSeries &phi = ev.value(phi_symbol(1, 0, 0));
    const TruncatedSeries &phi_z = ev.value(phi_symbol(1, 0, 0, {1, 0, 0}));
    const TruncatedSeries &phi_w = ev.value(phi_symbol(1, 0, 0, {0, 1, 0}));
    const TruncatedSeries &phi_x = ev.value(phi_symbol(1, 0, 0, {0, 0, 1}));
    const int cap = std::min({xi.cap(), phi.cap(), phi_z.cap(), phi_w.cap(), phi_x.cap()});
    auto L = [&](const TruncatedSeries &s) { return lower_to(s, cap); };
    const TruncatedSeries q = L(phi_z) + L(xi) * L(phi_w) + L(phi_x) * L(phi);
    const TruncatedSeries one = TruncatedSeries::constant(ev.vars(), cap, 1);
    std::vector<TruncatedSeries> pw{one};
    for (int j = 1; j <= 6; ++j) {
        pw.push_back(pw.back() * L(xi));
    }
    std::vector<TruncatedSeries> row;
    for (int j = 0; j <= 2; ++j) {
        row.push_back(q * pw[std::size_t(j)]);
    }
    for (int j = 0; j <= 6; ++j) {
        row.push_back(pw[std::size_t(j)]);
    }
    for (int j = 0; j <= 3; ++j) {
        row.push_back(L(phi) * pw[std::size_t(j)]);
    }
    const TruncatedSeries phi2 = L(phi) * L(phi);
    for (int j = 0; j <= 1; ++j) {
        row.push_back(phi2 * pw[std::size_t(j)]);
    }
    return row;
}

// (s+1) x (s+1) matrix of series: row j = d^{gamma^j}/dxi^{gamma^j} of row 0.
struct ObstructionMatrix {
    SeriesMatrix rows;
    int cap() const { return rows.empty() ? 0 : rows[0][0].cap(); }
};

namespace detail
{

inline Multiindex xi_index(int n, const Multiindex &gamma)
{
    Multiindex full(std::size_t(2 * n + 1), 0);
    for (int l = 0; l < n; ++l) {
        full[std::size_t(n + 1 + l)] = gamma[std::size_t(l)];
    }
    return full;
}

inline mpz_class factorial_of(const Multiindex &g)
{
    mpz_class f = 1;
    for (int e : g) {
        for (int t = 2; t <= e; ++t) {
            f *= t;
        }
    }
    return f;
}

} // namespace detail

// Series mode. Every row is lowered to the cap of the lowest row, so the
// matrix (and its determinant) is exact below that common cap.
inline ObstructionMatrix build_matrix(const ObstructionSpec &spec, const std::vector<TruncatedSeries> &row0)
{
    validate_spec(spec);
    if (spec.gammas.size() != std::size_t(spec.s())) {
        throw domain_error("build_matrix needs the gamma sequence");
    }
    if (row0.size() != spec.basis.size()) {
        throw domain_error("row 0 length does not match the basis");
    }
    int cap = row0[0].cap();
    for (const auto &e : row0) {
        cap = std::min(cap, e.cap());
    }
    cap -= spec.max_gamma();
    if (cap < 0) {
        throw cap_exhausted("row 0 known to cap " + std::to_string(cap + spec.max_gamma()) + ", gammas need " +
                            std::to_string(spec.max_gamma()));
    }
    ObstructionMatrix mat;
    std::vector<TruncatedSeries> first;
    for (const auto &e : row0) {
        first.push_back(lower_to(e, cap));
    }
    mat.rows.push_back(std::move(first));
    for (const auto &g : spec.gammas) {
        std::vector<TruncatedSeries> line;
        for (const auto &e : row0) {
            line.push_back(lower_to(e.derivative(detail::xi_index(spec.n, g)), cap));
        }
        mat.rows.push_back(std::move(line));
    }
    return mat;
}

// Point mode: the matrix at z = w = 0, xi = xi0, i.e. entry (j, t) is
// gamma^j! times the xi^{gamma^j} coefficient of h~_t (which may carry
// z and w terms; only the pure-xi coefficient is read).
inline ExactMatrix point_matrix(const ObstructionSpec &spec, const std::vector<TruncatedSeries> &row0)
{
    if (row0.size() != spec.basis.size()) {
        throw domain_error("row 0 length does not match the basis");
    }
    for (const auto &e : row0) {
        if (e.cap() < spec.max_gamma()) {
            throw cap_exhausted("row 0 entry known to xi-degree " + std::to_string(e.cap()) + ", gammas need " +
                                std::to_string(spec.max_gamma()));
        }
    }
    ExactMatrix mat;
    std::vector<GaussianRational> first;
    for (const auto &e : row0) {
        first.push_back(e.constant_term());
    }
    mat.push_back(std::move(first));
    for (const auto &g : spec.gammas) {
        const Multiindex idx = detail::xi_index(spec.n, g);
        const GaussianRational f(mpq_class(detail::factorial_of(g)));
        std::vector<GaussianRational> line;
        for (const auto &e : row0) {
            line.push_back(e.coeff(idx) * f);
        }
        mat.push_back(std::move(line));
    }
    return mat;
}

// Determinant of one factor at the centre of the given fiber.
inline GaussianRational det_at(const ObstructionSpec &spec, const FiberJets &fj)
{
    JetEvaluator ev(fj);
    return det_exact(point_matrix(spec, build_row0(spec, ev)));
}

// Series-mode determinant to total order `order` over (z, w, xi). The
// system cap must be at least max|gamma| + (k - 1) + order.
inline TruncatedSeries det_series_mode(const ObstructionSpec &spec, const PdeSystem &sys, int order)
{
    const int need = spec.max_gamma() + spec.k() - 1 + order;
    if (sys.cap() < need) {
        throw cap_exhausted("series mode to order " + std::to_string(order) + " needs a system cap of " +
                            std::to_string(need) + ", have " + std::to_string(sys.cap()));
    }
    ObstructionMatrix mat = build_matrix(spec, build_row0(spec, sys));
    SeriesMatrix low;
    for (const auto &row : mat.rows) {
        std::vector<TruncatedSeries> line;
        for (const auto &e : row) {
            line.push_back(lower_to(e, order));
        }
        low.push_back(std::move(line));
    }
    return det_series(low);
}

// Phi(z + z0, w + w0, xi + p) for a polynomial system: the same system seen
// from the jet point (z0, w0, xi0 + p).
inline PdeSystem shifted_system(const PdeSystem &sys, const std::vector<GaussianRational> &point)
{
    const int n = sys.n;
    if (int(point.size()) != 2 * n + 1) {
        throw domain_error("shift point needs 2n+1 coordinates");
    }
    PdeSystem out = sys;
    for (int l = 0; l < n; ++l) {
        out.xi0[std::size_t(l)] += point[std::size_t(n + 1 + l)];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out.phi[std::size_t(i)][std::size_t(j)] = taylor_shift(sys.phi[std::size_t(i)][std::size_t(j)], point);
        }
    }
    return out;
}

// Seeded formal system with Phi_ij(xi) random polynomials of the given
// xi-degree (independent of z and w), centred at a random xi0.
inline PdeSystem random_formal_system(int n, int degree_, std::uint64_t seed, int cap)
{
    ExactRng rng(seed);
    const VarList jv = jet_vars(n);
    PdeSystem sys;
    sys.n = n;
    sys.xi0 = rng.point(std::size_t(n));
    sys.phi.assign(std::size_t(n), std::vector<TruncatedSeries>(std::size_t(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            std::vector<std::pair<Multiindex, GaussianRational>> terms;
            for (int l = 0; l <= degree_; ++l) {
                for (const auto &g : multiindices_of_degree(n, l)) {
                    terms.emplace_back(detail::xi_index(n, g), rng.gaussian());
                }
            }
            TruncatedSeries p = TruncatedSeries::from_terms(jv, std::max(cap, degree_), terms, true);
            p = lower_to(p, cap);
            sys.phi[std::size_t(i)][std::size_t(j)] = p;
            sys.phi[std::size_t(j)][std::size_t(i)] = p;
        }
    }
    return sys;
}

struct GammaSearchResult {
    bool found = false;
    std::vector<Multiindex> gammas;
    int trials = 0;
    std::string diagnostics;
};

// Greedy generalized-Wronskian search: for j = 1..s take the first
// multiindex (graded-lex, 1 <= |gamma| <= j, unused) whose row raises the
// rank of the rows chosen so far. Each rank test counts against `budget`.
// A full-rank result means the determinant is exactly nonzero at the centre
// of the trial fiber.
inline GammaSearchResult search_gammas(const ObstructionSpec &spec, const FiberJets &trial, int budget)
{
    if (budget < 1) {
        throw domain_error("search budget must be positive");
    }
    const int n = spec.n;
    const int s = spec.s();
    JetEvaluator ev(trial);
    const std::vector<TruncatedSeries> row0 = build_row0(spec, ev);
    int cap = trial.cap();
    for (const auto &e : row0) {
        cap = std::min(cap, e.cap());
    }

    // incremental echelon form over the chosen rows
    std::vector<std::vector<GaussianRational>> echelon;
    std::vector<std::size_t> pivots;
    auto reduce = [&](std::vector<GaussianRational> v) {
        for (std::size_t r = 0; r < echelon.size(); ++r) {
            const GaussianRational c = v[pivots[r]];
            if (c.is_zero()) {
                continue;
            }
            for (std::size_t t = 0; t < v.size(); ++t) {
                if (!echelon[r][t].is_zero()) {
                    v[t] -= c * echelon[r][t];
                }
            }
        }
        return v;
    };
    auto insert = [&](std::vector<GaussianRational> v) {
        std::size_t p = 0;
        while (p < v.size() && v[p].is_zero()) {
            ++p;
        }
        if (p == v.size()) {
            return false;
        }
        const GaussianRational inv = GaussianRational(1) / v[p];
        for (auto &x : v) {
            x *= inv;
        }
        for (std::size_t r = 0; r < echelon.size(); ++r) {
            const GaussianRational c = echelon[r][p];
            if (!c.is_zero()) {
                for (std::size_t t = 0; t < v.size(); ++t) {
                    echelon[r][t] -= c * v[t];
                }
            }
        }
        echelon.push_back(std::move(v));
        pivots.push_back(p);
        return true;
    };
    auto row_for = [&](const Multiindex &g) {
        const Multiindex idx = detail::xi_index(n, g);
        const GaussianRational f(mpq_class(detail::factorial_of(g)));
        std::vector<GaussianRational> line;
        for (const auto &e : row0) {
            line.push_back(e.coeff(idx) * f);
        }
        return line;
    };

    GammaSearchResult res;
    std::vector<GaussianRational> first;
    for (const auto &e : row0) {
        first.push_back(e.constant_term());
    }
    if (!insert(reduce(first))) {
        res.diagnostics = "row 0 vanishes at the trial point";
        return res;
    }
    std::vector<Multiindex> used;
    for (int j = 1; j <= s; ++j) {
        bool placed = false;
        for (int l = 1; l <= std::min(j, cap) && !placed; ++l) {
            for (const auto &g : multiindices_of_degree(n, l)) {
                if (std::find(used.begin(), used.end(), g) != used.end()) {
                    continue;
                }
                if (res.trials == budget) {
                    res.diagnostics = "budget of " + std::to_string(budget) + " rank tests exhausted at step " +
                                      std::to_string(j) + " of " + std::to_string(s) + " (rank " +
                                      std::to_string(echelon.size()) + ")";
                    return res;
                }
                ++res.trials;
                if (insert(reduce(row_for(g)))) {
                    used.push_back(g);
                    placed = true;
                    break;
                }
            }
        }
        if (!placed) {
            res.diagnostics = "no admissible gamma raises the rank at step " + std::to_string(j) + " of " +
                              std::to_string(s) + " (rank " + std::to_string(echelon.size()) + ", xi-degree cap " +
                              std::to_string(cap) + ")";
            return res;
        }
    }
    res.found = true;
    res.gammas = std::move(used);
    return res;
}

} // namespace segre
