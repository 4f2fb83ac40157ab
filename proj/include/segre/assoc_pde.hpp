#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <segre/errors.hpp>
#include <segre/hypersurface.hpp>
#include <segre/implicit.hpp>
#include <segre/linalg.hpp>
#include <segre/series.hpp>

namespace segre
{

// (z1..zn, w, xi1..xin). The xi variables are offsets from the central
// 1-jet xi0, so the expansion point is the origin of this space.
inline VarList jet_vars(int n)
{
    VarList v = zw_vars(n);
    for (auto &x : indexed("xi", n)) {
        v.push_back(x);
    }
    return v;
}

// w_{z_i z_j} = Phi_ij(z, w, w').
struct PdeSystem {
    int n = 1;
    std::vector<std::vector<TruncatedSeries>> phi; // symmetric n x n
    std::vector<GaussianRational> xi0;             // central Segre 1-jet

    int cap() const { return phi[0][0].cap(); }
    const VarList &vars() const { return phi[0][0].vars(); }
};

// a = A(z, w, xi), b = B(z, w, xi).
struct InverseMap {
    std::vector<TruncatedSeries> A;
    TruncatedSeries B;
};

struct DerivedPde {
    PdeSystem system;
    InverseMap inverse;
};

// Hand-built system from DSL entries over jet_vars(n); entries lists the
// upper triangle row by row (n(n+1)/2 strings).
inline PdeSystem make_system(int n, const std::vector<std::string> &entries, int cap,
                             std::vector<GaussianRational> xi0 = {})
{
    if (int(entries.size()) != n * (n + 1) / 2) {
        throw domain_error("make_system needs n(n+1)/2 entries");
    }
    PdeSystem s;
    s.n = n;
    s.xi0 = xi0.empty() ? std::vector<GaussianRational>(std::size_t(n)) : std::move(xi0);
    s.phi.assign(std::size_t(n), std::vector<TruncatedSeries>(std::size_t(n)));
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            s.phi[std::size_t(i)][std::size_t(j)] = parse_series(entries[k++], jet_vars(n), cap);
            s.phi[std::size_t(j)][std::size_t(i)] = s.phi[std::size_t(i)][std::size_t(j)];
        }
    }
    return s;
}

inline std::vector<GaussianRational> central_jet(const ComplexDefining &r)
{
    std::vector<GaussianRational> xi0;
    for (int j = 1; j <= r.n; ++j) {
        xi0.push_back(r.rho.derivative("z" + std::to_string(j)).constant_term());
    }
    return xi0;
}

// Solve w = rho(z, a, b), xi0 + xi = rho_z(z, a, b) for (a, b) and set
// Phi_ij = rho_{z_i z_j}(z, A, B). The result has cap rho.cap() - 2.
inline DerivedPde derive_pde(const ComplexDefining &r)
{
    const int n = r.n;
    const int rcap = r.rho.cap();
    if (rcap < 3) {
        throw cap_exhausted("derive_pde needs rho to cap >= 3");
    }
    GaussianRational levi = levi_determinant(r);
    if (levi.is_zero()) {
        throw nondegeneracy_error("Levi-degenerate base point (Levi determinant " + levi.to_string() + ")", levi.to_string());
    }
    const int cap = rcap - 1;
    VarList space = jet_vars(n);
    for (auto &a : indexed("a", n)) {
        space.push_back(a);
    }
    space.push_back("b");
    const std::vector<GaussianRational> xi0 = central_jet(r);

    TruncatedSeries rho = r.rho.with_cap(cap);
    std::vector<TruncatedSeries> eqs{rho.embed(space) - TruncatedSeries::variable(space, cap, "w")};
    for (int j = 1; j <= n; ++j) {
        TruncatedSeries rz = r.rho.derivative("z" + std::to_string(j)).embed(space);
        eqs.push_back(rz - TruncatedSeries::constant(space, cap, xi0[std::size_t(j - 1)]) -
                      TruncatedSeries::variable(space, cap, "xi" + std::to_string(j)));
    }
    VarList unknowns = indexed("a", n);
    unknowns.push_back("b");
    auto sol = solve_implicit(eqs, unknowns);

    DerivedPde out;
    for (int j = 1; j <= n; ++j) {
        out.inverse.A.push_back(sol.at("a" + std::to_string(j)));
    }
    out.inverse.B = sol.at("b");

    const VarList jv = jet_vars(n);
    std::vector<TruncatedSeries> img;
    for (int j = 1; j <= n; ++j) {
        img.push_back(TruncatedSeries::variable(jv, cap, "z" + std::to_string(j)));
    }
    for (const auto &a : out.inverse.A) {
        img.push_back(a);
    }
    img.push_back(out.inverse.B);

    out.system.n = n;
    out.system.xi0 = xi0;
    out.system.phi.assign(std::size_t(n), std::vector<TruncatedSeries>(std::size_t(n)));
    for (int i = 0; i < n; ++i) {
        TruncatedSeries rzi = r.rho.derivative(i);
        for (int j = i; j < n; ++j) {
            TruncatedSeries g = rzi.derivative(j).with_cap(rcap - 2);
            TruncatedSeries phi = lower_to(compose(g, img), rcap - 2);
            out.system.phi[std::size_t(i)][std::size_t(j)] = phi;
            out.system.phi[std::size_t(j)][std::size_t(i)] = phi;
        }
    }
    return out;
}

inline DerivedPde derive_pde(const RealDefining &h, int phi_cap)
{
    return derive_pde(real_to_complex(h, phi_cap + 2));
}

// d^beta Phi_ij over (z, w, xi).
inline TruncatedSeries phi_jet(const PdeSystem &sys, int i, int j, const Multiindex &beta)
{
    if (degree(beta) > sys.cap()) {
        throw cap_exhausted("jet order " + std::to_string(degree(beta)) + " exceeds cap " + std::to_string(sys.cap()));
    }
    return sys.phi[std::size_t(i)][std::size_t(j)].derivative(beta);
}

namespace detail
{

// sum_v c_v d/dv applied to f, over a common space.
inline TruncatedSeries apply_field(const std::vector<TruncatedSeries> &coeffs, const TruncatedSeries &f)
{
    TruncatedSeries acc(f.vars(), f.cap() - 1);
    for (int v = 0; v < f.nvars(); ++v) {
        const TruncatedSeries &c = coeffs[std::size_t(v)];
        if (c.is_zero()) {
            continue;
        }
        TruncatedSeries d = f.derivative(v);
        if (!d.is_zero()) {
            acc += lower_to(c, d.cap()) * d;
        }
    }
    return acc;
}


// Drop monomials of degree above d in the first n variables (the z's).
// Products and sums commute with this clipping modulo z^(d+1).
inline TruncatedSeries clip_z(const TruncatedSeries &s, int n, int d)
{
    if (d < 0) {
        return s;
    }
    std::vector<std::pair<Multiindex, GaussianRational>> kept;
    bool dropped = false;
    for (auto &[m, c] : s.terms()) {
        int e = 0;
        for (int v = 0; v < n; ++v) {
            e += m[std::size_t(v)];
        }
        if (e <= d) {
            kept.emplace_back(m, c);
        } else {
            dropped = true;
        }
    }
    return dropped ? TruncatedSeries::from_terms(s.vars(), s.cap(), kept, false) : s;
}

// Coordinate fields d/dz_k, d/dw, d/dxi_k of the jet space, pushed to
// (z, a, b) through (z, a, b) -> (z, rho, rho_z). Each field is returned as
// its coefficient list over complex_vars(n), at cap rho.cap() - 2. With
// zclip >= 0 all coefficients are only correct modulo z^(zclip+1).
inline std::vector<std::vector<TruncatedSeries>> jet_fields(const TruncatedSeries &rho, int n, int zclip = -1)
{
    const VarList &cv = rho.vars();
    const int jcap = rho.cap() - 2;
    const std::size_t m = std::size_t(n + 1);
    auto clip = [&](TruncatedSeries s) { return clip_z(s, n, zclip); };
    // J: rows (rho, rho_zi), columns (a_l, b); invert it once by
    // Gauss-Jordan with unit pivots (J(0) is the Levi matrix).
    std::vector<TruncatedSeries> rows{rho};
    for (int i = 0; i < n; ++i) {
        rows.push_back(rho.derivative(i));
    }
    SeriesMatrix J, inv(m, std::vector<TruncatedSeries>(m, TruncatedSeries(cv, jcap)));
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<TruncatedSeries> line;
        for (int l = 0; l <= n; ++l) {
            line.push_back(clip(lower_to(rows[i].derivative(n + l), jcap)));
        }
        J.push_back(std::move(line));
        inv[i][i] = TruncatedSeries::constant(cv, jcap, 1);
    }
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t p = k;
        while (p < m && J[p][k].constant_term().is_zero()) {
            ++p;
        }
        if (p == m) {
            GaussianRational d = det_exact(constant_terms(J));
            throw nondegeneracy_error("Levi matrix singular at the base point", d.to_string());
        }
        std::swap(J[p], J[k]);
        std::swap(inv[p], inv[k]);
        TruncatedSeries piv = clip(invert_unit(J[k][k]));
        for (std::size_t j = 0; j < m; ++j) {
            J[k][j] = clip(J[k][j] * piv);
            inv[k][j] = clip(inv[k][j] * piv);
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (i == k || J[i][k].is_zero()) {
                continue;
            }
            TruncatedSeries f = J[i][k];
            for (std::size_t j = 0; j < m; ++j) {
                if (!J[k][j].is_zero()) {
                    J[i][j] = clip(J[i][j] - f * J[k][j]);
                }
                if (!inv[k][j].is_zero()) {
                    inv[i][j] = clip(inv[i][j] - f * inv[k][j]);
                }
            }
        }
    }
    auto times_inv = [&](const std::vector<TruncatedSeries> &rhs) {
        std::vector<TruncatedSeries> x;
        for (std::size_t i = 0; i < m; ++i) {
            TruncatedSeries acc(cv, jcap);
            for (std::size_t j = 0; j < m; ++j) {
                if (!rhs[j].is_zero() && !inv[i][j].is_zero()) {
                    acc += inv[i][j] * rhs[j];
                }
            }
            x.push_back(clip(acc));
        }
        return x;
    };
    std::vector<std::vector<TruncatedSeries>> fields;
    auto field_from = [&](const std::vector<TruncatedSeries> &rhs, int zdir) {
        std::vector<TruncatedSeries> f;
        for (int k = 0; k < n; ++k) {
            f.push_back(k == zdir ? TruncatedSeries::constant(cv, jcap, 1) : TruncatedSeries(cv, jcap));
        }
        for (auto &x : times_inv(rhs)) {
            f.push_back(std::move(x));
        }
        return f;
    };
    const TruncatedSeries zero(cv, jcap);
    for (int k = 0; k < n; ++k) {
        std::vector<TruncatedSeries> rhs{-clip(lower_to(rho.derivative(k), jcap))};
        for (int i = 0; i < n; ++i) {
            rhs.push_back(-clip(lower_to(rho.derivative(i).derivative(k), jcap)));
        }
        fields.push_back(field_from(rhs, k));
    }
    for (int k = 0; k <= n; ++k) {
        std::vector<TruncatedSeries> rhs(m, zero);
        rhs[std::size_t(k)] = TruncatedSeries::constant(cv, jcap, 1);
        fields.push_back(field_from(rhs, -1));
    }
    return fields;
}

} // namespace detail

// Recompute all jets d^beta Phi_ij(0) with |beta| <= order through the
// linear systems for (A, B) derivatives (Cramer's rule on the Levi matrix),
// working purely on rho. Returns false on the first disagreement with the
// directly differentiated system; `mismatch` receives a description.
inline bool cramer_cross_check(const ComplexDefining &r, const PdeSystem &sys, int order, std::string *mismatch = nullptr)
{
    const int n = r.n;
    if (order + 2 > sys.cap()) {
        throw cap_exhausted("cross-check order exceeds the system cap");
    }
    const int cap = order + 3;
    const TruncatedSeries rho = lower_to(r.rho, cap);

    const auto fields = detail::jet_fields(rho, n);

    const int nj = 2 * n + 1;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            TruncatedSeries g = rho.derivative(i).derivative(j);
            // walk all beta with |beta| <= order, applying fields in
            // nondecreasing variable order (they commute)
            auto rec = [&](auto &self, const TruncatedSeries &f, Multiindex &beta, int from, int depth) -> bool {
                GaussianRational direct = phi_jet(sys, i, j, beta).constant_term();
                if (f.constant_term() != direct) {
                    if (mismatch) {
                        *mismatch = "Phi_" + std::to_string(i + 1) + std::to_string(j + 1) + " jet " +
                                    TruncatedSeries::monomial(sys.vars(), order, beta, 1).to_string() + ": direct " +
                                    direct.to_string() + " vs Cramer " + f.constant_term().to_string();
                    }
                    return false;
                }
                if (depth == order) {
                    return true;
                }
                for (int v = from; v < nj; ++v) {
                    ++beta[std::size_t(v)];
                    bool ok = self(self, detail::apply_field(fields[std::size_t(v)], f), beta, v, depth + 1);
                    --beta[std::size_t(v)];
                    if (!ok) {
                        return false;
                    }
                }
                return true;
            };
            Multiindex beta(std::size_t(nj), 0);
            if (!rec(rec, g, beta, 0, 0)) {
                return false;
            }
        }
    }
    return true;
}

// Total derivative D_k = d/dz_k + xi_k d/dw + sum_l Phi_lk d/dxi_l on
// series over jet_vars(n), with xi_k the full jet xi0_k + offset.
inline TruncatedSeries total_derivative(const PdeSystem &sys, int k, const TruncatedSeries &f)
{
    const int n = sys.n;
    const VarList &jv = f.vars();
    const int cap = f.cap() - 1;
    TruncatedSeries acc = f.derivative(k);
    TruncatedSeries xk = TruncatedSeries::variable(jv, cap, "xi" + std::to_string(k + 1)) +
                         TruncatedSeries::constant(jv, cap, sys.xi0[std::size_t(k)]);
    acc += xk * f.derivative(n);
    for (int l = 0; l < n; ++l) {
        TruncatedSeries d = f.derivative(n + 1 + l);
        if (!d.is_zero()) {
            acc += lower_to(sys.phi[std::size_t(l)][std::size_t(k)], cap) * d;
        }
    }
    return acc;
}

struct IntegrabilityReport {
    // D_k Phi_ij - D_j Phi_ik for i <= j < k
    std::vector<TruncatedSeries> residuals;
    // every residual vanishes below this total degree
    int vanishing_order = 0;
    bool vanishes() const
    {
        for (const auto &r : residuals) {
            if (!r.is_zero()) {
                return false;
            }
        }
        return true;
    }
};

inline IntegrabilityReport integrability_residual(const PdeSystem &sys, int order)
{
    IntegrabilityReport rep;
    const int n = sys.n;
    if (order + 1 > sys.cap()) {
        throw cap_exhausted("integrability order exceeds the system cap");
    }
    rep.vanishing_order = order + 1;
    if (n < 2) {
        return rep;
    }
    auto phi = [&](int i, int j) { return lower_to(sys.phi[std::size_t(i)][std::size_t(j)], order + 1); };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                TruncatedSeries r = total_derivative(sys, k, phi(i, j)) - total_derivative(sys, j, phi(i, k));
                rep.vanishing_order = std::min(rep.vanishing_order, r.valuation());
                rep.residuals.push_back(std::move(r));
            }
        }
    }
    return rep;
}

// Segre graphs along a ray: w(z, t) = rho(z, t a0, t b0). True when
// w_{z_i z_j} = Phi_ij(z, w, w') holds in (z, t) up to total degree `order`.
inline bool segre_solution_check(const ComplexDefining &r, const PdeSystem &sys, const std::vector<GaussianRational> &a0,
                                 const GaussianRational &b0, int order)
{
    const int n = r.n;
    if (order + 2 > r.rho.cap() || order > sys.cap()) {
        throw cap_exhausted("segre_solution_check order exceeds available caps");
    }
    VarList zt = indexed("z", n);
    zt.push_back("t");
    const int cap = order + 2;
    const TruncatedSeries t = TruncatedSeries::variable(zt, cap, "t");
    std::vector<TruncatedSeries> img;
    for (int j = 1; j <= n; ++j) {
        img.push_back(TruncatedSeries::variable(zt, cap, "z" + std::to_string(j)));
    }
    for (const auto &a : a0) {
        img.push_back(a * t);
    }
    img.push_back(b0 * t);
    TruncatedSeries w = compose(lower_to(r.rho, cap), img);
    std::vector<TruncatedSeries> jet_img;
    for (int j = 0; j < n; ++j) {
        jet_img.push_back(lower_to(img[std::size_t(j)], order));
    }
    jet_img.push_back(lower_to(w, order));
    for (int j = 0; j < n; ++j) {
        jet_img.push_back(lower_to(w.derivative(j), order) - TruncatedSeries::constant(zt, order, sys.xi0[std::size_t(j)]));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            TruncatedSeries lhs = w.derivative(i).derivative(j);
            TruncatedSeries rhs = compose(lower_to(sys.phi[std::size_t(i)][std::size_t(j)], order), jet_img);
            if (lower_to(lhs, order) != rhs) {
                return false;
            }
        }
    }
    return true;
}

// Jets d^beta Phi_ij (beta over jet_vars(n), |beta| <= order) restricted to
// the fiber z = w = 0. Each jet is a series in the xi offsets alone, stored
// over jet_vars(n). This is all that point evaluation needs, and it is far
// cheaper to obtain than the full system.
struct FiberJets {
    int n = 1;
    int order = 0;
    std::vector<GaussianRational> xi0;
    std::map<std::tuple<int, int, Multiindex>, TruncatedSeries> jets; // i <= j

    int cap() const { return jets.begin()->second.cap(); }

    const TruncatedSeries &at(int i, int j, const Multiindex &beta) const
    {
        auto it = jets.find({std::min(i, j), std::max(i, j), beta});
        if (it == jets.end()) {
            throw cap_exhausted("fiber jet of order " + std::to_string(degree(beta)) + " not computed (order " +
                                std::to_string(order) + ")");
        }
        return it->second;
    }
};

namespace detail
{

// All beta over nj variables with 1 <= |beta| <= order, each paired with the
// variable whose removal gives its parent (the last nonzero slot).
inline std::vector<std::pair<Multiindex, int>> jet_tree(int nj, int order)
{
    std::vector<std::pair<Multiindex, int>> out;
    std::vector<Multiindex> level{Multiindex(std::size_t(nj), 0)};
    for (int d = 1; d <= order; ++d) {
        std::vector<Multiindex> next;
        for (const auto &b : level) {
            int last = 0;
            for (int v = 0; v < nj; ++v) {
                if (b[std::size_t(v)] > 0) {
                    last = v;
                }
            }
            for (int v = last; v < nj; ++v) {
                Multiindex c = b;
                ++c[std::size_t(v)];
                out.emplace_back(c, v);
                next.push_back(std::move(c));
            }
        }
        level = std::move(next);
    }
    return out;
}

inline Multiindex unit_index_of(int len, int v)
{
    Multiindex e(std::size_t(len), 0);
    e[std::size_t(v)] = 1;
    return e;
}

inline TruncatedSeries fiber_part(const TruncatedSeries &s, int n)
{
    std::vector<std::pair<Multiindex, GaussianRational>> kept;
    for (auto &[m, c] : s.terms()) {
        bool ok = true;
        for (int v = 0; v <= n; ++v) {
            ok = ok && m[std::size_t(v)] == 0;
        }
        if (ok) {
            kept.emplace_back(m, c);
        }
    }
    return TruncatedSeries::from_terms(s.vars(), s.cap(), kept, false);
}

} // namespace detail

// Fiber jets of a stored system; the common cap is sys.cap() - order.
inline FiberJets fiber_jets(const PdeSystem &sys, int order)
{
    const int n = sys.n;
    const int cap = sys.cap() - order;
    if (cap < 0) {
        throw cap_exhausted("system cap too low for fiber jets of order " + std::to_string(order));
    }
    FiberJets fj{n, order, sys.xi0, {}};
    const Multiindex zero(std::size_t(2 * n + 1), 0);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            fj.jets[{i, j, zero}] = lower_to(detail::fiber_part(sys.phi[std::size_t(i)][std::size_t(j)], n), cap);
            for (const auto &[beta, v] : detail::jet_tree(2 * n + 1, order)) {
                fj.jets[{i, j, beta}] = lower_to(detail::fiber_part(phi_jet(sys, i, j, beta), n), cap);
            }
        }
    }
    return fj;
}

// Fiber jets straight from rho, to xi-degree xi_cap: solve
// rho(0, a, b) = 0, rho_z(0, a, b) = xi0 + xi for (A, B)(xi), obtain
// d^beta Phi_ij in (z, a, b) by applying the pushed-forward coordinate
// fields to rho_{z_i z_j}, and evaluate at (0, A, B). Needs rho to cap
// xi_cap + order + 2 (or a polynomial rho).
inline FiberJets fiber_jets(const ComplexDefining &r, int order, int xi_cap)
{
    const int n = r.n;
    const int rcap = xi_cap + order + 2;
    TruncatedSeries rho = lower_to(r.rho, rcap);
    if (rho.cap() < rcap) {
        if (!rho.is_polynomial()) {
            throw cap_exhausted("rho known to cap " + std::to_string(rho.cap()) + ", fiber jets need " + std::to_string(rcap));
        }
        rho = rho.with_cap(rcap);
    }
    GaussianRational levi = levi_determinant(r);
    if (levi.is_zero()) {
        throw nondegeneracy_error("Levi-degenerate base point (Levi determinant " + levi.to_string() + ")", levi.to_string());
    }

    VarList space = indexed("xi", n);
    VarList params = space;
    for (auto &a : indexed("a", n)) {
        space.push_back(a);
    }
    space.push_back("b");
    std::vector<TruncatedSeries> at_z0;
    for (int j = 0; j < n; ++j) {
        at_z0.emplace_back(space, xi_cap);
    }
    for (int l = n; l < 2 * n + 1; ++l) {
        at_z0.push_back(TruncatedSeries::variable(space, xi_cap, space[std::size_t(l)]));
    }
    auto on_space = [&](const TruncatedSeries &f) { return compose(lower_to(f, xi_cap), at_z0); };

    const std::vector<GaussianRational> xi0 = central_jet(r);
    std::vector<TruncatedSeries> eqs{on_space(rho)};
    for (int j = 0; j < n; ++j) {
        eqs.push_back(on_space(rho.derivative(j)) - TruncatedSeries::constant(space, xi_cap, xi0[std::size_t(j)]) -
                      TruncatedSeries::variable(space, xi_cap, params[std::size_t(j)]));
    }
    VarList unknowns = indexed("a", n);
    unknowns.push_back("b");
    auto sol = solve_implicit(eqs, unknowns);
    std::vector<TruncatedSeries> img;
    for (int j = 0; j < n; ++j) {
        img.emplace_back(params, xi_cap);
    }
    for (const auto &u : unknowns) {
        img.push_back(sol.at(u));
    }

    const VarList jv = jet_vars(n);
    auto to_fiber = [&](const TruncatedSeries &f) { return compose(lower_to(f, xi_cap), img); };
    FiberJets fj{n, order, xi0, {}};
    const Multiindex zero(std::size_t(2 * n + 1), 0);

    if (order <= 1) {
        // Only first jets: evaluate everything at (0, A, B) first and
        // solve the field equations in the xi-series ring.
        SeriesMatrix J;
        std::vector<TruncatedSeries> rows{rho};
        for (int i = 0; i < n; ++i) {
            rows.push_back(rho.derivative(i));
        }
        for (const auto &row : rows) {
            std::vector<TruncatedSeries> line;
            for (int l = 0; l <= n; ++l) {
                line.push_back(to_fiber(row.derivative(n + l)));
            }
            J.push_back(std::move(line));
        }
        // field coefficients over (z, a, b) for d/dz_k, d/dw, d/dxi_k
        std::vector<std::vector<TruncatedSeries>> fields;
        if (order == 1) {
            const TruncatedSeries zs(params, xi_cap);
            const TruncatedSeries one = TruncatedSeries::constant(params, xi_cap, 1);
            auto field_from = [&](const std::vector<TruncatedSeries> &rhs, int zdir) {
                std::vector<TruncatedSeries> f;
                for (int k = 0; k < n; ++k) {
                    f.push_back(k == zdir ? one : zs);
                }
                for (auto &x : solve_series(J, rhs)) {
                    f.push_back(std::move(x));
                }
                return f;
            };
            for (int k = 0; k < n; ++k) {
                std::vector<TruncatedSeries> rhs{-to_fiber(rho.derivative(k))};
                for (int i = 0; i < n; ++i) {
                    rhs.push_back(-to_fiber(rho.derivative(i).derivative(k)));
                }
                fields.push_back(field_from(rhs, k));
            }
            for (int k = 0; k <= n; ++k) {
                std::vector<TruncatedSeries> rhs(std::size_t(n + 1), zs);
                rhs[std::size_t(k)] = one;
                fields.push_back(field_from(rhs, -1));
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const TruncatedSeries g = rho.derivative(i).derivative(j);
                fj.jets[{i, j, zero}] = to_fiber(g).embed(jv);
                if (order == 0) {
                    continue;
                }
                std::vector<TruncatedSeries> dg;
                for (int u = 0; u < 2 * n + 1; ++u) {
                    dg.push_back(to_fiber(g.derivative(u)));
                }
                for (int v = 0; v < 2 * n + 1; ++v) {
                    TruncatedSeries acc(params, xi_cap);
                    for (int u = 0; u < 2 * n + 1; ++u) {
                        const TruncatedSeries &c = fields[std::size_t(v)][std::size_t(u)];
                        if (!c.is_zero() && !dg[std::size_t(u)].is_zero()) {
                            acc += c * dg[std::size_t(u)];
                        }
                    }
                    fj.jets[{i, j, detail::unit_index_of(2 * n + 1, v)}] = acc.embed(jv);
                }
            }
        }
        return fj;
    }

    rho = detail::clip_z(rho, n, order + 2);
    const auto fields = detail::jet_fields(rho, n, order);
    const auto tree = detail::jet_tree(2 * n + 1, order);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            std::map<Multiindex, TruncatedSeries> full;
            full[zero] = detail::clip_z(rho.derivative(i).derivative(j), n, order);
            for (const auto &[beta, v] : tree) {
                Multiindex parent = beta;
                --parent[std::size_t(v)];
                full[beta] = detail::clip_z(detail::apply_field(fields[std::size_t(v)], full.at(parent)), n, order);
            }
            for (const auto &[beta, f] : full) {
                fj.jets[{i, j, beta}] = to_fiber(f).embed(jv);
            }
        }
    }
    return fj;
}

} // namespace segre
