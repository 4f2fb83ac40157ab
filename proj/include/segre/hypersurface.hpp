#pragma once

#include <string>
#include <vector>

#include <segre/errors.hpp>
#include <segre/implicit.hpp>
#include <segre/linalg.hpp>
#include <segre/parser.hpp>
#include <segre/series.hpp>

namespace segre
{

inline VarList indexed(const std::string &stem, int n)
{
    VarList v;
    for (int k = 1; k <= n; ++k) {
        v.push_back(stem + std::to_string(k));
    }
    return v;
}

// (z1..zn, c1..cn, u): c_j stands for the conjugate of z_j.
inline VarList real_vars(int n)
{
    VarList v = indexed("z", n);
    for (auto &c : indexed("c", n)) {
        v.push_back(c);
    }
    v.push_back("u");
    return v;
}

// (z1..zn, a1..an, b)
inline VarList complex_vars(int n)
{
    VarList v = indexed("z", n);
    for (auto &a : indexed("a", n)) {
        v.push_back(a);
    }
    v.push_back("b");
    return v;
}

// (z1..zn, w)
inline VarList zw_vars(int n)
{
    VarList v = indexed("z", n);
    v.push_back("w");
    return v;
}

// v = phi(z, conj z, u)
struct RealDefining {
    int n = 1;
    TruncatedSeries phi;
};

// w = rho(z, conj z, conj w)
struct ComplexDefining {
    int n = 1;
    TruncatedSeries rho;
};

// F = (f_1..f_m, g) into Im W = -sum_{j<=l} |Z_j|^2 + sum_{j>l} |Z_j|^2.
struct EmbeddingCertificate {
    int m = 1;
    int signature_l = 0;
    std::vector<TruncatedSeries> components;
};

// coeff(alpha, beta, k) == conj(coeff(beta, alpha, k)) for all z/c exponents.
inline void check_reality(const RealDefining &h)
{
    const int n = h.n;
    for (const auto &[m, c] : h.phi.terms()) {
        Multiindex swapped = m;
        for (int j = 0; j < n; ++j) {
            std::swap(swapped[std::size_t(j)], swapped[std::size_t(n + j)]);
        }
        GaussianRational partner = h.phi.coeff(swapped);
        if (partner != c.conj()) {
            auto mono = [&](const Multiindex &e) {
                return TruncatedSeries::monomial(h.phi.vars(), h.phi.cap(), e, 1).to_string();
            };
            throw reality_error("reality violated: coefficient of " + mono(m) + " is " + c.to_string() + " but coefficient of " +
                                mono(swapped) + " is " + partner.to_string());
        }
    }
}

// Parse a real defining function v = phi(z, c, u). The germ must pass
// through the origin; first-order terms are allowed (they only move the
// central Segre 1-jet away from zero).
inline RealDefining parse_defining(const std::string &text, int n, int cap)
{
    if (n < 1 || n > 3) {
        throw domain_error("CR dimension n must be between 1 and 3");
    }
    RealDefining h{n, parse_series(text, real_vars(n), cap)};
    check_reality(h);
    if (!h.phi.constant_term().is_zero()) {
        throw domain_error("phi(0) must vanish: translate the germ so the base point is the origin");
    }
    return h;
}

// Eliminate u from b = u - i phi(z, a, u): rho = b + 2i phi(z, a, U).
inline ComplexDefining complexify(const TruncatedSeries &phi, int n, int cap)
{
    const VarList cv = complex_vars(n);
    TruncatedSeries p = lower_to(phi, cap);
    if (p.cap() < cap) {
        p = p.with_cap(cap);
    }
    const GaussianRational two_i(0, 2);
    if (p.is_zero() || p.derivative("u").is_zero()) {
        // u-independent: U = b + i phi exactly.
        VarList no_u = cv;
        TruncatedSeries q = p.renamed(cv);
        std::vector<TruncatedSeries> img;
        for (const auto &v : cv) {
            img.push_back(TruncatedSeries::variable(no_u, cap, v));
        }
        img.back() = TruncatedSeries(no_u, cap);
        return {n, TruncatedSeries::variable(cv, cap, "b") + two_i * compose(q, img)};
    }
    VarList solve_space = cv;
    solve_space.push_back("u");
    VarList as_a = real_vars(n);
    for (int j = 0; j < n; ++j) {
        as_a[std::size_t(n + j)] = "a" + std::to_string(j + 1);
    }
    TruncatedSeries pa = p.renamed(as_a).embed(solve_space);
    TruncatedSeries g = TruncatedSeries::variable(solve_space, cap, "u") - GaussianRational::i() * pa -
                        TruncatedSeries::variable(solve_space, cap, "b");
    TruncatedSeries u = solve_implicit({g}, {"u"}).at("u");
    std::vector<TruncatedSeries> img;
    for (int k = 0; k < 2 * n; ++k) {
        img.push_back(TruncatedSeries::variable(cv, cap, cv[std::size_t(k)]));
    }
    img.push_back(u);
    TruncatedSeries rho = TruncatedSeries::variable(cv, cap, "b") + two_i * compose(p.renamed(as_a), img);
    return {n, rho};
}

inline ComplexDefining real_to_complex(const RealDefining &h, int cap)
{
    check_reality(h);
    return complexify(h.phi, h.n, cap);
}

// Inverse direction: solve u + iv = rho(z, c, u - iv) for v(z, c, u).
inline RealDefining complex_to_real(const ComplexDefining &r)
{
    const int n = r.n;
    const int cap = r.rho.cap();
    VarList space = real_vars(n);
    space.push_back("v");
    std::vector<TruncatedSeries> img;
    for (int j = 0; j < n; ++j) {
        img.push_back(TruncatedSeries::variable(space, cap, "z" + std::to_string(j + 1)));
    }
    for (int j = 0; j < n; ++j) {
        img.push_back(TruncatedSeries::variable(space, cap, "c" + std::to_string(j + 1)));
    }
    TruncatedSeries u = TruncatedSeries::variable(space, cap, "u");
    TruncatedSeries v = TruncatedSeries::variable(space, cap, "v");
    img.push_back(u - GaussianRational::i() * v);
    TruncatedSeries f = u + GaussianRational::i() * v - compose(r.rho, img);
    return {n, solve_implicit({f}, {"v"}).at("v")};
}

// Rows (rho, rho_z1..rho_zn), columns (d/db, d/da1..d/dan).
inline SeriesMatrix levi_matrix(const ComplexDefining &r)
{
    const int n = r.n;
    std::vector<TruncatedSeries> rows{r.rho};
    for (int j = 1; j <= n; ++j) {
        rows.push_back(r.rho.derivative("z" + std::to_string(j)));
    }
    SeriesMatrix m;
    for (const auto &row : rows) {
        std::vector<TruncatedSeries> line{row.derivative("b")};
        for (int j = 1; j <= n; ++j) {
            line.push_back(row.derivative("a" + std::to_string(j)));
        }
        m.push_back(std::move(line));
    }
    return m;
}

inline GaussianRational levi_determinant(const ComplexDefining &r, const std::vector<GaussianRational> &at)
{
    SeriesMatrix m = levi_matrix(r);
    ExactMatrix e(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (const auto &s : m[i]) {
            e[i].push_back(s.evaluate(at));
        }
    }
    return det_exact(e);
}

inline GaussianRational levi_determinant(const ComplexDefining &r)
{
    return levi_determinant(r, std::vector<GaussianRational>(std::size_t(2 * r.n + 1)));
}

// Check Im g = -sum_{j<=l}|f_j|^2 + sum_{j>l}|f_j|^2 on M up to total order
// `order`, after substituting w = u + i phi, conj w = u - i phi.
inline bool verify_certificate(const RealDefining &h, const EmbeddingCertificate &cert, int order)
{
    const int n = h.n;
    if (int(cert.components.size()) != cert.m + 1 || cert.signature_l < 0 || cert.signature_l > cert.m) {
        throw domain_error("certificate needs m+1 components and 0 <= l <= m");
    }
    const VarList rv = real_vars(n);
    TruncatedSeries phi = lower_to(h.phi, order);
    if (phi.cap() < order) {
        phi = phi.with_cap(order);
    }
    const TruncatedSeries u = TruncatedSeries::variable(rv, order, "u");
    const GaussianRational i = GaussianRational::i();
    std::vector<TruncatedSeries> hol, anti;
    for (int j = 1; j <= n; ++j) {
        hol.push_back(TruncatedSeries::variable(rv, order, "z" + std::to_string(j)));
        anti.push_back(TruncatedSeries::variable(rv, order, "c" + std::to_string(j)));
    }
    hol.push_back(u + i * phi);
    anti.push_back(u - i * phi);
    auto pull = [&](const TruncatedSeries &f, bool conjugate) {
        if (f.vars() != zw_vars(n)) {
            throw domain_error("certificate components must be series in (z, w)");
        }
        if (!f.constant_term().is_zero()) {
            throw domain_error("certificate components must vanish at the base point");
        }
        TruncatedSeries g = lower_to(f, order);
        if (g.cap() < order) {
            g = g.with_cap(order);
        }
        return conjugate ? compose(g.conj_coeffs(), anti) : compose(g, hol);
    };
    const TruncatedSeries &g = cert.components.back();
    TruncatedSeries residual = (pull(g, false) - pull(g, true)) * TruncatedSeries::constant(rv, order, GaussianRational(0, mpq_class(-1, 2)));
    for (int j = 0; j < cert.m; ++j) {
        TruncatedSeries sq = pull(cert.components[std::size_t(j)], false) * pull(cert.components[std::size_t(j)], true);
        if (j < cert.signature_l) {
            residual += sq;
        } else {
            residual -= sq;
        }
    }
    return residual.is_zero();
}

// phi(z + z0, c + a0, u + u0) - phi(z0, a0, u0): the germ seen from a
// point of the complexification. phi must be polynomial.
inline TruncatedSeries recentered_phi(const TruncatedSeries &phi, const std::vector<GaussianRational> &z0,
                                      const std::vector<GaussianRational> &a0, const GaussianRational &u0)
{
    std::vector<GaussianRational> pt = z0;
    pt.insert(pt.end(), a0.begin(), a0.end());
    pt.push_back(u0);
    TruncatedSeries s = taylor_shift(phi, pt);
    return s - TruncatedSeries::constant(s.vars(), s.cap(), s.constant_term());
}

} // namespace segre
