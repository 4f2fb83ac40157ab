#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include <gmpxx.h>

#include <segre/errors.hpp>

namespace segre
{

// Order bounds for the obstruction operator, all in exact integers.

inline mpz_class binomial(long top, long bottom)
{
    if (top < 0 || bottom < 0 || bottom > top) {
        return 0;
    }
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(top), static_cast<unsigned long>(bottom));
    return r;
}

namespace detail
{

inline void require_mn(int m, int n)
{
    if (n < 1 || m < n) {
        throw domain_error("bounds need m >= n >= 1 (got m = " + std::to_string(m) + ", n = " + std::to_string(n) + ")");
    }
}

} // namespace detail

// Number of multiindices of length n and degree l.
inline mpz_class count_multiindices(int l, int n)
{
    if (l < 0 || n < 1) {
        throw domain_error("count_multiindices needs l >= 0 and n >= 1");
    }
    return binomial(l + n - 1, n - 1);
}

// Weighted-degree cap (m+1)(m+2)/2 of the basis monomials.
inline long weighted_cap(int m) { return long(m + 1) * long(m + 2) / 2; }

// p(m, n) = n + n(n+1)/2 * C(m, n).
inline mpz_class p_of(int m, int n)
{
    detail::require_mn(m, n);
    return mpz_class(n) + mpz_class(long(n) * (n + 1) / 2) * binomial(m, n);
}

// s <= C(weighted_cap + p, p).
inline mpz_class s_bound(int m, int n)
{
    detail::require_mn(m, n);
    const mpz_class p = p_of(m, n);
    if (!p.fits_slong_p()) {
        throw domain_error("p(m, n) too large for a binomial");
    }
    return binomial(weighted_cap(m) + p.get_si(), p.get_si());
}

inline mpz_class nu_of(int n, int m)
{
    detail::require_mn(m, n);
    return mpz_class(2 + m - n) + s_bound(m, n);
}

// mu(n, N) = nu(n, N); cross-checked against the maximum of nu(n, m) over
// n <= m <= N, which it must equal since nu is monotone in m.
inline mpz_class mu_of(int n, int N)
{
    detail::require_mn(N, n);
    mpz_class best = 0;
    for (int m = n; m <= N; ++m) {
        best = std::max(best, nu_of(n, m));
    }
    const mpz_class mu = nu_of(n, N);
    if (mu != best) {
        throw internal_error("nu(n, m) is not monotone in m below N = " + std::to_string(N));
    }
    return mu;
}

// The refined third-order operator for (n, N) = (1, 2) has order 18.
inline std::optional<int> sharp_order(int n, int N)
{
    if (n == 1 && N == 2) {
        return 18;
    }
    return std::nullopt;
}

struct BoundReport {
    int n = 1;
    int m = 1;
    mpz_class p, s_bound, nu, mu;
    long weighted_cap = 0;
    std::optional<int> sharp;
};

inline BoundReport bound_report(int n, int m)
{
    BoundReport r;
    r.n = n;
    r.m = m;
    r.p = p_of(m, n);
    r.weighted_cap = weighted_cap(m);
    r.s_bound = s_bound(m, n);
    r.nu = nu_of(n, m);
    r.mu = mu_of(n, m);
    r.sharp = sharp_order(n, m);
    return r;
}

} // namespace segre
