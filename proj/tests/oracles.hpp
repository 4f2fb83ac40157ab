#pragma once

// Independent reference computations shared by the unit and acceptance
// suites. Nothing here goes through the prolongation tables or the
// fiber-jet machinery.

#include <cstdint>
#include <string>
#include <vector>

#include <segre/assoc_pde.hpp>
#include <segre/rng.hpp>
#include <segre/series.hpp>

namespace oracle
{

using namespace segre;

// Phi = sum_{k<=3} c_k(z, w) xi^k with random c_k of (z, w)-degree <= 2.
inline PdeSystem random_cubic_system(std::uint64_t seed, int cap)
{
    ExactRng rng(seed);
    const VarList jv = jet_vars(1);
    std::vector<std::pair<Multiindex, GaussianRational>> terms;
    for (int k = 0; k <= 3; ++k) {
        for (int a = 0; a <= 2; ++a) {
            for (int b = 0; a + b <= 2; ++b) {
                terms.push_back({{a, b, k}, rng.gaussian(9, 9)});
            }
        }
    }
    PdeSystem sys;
    sys.n = 1;
    sys.xi0 = {rng.gaussian(9, 9)};
    sys.phi = {{TruncatedSeries::from_terms(jv, cap, terms, true)}};
    return sys;
}

// k-th xi-derivative at the centre of a system whose Phi depends on xi only.
inline GaussianRational xi_derivative(const PdeSystem &sys, int k)
{
    mpq_class f = 1;
    for (int j = 2; j <= k; ++j) {
        f *= j;
    }
    return sys.phi[0][0].coeff({0, 0, k}) * GaussianRational(f);
}

// For Phi = f(xi), the (1,1) factor is the Wronskian of
// (1, xi, xi^2, xi^3, f, xi f). The polynomial columns are triangular with
// diagonal 0!1!2!3! = 12, leaving the 2x2 block of fourth and fifth
// derivatives of (f, xi f): 12 (5 f4^2 - 4 f3 f5).
inline GaussianRational one_one_closed_form(const PdeSystem &sys)
{
    const GaussianRational f3 = xi_derivative(sys, 3);
    const GaussianRational f4 = xi_derivative(sys, 4);
    const GaussianRational f5 = xi_derivative(sys, 5);
    return GaussianRational(12) * (GaussianRational(5) * f4 * f4 - GaussianRational(4) * f3 * f5);
}

} // namespace oracle
