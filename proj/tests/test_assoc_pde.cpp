#include <gtest/gtest.h>

#include <segre/assoc_pde.hpp>
#include <segre/corpus.hpp>
#include <segre/rng.hpp>

using namespace segre;

namespace
{

TruncatedSeries J(const std::string &text, int n, int cap) { return parse_series(text, jet_vars(n), cap); }

TruncatedSeries at_z0(const TruncatedSeries &s)
{
    std::map<std::string, TruncatedSeries> m;
    for (const auto &v : s.vars()) {
        if (v[0] == 'z') {
            m.emplace(v, TruncatedSeries(s.vars(), s.cap()));
        }
    }
    return substitute(s, m);
}

} // namespace

TEST(AssocPde, Sphere)
{
    auto d = derive_pde(parse_defining("z1*c1", 1, 8), 6);
    EXPECT_TRUE(d.system.phi[0][0].is_zero());
    EXPECT_EQ(d.system.cap(), 6);
    EXPECT_EQ(d.inverse.A[0], J("-1/2*i*xi1", 1, 7));
    EXPECT_EQ(d.inverse.B, J("w - z1*xi1", 1, 7));
}

TEST(AssocPde, LeviDegenerate)
{
    try {
        derive_pde(parse_defining("0", 1, 8), 6);
        FAIL();
    } catch (const nondegeneracy_error &e) {
        EXPECT_EQ(e.determinant, "0");
    }
}

TEST(AssocPde, Abs4AtZ0)
{
    auto d = derive_pde(parse_defining("z1*c1 + z1^2*c1^2", 1, 8), 6);
    EXPECT_EQ(at_z0(d.system.phi[0][0]), J("-i*xi1^2", 1, 6));
    EXPECT_TRUE(phi_jet(d.system, 0, 0, {0, 0, 1}).constant_term().is_zero());
    EXPECT_THROW(phi_jet(d.system, 0, 0, {7, 0, 0}), cap_exhausted);
}

TEST(AssocPde, CramerSphereFields)
{
    auto r = real_to_complex(parse_defining("z1*c1", 1, 8), 8);
    auto d = derive_pde(r);
    EXPECT_EQ(d.inverse.A[0].derivative("w").constant_term(), GaussianRational(0));
    EXPECT_EQ(d.inverse.B.derivative("w").constant_term(), GaussianRational(1));
    std::string why;
    EXPECT_TRUE(cramer_cross_check(r, d.system, 3, &why)) << why;
}

TEST(AssocPde, CramerAgreesOnCorpus)
{
    for (const auto &e : corpus()) {
        auto r = real_to_complex(e.germ, 8);
        auto d = derive_pde(r);
        std::string why;
        EXPECT_TRUE(cramer_cross_check(r, d.system, 3, &why)) << e.name << ": " << why;
    }
}

TEST(AssocPde, CramerDetectsCorruption)
{
    auto r = real_to_complex(parse_defining("z1*c1 + z1^2*c1^2", 1, 8), 8);
    auto d = derive_pde(r);
    d.system.phi[0][0] += J("z1*w", 1, 6);
    EXPECT_FALSE(cramer_cross_check(r, d.system, 3));
}

TEST(AssocPde, Symmetric)
{
    auto d = derive_pde(corpus_entry(corpus(), "random_n2_d3").germ, 5);
    EXPECT_EQ(d.system.phi[0][1], d.system.phi[1][0]);
}

TEST(AssocPde, Integrability)
{
    auto quad = derive_pde(parse_defining("z1*c1 + z2*c2", 2, 8), 5);
    EXPECT_TRUE(integrability_residual(quad.system, 4).vanishes());
    auto d = derive_pde(parse_defining("z1*c1 + z2*c2 + z1^2*c1^2", 2, 8), 5);
    EXPECT_TRUE(integrability_residual(d.system, 4).vanishes());
    auto formal = make_system(2, {"xi2", "0", "1"}, 5);
    auto rep = integrability_residual(formal, 4);
    EXPECT_FALSE(rep.vanishes());
    EXPECT_EQ(rep.vanishing_order, 0);
    // Phi_11 = xi2 alone is integrable (D_2 Phi_11 = Phi_22 = 0)
    EXPECT_TRUE(integrability_residual(make_system(2, {"xi2", "0", "0"}, 5), 4).vanishes());
}

TEST(AssocPde, SegreSolutionProperty)
{
    ExactRng rng(5);
    for (const auto &e : corpus()) {
        auto r = real_to_complex(e.germ, 10);
        auto d = derive_pde(r);
        for (int trial = 0; trial < 2; ++trial) {
            auto a0 = rng.point(std::size_t(e.germ.n));
            EXPECT_TRUE(segre_solution_check(r, d.system, a0, rng.gaussian(), 8)) << e.name;
        }
    }
}

TEST(AssocPde, BiholomorphicConsistency)
{
    auto r = real_to_complex(corpus_entry(corpus(), "random_u_n1_d3").germ, 7);
    auto d = derive_pde(r);
    // (z, A, B) pushed through (z, rho, rho_z - xi0) is the identity
    const VarList jv = jet_vars(1);
    std::vector<TruncatedSeries> img{TruncatedSeries::variable(jv, 6, "z1"), d.inverse.A[0], d.inverse.B};
    EXPECT_EQ(compose(r.rho.with_cap(6), img), TruncatedSeries::variable(jv, 6, "w"));
    EXPECT_EQ(compose(r.rho.derivative("z1"), img) - TruncatedSeries::constant(jv, 6, d.system.xi0[0]),
              TruncatedSeries::variable(jv, 6, "xi1"));
}
