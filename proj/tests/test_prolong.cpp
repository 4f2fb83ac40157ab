#include <gtest/gtest.h>

#include <segre/assoc_pde.hpp>
#include <segre/corpus.hpp>
#include <segre/prolong.hpp>
#include <segre/rng.hpp>

using namespace segre;

namespace
{

long binom(long n, long k)
{
    long r = 1;
    for (long j = 1; j <= k; ++j) {
        r = r * (n - k + j) / j;
    }
    return r;
}

} // namespace

TEST(Prolong, EnumerateSmall)
{
    auto m = enumerate_monomials(1, 0, 1, 1);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(monomial_name(m[0]), "1");
    EXPECT_EQ(monomial_name(m[1]), "w'");
}

TEST(Prolong, PqBasis)
{
    auto pq = pq_basis();
    ASSERT_EQ(pq.size(), 16u);
    EXPECT_EQ(monomial_name(pq[0]), "w'''");
    EXPECT_EQ(monomial_name(pq[2]), "w'^2*w'''");
    EXPECT_EQ(monomial_name(pq[3]), "1");
    EXPECT_EQ(monomial_name(pq[9]), "w'^6");
    EXPECT_EQ(monomial_name(pq[13]), "w'^3*w''");
    EXPECT_EQ(monomial_name(pq[15]), "w'*w''^2");
    // every PQ monomial has weighted degree <= 6 and lies in the generic basis
    auto all = enumerate_monomials(1, 2, 6, 6);
    EXPECT_EQ(all.size(), 23u);
    for (const auto &p : pq) {
        EXPECT_LE(p.weighted_degree(), 6);
        EXPECT_NE(std::find(all.begin(), all.end(), p), all.end()) << monomial_name(p);
    }
}

TEST(Prolong, GenericBasisSizes)
{
    EXPECT_EQ(enumerate_monomials(1, 1, 3, 3).size(), 6u);
    EXPECT_EQ(enumerate_monomials(2, 1, 4, 4).size(), 39u);
    EXPECT_EQ(enumerate_monomials(1, 2, 6, 3).size(), 16u);
}

TEST(Prolong, MultiindexCounts)
{
    EXPECT_EQ(multiindices_of_degree(2, 3).size(), 4u);
    for (int n = 1; n <= 4; ++n) {
        for (int l = 0; l <= 6; ++l) {
            EXPECT_EQ(long(multiindices_of_degree(n, l).size()), binom(l + n - 1, n - 1));
        }
    }
}

TEST(Prolong, ThirdOrderN1)
{
    auto t = build_prolongation(1, 2);
    EXPECT_EQ(t.at({2}), SymPoly::symbol(phi_symbol(1, 0, 0)));
    auto phi = [](Multiindex b) { return SymPoly::symbol(phi_symbol(1, 0, 0, b)); };
    SymPoly q3 = phi({1, 0, 0}) + SymPoly::symbol(xi_symbol(0)) * phi({0, 1, 0}) + phi({0, 0, 1}) * phi({0, 0, 0});
    EXPECT_EQ(t.at({3}), q3);
}

TEST(Prolong, FormalPhiZero)
{
    auto sys = make_system(2, {"0", "0", "0"}, 6);
    auto t = build_prolongation(2, 3);
    JetEvaluator ev(sys, false);
    for (const auto &[a, q] : t.entries) {
        EXPECT_TRUE(ev.evaluate(q).is_zero()) << jet_name(a);
    }
}

TEST(Prolong, FormalN2)
{
    auto sys = make_system(2, {"xi1", "0", "0"}, 6);
    auto t = build_prolongation(2, 2);
    JetEvaluator ev(sys, false);
    EXPECT_EQ(ev.evaluate(t.at({3, 0})), parse_series("xi1", jet_vars(2), 5));
}

TEST(Prolong, SubstituteExamples)
{
    auto table = build_prolongation(1, 2);
    auto sphere = derive_pde(parse_defining("z1*c1", 1, 8), 6).system;
    EXPECT_TRUE(substitute_prolongation(JetMonomial{{{2}}}, table, sphere).is_zero());
    EXPECT_EQ(substitute_prolongation(JetMonomial{{{1}, {1}}}, table, sphere), parse_series("xi1^2", jet_vars(1), 6));
    auto formal = make_system(1, {"-i*xi1^2"}, 8);
    EXPECT_EQ(substitute_prolongation(JetMonomial{{{3}}}, table, formal), parse_series("-2*xi1^3", jet_vars(1), 7));
}

TEST(Prolong, DegreeBound)
{
    for (int n = 1; n <= 3; ++n) {
        auto t = build_prolongation(n, 4);
        for (const auto &[a, q] : t.entries) {
            EXPECT_LE(q.degree(), degree(a) - 1) << "n=" << n << " " << jet_name(a);
        }
    }
}

TEST(Prolong, TotalDerivativeCoherence)
{
    const int n = 2;
    auto t = build_prolongation(n, 3);
    for (const auto &[a, q] : t.entries) {
        for (int k = 0; k < n; ++k) {
            bool canonical = true;
            for (int v = k + 1; v < n; ++v) {
                canonical = canonical && a[std::size_t(v)] == 0;
            }
            JetVariable next = a;
            ++next[std::size_t(k)];
            if (canonical && t.entries.count(next)) {
                EXPECT_EQ(t.at(next), total_derivative(n, k, q));
            }
        }
    }
}

TEST(Prolong, SoundnessAlongSegreGraphs)
{
    ExactRng rng(3);
    const auto all = corpus();
    for (const char *name : {"abs4", "random_u_n1_d3", "random_n2_d3"}) {
        const auto &e = corpus_entry(all, name);
        const int n = e.germ.n;
        const int order = 5;
        auto r = real_to_complex(e.germ, order + 5);
        auto sys = derive_pde(r).system;
        auto table = build_prolongation(n, 3);
        VarList zt = indexed("z", n);
        zt.push_back("t");
        const int cap = order + 4;
        auto t = TruncatedSeries::variable(zt, cap, "t");
        std::vector<TruncatedSeries> img;
        for (int j = 1; j <= n; ++j) {
            img.push_back(TruncatedSeries::variable(zt, cap, "z" + std::to_string(j)));
        }
        for (auto &a : rng.point(std::size_t(n))) {
            img.push_back(a * t);
        }
        img.push_back(rng.gaussian() * t);
        auto w = compose(r.rho.with_cap(cap), img);
        std::vector<TruncatedSeries> jet_img;
        for (int j = 0; j < n; ++j) {
            jet_img.push_back(lower_to(img[std::size_t(j)], order));
        }
        jet_img.push_back(lower_to(w, order));
        for (int j = 0; j < n; ++j) {
            jet_img.push_back(lower_to(w.derivative(j), order) - TruncatedSeries::constant(zt, order, sys.xi0[std::size_t(j)]));
        }
        JetEvaluator ev(sys, false);
        for (const auto &[a, q] : table.entries) {
            auto along = compose(lower_to(ev.evaluate(q), order), jet_img);
            Multiindex zt_a = a;
            zt_a.push_back(0);
            EXPECT_EQ(along, lower_to(w.derivative(zt_a), order)) << name << " " << jet_name(a);
        }
    }
}
