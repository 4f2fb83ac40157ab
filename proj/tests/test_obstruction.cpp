#include <gtest/gtest.h>

#include <fstream>

#include <segre/corpus.hpp>
#include <segre/gamma_table.hpp>
#include <segre/obstruction.hpp>
#include <segre/pipeline.hpp>

#include "oracles.hpp"

using namespace segre;

namespace
{

ObstructionSpec spec11() { return make_spec(1, 1, {{1}, {2}}, consecutive_gammas(5)); }
ObstructionSpec spec12() { return make_spec(1, 2, {{1}, {2}, {3}}, consecutive_gammas(15)); }

} // namespace

TEST(Obstruction, AlphaChoices)
{
    auto a11 = enumerate_alpha_choices(1, 1);
    ASSERT_EQ(a11.size(), 1u);
    EXPECT_EQ(a11[0], (std::vector<Multiindex>{{1}, {2}}));
    auto a12 = enumerate_alpha_choices(1, 2);
    ASSERT_EQ(a12.size(), 1u);
    EXPECT_EQ(a12[0], (std::vector<Multiindex>{{1}, {2}, {3}}));
    auto a22 = enumerate_alpha_choices(2, 2);
    ASSERT_EQ(a22.size(), 3u);
    for (const auto &t : a22) {
        EXPECT_EQ(t[0], (Multiindex{1, 0}));
        EXPECT_EQ(t[1], (Multiindex{0, 1}));
        EXPECT_EQ(degree(t[2]), 2);
        EXPECT_EQ(make_spec(2, 2, t).d(), 4);
    }
    EXPECT_THROW(enumerate_alpha_choices(2, 1), domain_error);
}

TEST(Obstruction, BasisSizes)
{
    EXPECT_EQ(make_spec(1, 1, {{1}, {2}}).s(), 5);
    EXPECT_EQ(make_spec(1, 2, {{1}, {2}, {3}}).s(), 15);
    EXPECT_EQ(make_spec(2, 2, enumerate_alpha_choices(2, 2)[0]).s(), 38);

    // 1, xi, xi^2, xi^3, xi_2, xi xi_2 in some fixed order
    auto b = make_spec(1, 1, {{1}, {2}}).basis;
    std::vector<std::string> names;
    for (const auto &m : b) {
        names.push_back(monomial_name(m));
    }
    EXPECT_EQ(names.size(), 6u);
}

TEST(Obstruction, SpecValidation)
{
    EXPECT_THROW(make_spec(1, 2, {{1}, {2}}), domain_error);           // too few alphas
    EXPECT_THROW(make_spec(1, 1, {{2}, {1}}), domain_error);           // alpha^1 not a unit
    EXPECT_THROW(make_spec(1, 1, {{1}, {3}}), domain_error);           // |alpha^2| > 2
    EXPECT_THROW(make_spec(1, 1, {{1}, {2}}, {{1}, {2}}), domain_error); // wrong count
    EXPECT_THROW(make_spec(1, 1, {{1}, {2}}, {{1}, {3}, {2}, {4}, {5}}), domain_error); // |gamma^2| > 2
    EXPECT_THROW(make_spec(1, 1, {{1}, {2}}, {{1}, {1}, {2}, {3}, {4}}), domain_error); // repeated
    EXPECT_NO_THROW(spec11());
}

// For Phi = f(xi) the (1,1) factor has a closed form (see oracles.hpp).
TEST(Obstruction, OneOneMatchesClosedForm)
{
    const ObstructionSpec spec = spec11();
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        PdeSystem sys = random_formal_system(1, 6, seed, 8);
        const GaussianRational expect = oracle::one_one_closed_form(sys);
        const GaussianRational got = det_at(spec, fiber_jets(sys, 0));
        EXPECT_FALSE(expect.is_zero());
        EXPECT_TRUE(got == expect || got == -expect) << got.to_string() << " vs " << expect.to_string();
    }
}

TEST(Obstruction, PointModeMatchesSeriesConstantTerm)
{
    for (const auto &spec : {spec11(), spec12()}) {
        PdeSystem sys = random_formal_system(1, 5, 3, spec.max_gamma() + spec.k() - 1);
        const GaussianRational p = det_at(spec, fiber_jets(sys, spec.k() - 1));
        const TruncatedSeries s = det_series_mode(spec, sys, 0);
        EXPECT_EQ(p, s.constant_term());
    }
}

TEST(Obstruction, HandRowEqualsGenericRow)
{
    const ObstructionSpec spec = spec12();
    for (std::uint64_t seed = 20; seed < 24; ++seed) {
        PdeSystem sys = random_formal_system(1, 8, seed, 17);
        FiberJets fj = fiber_jets(sys, 1);
        JetEvaluator ev(fj);
        auto generic = build_row0(spec, ev);
        auto hand = pq_row0(ev);
        ASSERT_EQ(generic.size(), hand.size());
        for (std::size_t t = 0; t < hand.size(); ++t) {
            EXPECT_EQ(lower_to(generic[t], hand[t].cap()), hand[t]) << "column " << t;
        }
        EXPECT_EQ(point_matrix(spec, generic), point_matrix(spec, hand));
    }
}

TEST(Obstruction, CubicSystemHasVanishingHighRows)
{
    const ObstructionSpec spec = spec12();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        PdeSystem sys = oracle::random_cubic_system(seed, 20);
        ObstructionMatrix mat = build_matrix(spec, build_row0(spec, sys));
        for (std::size_t j = 0; j < mat.rows.size(); ++j) {
            bool zero = true;
            for (const auto &e : mat.rows[j]) {
                zero = zero && e.is_zero();
            }
            EXPECT_EQ(zero, j >= 8) << "row " << j;
        }
        EXPECT_TRUE(det_at(spec, fiber_jets(sys, 1)).is_zero());
    }
}

TEST(Obstruction, NontrivialAtOrigin)
{
    const ObstructionSpec spec = spec12();
    int nonzero = 0;
    for (std::uint64_t seed = 100; seed < 103; ++seed) {
        PdeSystem sys = random_formal_system(1, 8, seed, 16);
        sys.xi0 = {0};
        nonzero += !det_at(spec, fiber_jets(sys, 1)).is_zero();
    }
    EXPECT_GE(nonzero, 2);
}

TEST(Obstruction, SphereFactorsVanish)
{
    const auto c = corpus();
    const RealDefining h = corpus_entry(c, "sphere").germ;
    SamplePoint p = SamplePoint::origin(1);
    FiberJets fj = sample_fiber(h, p, 1, 15);
    EXPECT_TRUE(det_at(spec11(), fj).is_zero());
    EXPECT_TRUE(det_at(spec12(), fj).is_zero());
}

TEST(Obstruction, ShiftedSystemMovesTheCentre)
{
    PdeSystem sys = random_formal_system(1, 4, 5, 8);
    std::vector<GaussianRational> pt{GaussianRational(1, 2), GaussianRational(0, 1), GaussianRational(3)};
    PdeSystem sh = shifted_system(sys, pt);
    EXPECT_EQ(sh.xi0[0], sys.xi0[0] + GaussianRational(3));
    EXPECT_EQ(sh.phi[0][0].constant_term(), sys.phi[0][0].evaluate(pt));
}

TEST(Obstruction, GammaSearchReproducesTable)
{
    const GammaTable table = default_gamma_table();
    for (auto [n, m] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 2}}) {
        ObstructionSpec spec = make_spec(n, m, enumerate_alpha_choices(n, m)[0]);
        PdeSystem sys = random_formal_system(n, 8, 11, spec.s() + spec.k() - 1);
        auto res = search_gammas(spec, fiber_jets(sys, spec.k() - 1), 100000);
        ASSERT_TRUE(res.found) << res.diagnostics;
        EXPECT_EQ(res.gammas, *table.find(n, m, spec.d()));
    }
}

TEST(Obstruction, GammaSearchReportsFailure)
{
    // the sphere has Phi = 0, so the rows cannot reach full rank
    ObstructionSpec spec = make_spec(1, 1, {{1}, {2}});
    PdeSystem sys = make_system(1, {"0"}, 6);
    auto res = search_gammas(spec, fiber_jets(sys, 0), 1000);
    EXPECT_FALSE(res.found);
    EXPECT_FALSE(res.diagnostics.empty());
    EXPECT_THROW(search_gammas(spec, fiber_jets(sys, 0), 0), domain_error);
}

TEST(GammaTable, ShippedFileMatchesDefault)
{
    const GammaTable file = load_gamma_table(std::string(SEGRE_DATA_DIR) + "/gamma_table.json");
    const GammaTable def = default_gamma_table();
    EXPECT_EQ(file.version, def.version);
    EXPECT_EQ(file.entries, def.entries);
}

TEST(GammaTable, JsonRoundTripAndErrors)
{
    const GammaTable def = default_gamma_table();
    EXPECT_EQ(gamma_table_from_json(gamma_table_to_json(def)).entries, def.entries);

    nlohmann::json bad = gamma_table_to_json(def);
    bad["version"] = 99;
    EXPECT_THROW(gamma_table_from_json(bad), data_error);
    bad = gamma_table_to_json(def);
    bad["entries"][0]["s"] = 4;
    EXPECT_THROW(gamma_table_from_json(bad), data_error);
    EXPECT_THROW(gamma_table_from_json(nlohmann::json::parse(R"({"version": 1})")), data_error);
    EXPECT_THROW(load_gamma_table("/nonexistent/table.json"), data_error);

    GammaTable t = def;
    t.entries[{1, 1, 3}].pop_back();
    EXPECT_THROW(lookup_gammas(t, make_spec(1, 1, {{1}, {2}})), data_error);
}

TEST(Pipeline, SphereIsSatisfied)
{
    const auto c = corpus();
    PipelineOptions opt;
    opt.samples = 2;
    opt.mode = EvalMode::both;
    Verdict v = full_pipeline(corpus_entry(c, "sphere").germ, 2, opt);
    EXPECT_EQ(v.conclusion, Conclusion::satisfied);
    EXPECT_EQ(v.samples.size(), 2u);
    ASSERT_TRUE(v.product_series_valuation);
    EXPECT_GT(*v.product_series_valuation, opt.order);
    EXPECT_FALSE(v.transversality_automatic); // N = 2n
    EXPECT_TRUE(full_pipeline(corpus_entry(c, "sphere").germ, 1, opt).transversality_automatic);
}

TEST(Pipeline, QuarticIsObstructedInLowestDimension)
{
    // |z|^2 + |z|^4 does not embed into the sphere of the same dimension
    const auto c = corpus();
    PipelineOptions opt;
    opt.samples = 3;
    opt.mode = EvalMode::both;
    Verdict v = full_pipeline(corpus_entry(c, "abs4").germ, 1, opt);
    EXPECT_EQ(v.conclusion, Conclusion::obstructed);
    ASSERT_EQ(v.factors.size(), 1u);
    EXPECT_EQ(v.factors[0].series_valuation, 4);
    for (const auto &s : v.sample_status) {
        EXPECT_EQ(s, "nonzero");
    }
}

TEST(Pipeline, MissingGammasAreInconclusive)
{
    // (1,1) is nonzero for |z|^2 + |z|^4; without a (1,2) entry nothing decides
    const auto c = corpus();
    PipelineOptions opt;
    opt.samples = 1;
    opt.mode = EvalMode::point;
    opt.table.entries.erase({1, 2, 6});
    Verdict v = full_pipeline(corpus_entry(c, "abs4").germ, 2, opt);
    EXPECT_EQ(v.conclusion, Conclusion::inconclusive);
    ASSERT_EQ(v.factors.size(), 2u);
    EXPECT_FALSE(v.factors[1].available);
    EXPECT_NE(v.summary.find("no gamma sequence"), std::string::npos);
    EXPECT_EQ(v.sample_status, std::vector<std::string>{"unknown"});
}

TEST(Pipeline, Errors)
{
    const auto c = corpus();
    EXPECT_THROW(full_pipeline(corpus_entry(c, "quadric_n2_l0").germ, 1), domain_error);
    EXPECT_THROW(full_pipeline(parse_defining("z1^2*c1^2", 1, 8), 1), nondegeneracy_error);
}
