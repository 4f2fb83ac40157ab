#include <gtest/gtest.h>

#include <segre/corpus.hpp>
#include <segre/obstruction.hpp>
#include <segre/pipeline.hpp>
#include <segre/wronskian.hpp>

using namespace segre;

namespace
{

TruncatedSeries Z(const std::string &text, int cap = 12) { return parse_series(text, {"z1"}, cap); }

VectorFamily family(const std::vector<std::string> &texts, int cap = 12)
{
    std::vector<TruncatedSeries> comps;
    for (const auto &t : texts) {
        comps.push_back(Z(t, cap));
    }
    return VectorFamily::coordinate(std::move(comps));
}

const std::vector<GaussianRational> origin1{0};

// exp(z) truncated: a non-polynomial stand-in
TruncatedSeries exp_series(int cap)
{
    std::vector<std::pair<Multiindex, GaussianRational>> terms;
    mpq_class f = 1;
    for (int k = 0; k <= cap; ++k) {
        if (k > 0) {
            f /= k;
        }
        terms.push_back({{k}, GaussianRational(f)});
    }
    return TruncatedSeries::from_terms({"z1"}, cap, terms, false);
}

} // namespace

TEST(Wronskian, SpanDimsExamples)
{
    EXPECT_EQ(span_dims(family({"1", "z1"}), origin1, 3).dims, (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(span_dims(family({"1", "z1", "z1^2", "z1^3"}), origin1, 3).dims, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(span_dims(family({"1", "z1", "1 + z1 + 1/2*z1^2 + 1/6*z1^3"}), origin1, 2).dims,
              (std::vector<int>{1, 2}));
    // away from the origin the same ranks come out for polynomial data
    EXPECT_EQ(span_dims(family({"1", "z1", "z1^2", "z1^3"}), {GaussianRational(2, -1)}, 3).dims,
              (std::vector<int>{1, 2, 3}));
    EXPECT_THROW(span_dims(family({"1", "z1"}), {}, 3), domain_error);
    EXPECT_THROW(span_dims(family({"1", "z1"}), origin1, 0), domain_error);
}

TEST(Wronskian, SpanDimsAreMonotone)
{
    ExactRng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::string> texts;
        for (int k = 0; k < 4; ++k) {
            texts.push_back(rng.gaussian(5, 3).to_string() + "*z1^" + std::to_string(rng.integer(0, 6)) + " + " +
                            rng.gaussian(5, 3).to_string() + "*z1^" + std::to_string(rng.integer(0, 6)));
        }
        auto dims = span_dims(family(texts), origin1, 6).dims;
        EXPECT_TRUE(std::is_sorted(dims.begin(), dims.end()));
        EXPECT_LE(dims.back(), 4);
    }
}

TEST(Wronskian, GenericProfileIsStableOnPolynomials)
{
    SpanProfile p = span_dims_generic(family({"z1", "z1^2", "z1^3"}), 3, 9);
    EXPECT_EQ(p.dims, (std::vector<int>{1, 2, 3}));
    EXPECT_TRUE(p.stable);
}

TEST(Wronskian, PlantedExponentialDependence)
{
    // h_3 = 3 h_1 + 2 h_2 with h = exp
    const TruncatedSeries h = exp_series(12);
    const TruncatedSeries z = Z("z1");
    VectorFamily fam = VectorFamily::coordinate({h, z * h, Z("2*z1 + 3") * h});
    Dependence d = extract_dependence(fam, origin1, 2);
    ASSERT_TRUE(d.found) << d.reason;
    EXPECT_EQ(d.profile.dims, (std::vector<int>{1, 2, 2}));
    const GaussianRational third(mpq_class(1, 3));
    EXPECT_EQ(d.lambda, (std::vector<GaussianRational>{1, GaussianRational(2) * third, -third}));
}

TEST(Wronskian, ConstantComponentIsAnnihilated)
{
    Dependence d = extract_dependence(family({"1", "z1"}), origin1, 1);
    ASSERT_TRUE(d.found);
    EXPECT_EQ(d.lambda, (std::vector<GaussianRational>{1, 0}));
}

TEST(Wronskian, IndependentFamilyIsRefused)
{
    VectorFamily fam = family({"z1", "z1^2", "z1^3", "z1^4"});
    for (int l = 1; l <= 4; ++l) {
        Dependence d = extract_dependence(fam, origin1, l);
        EXPECT_FALSE(d.found);
        EXPECT_FALSE(d.reason.empty());
    }
    EXPECT_THROW(extract_dependence(fam, origin1, 0), domain_error);
}

TEST(Wronskian, PlantedDependenceRoundTrip)
{
    // two variables, N = 5: h_5 = -(l_1 h_1 + .. + l_4 h_4) / l_5
    const VarList xy{"x", "y"};
    ExactRng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<TruncatedSeries> hs;
        for (int i = 0; i < 4; ++i) {
            std::vector<std::pair<Multiindex, GaussianRational>> terms;
            for (int a = 0; a <= 3; ++a) {
                for (int b = 0; a + b <= 3; ++b) {
                    terms.push_back({{a, b}, rng.gaussian(9, 9)});
                }
            }
            hs.push_back(TruncatedSeries::from_terms(xy, 10, terms, true));
        }
        std::vector<GaussianRational> lambda = rng.point(5, 9, 9);
        TruncatedSeries acc(xy, 10);
        for (int i = 0; i < 4; ++i) {
            acc += lambda[std::size_t(i)] * hs[std::size_t(i)];
        }
        hs.push_back(-(lambda[4].inverse() * acc));
        VectorFamily fam = VectorFamily::coordinate(hs);

        SpanProfile prof = span_dims(fam, {0, 0}, 4);
        int l = 1;
        while (l < 4 && prof.dims[std::size_t(l - 1)] != prof.dims[std::size_t(l)]) {
            ++l;
        }
        Dependence d = extract_dependence(fam, {0, 0}, l);
        ASSERT_TRUE(d.found) << d.reason;
        const GaussianRational scale = lambda[0];
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_EQ(d.lambda[i] * scale, lambda[i]) << "trial " << trial << " entry " << i;
        }
    }
}

TEST(Wronskian, BorderedLemmaExamples)
{
    const ExactMatrix I{{1, 0}, {0, 1}};
    EXPECT_TRUE(bordered_vanishing_implies_zero(I, {0, 0}));
    EXPECT_FALSE(bordered_vanishing_implies_zero(I, {1, 0}));
    EXPECT_THROW(bordered_vanishing_implies_zero({{1, 2}, {2, 4}}, {0, 0}), nondegeneracy_error);
    EXPECT_THROW(bordered_vanishing_implies_zero(I, {0}), domain_error);
}

TEST(Wronskian, BorderedLemmaProperty)
{
    ExactRng rng(2024);
    int zeros = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t s = std::size_t(rng.integer(1, 5));
        ExactMatrix B;
        do {
            B.assign(s, {});
            for (auto &row : B) {
                row = rng.point(s, 3, 2);
            }
        } while (det_exact(B).is_zero());
        std::vector<GaussianRational> a(s);
        if (rng.integer(0, 1) == 1) {
            a[std::size_t(rng.integer(0, long(s) - 1))] = rng.gaussian(3, 2);
        }
        const bool a_zero = std::all_of(a.begin(), a.end(), [](const GaussianRational &x) { return x.is_zero(); });
        zeros += a_zero;
        EXPECT_EQ(bordered_vanishing_implies_zero(B, a), a_zero) << "trial " << trial;
    }
    EXPECT_GT(zeros, 50);
    EXPECT_LT(zeros, 150);
}

TEST(Wronskian, SegreGraphFamilyIsRowZeroAlongTheGraph)
{
    // For |z|^2 + |z|^4 seen from a sample point: compose row 0 of the
    // third-order matrix with the jet of the Segre graph through the centre.
    const RealDefining h = corpus_entry(corpus(), "abs4").germ;
    ExactRng rng(7);
    SamplePoint p = SamplePoint::draw(rng, 1);
    const ComplexDefining r = complexify(recentered_phi(h.phi, p.z0, p.a0, p.u0), 1, 10);
    const int cap = 6;
    VectorFamily fam = segre_graph_family(r, cap);

    const PdeSystem sys = derive_pde(r).system;
    const ObstructionSpec spec = make_spec(1, 2, {{1}, {2}, {3}});
    const auto row0 = build_row0(spec, sys);

    const VarList jv = jet_vars(1);
    const int c = row0[0].cap();
    TruncatedSeries rho = lower_to(r.rho, c + 1);
    const TruncatedSeries zj = TruncatedSeries::variable(jv, c + 1, "z1");
    const TruncatedSeries zero(jv, c + 1);
    const TruncatedSeries w = compose(rho, {zj, zero, zero});
    std::vector<TruncatedSeries> graph{lower_to(zj, c), lower_to(w, c),
                                       lower_to(w.derivative(0), c) - TruncatedSeries::constant(jv, c, sys.xi0[0])};
    std::size_t k = 0;
    for (std::size_t t = 0; t < row0.size(); ++t) {
        if (t == 3) {
            continue; // the constant function
        }
        TruncatedSeries along = compose(lower_to(row0[t], c), graph);
        const int low = std::min(along.cap(), fam.components[k].cap());
        EXPECT_EQ(lower_to(along, low), lower_to(fam.components[k].embed(jv), low)) << "column " << t;
        ++k;
    }
}

TEST(Wronskian, CertifiedGermsHaveConstantAnnihilators)
{
    const auto c = corpus();
    for (const char *name : {"abs4", "abs6"}) {
        const RealDefining h = corpus_entry(c, name).germ;
        ExactRng rng(7);
        SamplePoint p = SamplePoint::draw(rng, 1);
        const ComplexDefining r = complexify(recentered_phi(h.phi, p.z0, p.a0, p.u0), 1, 23);
        VectorFamily fam = segre_graph_family(r, 20);
        SpanProfile prof = span_dims(fam, origin1, 16);
        int l = 1;
        while (l < 16 && prof.dims[std::size_t(l - 1)] != prof.dims[std::size_t(l)]) {
            ++l;
        }
        Dependence d = extract_dependence(fam, origin1, l);
        ASSERT_TRUE(d.found) << name << ": " << d.reason;
        EXPECT_FALSE(std::all_of(d.lambda.begin(), d.lambda.end(), [](const GaussianRational &x) { return x.is_zero(); }));
    }
}

TEST(Wronskian, SphereHasDegenerateFamily)
{
    // Segre graphs of the sphere are lines: every function is constant
    const RealDefining h = corpus_entry(corpus(), "sphere").germ;
    VectorFamily fam = segre_graph_family(real_to_complex(h, 12), 8);
    Dependence d = extract_dependence(fam, origin1, 1);
    ASSERT_TRUE(d.found);
    EXPECT_EQ(d.profile.dims, (std::vector<int>{0, 0}));
    EXPECT_NE(d.reason.find("kernel"), std::string::npos);
    EXPECT_EQ(d.lambda[0], GaussianRational(1));
}
