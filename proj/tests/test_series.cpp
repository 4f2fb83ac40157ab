#include <gtest/gtest.h>

#include <random>

#include <segre/implicit.hpp>
#include <segre/linalg.hpp>
#include <segre/parser.hpp>
#include <segre/series.hpp>

using namespace segre;

namespace
{

TruncatedSeries P(const std::string &text, const VarList &vars, int cap) { return parse_series(text, vars, cap); }

// Random truncated series with small Gaussian-rational coefficients.
TruncatedSeries random_series(std::mt19937_64 &rng, const VarList &vars, int cap, bool unit)
{
    std::vector<std::pair<Multiindex, GaussianRational>> terms;
    std::uniform_int_distribution<int> coef(-5, 5);
    std::uniform_int_distribution<int> ex(0, cap);
    for (int k = 0; k < 12; ++k) {
        Multiindex m(vars.size());
        int room = cap;
        for (auto &e : m) {
            e = std::min(room, ex(rng) % 3);
            room -= e;
        }
        terms.emplace_back(m, GaussianRational(mpq_class(coef(rng), 1 + std::abs(coef(rng))), mpq_class(coef(rng), 1 + std::abs(coef(rng)))));
    }
    if (unit) {
        terms.emplace_back(Multiindex(vars.size(), 0), GaussianRational(7));
    }
    return TruncatedSeries::from_terms(vars, cap, terms, false);
}

} // namespace

TEST(Series, MulDifferenceOfSquares)
{
    VarList v{"z"};
    EXPECT_EQ(P("1+z", v, 2) * P("1-z", v, 2), P("1-z^2", v, 2));
}

TEST(Series, MulIdentity)
{
    VarList v{"z", "w"};
    auto s = P("3*z - i*w^2 + 1/2", v, 4);
    EXPECT_EQ(s * TruncatedSeries::constant(v, 4, 1), s);
}

TEST(Series, MulTruncates)
{
    VarList v{"z"};
    EXPECT_EQ(P("1+z+z^2", v, 2) * P("1+z", v, 2), P("1+2*z+2*z^2", v, 2));
}

TEST(Series, MulMismatchIsAlignmentError)
{
    EXPECT_THROW(P("z", {"z"}, 2) * P("z", {"z"}, 3), alignment_error);
    EXPECT_THROW(P("z", {"z"}, 2) * P("y", {"y"}, 2), alignment_error);
}

TEST(Series, Derivative)
{
    VarList v{"z"};
    auto d = P("z^2", v, 3).derivative("z");
    EXPECT_EQ(d.cap(), 2);
    EXPECT_EQ(d, P("2*z", v, 2));
    EXPECT_TRUE(P("5", v, 3).derivative("z").is_zero());
    auto cube = TruncatedSeries::from_terms(v, 3, P("(1+z)^3", v, 3).terms(), false);
    EXPECT_EQ(cube.derivative("z"), P("3+6*z+3*z^2", v, 2));
    EXPECT_THROW(cube.derivative("q"), unknown_variable);
}

TEST(Series, Substitute)
{
    auto s = substitute(P("1+z", {"z"}, 4), {{"z", P("w^2", {"w"}, 4)}});
    EXPECT_EQ(s, P("1+w^2", {"w"}, 4));
    auto c = substitute(P("3+z+z^2", {"z"}, 4), {{"z", TruncatedSeries({"y"}, 4)}});
    EXPECT_EQ(c, P("3", {"y"}, 4));
    auto r = substitute(P("z^2", {"z"}, 3), {{"z", P("y+y^2", {"y"}, 3)}});
    EXPECT_EQ(r, P("y^2+2*y^3", {"y"}, 3));
}

TEST(Series, NonNilpotentSubstitutionNeedsPolynomial)
{
    VarList v{"z"};
    auto trunc = TruncatedSeries::from_terms(v, 3, P("1+z", v, 3).terms(), false);
    EXPECT_THROW(compose(trunc, {P("1+z", v, 3)}), domain_error);
    EXPECT_EQ(compose(P("z^2", v, 3), {P("1+z", v, 3)}), P("1+2*z+z^2", v, 3));
}

TEST(Series, InvertUnit)
{
    VarList v{"z"};
    EXPECT_EQ(invert_unit(P("1-z", v, 3)), P("1+z+z^2+z^3", v, 3));
    EXPECT_EQ(invert_unit(P("2", v, 3)), P("1/2", v, 3));
    EXPECT_EQ(invert_unit(P("1+i*u", {"u"}, 2)), P("1-i*u-u^2", {"u"}, 2));
    EXPECT_THROW(invert_unit(P("z", v, 3)), not_a_unit);
}

TEST(Series, SolveImplicitLinear)
{
    auto sol = solve_implicit({P("x-p", {"p", "x"}, 3)}, {"x"});
    EXPECT_EQ(sol.at("x"), P("p", {"p"}, 3));
}

TEST(Series, SolveImplicitReversion)
{
    auto sol = solve_implicit({P("x+x^2-p", {"p", "x"}, 3)}, {"x"});
    EXPECT_EQ(sol.at("x"), P("p-p^2+2*p^3", {"p"}, 3));
}

TEST(Series, SolveImplicitSphereSegre)
{
    // rho = b + 2iza; solve rho = w and rho_z = xi for (a, b)
    VarList v{"z", "w", "xi", "a", "b"};
    auto sol = solve_implicit({P("b+2*i*z*a-w", v, 4), P("2*i*a-xi", v, 4)}, {"a", "b"});
    VarList p{"z", "w", "xi"};
    EXPECT_EQ(sol.at("a"), P("-1/2*i*xi", p, 4));
    EXPECT_EQ(sol.at("b"), P("w-z*xi", p, 4));
}

TEST(Series, SolveImplicitSingular)
{
    try {
        solve_implicit({P("x^2-p", {"p", "x"}, 3)}, {"x"});
        FAIL();
    } catch (const nondegeneracy_error &e) {
        EXPECT_EQ(e.determinant, "0");
    }
}

TEST(Series, DetExact)
{
    ExactMatrix id{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    EXPECT_EQ(det_exact(id), GaussianRational(1));
    EXPECT_EQ(det_exact({{1, 2}, {1, 2}}), GaussianRational(0));
    EXPECT_EQ(det_exact({{1, 2}, {3, 4}}), GaussianRational(-2));
    EXPECT_EQ(det_exact({{0, 1}, {1, 0}}), GaussianRational(-1));
    EXPECT_THROW(det_exact({{1, 2}}), domain_error);
}

TEST(Series, DetSeries)
{
    VarList v{"z"};
    TruncatedSeries zero(v, 2);
    EXPECT_EQ(det_series({{P("1", v, 2), zero}, {zero, P("1+z", v, 2)}}), P("1+z", v, 2));
    EXPECT_TRUE(det_series({{zero, zero}, {P("z", v, 2), P("1", v, 2)}}).is_zero());
    EXPECT_EQ(det_series({{P("1", v, 2), P("z", v, 2)}, {P("z", v, 2), P("1", v, 2)}}), P("1-z^2", v, 2));
}

TEST(Series, CanonicalText)
{
    VarList v{"z1", "xi1"};
    EXPECT_EQ(P("-i*xi1^2", v, 4).to_string(), "-i*xi1^2");
    EXPECT_EQ(P("xi1 + z1 + 1/2 - (1+2*i)*z1*xi1", v, 4).to_string(), "1/2 + z1 + xi1 + (-1-2*i)*z1*xi1");
    EXPECT_EQ(P("0", v, 4).to_string(), "0");
    EXPECT_EQ(parse_gaussian("-3/4+5/6*i"), GaussianRational(mpq_class(-3, 4), mpq_class(5, 6)));
    EXPECT_EQ(parse_gaussian("-i"), GaussianRational(0, -1));
}

TEST(SeriesProperty, RingLaws)
{
    std::mt19937_64 rng(7);
    VarList v{"x", "y", "t"};
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_series(rng, v, 5, false);
        auto b = random_series(rng, v, 5, false);
        auto c = random_series(rng, v, 5, false);
        EXPECT_EQ((a * b) * c, a * (b * c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_EQ(a * b, b * a);
    }
}

TEST(SeriesProperty, Leibniz)
{
    std::mt19937_64 rng(11);
    VarList v{"x", "y"};
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_series(rng, v, 6, false);
        auto b = random_series(rng, v, 6, false);
        auto lhs = (a * b).derivative("x");
        auto rhs = a.derivative("x") * b.with_cap(5) + a.with_cap(5) * b.derivative("x");
        EXPECT_EQ(lhs, rhs);
    }
}

TEST(SeriesProperty, InverseOfRandomUnit)
{
    std::mt19937_64 rng(13);
    VarList v{"x", "y"};
    for (int trial = 0; trial < 20; ++trial) {
        auto s = random_series(rng, v, 6, true);
        EXPECT_EQ(s * invert_unit(s), TruncatedSeries::constant(v, 6, 1));
    }
}

TEST(SeriesProperty, SolveImplicitResidual)
{
    std::mt19937_64 rng(17);
    VarList v{"p", "q", "x", "y"};
    for (int trial = 0; trial < 8; ++trial) {
        auto f = P("x - 2*y - p", v, 5) + random_series(rng, v, 5, false);
        auto g = P("3*y + i*x - q", v, 5) + random_series(rng, v, 5, false);
        f = f - TruncatedSeries::constant(v, 5, f.constant_term());
        g = g - TruncatedSeries::constant(v, 5, g.constant_term());
        // keep the linear part in the unknowns nonsingular
        auto sol = solve_implicit({f, g}, {"x", "y"});
        VarList pv{"p", "q"};
        std::vector<TruncatedSeries> img{TruncatedSeries::variable(pv, 5, "p"), TruncatedSeries::variable(pv, 5, "q"),
                                         sol.at("x"), sol.at("y")};
        EXPECT_TRUE(compose(f, img).is_zero());
        EXPECT_TRUE(compose(g, img).is_zero());
    }
}

TEST(SeriesProperty, DetSeriesAgreesWithPointwiseDet)
{
    std::mt19937_64 rng(19);
    VarList v{"x", "y"};
    for (int size : {3, 7, 8}) {
        SeriesMatrix m(size);
        for (auto &row : m) {
            for (int j = 0; j < size; ++j) {
                auto s = random_series(rng, v, 3, false);
                row.push_back(TruncatedSeries::from_terms(v, 3, s.terms(), true));
            }
        }
        // polynomial entries: the series determinant is a polynomial whose
        // truncation at the cap must match the pointwise determinant at 0
        auto d = det_series(m);
        EXPECT_EQ(d.constant_term(), det_exact(constant_terms(m)));
        auto b = berkowitz_det(m, TruncatedSeries(v, 3), TruncatedSeries::constant(v, 3, 1));
        EXPECT_EQ(d, b);
    }
}
