#include "pinn/baselines.hpp"
#include "pinn/error.hpp"
#include "pinn/residual.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace pinn;
using autodiff::Jet2;

namespace {

OptionSpec put_spec()
{
    OptionSpec s;
    s.style = OptionStyle::AmericanPut;
    return s;
}

}  // namespace

TEST(BsOperator, LinearSolutionIsAnnihilated)
{
    const OptionSpec spec;
    for (double s : {0.0, 10.0, 73.0}) {
        EXPECT_NEAR(bs_operator(spec, Jet2{s, 1, 0, 0}, s), 0.0, 1e-12);
    }
}

TEST(BsOperator, DiscountGrowthSolution)
{
    const OptionSpec spec;
    const double c = 3.0;
    for (double t : {0.0, 0.4, 1.0}) {
        const double v = c * std::exp(spec.rate * t);
        EXPECT_NEAR(bs_operator(spec, Jet2{v, 0, 0, spec.rate * v}, 25.0), 0.0, 1e-14);
    }
}

TEST(BsOperator, SquarePolynomial)
{
    const OptionSpec spec;
    for (double s : {1.0, 12.0, 40.0}) {
        EXPECT_NEAR(bs_operator(spec, Jet2{s * s, 2 * s, 2, 0}, s), 0.09 * s * s, 1e-12 * s * s);
    }
}

TEST(BsOperator, NonFiniteJetThrows)
{
    EXPECT_THROW(bs_operator(OptionSpec{}, Jet2{std::numeric_limits<double>::quiet_NaN(), 0, 0, 0}, 1.0),
                 DomainError);
    EXPECT_THROW(bs_operator(OptionSpec{}, Jet2{1, 0, std::numeric_limits<double>::infinity(), 0}, 1.0),
                 DomainError);
}

TEST(BsOperator, ClosedFormCallSatisfiesThePde)
{
    const OptionSpec spec;
    double worst = 0.0;
    for (double s : linspace(1.0, 159.0, 60)) {
        for (double t : linspace(0.0, 0.98, 40)) {
            const Jet2 v = closed_form_call_jet(spec, s, t);
            worst = std::max(worst, std::abs(bs_operator(spec, v, s)));
        }
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Complementarity, ExerciseRegionIdentity)
{
    const OptionSpec spec = put_spec();
    const double s = 20.0;
    const auto r = complementarity_residual(spec, Jet2{20.0, -1, 0, 0}, s);
    EXPECT_EQ(r.complementarity, 0.0);
    EXPECT_EQ(r.hinge_v, 0.0);
}

TEST(Complementarity, ContinuationRegionIdentity)
{
    const OptionSpec spec = put_spec();
    // V = S is annihilated by the operator.
    const double s = 30.0;
    const auto r = complementarity_residual(spec, Jet2{s, 1, 0, 0}, s);
    EXPECT_NEAR(r.f, 0.0, 1e-13);
    EXPECT_NEAR(r.complementarity, 0.0, 1e-12);
    EXPECT_EQ(r.hinge_f, 0.0);
}

TEST(Complementarity, DirectSubstitution)
{
    const OptionSpec spec = put_spec();
    // S = 20: payoff 20. V = 19 with V_S = V_SS = 0 and V_t chosen so f = -2.
    // The product is f * (payoff - V) = -2 * 1.
    const double s = 20.0;
    const double v = 19.0;
    const double vt = -2.0 + spec.rate * v;
    const auto r = complementarity_residual(spec, Jet2{v, 0, 0, vt}, s);
    EXPECT_NEAR(r.f, -2.0, 1e-14);
    EXPECT_NEAR(r.complementarity, -2.0, 1e-13);
    EXPECT_EQ(r.hinge_f, 0.0);
    EXPECT_NEAR(r.hinge_v, 1.0, 1e-14);
}

TEST(Complementarity, HingesAreNonNegative)
{
    const OptionSpec spec = put_spec();
    for (double v : {-5.0, 0.0, 10.0, 45.0}) {
        for (double vt : {-3.0, 0.0, 3.0}) {
            const auto r = complementarity_residual(spec, Jet2{v, -0.5, 0.01, vt}, 25.0);
            EXPECT_GE(r.hinge_f, 0.0);
            EXPECT_GE(r.hinge_v, 0.0);
        }
    }
}

TEST(Complementarity, CallIsRejected)
{
    EXPECT_THROW(complementarity_residual(OptionSpec{}, Jet2{1, 0, 0, 0}, 1.0), DomainError);
}

TEST(Greeks, Examples)
{
    const Greeks g0 = greeks(Jet2::constant(4.0));
    EXPECT_EQ(g0.delta, 0.0);
    EXPECT_EQ(g0.gamma, 0.0);
    EXPECT_EQ(g0.theta, 0.0);
    const Greeks g1 = greeks(Jet2::seed_spot(33.0));
    EXPECT_EQ(g1.delta, 1.0);
    EXPECT_EQ(g1.gamma, 0.0);
    EXPECT_EQ(g1.theta, 0.0);
    const Greeks g2 = greeks(Jet2{1, 2, 3, 4});
    EXPECT_EQ(g2.delta, 2.0);
    EXPECT_EQ(g2.gamma, 3.0);
    EXPECT_EQ(g2.theta, 4.0);
}

TEST(Complementarity, BinomialSurfaceIsNearlyComplementary)
{
    const OptionSpec spec = put_spec();
    const auto spots = linspace(spec.s_min, spec.s_max, 50);
    const auto times = linspace(0.0, spec.maturity, 50);
    const ExerciseBoundary b = extract_boundary(binomial_put(spec, 2000, spots, times), spec.strike);
    const double cell = spots[1] - spots[0];
    // Jets at each mesh node from central differences of the tree price with
    // steps well below the mesh spacing.
    const double hs = 1.0;
    const double ht = 0.005;

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < spots.size(); ++i) {
        std::vector<double> stencil_t;
        for (std::size_t j = 1; j + 1 < times.size(); ++j) {
            stencil_t.insert(stencil_t.end(), {times[j] - ht, times[j], times[j] + ht});
        }
        const PriceSurface local = binomial_put(spec, 2000, {spots[i] - hs, spots[i], spots[i] + hs}, stencil_t);
        for (std::size_t j = 1; j + 1 < times.size(); ++j) {
            // One-cell band around the exercise boundary is excluded.
            if (std::abs(spots[i] - b.spots[j]) <= cell + 1e-12) {
                continue;
            }
            const std::size_t k = 3 * (j - 1) + 1;
            const double v = local.at(1, k);
            const Jet2 jet{v, (local.at(2, k) - local.at(0, k)) / (2 * hs),
                           (local.at(2, k) - 2 * v + local.at(0, k)) / (hs * hs),
                           (local.at(1, k + 1) - local.at(1, k - 1)) / (2 * ht)};
            worst = std::max(worst, std::abs(complementarity_residual(spec, jet, spots[i]).complementarity));
        }
    }
    EXPECT_LT(worst, 0.1);
}
