#pragma once

#include "pinn/autodiff/jet.hpp"
#include "pinn/conditions.hpp"

namespace pinn {

/// Black-Scholes operator
///   f = V_t + 1/2 sigma^2 S^2 V_SS + r S V_S - r V
/// on a network output jet at spot S. Generic so it can run on tape jets;
/// the plain-double overload below validates finiteness.
template <typename T>
T bs_operator_generic(const OptionSpec& spec, const autodiff::BasicJet<T>& v, double spot)
{
    const double half_var_s2 = 0.5 * spec.sigma * spec.sigma * spot * spot;
    return v.d_dt + half_var_s2 * v.d2_dS2 + (spec.rate * spot) * v.d_dS - spec.rate * v.value;
}

/// Throws DomainError for non-finite jets.
double bs_operator(const OptionSpec& spec, const autodiff::Jet2& v, double spot);

struct ResidualReport {
    double f = 0.0;                ///< Black-Scholes operator value
    double complementarity = 0.0;  ///< f * (payoff - V)
    double hinge_f = 0.0;          ///< max(f, 0): violation of f <= 0
    double hinge_v = 0.0;          ///< max(payoff - V, 0): violation of V >= payoff
};

/// American-put complementarity residual. Throws DomainError for calls.
ResidualReport complementarity_residual(const OptionSpec& spec, const autodiff::Jet2& v, double spot);

struct Greeks {
    double delta = 0.0;
    double gamma = 0.0;
    double theta = 0.0;
};

Greeks greeks(const autodiff::Jet2& v);

}  // namespace pinn
