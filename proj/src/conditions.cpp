#include "pinn/conditions.hpp"

#include "pinn/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pinn {

std::string_view to_string(OptionStyle style)
{
    return style == OptionStyle::EuropeanCall ? "european_call" : "american_put";
}

OptionStyle parse_option_style(std::string_view name)
{
    if (name == "european_call") {
        return OptionStyle::EuropeanCall;
    }
    if (name == "american_put") {
        return OptionStyle::AmericanPut;
    }
    throw DomainError("unknown option style '" + std::string(name) + "' (expected european_call or american_put)");
}

void OptionSpec::validate() const
{
    if (!(std::isfinite(strike) && std::isfinite(rate) && std::isfinite(sigma) && std::isfinite(maturity) &&
          std::isfinite(s_min) && std::isfinite(s_max))) {
        throw DomainError("option spec contains non-finite values");
    }
    if (!(0.0 <= s_min && s_min < strike && strike < s_max)) {
        throw DomainError("option spec requires 0 <= s_min < strike < s_max");
    }
    if (!(maturity > 0.0)) {
        throw DomainError("option spec requires maturity > 0");
    }
    if (!(sigma > 0.0)) {
        throw DomainError("option spec requires sigma > 0");
    }
}

double payoff(const OptionSpec& spec, double spot)
{
    if (spot < 0.0 || std::isnan(spot)) {
        throw DomainError("payoff: spot must be non-negative");
    }
    return spec.style == OptionStyle::EuropeanCall ? std::max(spot - spec.strike, 0.0)
                                                   : std::max(spec.strike - spot, 0.0);
}

double boundary_value(const OptionSpec& spec, Boundary which, double t)
{
    if (!(t >= 0.0 && t <= spec.maturity)) {
        throw DomainError("boundary_value: t must lie in [0, maturity]");
    }
    if (spec.style == OptionStyle::EuropeanCall) {
        if (which == Boundary::Lower) {
            return 0.0;
        }
        return spec.s_max - spec.strike * std::exp(-spec.rate * (spec.maturity - t));
    }
    return which == Boundary::Lower ? spec.strike : 0.0;
}

double terminal_value(const OptionSpec& spec, double spot) { return payoff(spec, spot); }

}  // namespace pinn
