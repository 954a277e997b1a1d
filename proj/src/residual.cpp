#include "pinn/residual.hpp"

#include "pinn/error.hpp"

#include <algorithm>

namespace pinn {

double bs_operator(const OptionSpec& spec, const autodiff::Jet2& v, double spot)
{
    if (!autodiff::is_finite(v)) {
        throw DomainError("bs_operator: non-finite jet");
    }
    return bs_operator_generic(spec, v, spot);
}

ResidualReport complementarity_residual(const OptionSpec& spec, const autodiff::Jet2& v, double spot)
{
    if (spec.style != OptionStyle::AmericanPut) {
        throw DomainError("complementarity_residual applies to American puts only");
    }
    ResidualReport r;
    r.f = bs_operator(spec, v, spot);
    const double gap = payoff(spec, spot) - v.value;
    r.complementarity = r.f * gap;
    r.hinge_f = std::max(r.f, 0.0);
    r.hinge_v = std::max(gap, 0.0);
    return r;
}

Greeks greeks(const autodiff::Jet2& v) { return {v.d_dS, v.d2_dS2, v.d_dt}; }

}  // namespace pinn
