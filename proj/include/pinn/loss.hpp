#pragma once

#include "pinn/autodiff/jet.hpp"
#include "pinn/conditions.hpp"
#include "pinn/network.hpp"
#include "pinn/residual.hpp"
#include "pinn/sampler.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace pinn {

/// Weights of the three American-put interior penalties: the
/// complementarity product and the hinges on f <= 0 and V >= payoff.
struct PutPenaltyWeights {
    double complementarity = 1.0;
    double hinge_f = 1.0;
    double hinge_v = 1.0;
};

struct LossReport {
    double mse_ivp = 0.0;
    double mse_bvp = 0.0;
    double mse_pde = 0.0;
    double total = 0.0;
    double beta = 1.0;
};

struct LossEvaluation {
    LossReport report;
    std::vector<double> gradient;  ///< d total / d theta, NetworkLayout order
};

/// Squared interior residual at one point: f^2 for a call, the weighted sum
/// of squared complementarity and hinge terms for a put.
template <typename T>
T pde_penalty(const OptionSpec& spec, const autodiff::BasicJet<T>& v, double spot, const PutPenaltyWeights& w)
{
    const T f = bs_operator_generic(spec, v, spot);
    if (spec.style == OptionStyle::EuropeanCall) {
        return f * f;
    }
    using autodiff::max_with;
    const T gap = payoff(spec, spot) - v.value;
    const T comp = f * gap;
    const T hf = max_with(f, 0.0);
    const T hv = max_with(gap, 0.0);
    return w.complementarity * (comp * comp) + w.hinge_f * (hf * hf) + w.hinge_v * (hv * hv);
}

/// Composite objective mse_ivp + mse_bvp + beta * mse_pde and its exact
/// parameter gradient, using the batched network pass.
LossEvaluation compute_loss(const NetworkParams& params, const CollocationBatch& batch, const OptionSpec& spec,
                            double beta, const PutPenaltyWeights& weights = {});

/// Same objective through the scalar parameter tape. Orders of magnitude
/// slower; kept as an independent route for checking compute_loss.
LossEvaluation compute_loss_taped(const NetworkParams& params, const CollocationBatch& batch,
                                  const OptionSpec& spec, double beta, const PutPenaltyWeights& weights = {});

/// Any price model that can report its jet at (S, t).
using JetModel = std::function<autodiff::Jet2(double spot, double time)>;

/// Loss components for an arbitrary model (no gradient).
LossReport evaluate_loss(const JetModel& model, const CollocationBatch& batch, const OptionSpec& spec, double beta,
                         const PutPenaltyWeights& weights = {});

}  // namespace pinn
