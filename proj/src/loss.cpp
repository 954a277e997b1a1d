#include "pinn/loss.hpp"

#include "pinn/error.hpp"

#include <cmath>

namespace pinn {

using autodiff::Jet2;
using autodiff::TapedJet;
using autodiff::Var;

namespace {

void check_inputs(const CollocationBatch& batch, double beta)
{
    if (batch.interior_spot.empty() || batch.interior_spot.size() != batch.interior_time.size()) {
        throw DomainError("loss: interior region is empty or malformed");
    }
    if (batch.boundary_lower.empty() || batch.boundary_upper.empty()) {
        throw DomainError("loss: boundary region is empty");
    }
    if (batch.terminal.empty()) {
        throw DomainError("loss: terminal region is empty");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw DomainError("loss: beta must be finite and >= 0");
    }
}

// Boundary points pooled (lower then upper) followed by terminal points.
struct EdgePoints {
    std::vector<double> spot;
    std::vector<double> time;
    std::vector<double> target;
    std::size_t n_boundary = 0;
};

EdgePoints edge_points(const CollocationBatch& batch, const OptionSpec& spec)
{
    EdgePoints e;
    e.n_boundary = batch.boundary_lower.size() + batch.boundary_upper.size();
    const std::size_t n = e.n_boundary + batch.terminal.size();
    e.spot.reserve(n);
    e.time.reserve(n);
    e.target.reserve(n);
    for (double t : batch.boundary_lower) {
        e.spot.push_back(spec.s_min);
        e.time.push_back(t);
        e.target.push_back(boundary_value(spec, Boundary::Lower, t));
    }
    for (double t : batch.boundary_upper) {
        e.spot.push_back(spec.s_max);
        e.time.push_back(t);
        e.target.push_back(boundary_value(spec, Boundary::Upper, t));
    }
    for (double s : batch.terminal) {
        e.spot.push_back(s);
        e.time.push_back(spec.maturity);
        e.target.push_back(terminal_value(spec, s));
    }
    return e;
}

LossReport assemble(double sum_bvp, std::size_t n_bvp, double sum_ivp, std::size_t n_ivp, double sum_pde,
                    std::size_t n_pde, double beta)
{
    LossReport r;
    r.mse_bvp = sum_bvp / static_cast<double>(n_bvp);
    r.mse_ivp = sum_ivp / static_cast<double>(n_ivp);
    r.mse_pde = sum_pde / static_cast<double>(n_pde);
    r.beta = beta;
    r.total = r.mse_ivp + r.mse_bvp + beta * r.mse_pde;
    return r;
}

}  // namespace

LossEvaluation compute_loss(const NetworkParams& params, const CollocationBatch& batch, const OptionSpec& spec,
                            double beta, const PutPenaltyWeights& weights)
{
    check_inputs(batch, beta);
    LossEvaluation out;
    out.gradient.assign(params.size(), 0.0);

    // Interior: full jets.
    const BatchPass interior(params, batch.interior_spot, batch.interior_time, JetOrder::Full);
    const auto& v = interior.output();
    const auto n_int = static_cast<Eigen::Index>(batch.interior_spot.size());
    JetBatch adj;
    adj.resize(n_int, JetOrder::Full);
    const double scale = beta / static_cast<double>(n_int);
    const bool put = spec.style == OptionStyle::AmericanPut;
    double sum_pde = 0.0;
    for (Eigen::Index i = 0; i < n_int; ++i) {
        const double s = batch.interior_spot[static_cast<std::size_t>(i)];
        const Jet2 jet{v.value(i), v.d_dS(i), v.d2_dS2(i), v.d_dt(i)};
        const double f = bs_operator_generic(spec, jet, s);
        double d_f = 0.0;       // d penalty / d f
        double d_value = 0.0;   // d penalty / d V through the payoff gap
        if (!put) {
            sum_pde += f * f;
            d_f = 2.0 * f;
        } else {
            const double gap = payoff(spec, s) - jet.value;
            const double comp = f * gap;
            const double hf = std::max(f, 0.0);
            const double hv = std::max(gap, 0.0);
            sum_pde += weights.complementarity * (comp * comp) + weights.hinge_f * (hf * hf) +
                       weights.hinge_v * (hv * hv);
            d_f = 2.0 * weights.complementarity * comp * gap + 2.0 * weights.hinge_f * hf;
            d_value = -2.0 * weights.complementarity * comp * f - 2.0 * weights.hinge_v * hv;
        }
        const double g = scale * d_f;
        adj.d_dt(i) = g;
        adj.d2_dS2(i) = g * 0.5 * spec.sigma * spec.sigma * s * s;
        adj.d_dS(i) = g * spec.rate * s;
        adj.value(i) = -g * spec.rate + scale * d_value;
    }
    interior.accumulate_gradient(adj, out.gradient);

    // Boundary and terminal: values only.
    const EdgePoints e = edge_points(batch, spec);
    const BatchPass edge(params, e.spot, e.time, JetOrder::ValueOnly);
    const auto n_edge = static_cast<Eigen::Index>(e.spot.size());
    const std::size_t n_ivp = batch.terminal.size();
    JetBatch eadj;
    eadj.resize(n_edge, JetOrder::ValueOnly);
    double sum_bvp = 0.0;
    double sum_ivp = 0.0;
    for (Eigen::Index i = 0; i < n_edge; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double r = edge.output().value(i) - e.target[k];
        if (k < e.n_boundary) {
            sum_bvp += r * r;
            eadj.value(i) = 2.0 * r / static_cast<double>(e.n_boundary);
        } else {
            sum_ivp += r * r;
            eadj.value(i) = 2.0 * r / static_cast<double>(n_ivp);
        }
    }
    edge.accumulate_gradient(eadj, out.gradient);

    out.report = assemble(sum_bvp, e.n_boundary, sum_ivp, n_ivp, sum_pde, batch.interior_spot.size(), beta);
    return out;
}

LossEvaluation compute_loss_taped(const NetworkParams& params, const CollocationBatch& batch,
                                  const OptionSpec& spec, double beta, const PutPenaltyWeights& weights)
{
    check_inputs(batch, beta);
    autodiff::Tape tape;
    std::vector<Var> theta;
    theta.reserve(params.size());
    for (double x : params.values()) {
        theta.push_back(tape.parameter(x));
    }
    const auto& cfg = params.config();

    Var sum_pde(0.0);
    for (std::size_t i = 0; i < batch.interior_spot.size(); ++i) {
        const double s = batch.interior_spot[i];
        const TapedJet v =
            forward_taped(cfg, theta, Jet2::seed_spot(s), Jet2::seed_time(batch.interior_time[i]));
        sum_pde += pde_penalty(spec, v, s, weights);
    }
    const EdgePoints e = edge_points(batch, spec);
    Var sum_bvp(0.0);
    Var sum_ivp(0.0);
    for (std::size_t k = 0; k < e.spot.size(); ++k) {
        const Var r = forward_taped(cfg, theta, Jet2::constant(e.spot[k]), Jet2::constant(e.time[k])).value -
                      e.target[k];
        (k < e.n_boundary ? sum_bvp : sum_ivp) += r * r;
    }
    const double n_pde = static_cast<double>(batch.interior_spot.size());
    const double n_bvp = static_cast<double>(e.n_boundary);
    const double n_ivp = static_cast<double>(batch.terminal.size());
    const Var total = sum_ivp / n_ivp + sum_bvp / n_bvp + beta * (sum_pde / n_pde);

    LossEvaluation out;
    out.report = assemble(sum_bvp.value(), e.n_boundary, sum_ivp.value(), batch.terminal.size(), sum_pde.value(),
                          batch.interior_spot.size(), beta);
    out.gradient = autodiff::tape_gradient(tape, total);
    return out;
}

LossReport evaluate_loss(const JetModel& model, const CollocationBatch& batch, const OptionSpec& spec, double beta,
                         const PutPenaltyWeights& weights)
{
    check_inputs(batch, beta);
    double sum_pde = 0.0;
    for (std::size_t i = 0; i < batch.interior_spot.size(); ++i) {
        const double s = batch.interior_spot[i];
        sum_pde += pde_penalty(spec, model(s, batch.interior_time[i]), s, weights);
    }
    const EdgePoints e = edge_points(batch, spec);
    double sum_bvp = 0.0;
    double sum_ivp = 0.0;
    for (std::size_t k = 0; k < e.spot.size(); ++k) {
        const double r = model(e.spot[k], e.time[k]).value - e.target[k];
        (k < e.n_boundary ? sum_bvp : sum_ivp) += r * r;
    }
    return assemble(sum_bvp, e.n_boundary, sum_ivp, batch.terminal.size(), sum_pde, batch.interior_spot.size(), beta);
}

}  // namespace pinn
