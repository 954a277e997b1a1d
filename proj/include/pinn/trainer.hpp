#pragma once

#include "pinn/conditions.hpp"
#include "pinn/loss.hpp"
#include "pinn/network.hpp"
#include "pinn/sampler.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pinn {

struct TrainConfig {
    int epochs = 5000;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double beta_pde = 1.0;
    PutPenaltyWeights penalty;
    SamplerConfig sampler;
    int checkpoint_every = 0;  ///< 0 disables periodic checkpoints
    /// Run seed, mixed into the collocation stream (see collocation_seed()).
    std::uint64_t seed = 0;

    void validate() const;
};

/// Seed handed to the sampler: the sampler's own seed combined with the run seed.
std::uint64_t collocation_seed(const TrainConfig& config);

struct AdamMoments {
    std::vector<double> first;
    std::vector<double> second;

    explicit AdamMoments(std::size_t n = 0) : first(n, 0.0), second(n, 0.0) {}
    bool operator==(const AdamMoments&) const = default;
};

/// One bias-corrected Adam update of `theta` in place. `step_index` is the
/// 1-based update count. Throws DomainError on shape mismatch.
void adam_step(std::span<double> theta, std::span<const double> gradient, AdamMoments& moments,
               std::int64_t step_index, const TrainConfig& config);

struct TrainingTrace {
    std::vector<LossReport> losses;  ///< one per epoch run
    std::vector<double> seconds;     ///< wall clock per epoch
};

/// Everything needed to continue a run bit-identically.
struct TrainState {
    NetworkParams params;
    AdamMoments moments;
    std::int64_t epochs_done = 0;
};

struct TrainHooks {
    std::function<void(std::int64_t epoch, const LossReport&)> on_epoch;
    std::function<void(const TrainState&)> on_checkpoint;
};

struct TrainResult {
    NetworkParams params;
    TrainingTrace trace;
    TrainState state;
};

/// epochs x (sample -> compute_loss -> adam_step), starting from
/// init_params(net_config). Throws NumericalError naming the offending loss
/// component and epoch if anything becomes non-finite.
TrainResult train(const OptionSpec& spec, const NetworkConfig& net_config, const TrainConfig& config,
                  const TrainHooks& hooks = {});

/// Continues from `state` until config.epochs epochs have been run in total.
TrainResult resume(const OptionSpec& spec, TrainState state, const TrainConfig& config, const TrainHooks& hooks = {});

/// Training-curve CSV: epoch,mse_ivp,mse_bvp,mse_pde,total. Deterministic for a
/// fixed config; wall-clock time goes to write_timing_csv instead.
void write_curve_csv(const std::string& path, const TrainingTrace& trace, std::int64_t first_epoch = 1);
void write_timing_csv(const std::string& path, const TrainingTrace& trace, std::int64_t first_epoch = 1);

/// Checkpoint: option spec, epoch count, network parameters and Adam moments.
void save_checkpoint(const std::string& path, const OptionSpec& spec, const TrainState& state);

struct Checkpoint {
    OptionSpec spec;
    TrainState state;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace pinn
