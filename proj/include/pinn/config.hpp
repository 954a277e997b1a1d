#pragma once

#include "pinn/conditions.hpp"
#include "pinn/network.hpp"
#include "pinn/trainer.hpp"

#include <string>
#include <vector>

namespace pinn {

/// Everything one training run needs, loaded from a single JSON file.
///
///   {
///     "option":  {"style": "american_put", "strike": 40, "rate": 0.05,
///                 "sigma": 0.2, "maturity": 1, "s_min": 0, "s_max": 160},
///     "network": {"width": 64, "deep_layers": 4, "shallow_layers": 1,
///                 "residual_connections": true, "s_shift": 40, "s_scale": 40,
///                 "t_scale": 1, "output_scale": 40, "seed": 1},
///     "train":   {"epochs": 5000, "learning_rate": 0.001, "adam_beta1": 0.9,
///                 "adam_beta2": 0.999, "adam_eps": 1e-8, "beta_pde": 1,
///                 "checkpoint_every": 0, "seed": 1,
///                 "penalty": {"complementarity": 1, "hinge_f": 1, "hinge_v": 1}},
///     "sampler": {"n_interior": 1000, "n_boundary": 128, "n_terminal": 256, "seed": 1},
///     "output_dir": "runs/put"
///   }
///
/// Every "option" key is required. Other sections and keys are optional;
/// s_shift, s_scale and output_scale default to the strike, t_scale to the
/// maturity.
/// Unknown keys are rejected.
struct RunConfig {
    OptionSpec option;
    NetworkConfig network;
    TrainConfig train;
    std::string output_dir = "out";

    void validate() const;
};

/// Parses JSON text; ConfigError naming the offending key on any problem.
/// Each override is "dotted.key=value" with a JSON or bare-string value.
RunConfig parse_run_config(const std::string& json_text, const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical JSON with every key spelled out; parses back to an equal config.
std::string to_json(const RunConfig& config);

}  // namespace pinn
