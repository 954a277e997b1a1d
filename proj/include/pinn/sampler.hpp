#pragma once

#include "pinn/conditions.hpp"

#include <cstdint>
#include <vector>

namespace pinn {

struct SamplerConfig {
    int n_interior = 1000;
    int n_boundary = 128;
    int n_terminal = 256;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One epoch of collocation points. Interior points lie in
/// (s_min, s_max) x [0, T); boundary entries are times on [0, T] for the
/// S = s_min and S = s_max edges; terminal entries are spots at t = T.
struct CollocationBatch {
    std::vector<double> interior_spot;
    std::vector<double> interior_time;
    std::vector<double> boundary_lower;
    std::vector<double> boundary_upper;
    std::vector<double> terminal;

    bool operator==(const CollocationBatch&) const = default;
};

/// Uniform i.i.d. draws; a pure function of (config.seed, epoch).
CollocationBatch sample(const SamplerConfig& config, const OptionSpec& spec, std::uint64_t epoch);

}  // namespace pinn
