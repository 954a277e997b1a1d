#include "pinn/sampler.hpp"

#include "pinn/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pinn {

void SamplerConfig::validate() const
{
    if (n_interior < 1 || n_boundary < 1 || n_terminal < 1) {
        throw DomainError("sampler counts must all be >= 1");
    }
}

namespace {

// Rejection keeps draws strictly inside the requested interval even when
// the distribution rounds onto an endpoint.
double draw_open(std::mt19937_64& rng, std::uniform_real_distribution<double>& dist, double lo, double hi)
{
    double x = dist(rng);
    while (x <= lo || x >= hi) {
        x = dist(rng);
    }
    return x;
}

double draw_below(std::mt19937_64& rng, std::uniform_real_distribution<double>& dist, double hi)
{
    double x = dist(rng);
    while (x >= hi) {
        x = dist(rng);
    }
    return x;
}

}  // namespace

CollocationBatch sample(const SamplerConfig& config, const OptionSpec& spec, std::uint64_t epoch)
{
    config.validate();
    spec.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
    std::mt19937_64 rng(seq);

    std::uniform_real_distribution<double> spot(spec.s_min, spec.s_max);
    std::uniform_real_distribution<double> time_open(0.0, spec.maturity);  // [0, T)
    // Closed [0, T] for boundary times.
    std::uniform_real_distribution<double> time_closed(0.0, std::nextafter(spec.maturity, 2.0 * spec.maturity));
    std::uniform_real_distribution<double> spot_closed(spec.s_min, std::nextafter(spec.s_max, 2.0 * spec.s_max));

    CollocationBatch b;
    b.interior_spot.resize(static_cast<std::size_t>(config.n_interior));
    b.interior_time.resize(static_cast<std::size_t>(config.n_interior));
    for (std::size_t i = 0; i < b.interior_spot.size(); ++i) {
        b.interior_spot[i] = draw_open(rng, spot, spec.s_min, spec.s_max);
        b.interior_time[i] = draw_below(rng, time_open, spec.maturity);
    }
    b.boundary_lower.resize(static_cast<std::size_t>(config.n_boundary));
    b.boundary_upper.resize(static_cast<std::size_t>(config.n_boundary));
    for (auto& t : b.boundary_lower) {
        t = std::min(time_closed(rng), spec.maturity);
    }
    for (auto& t : b.boundary_upper) {
        t = std::min(time_closed(rng), spec.maturity);
    }
    b.terminal.resize(static_cast<std::size_t>(config.n_terminal));
    for (auto& s : b.terminal) {
        s = std::min(spot_closed(rng), spec.s_max);
    }
    return b;
}

}  // namespace pinn
