#pragma once

#include "pinn/autodiff/jet.hpp"
#include "pinn/conditions.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pinn {

/// Option values on a rectangular (S, t) mesh. values is S-major:
/// V(S_i, t_j) = values[i * times.size() + j].
struct PriceSurface {
    std::vector<double> spots;
    std::vector<double> times;
    std::vector<double> values;

    PriceSurface() = default;
    PriceSurface(std::vector<double> spot_grid, std::vector<double> time_grid);

    double& at(std::size_t i, std::size_t j) { return values[i * times.size() + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * times.size() + j]; }

    /// Bilinear interpolation; clamps outside the grid.
    double interpolate(double spot, double time) const;

    /// Throws DomainError unless grids are strictly ascending and sized to values.
    void validate() const;
};

struct ExerciseBoundary {
    std::vector<double> times;
    std::vector<double> spots;
};

std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Standard normal CDF via the complementary error function.
double normal_cdf(double x);
double normal_pdf(double x);

/// Black-Scholes call value at (S, t); requires spec.style == EuropeanCall.
/// Returns the payoff at t = T and 0 for S = 0.
double closed_form_call(const OptionSpec& spec, double spot, double time);

/// Closed-form call with its analytic delta, gamma and time derivative.
autodiff::Jet2 closed_form_call_jet(const OptionSpec& spec, double spot, double time);

/// European put by put-call parity P = C - S + K e^{-r (T - t)}. Style ignored.
double european_put_parity(const OptionSpec& spec, double spot, double time);

PriceSurface closed_form_surface(const OptionSpec& spec, const std::vector<double>& spots,
                                 const std::vector<double>& times);

/// American put by a CRR lattice with step T / n_steps. Each grid spot gets
/// its own recombining lattice anchored at that spot, so every level holds
/// an exact node at S_i; values between levels are interpolated linearly in t.
PriceSurface binomial_put(const OptionSpec& spec, int n_steps, const std::vector<double>& spots,
                          const std::vector<double>& times);

/// American put at one point from a CRR tree rooted at (S, t) with n_steps
/// over the remaining life T - t.
double binomial_put_price(const OptionSpec& spec, double spot, double time, int n_steps);

/// American put by Crank-Nicolson on a uniform mesh of n_s x n_t intervals,
/// projecting onto the payoff after every step. Dirichlet rows from
/// boundary_value().
PriceSurface fdm_put(const OptionSpec& spec, int n_s, int n_t);

/// Largest grid spot per time with |V - (K - S)| <= 1e-4 K, or 0 if none.
ExerciseBoundary extract_boundary(const PriceSurface& surface, double strike);

double exercise_tolerance(double strike);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

/// Discounted GBM payoff average for a European call at (S, t).
MonteCarloEstimate mc_european_call(const OptionSpec& spec, double spot, double time, std::int64_t n_paths,
                                    std::uint64_t seed);

/// Header S,t,V plus optional extra columns; S-major rows.
void write_surface_csv(const std::string& path, const PriceSurface& surface);
PriceSurface read_surface_csv(const std::string& path);
void write_boundary_csv(const std::string& path, const ExerciseBoundary& boundary);

}  // namespace pinn
