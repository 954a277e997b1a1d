#include "pinn/baselines.hpp"

#include "pinn/error.hpp"
#include "pinn/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <string>

namespace pinn {

using autodiff::Jet2;

PriceSurface::PriceSurface(std::vector<double> spot_grid, std::vector<double> time_grid)
    : spots(std::move(spot_grid)), times(std::move(time_grid)), values(spots.size() * times.size(), 0.0)
{
}

void PriceSurface::validate() const
{
    if (spots.empty() || times.empty() || values.size() != spots.size() * times.size()) {
        throw DomainError("price surface: grid sizes do not match values");
    }
    for (std::size_t i = 1; i < spots.size(); ++i) {
        if (!(spots[i] > spots[i - 1])) {
            throw DomainError("price surface: spot grid not strictly ascending");
        }
    }
    for (std::size_t j = 1; j < times.size(); ++j) {
        if (!(times[j] > times[j - 1])) {
            throw DomainError("price surface: time grid not strictly ascending");
        }
    }
}

namespace {

// Index i and weight w with x ~ (1 - w) g[i] + w g[i + 1]; clamps at the ends.
std::pair<std::size_t, double> bracket(const std::vector<double>& g, double x)
{
    if (g.size() == 1 || x <= g.front()) {
        return {0, 0.0};
    }
    if (x >= g.back()) {
        return {g.size() - 2, 1.0};
    }
    const auto it = std::upper_bound(g.begin(), g.end(), x);
    const auto i = static_cast<std::size_t>(it - g.begin()) - 1;
    return {i, (x - g[i]) / (g[i + 1] - g[i])};
}

}  // namespace

double PriceSurface::interpolate(double spot, double time) const
{
    const auto [i, wi] = bracket(spots, spot);
    const auto [j, wj] = bracket(times, time);
    const std::size_t i1 = std::min(i + 1, spots.size() - 1);
    const std::size_t j1 = std::min(j + 1, times.size() - 1);
    const double v0 = (1.0 - wj) * at(i, j) + wj * at(i, j1);
    const double v1 = (1.0 - wj) * at(i1, j) + wj * at(i1, j1);
    return (1.0 - wi) * v0 + wi * v1;
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    if (n == 0) {
        return {};
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    v.back() = hi;
    return v;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

// ---------------------------------------------------------------------------
// Closed form
// ---------------------------------------------------------------------------

namespace {

void check_time(const OptionSpec& spec, double time)
{
    if (!(time >= 0.0 && time <= spec.maturity)) {
        throw DomainError("t must lie in [0, maturity]");
    }
}

void check_spot(double spot)
{
    if (spot < 0.0 || std::isnan(spot)) {
        throw DomainError("spot must be non-negative");
    }
}

struct D12 {
    double d1;
    double d2;
    double vol_sqrt_tau;
};

D12 d12(const OptionSpec& spec, double spot, double tau)
{
    const double vst = spec.sigma * std::sqrt(tau);
    const double d1 = (std::log(spot / spec.strike) + (spec.rate + 0.5 * spec.sigma * spec.sigma) * tau) / vst;
    return {d1, d1 - vst, vst};
}

double bs_call(const OptionSpec& spec, double spot, double time)
{
    check_spot(spot);
    check_time(spec, time);
    const double tau = spec.maturity - time;
    if (tau <= 0.0) {
        return std::max(spot - spec.strike, 0.0);
    }
    if (spot == 0.0) {
        return 0.0;
    }
    const auto d = d12(spec, spot, tau);
    return spot * normal_cdf(d.d1) - spec.strike * std::exp(-spec.rate * tau) * normal_cdf(d.d2);
}

}  // namespace

double closed_form_call(const OptionSpec& spec, double spot, double time)
{
    if (spec.style != OptionStyle::EuropeanCall) {
        throw DomainError("closed_form_call requires a European call spec");
    }
    return bs_call(spec, spot, time);
}

Jet2 closed_form_call_jet(const OptionSpec& spec, double spot, double time)
{
    const double value = closed_form_call(spec, spot, time);
    const double tau = spec.maturity - time;
    if (tau <= 0.0) {
        return {value, spot > spec.strike ? 1.0 : 0.0, 0.0, 0.0};
    }
    if (spot == 0.0) {
        return {0.0, 0.0, 0.0, 0.0};
    }
    const auto d = d12(spec, spot, tau);
    const double pdf1 = normal_pdf(d.d1);
    const double delta = normal_cdf(d.d1);
    const double gamma = pdf1 / (spot * d.vol_sqrt_tau);
    const double dv_dt = -spot * pdf1 * spec.sigma / (2.0 * std::sqrt(tau)) -
                         spec.rate * spec.strike * std::exp(-spec.rate * tau) * normal_cdf(d.d2);
    return {value, delta, gamma, dv_dt};
}

double european_put_parity(const OptionSpec& spec, double spot, double time)
{
    const double call = bs_call(spec, spot, time);
    return call - spot + spec.strike * std::exp(-spec.rate * (spec.maturity - time));
}

PriceSurface closed_form_surface(const OptionSpec& spec, const std::vector<double>& spots,
                                 const std::vector<double>& times)
{
    PriceSurface s(spots, times);
    for (std::size_t i = 0; i < spots.size(); ++i) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            s.at(i, j) = closed_form_call(spec, spots[i], times[j]);
        }
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// CRR lattice
// ---------------------------------------------------------------------------

namespace {

struct CrrStep {
    double up;
    double log_up;
    double prob_up;
    double discount;
};

CrrStep crr_step(const OptionSpec& spec, double dt)
{
    const double log_up = spec.sigma * std::sqrt(dt);
    const double u = std::exp(log_up);
    const double d = 1.0 / u;
    const double p = (std::exp(spec.rate * dt) - d) / (u - d);
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("binomial: risk-neutral probability " + text::format_double(p) +
                          " outside (0, 1); time step too large for these parameters");
    }
    return {u, log_up, p, std::exp(-spec.rate * dt)};
}

void check_put(const OptionSpec& spec, int n_steps)
{
    if (spec.style != OptionStyle::AmericanPut) {
        throw DomainError("binomial/fdm put solvers require an American put spec");
    }
    spec.validate();
    if (n_steps < 1) {
        throw DomainError("binomial: n_steps must be >= 1");
    }
}

}  // namespace

PriceSurface binomial_put(const OptionSpec& spec, int n_steps, const std::vector<double>& spots,
                          const std::vector<double>& times)
{
    check_put(spec, n_steps);
    for (double t : times) {
        check_time(spec, t);
    }
    const double dt = spec.maturity / n_steps;
    const CrrStep step = crr_step(spec, dt);
    const double p = step.prob_up;
    const double q = 1.0 - p;
    const auto n = static_cast<std::size_t>(n_steps);

    PriceSurface surface(spots, times);
    // Lattice slots j in [-n, n] map to index j + n.
    std::vector<double> pay(2 * n + 1);
    std::vector<double> cur(2 * n + 1);
    std::vector<double> nxt(2 * n + 1);
    std::vector<double> anchored(n + 1);  // V(S_i, k dt), k = 0..n

    for (std::size_t i = 0; i < spots.size(); ++i) {
        const double s0 = spots[i];
        check_spot(s0);
        for (std::size_t k = 0; k <= 2 * n; ++k) {
            const double node = s0 * std::exp(step.log_up * (static_cast<double>(k) - static_cast<double>(n)));
            pay[k] = std::max(spec.strike - node, 0.0);
        }
        nxt = pay;  // level n
        anchored[n] = pay[n];
        for (std::size_t level = n; level-- > 0;) {
            // Level `level` spans j in [-level, level].
            const std::size_t lo = n - level;
            const std::size_t hi = n + level;
            for (std::size_t k = lo; k <= hi; ++k) {
                const double cont = step.discount * (p * nxt[k + 1] + q * nxt[k - 1]);
                cur[k] = std::max(cont, pay[k]);
            }
            anchored[level] = cur[n];
            std::swap(cur, nxt);
        }
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double x = times[j] / dt;
            const auto k0 = std::min(static_cast<std::size_t>(std::floor(x)), n);
            const double w = std::clamp(x - static_cast<double>(k0), 0.0, 1.0);
            const std::size_t k1 = std::min(k0 + 1, n);
            surface.at(i, j) = (1.0 - w) * anchored[k0] + w * anchored[k1];
        }
    }
    surface.validate();
    return surface;
}

double binomial_put_price(const OptionSpec& spec, double spot, double time, int n_steps)
{
    check_put(spec, n_steps);
    check_spot(spot);
    check_time(spec, time);
    const double tau = spec.maturity - time;
    if (tau <= 0.0) {
        return payoff(spec, spot);
    }
    const CrrStep step = crr_step(spec, tau / n_steps);
    const auto n = static_cast<std::size_t>(n_steps);
    // Node k at level m has spot S u^(2k - m).
    std::vector<double> v(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double node = spot * std::exp(step.log_up * (2.0 * static_cast<double>(k) - static_cast<double>(n)));
        v[k] = std::max(spec.strike - node, 0.0);
    }
    for (std::size_t m = n; m-- > 0;) {
        for (std::size_t k = 0; k <= m; ++k) {
            const double node =
                spot * std::exp(step.log_up * (2.0 * static_cast<double>(k) - static_cast<double>(m)));
            const double cont = step.discount * (step.prob_up * v[k + 1] + (1.0 - step.prob_up) * v[k]);
            v[k] = std::max(cont, std::max(spec.strike - node, 0.0));
        }
    }
    return v[0];
}

// ---------------------------------------------------------------------------
// Crank-Nicolson with projection
// ---------------------------------------------------------------------------

PriceSurface fdm_put(const OptionSpec& spec, int n_s, int n_t)
{
    check_put(spec, 1);
    if (n_s < 3 || n_t < 3) {
        throw DomainError("fdm_put: grid sizes must be >= 3");
    }
    const auto ns = static_cast<std::size_t>(n_s);
    const auto nt = static_cast<std::size_t>(n_t);
    PriceSurface surface(linspace(spec.s_min, spec.s_max, ns + 1), linspace(0.0, spec.maturity, nt + 1));
    const double ds = (spec.s_max - spec.s_min) / n_s;
    const double dt = spec.maturity / n_t;
    const double var = spec.sigma * spec.sigma;

    std::vector<double> pay(ns + 1);
    std::vector<double> v(ns + 1);
    for (std::size_t i = 0; i <= ns; ++i) {
        pay[i] = payoff(spec, surface.spots[i]);
        v[i] = pay[i];
        surface.at(i, nt) = v[i];
    }

    // L V_i = a_i V_{i-1} + b_i V_i + c_i V_{i+1}
    std::vector<double> a(ns + 1), b(ns + 1), c(ns + 1);
    for (std::size_t i = 1; i < ns; ++i) {
        const double s = surface.spots[i];
        const double diff = 0.5 * var * s * s / (ds * ds);
        const double drift = 0.5 * spec.rate * s / ds;
        a[i] = diff - drift;
        b[i] = -2.0 * diff - spec.rate;
        c[i] = diff + drift;
    }

    std::vector<double> rhs(ns + 1), cp(ns + 1), dp(ns + 1);
    for (std::size_t j = nt; j-- > 0;) {
        const double t = surface.times[j];
        const double lower = boundary_value(spec, Boundary::Lower, t);
        const double upper = boundary_value(spec, Boundary::Upper, t);
        for (std::size_t i = 1; i < ns; ++i) {
            rhs[i] = v[i] + 0.5 * dt * (a[i] * v[i - 1] + b[i] * v[i] + c[i] * v[i + 1]);
        }
        rhs[1] += 0.5 * dt * a[1] * lower;
        rhs[ns - 1] += 0.5 * dt * c[ns - 1] * upper;

        // Thomas sweep on (I - dt/2 L).
        for (std::size_t i = 1; i < ns; ++i) {
            const double lo = -0.5 * dt * a[i];
            const double di = 1.0 - 0.5 * dt * b[i];
            const double up = -0.5 * dt * c[i];
            const double denom = i == 1 ? di : di - lo * cp[i - 1];
            if (std::abs(denom) < 1e-300 || !std::isfinite(denom)) {
                throw NumericalError("fdm_put: singular tridiagonal system");
            }
            cp[i] = up / denom;
            dp[i] = (i == 1 ? rhs[i] : rhs[i] - lo * dp[i - 1]) / denom;
        }
        v[ns - 1] = dp[ns - 1];
        for (std::size_t i = ns - 1; i-- > 1;) {
            v[i] = dp[i] - cp[i] * v[i + 1];
        }
        v[0] = lower;
        v[ns] = upper;
        for (std::size_t i = 0; i <= ns; ++i) {
            v[i] = std::max(v[i], pay[i]);
            surface.at(i, j) = v[i];
        }
        surface.at(0, j) = lower;
        surface.at(ns, j) = upper;
        v[0] = lower;
        v[ns] = upper;
    }
    return surface;
}

// ---------------------------------------------------------------------------
// Exercise boundary
// ---------------------------------------------------------------------------

double exercise_tolerance(double strike) { return 1e-4 * strike; }

ExerciseBoundary extract_boundary(const PriceSurface& surface, double strike)
{
    surface.validate();
    const double tol = exercise_tolerance(strike);
    ExerciseBoundary b;
    b.times = surface.times;
    b.spots.assign(surface.times.size(), 0.0);
    for (std::size_t j = 0; j < surface.times.size(); ++j) {
        for (std::size_t i = surface.spots.size(); i-- > 0;) {
            const double s = surface.spots[i];
            if (std::abs(surface.at(i, j) - (strike - s)) <= tol) {
                b.spots[j] = s;
                break;
            }
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

MonteCarloEstimate mc_european_call(const OptionSpec& spec, double spot, double time, std::int64_t n_paths,
                                    std::uint64_t seed)
{
    if (n_paths < 1) {
        throw DomainError("mc_european_call: n_paths must be >= 1");
    }
    check_spot(spot);
    check_time(spec, time);
    if (!(spec.sigma >= 0.0) || spec.strike < 0.0) {
        throw DomainError("mc_european_call: sigma and strike must be non-negative");
    }
    const double tau = spec.maturity - time;
    const double drift = (spec.rate - 0.5 * spec.sigma * spec.sigma) * tau;
    const double vol = spec.sigma * std::sqrt(tau);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Welford running mean / variance of the undiscounted payoff.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t k = 1; k <= n_paths; ++k) {
        const double terminal = spot * std::exp(drift + vol * normal(rng));
        const double x = std::max(terminal - spec.strike, 0.0);
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    const double disc = std::exp(-spec.rate * tau);
    const double var = n_paths > 1 ? m2 / static_cast<double>(n_paths - 1) : 0.0;
    return {disc * mean, disc * std::sqrt(var / static_cast<double>(n_paths))};
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_surface_csv(const std::string& path, const PriceSurface& surface)
{
    surface.validate();
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    out << "S,t,V\n";
    for (std::size_t i = 0; i < surface.spots.size(); ++i) {
        for (std::size_t j = 0; j < surface.times.size(); ++j) {
            out << text::format_double(surface.spots[i]) << ',' << text::format_double(surface.times[j]) << ','
                << text::format_double(surface.at(i, j)) << '\n';
        }
    }
}

PriceSurface read_surface_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open surface '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path + ": empty surface file");
    }
    const auto header = text::split(text::trim(line), ',');
    if (header.size() < 3 || header[0] != "S" || header[1] != "t" || header[2] != "V") {
        throw DataError(path + ": surface header must start with S,t,V");
    }
    std::map<double, std::map<double, double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        const auto cells = text::split(text::trim(line), ',');
        if (cells.size() < 3) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected at least 3 columns");
        }
        try {
            rows[text::parse_double(cells[0])][text::parse_double(cells[1])] = text::parse_double(cells[2]);
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (rows.empty()) {
        throw DataError(path + ": surface has no rows");
    }
    std::vector<double> spots;
    std::vector<double> times;
    for (const auto& [s, col] : rows) {
        spots.push_back(s);
    }
    for (const auto& [t, v] : rows.begin()->second) {
        times.push_back(t);
    }
    PriceSurface surface(spots, times);
    std::size_t i = 0;
    for (const auto& [s, col] : rows) {
        if (col.size() != times.size()) {
            throw DataError(path + ": surface is not a full rectangular grid");
        }
        std::size_t j = 0;
        for (const auto& [t, v] : col) {
            if (t != times[j]) {
                throw DataError(path + ": surface is not a full rectangular grid");
            }
            surface.at(i, j) = v;
            ++j;
        }
        ++i;
    }
    return surface;
}

void write_boundary_csv(const std::string& path, const ExerciseBoundary& boundary)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    out << "t,S_f\n";
    for (std::size_t j = 0; j < boundary.times.size(); ++j) {
        out << text::format_double(boundary.times[j]) << ',' << text::format_double(boundary.spots[j]) << '\n';
    }
}

}  // namespace pinn
