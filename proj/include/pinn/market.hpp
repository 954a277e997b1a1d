#pragma once

#include "pinn/conditions.hpp"
#include "pinn/network.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pinn::market {

using Date = std::chrono::sys_days;

/// Strict YYYY-MM-DD; DataError otherwise.
Date parse_date(std::string_view text);
std::string format_date(Date d);

struct QuoteRecord {
    Date trade_date{};
    Date expiry_date{};
    double bid = 0.0;
    double ask = 0.0;
    double strike = 0.0;
    double implied_vol = 0.0;
    double spot = 0.0;

    /// Throws DataError naming the violated invariant.
    void validate() const;
    bool operator==(const QuoteRecord&) const = default;
};

struct YieldObservation {
    Date date{};
    double yield = 0.0;
    bool operator==(const YieldObservation&) const = default;
};

struct YieldSeries {
    std::vector<YieldObservation> observations;  ///< strictly ascending dates
    void validate() const;
};

struct RowError {
    std::size_t line = 0;  ///< 1-based, header is line 1
    std::string message;
};

template <typename T>
struct LoadResult {
    T records;
    std::vector<RowError> errors;
};

inline constexpr const char* quotes_header = "trade_date,expiry_date,bid,ask,strike,implied_vol,spot";
inline constexpr const char* yields_header = "date,yield";

/// Header violations and unreadable files throw DataError; bad rows are
/// skipped and reported with their line number.
LoadResult<std::vector<QuoteRecord>> load_quotes(const std::string& path);
LoadResult<YieldSeries> load_yields(const std::string& path);

void write_quotes(const std::string& path, const std::vector<QuoteRecord>& quotes);

double midpoint(double bid, double ask);

/// Mean of the yields observed on [start, end], both inclusive.
double derive_rate(const YieldSeries& yields, Date start, Date end);

/// Years to expiry with a 365.25-day year.
double time_to_expiry(const QuoteRecord& q);

/// Model time t = T - time_to_expiry.
double model_time(const OptionSpec& spec, const QuoteRecord& q);

/// Prices a quote at its mapped model inputs.
using Pricer = std::function<double(double spot, double time)>;

struct EvalReport {
    double rmse_pinn = 0.0;
    double rmse_benchmark = 0.0;
    double corr_pinn = 0.0;       ///< NaN when undefined
    double corr_benchmark = 0.0;  ///< NaN when undefined
    bool corr_pinn_defined = false;
    bool corr_benchmark_defined = false;
    std::size_t n_quotes = 0;     ///< quotes used
    std::size_t n_excluded = 0;
};

struct EvalPoint {
    double prediction = 0.0;
    double benchmark = 0.0;
    double market = 0.0;
};

/// Pearson correlation; NaN and defined = false for n < 2 or zero variance.
struct Correlation {
    double value = 0.0;
    bool defined = false;
};
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Quotes outside [s_min, s_max] x [0, T] or with strike != spec.strike are
/// excluded and counted. Throws DataError if nothing remains.
EvalReport evaluate(const OptionSpec& spec, const std::vector<QuoteRecord>& quotes, const Pricer& model,
                    const Pricer& benchmark);
EvalReport evaluate(const NetworkParams& params, const OptionSpec& spec, const std::vector<QuoteRecord>& quotes,
                    const Pricer& benchmark);

/// Metrics over already-mapped points; order-independent to the last bit.
EvalReport summarize(std::vector<EvalPoint> points, std::size_t n_excluded);

void write_report_csv(const std::string& path, const EvalReport& report);
std::string format_report_table(const EvalReport& report);

struct SyntheticConfig {
    std::size_t n_quotes = 200;
    double noise_sigma = 0.05;
    double half_spread = 0.01;
    double spot_lo = 28.0;
    double spot_hi = 48.0;
    int min_days = 30;
    int max_days = 360;
    int binomial_steps = 2000;
    std::uint64_t seed = 7;
    Date first_trade = parse_date("2023-01-03");
};

/// American put quotes: binomial value plus N(0, noise_sigma) noise on the
/// mid, clipped at zero, with a symmetric spread around it.
std::vector<QuoteRecord> synthetic_put_quotes(const OptionSpec& spec, const SyntheticConfig& config);

}  // namespace pinn::market
