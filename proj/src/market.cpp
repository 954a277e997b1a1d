#include "pinn/market.hpp"

#include "pinn/baselines.hpp"
#include "pinn/error.hpp"
#include "pinn/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

namespace pinn::market {

namespace {

constexpr double days_per_year = 365.25;

bool all_digits(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string_view> header_cells(const std::string& path, std::istream& in, const char* expected)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path + ": missing header, expected '" + expected + "'");
    }
    const auto got = text::trim(line);
    if (got != expected) {
        throw DataError(path + ": bad header '" + std::string(got) + "', expected '" + expected + "'");
    }
    return text::split(got, ',');
}

}  // namespace

Date parse_date(std::string_view s)
{
    s = text::trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) ||
        !all_digits(s.substr(8, 2))) {
        throw DataError("unparseable date '" + std::string(s) + "', expected YYYY-MM-DD");
    }
    const auto y = static_cast<int>(text::parse_int(s.substr(0, 4)));
    const auto m = static_cast<unsigned>(text::parse_int(s.substr(5, 2)));
    const auto d = static_cast<unsigned>(text::parse_int(s.substr(8, 2)));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
        throw DataError("invalid calendar date '" + std::string(s) + "'");
    }
    return Date{ymd};
}

std::string format_date(Date d)
{
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

void QuoteRecord::validate() const
{
    if (!std::isfinite(bid) || !std::isfinite(ask) || !std::isfinite(strike) || !std::isfinite(implied_vol) ||
        !std::isfinite(spot)) {
        throw DataError("non-finite field");
    }
    if (bid < 0.0) {
        throw DataError("bid must be >= 0");
    }
    if (bid > ask) {
        throw DataError("bid " + text::format_double(bid) + " exceeds ask " + text::format_double(ask));
    }
    if (!(expiry_date > trade_date)) {
        throw DataError("expiry_date must be after trade_date");
    }
    if (!(implied_vol > 0.0)) {
        throw DataError("implied_vol must be > 0");
    }
    if (!(spot > 0.0)) {
        throw DataError("spot must be > 0");
    }
    if (!(strike > 0.0)) {
        throw DataError("strike must be > 0");
    }
}

void YieldSeries::validate() const
{
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (!std::isfinite(observations[i].yield)) {
            throw DataError("yield on " + format_date(observations[i].date) + " is not finite");
        }
        if (i > 0 && !(observations[i].date > observations[i - 1].date)) {
            throw DataError("yield dates not strictly ascending at " + format_date(observations[i].date));
        }
    }
}

LoadResult<std::vector<QuoteRecord>> load_quotes(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open quotes file '" + path + "'");
    }
    const auto columns = header_cells(path, in, quotes_header).size();
    LoadResult<std::vector<QuoteRecord>> out;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = text::trim(line);
        if (row.empty()) {
            continue;
        }
        const auto cells = text::split(row, ',');
        try {
            if (cells.size() != columns) {
                throw DataError("expected " + std::to_string(columns) + " columns, got " +
                                std::to_string(cells.size()));
            }
            QuoteRecord q;
            q.trade_date = parse_date(cells[0]);
            q.expiry_date = parse_date(cells[1]);
            q.bid = text::parse_double(cells[2]);
            q.ask = text::parse_double(cells[3]);
            q.strike = text::parse_double(cells[4]);
            q.implied_vol = text::parse_double(cells[5]);
            q.spot = text::parse_double(cells[6]);
            q.validate();
            out.records.push_back(q);
        } catch (const DataError& e) {
            out.errors.push_back({line_no, e.what()});
        }
    }
    return out;
}

LoadResult<YieldSeries> load_yields(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open yields file '" + path + "'");
    }
    header_cells(path, in, yields_header);
    LoadResult<YieldSeries> out;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = text::trim(line);
        if (row.empty()) {
            continue;
        }
        const auto cells = text::split(row, ',');
        try {
            if (cells.size() != 2) {
                throw DataError("expected 2 columns, got " + std::to_string(cells.size()));
            }
            YieldObservation obs{parse_date(cells[0]), text::parse_double(cells[1])};
            if (!std::isfinite(obs.yield)) {
                throw DataError("yield is not finite");
            }
            auto& series = out.records.observations;
            if (!series.empty() && !(obs.date > series.back().date)) {
                throw DataError("date " + format_date(obs.date) + " not after previous row");
            }
            series.push_back(obs);
        } catch (const DataError& e) {
            out.errors.push_back({line_no, e.what()});
        }
    }
    return out;
}

void write_quotes(const std::string& path, const std::vector<QuoteRecord>& quotes)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    out << quotes_header << '\n';
    for (const auto& q : quotes) {
        out << format_date(q.trade_date) << ',' << format_date(q.expiry_date) << ',' << text::format_double(q.bid)
            << ',' << text::format_double(q.ask) << ',' << text::format_double(q.strike) << ','
            << text::format_double(q.implied_vol) << ',' << text::format_double(q.spot) << '\n';
    }
}

double midpoint(double bid, double ask)
{
    if (bid < 0.0 || bid > ask || !std::isfinite(bid) || !std::isfinite(ask)) {
        throw DomainError("midpoint: need 0 <= bid <= ask, got bid " + text::format_double(bid) + " ask " +
                          text::format_double(ask));
    }
    return std::clamp((bid + ask) / 2.0, bid, ask);
}

double derive_rate(const YieldSeries& yields, Date start, Date end)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& obs : yields.observations) {
        if (obs.date >= start && obs.date <= end) {
            sum += obs.yield;
            ++n;
        }
    }
    if (n == 0) {
        throw DataError("derive_rate: no yield observations between " + format_date(start) + " and " +
                        format_date(end));
    }
    return sum / static_cast<double>(n);
}

double time_to_expiry(const QuoteRecord& q)
{
    return static_cast<double>((q.expiry_date - q.trade_date).count()) / days_per_year;
}

double model_time(const OptionSpec& spec, const QuoteRecord& q) { return spec.maturity - time_to_expiry(q); }

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) {
        return {std::numeric_limits<double>::quiet_NaN(), false};
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        return {std::numeric_limits<double>::quiet_NaN(), false};
    }
    return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), true};
}

EvalReport summarize(std::vector<EvalPoint> points, std::size_t n_excluded)
{
    if (points.empty()) {
        throw DataError("evaluate: every quote was excluded (" + std::to_string(n_excluded) + " outside the domain)");
    }
    // Canonical order makes the floating-point sums independent of input order.
    std::sort(points.begin(), points.end(), [](const EvalPoint& a, const EvalPoint& b) {
        return std::tie(a.market, a.prediction, a.benchmark) < std::tie(b.market, b.prediction, b.benchmark);
    });
    std::vector<double> pred;
    std::vector<double> bench;
    std::vector<double> mkt;
    double se_pinn = 0.0;
    double se_bench = 0.0;
    for (const auto& p : points) {
        pred.push_back(p.prediction);
        bench.push_back(p.benchmark);
        mkt.push_back(p.market);
        se_pinn += (p.prediction - p.market) * (p.prediction - p.market);
        se_bench += (p.benchmark - p.market) * (p.benchmark - p.market);
    }
    const auto n = static_cast<double>(points.size());
    EvalReport r;
    r.rmse_pinn = std::sqrt(se_pinn / n);
    r.rmse_benchmark = std::sqrt(se_bench / n);
    const auto cp = pearson(pred, mkt);
    const auto cb = pearson(bench, mkt);
    r.corr_pinn = cp.value;
    r.corr_pinn_defined = cp.defined;
    r.corr_benchmark = cb.value;
    r.corr_benchmark_defined = cb.defined;
    r.n_quotes = points.size();
    r.n_excluded = n_excluded;
    return r;
}

EvalReport evaluate(const OptionSpec& spec, const std::vector<QuoteRecord>& quotes, const Pricer& model,
                    const Pricer& benchmark)
{
    if (quotes.empty()) {
        throw DataError("evaluate: no quotes");
    }
    std::vector<EvalPoint> points;
    std::size_t excluded = 0;
    const double strike_tol = 1e-9 * std::max(1.0, std::abs(spec.strike));
    for (const auto& q : quotes) {
        const double t = model_time(spec, q);
        const bool inside = q.spot >= spec.s_min && q.spot <= spec.s_max && t >= 0.0 && t <= spec.maturity &&
                            std::abs(q.strike - spec.strike) <= strike_tol;
        if (!inside) {
            ++excluded;
            continue;
        }
        points.push_back({model(q.spot, t), benchmark(q.spot, t), midpoint(q.bid, q.ask)});
    }
    return summarize(std::move(points), excluded);
}

EvalReport evaluate(const NetworkParams& params, const OptionSpec& spec, const std::vector<QuoteRecord>& quotes,
                    const Pricer& benchmark)
{
    return evaluate(
        spec, quotes, [&](double s, double t) { return pinn::evaluate(params, s, t); }, benchmark);
}

namespace {

std::string metric(double x, bool defined)
{
    return defined ? text::format_double(x) : std::string("nan");
}

}  // namespace

void write_report_csv(const std::string& path, const EvalReport& r)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    out << "metric,value\n";
    out << "rmse_pinn," << text::format_double(r.rmse_pinn) << '\n';
    out << "rmse_benchmark," << text::format_double(r.rmse_benchmark) << '\n';
    out << "corr_pinn," << metric(r.corr_pinn, r.corr_pinn_defined) << '\n';
    out << "corr_benchmark," << metric(r.corr_benchmark, r.corr_benchmark_defined) << '\n';
    out << "n_quotes," << r.n_quotes << '\n';
    out << "n_excluded," << r.n_excluded << '\n';
}

std::string format_report_table(const EvalReport& r)
{
    auto cell = [](double x, bool defined) {
        if (!defined) {
            return std::string("     n/a (flagged)");
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%18.6f", x);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "                      PINN          Benchmark\n";
    os << "RMSE vs market " << cell(r.rmse_pinn, true) << ' ' << cell(r.rmse_benchmark, true) << '\n';
    os << "corr vs market " << cell(r.corr_pinn, r.corr_pinn_defined) << ' '
       << cell(r.corr_benchmark, r.corr_benchmark_defined) << '\n';
    os << "quotes used: " << r.n_quotes << ", excluded: " << r.n_excluded << '\n';
    return os.str();
}

std::vector<QuoteRecord> synthetic_put_quotes(const OptionSpec& spec, const SyntheticConfig& config)
{
    if (spec.style != OptionStyle::AmericanPut) {
        throw DomainError("synthetic quotes are generated for an American put spec");
    }
    if (config.min_days < 1 || config.max_days < config.min_days ||
        static_cast<double>(config.max_days) / days_per_year > spec.maturity) {
        throw DomainError("synthetic quotes: expiry window must lie within the maturity");
    }
    if (!(config.spot_lo > spec.s_min) || !(config.spot_hi <= spec.s_max) || !(config.spot_hi > config.spot_lo)) {
        throw DomainError("synthetic quotes: spot range must lie inside the spec domain");
    }
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> spot(config.spot_lo, config.spot_hi);
    std::uniform_int_distribution<int> days(config.min_days, config.max_days);
    std::uniform_int_distribution<int> trade_offset(0, 180);
    std::normal_distribution<double> noise(0.0, config.noise_sigma);

    std::vector<QuoteRecord> out;
    out.reserve(config.n_quotes);
    for (std::size_t k = 0; k < config.n_quotes; ++k) {
        QuoteRecord q;
        q.trade_date = config.first_trade + std::chrono::days{trade_offset(rng)};
        q.expiry_date = q.trade_date + std::chrono::days{days(rng)};
        q.strike = spec.strike;
        q.implied_vol = spec.sigma;
        // Two decimals, as a quoted spot would be.
        q.spot = std::round(spot(rng) * 100.0) / 100.0;
        const double value = binomial_put_price(spec, q.spot, model_time(spec, q), config.binomial_steps);
        const double mid = std::max(value + noise(rng), 0.0);
        q.bid = std::max(mid - config.half_spread, 0.0);
        q.ask = q.bid == 0.0 ? 2.0 * mid : mid + config.half_spread;
        out.push_back(q);
    }
    return out;
}

}  // namespace pinn::market
