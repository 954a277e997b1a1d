#include "commands.hpp"

#include "pinn/baselines.hpp"
#include "pinn/config.hpp"
#include "pinn/error.hpp"
#include "pinn/market.hpp"
#include "pinn/network.hpp"
#include "pinn/text.hpp"
#include "pinn/trainer.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <optional>
#include <ostream>

namespace pinn::cli {

namespace fs = std::filesystem;
using autodiff::Jet2;

namespace {

// Each epoch allocates and frees activation blocks of a few megabytes. With
// glibc's defaults those go through mmap/munmap, so every epoch pays fresh
// page faults; keeping them on the heap removes that system time.
void keep_large_blocks_on_heap()
{
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

std::string in_dir(const std::string& dir, const std::string& name)
{
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path);
    if (!f) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    return f;
}

struct GridOptions {
    std::size_t s_points = 50;
    std::size_t t_points = 50;
    std::optional<double> s_lo;
    std::optional<double> s_hi;
    std::optional<double> t_lo;
    std::optional<double> t_hi;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--s-points", s_points, "spot grid points")->check(CLI::PositiveNumber);
        cmd->add_option("--t-points", t_points, "time grid points")->check(CLI::PositiveNumber);
        cmd->add_option("--s-lo", s_lo, "lowest spot (default spec s_min)");
        cmd->add_option("--s-hi", s_hi, "highest spot (default spec s_max)");
        cmd->add_option("--t-lo", t_lo, "earliest time (default 0)");
        cmd->add_option("--t-hi", t_hi, "latest time (default maturity)");
    }

    std::vector<double> spots(const OptionSpec& spec) const
    {
        return linspace(s_lo.value_or(spec.s_min), s_hi.value_or(spec.s_max), s_points);
    }
    std::vector<double> times(const OptionSpec& spec) const
    {
        return linspace(t_lo.value_or(0.0), t_hi.value_or(spec.maturity), t_points);
    }
};

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string resume;
    int log_every = 100;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load_run_config(a.config, a.overrides);
    const std::string dir = cfg.output_dir;
    {
        auto f = open_out(in_dir(dir, "config.json"));
        f << to_json(cfg);
    }
    const std::string ckpt_path = in_dir(dir, "checkpoint.txt");
    keep_large_blocks_on_heap();

    TrainHooks hooks;
    hooks.on_epoch = [&](std::int64_t epoch, const LossReport& r) {
        if (a.log_every > 0 && (epoch % a.log_every == 0 || epoch == 1)) {
            err << "epoch " << epoch << " total=" << r.total << " ivp=" << r.mse_ivp << " bvp=" << r.mse_bvp
                << " pde=" << r.mse_pde << '\n';
        }
    };
    hooks.on_checkpoint = [&](const TrainState& s) { save_checkpoint(ckpt_path, cfg.option, s); };

    TrainResult result = [&] {
        if (a.resume.empty()) {
            return train(cfg.option, cfg.network, cfg.train, hooks);
        }
        Checkpoint ck = load_checkpoint(a.resume);
        if (!(ck.spec == cfg.option) || !(ck.state.params.config() == cfg.network)) {
            throw ConfigError("checkpoint '" + a.resume + "' was trained with a different option or network config");
        }
        return resume(cfg.option, std::move(ck.state), cfg.train, hooks);
    }();
    const std::int64_t first = result.state.epochs_done - static_cast<std::int64_t>(result.trace.losses.size()) + 1;
    save_checkpoint(ckpt_path, cfg.option, result.state);
    write_curve_csv(in_dir(dir, "curve.csv"), result.trace, first);
    write_timing_csv(in_dir(dir, "timing.csv"), result.trace, first);
    if (!result.trace.losses.empty()) {
        const auto& last = result.trace.losses.back();
        out << "trained " << result.state.epochs_done << " epochs, final total loss "
            << text::format_double(last.total) << '\n';
    }
    out << "wrote " << ckpt_path << '\n';
    return Ok;
}

// ---------------------------------------------------------------------------

struct SurfaceArgs {
    std::string checkpoint;
    std::string output_dir = "out";
    GridOptions grid;
};

int cmd_surface(const SurfaceArgs& a, std::ostream& out)
{
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const auto spots = a.grid.spots(ck.spec);
    const auto times = a.grid.times(ck.spec);
    const std::string path = in_dir(a.output_dir, "surface.csv");
    auto f = open_out(path);
    f << "S,t,V,delta,gamma,theta\n";
    for (double s : spots) {
        for (double t : times) {
            const Jet2 v = forward(ck.state.params, Jet2::seed_spot(s), Jet2::seed_time(t));
            f << text::format_double(s) << ',' << text::format_double(t) << ',' << text::format_double(v.value)
              << ',' << text::format_double(v.d_dS) << ',' << text::format_double(v.d2_dS2) << ','
              << text::format_double(v.d_dt) << '\n';
        }
    }
    out << "wrote " << path << '\n';
    return Ok;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string method;
    std::int64_t resolution = 0;
    std::uint64_t seed = 1;
    std::optional<std::string> output_dir;
    GridOptions grid;
};

int cmd_bench(const BenchArgs& a, std::ostream& out)
{
    const RunConfig cfg = load_run_config(a.config, a.overrides);
    const OptionSpec& spec = cfg.option;
    const std::string dir = a.output_dir.value_or(cfg.output_dir);
    const auto spots = a.grid.spots(spec);
    const auto times = a.grid.times(spec);
    const std::string surface_path = in_dir(dir, "bench_" + a.method + ".csv");
    const std::string table_path = in_dir(dir, "convergence_" + a.method + ".csv");
    const double atm = spec.strike;

    auto require = [&](OptionStyle style) {
        if (spec.style != style) {
            throw ConfigError("bench method '" + a.method + "' needs option.style = " + std::string(to_string(style)));
        }
    };

    if (a.method == "closed_form") {
        require(OptionStyle::EuropeanCall);
        write_surface_csv(surface_path, closed_form_surface(spec, spots, times));
        auto t = open_out(table_path);
        t << "resolution,value\n0," << text::format_double(closed_form_call(spec, atm, 0.0)) << '\n';
    } else if (a.method == "binomial") {
        require(OptionStyle::AmericanPut);
        const int n = a.resolution > 0 ? static_cast<int>(a.resolution) : 2000;
        write_surface_csv(surface_path, binomial_put(spec, n, spots, times));
        auto t = open_out(table_path);
        t << "resolution,value,abs_change\n";
        double prev = 0.0;
        for (int k : {n / 4, n / 2, n}) {
            if (k < 1) {
                continue;
            }
            const double v = binomial_put_price(spec, atm, 0.0, k);
            t << k << ',' << text::format_double(v) << ',' << (k == n / 4 ? "" : text::format_double(std::abs(v - prev)))
              << '\n';
            prev = v;
        }
    } else if (a.method == "fdm") {
        require(OptionStyle::AmericanPut);
        const int n = a.resolution > 0 ? static_cast<int>(a.resolution) : 400;
        write_surface_csv(surface_path, fdm_put(spec, n, n));
        auto t = open_out(table_path);
        t << "resolution,value,abs_change\n";
        double prev = 0.0;
        bool first = true;
        for (int k : {n / 4, n / 2, n}) {
            if (k < 3) {
                continue;
            }
            const double v = fdm_put(spec, k, k).interpolate(atm, 0.0);
            t << k << ',' << text::format_double(v) << ',' << (first ? "" : text::format_double(std::abs(v - prev)))
              << '\n';
            prev = v;
            first = false;
        }
    } else if (a.method == "mc") {
        require(OptionStyle::EuropeanCall);
        const std::int64_t paths = a.resolution > 0 ? a.resolution : 10000;
        auto f = open_out(surface_path);
        f << "S,t,V,standard_error\n";
        std::uint64_t stream = a.seed;
        for (double s : spots) {
            for (double tt : times) {
                const auto est = mc_european_call(spec, s, tt, paths, stream++);
                f << text::format_double(s) << ',' << text::format_double(tt) << ','
                  << text::format_double(est.estimate) << ',' << text::format_double(est.standard_error) << '\n';
            }
        }
        auto t = open_out(table_path);
        t << "paths,estimate,standard_error,closed_form\n";
        const double exact = closed_form_call(spec, atm, 0.0);
        for (std::int64_t k : {std::max<std::int64_t>(paths / 16, 2), std::max<std::int64_t>(paths / 4, 2), paths}) {
            const auto est = mc_european_call(spec, atm, 0.0, k, a.seed);
            t << k << ',' << text::format_double(est.estimate) << ',' << text::format_double(est.standard_error) << ','
              << text::format_double(exact) << '\n';
        }
    } else {
        throw ConfigError("unknown bench method '" + a.method + "'");
    }
    out << "wrote " << surface_path << " and " << table_path << '\n';
    return Ok;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string quotes;
    std::string yields;
    std::string baseline = "binomial";
    int binomial_steps = 1000;
    int fdm_size = 400;
    std::string output_dir = "out";
};

void report_rows(const std::string& path, const std::vector<market::RowError>& errors, std::ostream& err)
{
    for (const auto& e : errors) {
        err << path << ':' << e.line << ": " << e.message << '\n';
    }
}

int cmd_eval_market(const EvalArgs& a, std::ostream& out, std::ostream& err)
{
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const auto quotes = market::load_quotes(a.quotes);
    report_rows(a.quotes, quotes.errors, err);
    if (quotes.records.empty()) {
        throw DataError(a.quotes + ": no valid quotes");
    }

    OptionSpec bench_spec = ck.spec;
    if (!a.yields.empty()) {
        const auto yields = market::load_yields(a.yields);
        report_rows(a.yields, yields.errors, err);
        auto start = quotes.records.front().trade_date;
        auto end = quotes.records.front().expiry_date;
        for (const auto& q : quotes.records) {
            start = std::min(start, q.trade_date);
            end = std::max(end, q.expiry_date);
        }
        bench_spec.rate = market::derive_rate(yields.records, start, end);
        out << "benchmark rate " << text::format_double(bench_spec.rate) << " (mean yield " << market::format_date(start)
            << " to " << market::format_date(end) << ")\n";
    }

    market::Pricer benchmark;
    std::optional<PriceSurface> fdm;
    if (a.baseline == "binomial") {
        if (bench_spec.style != OptionStyle::AmericanPut) {
            throw ConfigError("baseline 'binomial' prices American puts only");
        }
        benchmark = [&](double s, double t) { return binomial_put_price(bench_spec, s, t, a.binomial_steps); };
    } else if (a.baseline == "fdm") {
        if (bench_spec.style != OptionStyle::AmericanPut) {
            throw ConfigError("baseline 'fdm' prices American puts only");
        }
        fdm = fdm_put(bench_spec, a.fdm_size, a.fdm_size);
        benchmark = [&](double s, double t) { return fdm->interpolate(s, t); };
    } else if (a.baseline == "closed_form") {
        benchmark = [&](double s, double t) {
            return bench_spec.style == OptionStyle::EuropeanCall ? closed_form_call(bench_spec, s, t)
                                                                 : european_put_parity(bench_spec, s, t);
        };
    } else {
        throw ConfigError("unknown baseline '" + a.baseline + "'");
    }

    const auto report = market::evaluate(ck.state.params, ck.spec, quotes.records, benchmark);
    market::write_report_csv(in_dir(a.output_dir, "eval_report.csv"), report);
    const std::string table = market::format_report_table(report);
    {
        auto f = open_out(in_dir(a.output_dir, "eval_report.txt"));
        f << table;
    }
    out << table;
    if (!quotes.errors.empty()) {
        err << quotes.errors.size() << " quote rows rejected\n";
    }
    return Ok;
}

// ---------------------------------------------------------------------------

struct BoundaryArgs {
    std::string surface;
    std::string checkpoint;
    std::optional<double> strike;
    std::string output_dir = "out";
    GridOptions grid;
};

int cmd_boundary(const BoundaryArgs& a, std::ostream& out)
{
    PriceSurface surface;
    double strike = 0.0;
    if (!a.checkpoint.empty()) {
        const Checkpoint ck = load_checkpoint(a.checkpoint);
        surface = PriceSurface(a.grid.spots(ck.spec), a.grid.times(ck.spec));
        for (std::size_t i = 0; i < surface.spots.size(); ++i) {
            for (std::size_t j = 0; j < surface.times.size(); ++j) {
                surface.at(i, j) = evaluate(ck.state.params, surface.spots[i], surface.times[j]);
            }
        }
        strike = a.strike.value_or(ck.spec.strike);
    } else {
        if (!a.strike) {
            throw ConfigError("boundary --surface needs --strike");
        }
        surface = read_surface_csv(a.surface);
        strike = *a.strike;
    }
    const std::string path = in_dir(a.output_dir, "boundary.csv");
    write_boundary_csv(path, extract_boundary(surface, strike));
    out << "wrote " << path << '\n';
    return Ok;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string config;
    std::vector<std::string> overrides;
    market::SyntheticConfig synth;
    std::optional<std::string> output_dir;
};

int cmd_synth(const SynthArgs& a, std::ostream& out)
{
    const RunConfig cfg = load_run_config(a.config, a.overrides);
    const auto quotes = market::synthetic_put_quotes(cfg.option, a.synth);
    const std::string path = in_dir(a.output_dir.value_or(cfg.output_dir), "synthetic_quotes.csv");
    market::write_quotes(path, quotes);
    out << "wrote " << quotes.size() << " quotes to " << path << '\n';
    return Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Black-Scholes PINN pricer: train, price, benchmark and evaluate", "pinn_cli"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a network from a run config");
    train_cmd->add_option("--config", train_args.config, "run config JSON")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--set", train_args.overrides, "override a config key, e.g. train.epochs=100");
    train_cmd->add_option("--resume", train_args.resume, "continue from a checkpoint")->check(CLI::ExistingFile);
    train_cmd->add_option("--log-every", train_args.log_every, "epochs between log lines (0 = quiet)");

    SurfaceArgs surface_args;
    auto* surface_cmd = app.add_subcommand("surface", "dump V and Greeks of a trained network on a grid");
    surface_cmd->add_option("--checkpoint", surface_args.checkpoint)->required()->check(CLI::ExistingFile);
    surface_cmd->add_option("--output-dir", surface_args.output_dir);
    surface_args.grid.attach(surface_cmd);

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "price with a reference method and write a convergence table");
    bench_cmd->add_option("--config", bench_args.config, "run config JSON (option section)")
        ->required()
        ->check(CLI::ExistingFile);
    bench_cmd->add_option("--set", bench_args.overrides);
    bench_cmd->add_option("--method", bench_args.method)
        ->required()
        ->check(CLI::IsMember({"closed_form", "binomial", "fdm", "mc"}));
    bench_cmd->add_option("--resolution", bench_args.resolution, "tree steps, mesh intervals or paths per point");
    bench_cmd->add_option("--seed", bench_args.seed, "Monte Carlo seed");
    bench_cmd->add_option("--output-dir", bench_args.output_dir);
    bench_args.grid.attach(bench_cmd);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval-market", "score a trained network against market quotes");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--quotes", eval_args.quotes)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--yields", eval_args.yields, "yield CSV; sets the benchmark rate")->check(CLI::ExistingFile);
    eval_cmd->add_option("--baseline", eval_args.baseline)->check(CLI::IsMember({"binomial", "fdm", "closed_form"}));
    eval_cmd->add_option("--binomial-steps", eval_args.binomial_steps)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--fdm-size", eval_args.fdm_size)->check(CLI::Range(3, 100000));
    eval_cmd->add_option("--output-dir", eval_args.output_dir);

    BoundaryArgs boundary_args;
    auto* boundary_cmd = app.add_subcommand("boundary", "extract the early-exercise boundary");
    auto* from_surface = boundary_cmd->add_option("--surface", boundary_args.surface, "surface CSV (S,t,V)")
                             ->check(CLI::ExistingFile);
    auto* from_ckpt =
        boundary_cmd->add_option("--checkpoint", boundary_args.checkpoint)->check(CLI::ExistingFile);
    from_surface->excludes(from_ckpt);
    boundary_cmd->add_option("--strike", boundary_args.strike);
    boundary_cmd->add_option("--output-dir", boundary_args.output_dir);
    boundary_args.grid.attach(boundary_cmd);
    boundary_cmd->callback([&] {
        if (boundary_args.surface.empty() && boundary_args.checkpoint.empty()) {
            throw CLI::RequiredError("boundary needs --surface or --checkpoint");
        }
    });

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth-quotes", "generate synthetic American put quotes");
    synth_cmd->add_option("--config", synth_args.config)->required()->check(CLI::ExistingFile);
    synth_cmd->add_option("--set", synth_args.overrides);
    synth_cmd->add_option("--n", synth_args.synth.n_quotes)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--noise", synth_args.synth.noise_sigma)->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--steps", synth_args.synth.binomial_steps)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth_args.synth.seed);
    synth_cmd->add_option("--output-dir", synth_args.output_dir);

    std::vector<std::string> argv_store{"pinn_cli"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) {
        argv.push_back(s.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (train_cmd->parsed()) {
            return cmd_train(train_args, out, err);
        }
        if (surface_cmd->parsed()) {
            return cmd_surface(surface_args, out);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_args, out);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval_market(eval_args, out, err);
        }
        if (boundary_cmd->parsed()) {
            return cmd_boundary(boundary_args, out);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(synth_args, out);
        }
    } catch (const ConfigError& e) {
        err << "pinn_cli: config error: " << e.what() << '\n';
        return Usage;
    } catch (const DomainError& e) {
        err << "pinn_cli: invalid input: " << e.what() << '\n';
        return Usage;
    } catch (const NumericalError& e) {
        err << "pinn_cli: numerical failure: " << e.what() << '\n';
        return Numerical;
    } catch (const DataError& e) {
        err << "pinn_cli: data error: " << e.what() << '\n';
        return Data;
    } catch (const fs::filesystem_error& e) {
        err << "pinn_cli: data error: " << e.what() << '\n';
        return Data;
    } catch (const Error& e) {
        err << "pinn_cli: error: " << e.what() << '\n';
        return Usage;
    }
    return Usage;
}

}  // namespace pinn::cli
