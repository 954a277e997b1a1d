#include "pinn/trainer.hpp"

#include "pinn/error.hpp"
#include "pinn/text.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <string>

namespace pinn {

void TrainConfig::validate() const
{
    if (epochs < 1) {
        throw DomainError("train: epochs must be >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw DomainError("train: learning_rate must be > 0");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw DomainError("train: adam betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) {
        throw DomainError("train: adam_eps must be > 0");
    }
    if (!(beta_pde >= 0.0) || !std::isfinite(beta_pde)) {
        throw DomainError("train: beta_pde must be >= 0");
    }
    if (checkpoint_every < 0) {
        throw DomainError("train: checkpoint_every must be >= 0");
    }
    sampler.validate();
}

std::uint64_t collocation_seed(const TrainConfig& config)
{
    return config.sampler.seed ^ (config.seed * 0x9E3779B97F4A7C15ULL);
}

void adam_step(std::span<double> theta, std::span<const double> gradient, AdamMoments& moments,
               std::int64_t step_index, const TrainConfig& config)
{
    if (theta.size() != gradient.size() || theta.size() != moments.first.size() ||
        theta.size() != moments.second.size()) {
        throw DomainError("adam_step: parameter, gradient and moment sizes differ");
    }
    if (step_index < 1) {
        throw DomainError("adam_step: step_index must be >= 1");
    }
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_index));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_index));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = gradient[i];
        double& m = moments.first[i];
        double& v = moments.second[i];
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        const double m_hat = m / c1;
        const double v_hat = v / c2;
        theta[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
}

namespace {

void check_finite(const LossEvaluation& eval, std::int64_t epoch)
{
    const auto& r = eval.report;
    const char* bad = nullptr;
    if (!std::isfinite(r.mse_ivp)) {
        bad = "mse_ivp";
    } else if (!std::isfinite(r.mse_bvp)) {
        bad = "mse_bvp";
    } else if (!std::isfinite(r.mse_pde)) {
        bad = "mse_pde";
    } else if (!std::isfinite(r.total)) {
        bad = "total";
    } else {
        for (double g : eval.gradient) {
            if (!std::isfinite(g)) {
                bad = "gradient";
                break;
            }
        }
    }
    if (bad != nullptr) {
        throw NumericalError("training diverged: non-finite " + std::string(bad) + " at epoch " +
                             std::to_string(epoch));
    }
}

}  // namespace

TrainResult resume(const OptionSpec& spec, TrainState state, const TrainConfig& config, const TrainHooks& hooks)
{
    spec.validate();
    config.validate();
    if (state.moments.first.size() != state.params.size()) {
        throw DomainError("resume: optimizer state does not match the network");
    }
    SamplerConfig sampler = config.sampler;
    sampler.seed = collocation_seed(config);

    TrainingTrace trace;
    const auto remaining = static_cast<std::size_t>(std::max<std::int64_t>(config.epochs - state.epochs_done, 0));
    trace.losses.reserve(remaining);
    trace.seconds.reserve(remaining);
    using clock = std::chrono::steady_clock;

    for (std::int64_t epoch = state.epochs_done + 1; epoch <= config.epochs; ++epoch) {
        const auto start = clock::now();
        const CollocationBatch batch = sample(sampler, spec, static_cast<std::uint64_t>(epoch));
        LossEvaluation eval = compute_loss(state.params, batch, spec, config.beta_pde, config.penalty);
        check_finite(eval, epoch);
        adam_step(state.params.values(), eval.gradient, state.moments, epoch, config);
        if (!state.params.all_finite()) {
            throw NumericalError("training diverged: non-finite parameters after update at epoch " +
                                 std::to_string(epoch));
        }
        state.epochs_done = epoch;
        trace.losses.push_back(eval.report);
        trace.seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());
        if (hooks.on_epoch) {
            hooks.on_epoch(epoch, eval.report);
        }
        if (hooks.on_checkpoint && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0) {
            hooks.on_checkpoint(state);
        }
    }
    NetworkParams params = state.params;
    return TrainResult{std::move(params), std::move(trace), std::move(state)};
}

TrainResult train(const OptionSpec& spec, const NetworkConfig& net_config, const TrainConfig& config,
                  const TrainHooks& hooks)
{
    NetworkParams params = init_params(net_config);
    AdamMoments moments(params.size());
    return resume(spec, TrainState{std::move(params), std::move(moments), 0}, config, hooks);
}

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    return out;
}

}  // namespace

void write_curve_csv(const std::string& path, const TrainingTrace& trace, std::int64_t first_epoch)
{
    auto out = open_out(path);
    out << "epoch,mse_ivp,mse_bvp,mse_pde,total\n";
    for (std::size_t i = 0; i < trace.losses.size(); ++i) {
        const auto& r = trace.losses[i];
        out << first_epoch + static_cast<std::int64_t>(i) << ',' << text::format_double(r.mse_ivp) << ','
            << text::format_double(r.mse_bvp) << ',' << text::format_double(r.mse_pde) << ','
            << text::format_double(r.total) << '\n';
    }
}

void write_timing_csv(const std::string& path, const TrainingTrace& trace, std::int64_t first_epoch)
{
    auto out = open_out(path);
    out << "epoch,seconds\n";
    for (std::size_t i = 0; i < trace.seconds.size(); ++i) {
        out << first_epoch + static_cast<std::int64_t>(i) << ',' << text::format_double(trace.seconds[i]) << '\n';
    }
}

namespace {

constexpr const char* kCheckpointMagic = "pinn-checkpoint 1";

}  // namespace

void save_checkpoint(const std::string& path, const OptionSpec& spec, const TrainState& state)
{
    auto out = open_out(path);
    out << kCheckpointMagic << '\n';
    out << "style " << to_string(spec.style) << '\n';
    out << "strike " << text::format_double(spec.strike) << '\n';
    out << "rate " << text::format_double(spec.rate) << '\n';
    out << "sigma " << text::format_double(spec.sigma) << '\n';
    out << "maturity " << text::format_double(spec.maturity) << '\n';
    out << "s_min " << text::format_double(spec.s_min) << '\n';
    out << "s_max " << text::format_double(spec.s_max) << '\n';
    out << "epochs_done " << state.epochs_done << '\n';
    write_params(out, state.params);
    const long n = static_cast<long>(state.params.size());
    text::write_tensor(out, "adam.first", state.moments.first, 1, n);
    text::write_tensor(out, "adam.second", state.moments.second, 1, n);
    out << "end pinn-checkpoint\n";
    if (!out) {
        throw DataError("failed writing checkpoint '" + path + "'");
    }
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open checkpoint '" + path + "'");
    }
    if (text::trim(text::next_line(in, "header")) != kCheckpointMagic) {
        throw DataError("'" + path + "' is not a training checkpoint");
    }
    OptionSpec spec;
    try {
        spec.style = parse_option_style(text::expect_key(in, "style"));
    } catch (const DomainError& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
    spec.strike = text::parse_double(text::expect_key(in, "strike"));
    spec.rate = text::parse_double(text::expect_key(in, "rate"));
    spec.sigma = text::parse_double(text::expect_key(in, "sigma"));
    spec.maturity = text::parse_double(text::expect_key(in, "maturity"));
    spec.s_min = text::parse_double(text::expect_key(in, "s_min"));
    spec.s_max = text::parse_double(text::expect_key(in, "s_max"));
    const auto epochs_done = text::parse_int(text::expect_key(in, "epochs_done"));
    NetworkParams params = read_params(in);
    AdamMoments moments(params.size());
    const long n = static_cast<long>(params.size());
    text::read_tensor(in, "adam.first", moments.first, 1, n);
    text::read_tensor(in, "adam.second", moments.second, 1, n);
    if (text::trim(text::next_line(in, "trailer")) != "end pinn-checkpoint") {
        throw DataError("checkpoint: missing trailer");
    }
    try {
        spec.validate();
    } catch (const DomainError& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
    return Checkpoint{spec, TrainState{std::move(params), std::move(moments), epochs_done}};
}

}  // namespace pinn
