#include "pinn/autodiff/tape.hpp"
#include "pinn/error.hpp"
#include "pinn/network.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

using namespace pinn;
using autodiff::Jet2;
using testing_support::rel_err;

namespace {

NetworkParams perturbed(const NetworkConfig& cfg, std::uint64_t seed, double scale = 0.3)
{
    NetworkParams p = init_params(cfg);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    for (double& x : p.values()) {
        x += n(rng);
    }
    return p;
}

NetworkConfig small_config()
{
    NetworkConfig c;
    c.width = 6;
    c.deep_layers = 3;
    c.shallow_layers = 1;
    c.s_shift = 40;
    c.s_scale = 40;
    c.t_scale = 1;
    c.output_scale = 2.5;
    c.seed = 4;
    return c;
}

}  // namespace

TEST(NetworkConfig, Validation)
{
    NetworkConfig c;
    EXPECT_NO_THROW(c.validate());
    c.shallow_layers = c.deep_layers;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.width = 0;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.s_scale = 0;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.t_scale = -1;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(InitParams, DeterministicGivenSeed)
{
    NetworkConfig c;
    c.seed = 17;
    EXPECT_EQ(init_params(c), init_params(c));
    NetworkConfig d = c;
    d.seed = 18;
    EXPECT_NE(init_params(c).values()[0], init_params(d).values()[0]);
}

TEST(InitParams, DefaultShapes)
{
    NetworkConfig c;
    c.width = 64;
    c.deep_layers = 4;
    const NetworkLayout layout(c);
    ASSERT_EQ(layout.deep.size(), 5u);
    EXPECT_EQ(layout.deep[0].fan_in, 2);
    EXPECT_EQ(layout.deep[0].fan_out, 64);
    for (int l = 1; l <= 3; ++l) {
        EXPECT_EQ(layout.deep[l].fan_in, 64);
        EXPECT_EQ(layout.deep[l].fan_out, 64);
        EXPECT_TRUE(layout.deep[l].residual);
    }
    EXPECT_FALSE(layout.deep[0].residual);
    EXPECT_EQ(layout.deep[4].fan_in, 64);
    EXPECT_EQ(layout.deep[4].fan_out, 1);
    ASSERT_EQ(layout.shallow.size(), 2u);
    EXPECT_EQ(layout.shallow[0].fan_in, 2);
    EXPECT_EQ(layout.shallow[1].fan_out, 1);

    std::size_t expected = 3;
    for (const auto* branch : {&layout.shallow, &layout.deep}) {
        for (const auto& l : *branch) {
            expected += static_cast<std::size_t>(l.fan_in * l.fan_out + l.fan_out);
        }
    }
    EXPECT_EQ(layout.size, expected);
    const NetworkParams p = init_params(c);
    EXPECT_EQ(p.size(), expected);
    EXPECT_EQ(p.weight(Branch::Deep, 1).rows(), 64);
    EXPECT_EQ(p.weight(Branch::Deep, 1).cols(), 64);
}

TEST(InitParams, XavierBoundZeroBiasesUnitGates)
{
    NetworkConfig c;
    c.seed = 3;
    const NetworkParams p = init_params(c);
    for (Branch b : {Branch::Shallow, Branch::Deep}) {
        const auto& layers = p.layout().branch(b);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const double bound = std::sqrt(6.0 / (layers[l].fan_in + layers[l].fan_out));
            const auto w = p.weight(b, l);
            EXPECT_LE(w.cwiseAbs().maxCoeff(), bound);
            EXPECT_GT(w.cwiseAbs().maxCoeff(), 0.5 * bound);
            EXPECT_EQ(p.bias(b, l).cwiseAbs().maxCoeff(), 0.0);
        }
    }
    EXPECT_EQ(p.w_shallow(), 1.0);
    EXPECT_EQ(p.w_deep(), 1.0);
    EXPECT_EQ(p.bias_out(), 0.0);
    EXPECT_TRUE(p.all_finite());
}

TEST(Forward, AllWeightsZeroGivesBiasOut)
{
    const NetworkConfig c = small_config();
    std::vector<double> v(NetworkLayout(c).size, 0.0);
    v[NetworkLayout(c).bias_out] = 1.75;
    const NetworkParams p(c, v);
    for (double s : {0.0, 13.0, 160.0}) {
        const Jet2 out = forward(p, Jet2::seed_spot(s), Jet2::seed_time(0.3));
        EXPECT_EQ(out.value, 1.75 * c.output_scale);
        EXPECT_EQ(out.d_dS, 0.0);
        EXPECT_EQ(out.d2_dS2, 0.0);
        EXPECT_EQ(out.d_dt, 0.0);
    }
}

TEST(Forward, ZeroDeepGateLeavesShallowBranch)
{
    const NetworkConfig c = small_config();
    NetworkParams p = perturbed(c, 8);
    std::vector<double> v(p.values().begin(), p.values().end());
    v[p.layout().w_deep] = 0.0;
    const NetworkParams gated(c, v);

    // Independent oracle: the one-hidden-layer shallow branch by hand.
    const double s = 52.0;
    const double t = 0.6;
    const Eigen::Vector2d x((s - c.s_shift) / c.s_scale, t / c.t_scale);
    const Eigen::VectorXd hidden =
        (gated.weight(Branch::Shallow, 0) * x + gated.bias(Branch::Shallow, 0)).array().tanh().matrix();
    const double branch = (gated.weight(Branch::Shallow, 1) * hidden)(0) + gated.bias(Branch::Shallow, 1)(0);
    const double expected = c.output_scale * (gated.w_shallow() * branch + gated.bias_out());
    EXPECT_NEAR(evaluate(gated, s, t), expected, 1e-13 * std::abs(expected));

    // Deep parameters no longer matter.
    std::vector<double> w = v;
    for (const auto& l : gated.layout().deep) {
        for (int k = 0; k < l.fan_in * l.fan_out; ++k) {
            w[l.weight_offset + static_cast<std::size_t>(k)] += 0.5;
        }
    }
    EXPECT_EQ(evaluate(NetworkParams(c, w), s, t), evaluate(gated, s, t));
}

TEST(Forward, DerivativesMatchFiniteDifferences)
{
    const NetworkConfig c = small_config();
    const NetworkParams p = perturbed(c, 21);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> spot(5.0, 155.0);
    std::uniform_real_distribution<double> time(0.05, 0.95);
    const double hs = 1e-4 * c.s_scale;
    const double ht = 1e-4 * c.t_scale;
    for (int k = 0; k < 100; ++k) {
        const double s = spot(rng);
        const double t = time(rng);
        const Jet2 j = forward(p, Jet2::seed_spot(s), Jet2::seed_time(t));
        const double fd1 = (evaluate(p, s + hs, t) - evaluate(p, s - hs, t)) / (2 * hs);
        const double fd2 = (evaluate(p, s + hs, t) - 2 * evaluate(p, s, t) + evaluate(p, s - hs, t)) / (hs * hs);
        const double fdt = (evaluate(p, s, t + ht) - evaluate(p, s, t - ht)) / (2 * ht);
        EXPECT_LT(rel_err(j.d_dS, fd1), 1e-5);
        EXPECT_LT(rel_err(j.d2_dS2, fd2), 1e-5);
        EXPECT_LT(rel_err(j.d_dt, fdt), 1e-5);
        EXPECT_EQ(j.value, evaluate(p, s, t));
    }
}

TEST(Forward, PureFunction)
{
    const NetworkParams p = perturbed(small_config(), 2);
    const Jet2 a = forward(p, Jet2::seed_spot(30.0), Jet2::seed_time(0.2));
    const Jet2 b = forward(p, Jet2::seed_spot(30.0), Jet2::seed_time(0.2));
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.d_dS, b.d_dS);
    EXPECT_EQ(a.d2_dS2, b.d2_dS2);
    EXPECT_EQ(a.d_dt, b.d_dt);
}

TEST(Forward, ResidualConnectionsKeepShapes)
{
    NetworkConfig on = small_config();
    NetworkConfig off = on;
    off.residual_connections = false;
    const NetworkLayout a(on);
    const NetworkLayout b(off);
    EXPECT_EQ(a.size, b.size);
    ASSERT_EQ(a.deep.size(), b.deep.size());
    for (std::size_t l = 0; l < a.deep.size(); ++l) {
        EXPECT_EQ(a.deep[l].fan_in, b.deep[l].fan_in);
        EXPECT_EQ(a.deep[l].fan_out, b.deep[l].fan_out);
        EXPECT_FALSE(b.deep[l].residual);
    }
    const NetworkParams p = perturbed(on, 5);
    const NetworkParams q(off, std::vector<double>(p.values().begin(), p.values().end()));
    EXPECT_NE(evaluate(p, 40.0, 0.5), evaluate(q, 40.0, 0.5));
}

TEST(Forward, NonFiniteInputsAndParametersThrow)
{
    const NetworkConfig c = small_config();
    NetworkParams p = init_params(c);
    EXPECT_THROW(evaluate(p, std::numeric_limits<double>::quiet_NaN(), 0.5), DomainError);
    EXPECT_THROW(evaluate(p, 1.0, std::numeric_limits<double>::infinity()), DomainError);
    p.values()[3] = std::numeric_limits<double>::infinity();
    EXPECT_FALSE(p.all_finite());
    EXPECT_THROW(evaluate(p, 1.0, 0.5), DomainError);
}

TEST(BatchPass, MatchesScalarForward)
{
    NetworkConfig c = small_config();
    const NetworkParams p = perturbed(c, 13);
    std::vector<double> spots{0.0, 3.5, 40.0, 77.0, 160.0};
    std::vector<double> times{1.0, 0.2, 0.5, 0.0, 0.9};
    const BatchPass full(p, spots, times, JetOrder::Full);
    const BatchPass value(p, spots, times, JetOrder::ValueOnly);
    for (std::size_t i = 0; i < spots.size(); ++i) {
        const Jet2 j = forward(p, Jet2::seed_spot(spots[i]), Jet2::seed_time(times[i]));
        const auto k = static_cast<Eigen::Index>(i);
        EXPECT_LT(rel_err(full.output().value(k), j.value), 1e-13);
        EXPECT_LT(rel_err(full.output().d_dS(k), j.d_dS), 1e-13);
        EXPECT_LT(rel_err(full.output().d2_dS2(k), j.d2_dS2), 1e-13);
        EXPECT_LT(rel_err(full.output().d_dt(k), j.d_dt), 1e-13);
        EXPECT_LT(rel_err(value.output().value(k), j.value), 1e-13);
    }
}

TEST(BatchPass, GradientMatchesTapeAndFiniteDifferences)
{
    NetworkConfig c = small_config();
    const NetworkParams p = perturbed(c, 31);
    std::vector<double> spots{12.0, 41.0, 95.0};
    std::vector<double> times{0.1, 0.5, 0.8};
    // Objective: sum_i a_i V + b_i V_S + c_i V_SS + d_i V_t with fixed weights.
    JetBatch adj;
    adj.resize(3, JetOrder::Full);
    adj.value << 0.3, -1.1, 0.7;
    adj.d_dS << 2.0, 0.4, -0.9;
    adj.d2_dS2 << 50.0, -20.0, 10.0;
    adj.d_dt << -0.5, 0.25, 1.5;

    const BatchPass pass(p, spots, times, JetOrder::Full);
    std::vector<double> grad(p.size(), 0.0);
    pass.accumulate_gradient(adj, grad);

    autodiff::Tape tape;
    std::vector<autodiff::Var> theta;
    for (double x : p.values()) {
        theta.push_back(tape.parameter(x));
    }
    autodiff::Var total(0.0);
    for (int i = 0; i < 3; ++i) {
        const auto v = forward_taped(c, theta, Jet2::seed_spot(spots[i]), Jet2::seed_time(times[i]));
        total = total + adj.value(i) * v.value + adj.d_dS(i) * v.d_dS + adj.d2_dS2(i) * v.d2_dS2 +
                adj.d_dt(i) * v.d_dt;
    }
    const auto tape_grad = autodiff::tape_gradient(tape, total);

    auto objective = [&](const NetworkParams& q) {
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Jet2 v = forward(q, Jet2::seed_spot(spots[i]), Jet2::seed_time(times[i]));
            sum += adj.value(i) * v.value + adj.d_dS(i) * v.d_dS + adj.d2_dS2(i) * v.d2_dS2 + adj.d_dt(i) * v.d_dt;
        }
        return sum;
    };
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_LT(rel_err(grad[i], tape_grad[i]), 1e-12) << i;
        NetworkParams up = p;
        NetworkParams dn = p;
        up.values()[i] += h;
        dn.values()[i] -= h;
        EXPECT_LT(rel_err(grad[i], (objective(up) - objective(dn)) / (2 * h)), 1e-5) << i;
    }
}

TEST(BatchPass, LengthMismatchThrows)
{
    const NetworkParams p = init_params(small_config());
    std::vector<double> s{1.0, 2.0};
    std::vector<double> t{0.5};
    EXPECT_THROW(BatchPass(p, s, t, JetOrder::ValueOnly), DomainError);
}

TEST(Checkpoint, StreamRoundTripIsBitExact)
{
    NetworkConfig c = small_config();
    c.residual_connections = false;
    c.seed = 987654321987654321ull;
    const NetworkParams p = perturbed(c, 77, 1.0 / 3.0);
    std::stringstream ss;
    write_params(ss, p);
    const NetworkParams q = read_params(ss);
    EXPECT_EQ(p, q);
    EXPECT_EQ(p.config(), q.config());
}

TEST(Checkpoint, FileRoundTripIsBitExact)
{
    const auto dir = testing_support::scratch_dir("network_ckpt");
    const NetworkParams p = perturbed(NetworkConfig{}, 9);
    save_params((dir / "p.txt").string(), p);
    EXPECT_EQ(load_params((dir / "p.txt").string()), p);
}

TEST(Checkpoint, CorruptInputIsDataError)
{
    std::stringstream bad("not-a-network 1\n");
    EXPECT_THROW(read_params(bad), DataError);

    const NetworkParams p = init_params(small_config());
    std::stringstream ss;
    write_params(ss, p);
    std::string text = ss.str();
    std::stringstream truncated(text.substr(0, text.size() / 2));
    EXPECT_THROW(read_params(truncated), DataError);
    EXPECT_THROW(load_params("/nonexistent/params.txt"), DataError);
}
