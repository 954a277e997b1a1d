#pragma once

#include "pinn/autodiff/jet.hpp"
#include "pinn/autodiff/tape.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pinn {

/// Shape of the gated approximator
///
///   V(S, t) = output_scale * (w_shallow * B_shallow(x) + w_deep * B_deep(x) + bias_out),
///   x = ((S - s_shift) / s_scale, t / t_scale),
///
/// where each branch is a tanh MLP ending in a linear width -> 1 layer.
/// Residual connections (identity skips) apply to the width -> width
/// layers of the deep branch.
struct NetworkConfig {
    int width = 64;
    int deep_layers = 4;
    int shallow_layers = 1;
    bool residual_connections = true;
    double s_shift = 0.0;
    double s_scale = 40.0;
    double t_scale = 1.0;
    double output_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const NetworkConfig&) const = default;
};

enum class Branch { Shallow, Deep };

/// Offsets of one dense layer inside the flat parameter vector. The weight
/// block is stored row-major with shape (fan_out, fan_in).
struct LayerLayout {
    int fan_in = 0;
    int fan_out = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
    bool residual = false;
};

struct NetworkLayout {
    std::vector<LayerLayout> shallow;  // hidden layers then the output layer
    std::vector<LayerLayout> deep;
    std::size_t w_shallow = 0;
    std::size_t w_deep = 0;
    std::size_t bias_out = 0;
    std::size_t size = 0;

    explicit NetworkLayout(const NetworkConfig& config);
    const std::vector<LayerLayout>& branch(Branch b) const { return b == Branch::Shallow ? shallow : deep; }
};

/// Network parameters as one flat vector, laid out by NetworkLayout.
class NetworkParams {
public:
    explicit NetworkParams(const NetworkConfig& config);
    NetworkParams(const NetworkConfig& config, std::vector<double> values);

    const NetworkConfig& config() const noexcept { return config_; }
    const NetworkLayout& layout() const noexcept { return layout_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    using ConstMatrixMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

    ConstMatrixMap weight(Branch b, std::size_t layer) const;
    ConstVectorMap bias(Branch b, std::size_t layer) const;
    double w_shallow() const { return values_[layout_.w_shallow]; }
    double w_deep() const { return values_[layout_.w_deep]; }
    double bias_out() const { return values_[layout_.bias_out]; }

    bool all_finite() const;
    bool operator==(const NetworkParams& o) const { return config_ == o.config_ && values_ == o.values_; }

private:
    NetworkConfig config_;
    NetworkLayout layout_;
    std::vector<double> values_;
};

/// Xavier-uniform weights, zero biases, unit combination weights,
/// deterministic in config.seed.
NetworkParams init_params(const NetworkConfig& config);

namespace detail {

template <typename T>
autodiff::BasicJet<T> dense_branch(const std::vector<LayerLayout>& layers, std::span<const T> theta,
                                   std::vector<autodiff::BasicJet<T>> act)
{
    using Jet = autodiff::BasicJet<T>;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        const bool output_layer = l + 1 == layers.size();
        std::vector<Jet> next(static_cast<std::size_t>(L.fan_out));
        for (int o = 0; o < L.fan_out; ++o) {
            Jet z = Jet::constant(theta[L.bias_offset + o]);
            for (int i = 0; i < L.fan_in; ++i) {
                const T& w = theta[L.weight_offset + static_cast<std::size_t>(o) * L.fan_in + i];
                const Jet& a = act[static_cast<std::size_t>(i)];
                z += Jet{w * a.value, w * a.d_dS, w * a.d2_dS2, w * a.d_dt};
            }
            if (!output_layer) {
                z = tanh(z);
                if (L.residual) {
                    z += act[static_cast<std::size_t>(o)];
                }
            }
            next[static_cast<std::size_t>(o)] = z;
        }
        act = std::move(next);
    }
    return act.front();
}

}  // namespace detail

/// Scalar reference evaluation of the network over jets. With T = Var and
/// `theta` holding tape parameters the result is differentiable in theta.
template <typename T>
autodiff::BasicJet<T> forward_generic(const NetworkConfig& config, const NetworkLayout& layout,
                                      std::span<const T> theta, const autodiff::BasicJet<T>& spot,
                                      const autodiff::BasicJet<T>& time)
{
    using Jet = autodiff::BasicJet<T>;
    const std::vector<Jet> input{(spot - config.s_shift) * (1.0 / config.s_scale), time * (1.0 / config.t_scale)};
    const Jet bs = detail::dense_branch(layout.shallow, theta, input);
    const Jet bd = detail::dense_branch(layout.deep, theta, input);
    const T& ws = theta[layout.w_shallow];
    const T& wd = theta[layout.w_deep];
    Jet v{ws * bs.value + wd * bd.value + theta[layout.bias_out], ws * bs.d_dS + wd * bd.d_dS,
          ws * bs.d2_dS2 + wd * bd.d2_dS2, ws * bs.d_dt + wd * bd.d_dt};
    return v * config.output_scale;
}

/// V and its spot/time derivatives at one point. `spot` and `time` are
/// usually seeded jets; throws DomainError on non-finite parameters or inputs.
autodiff::Jet2 forward(const NetworkParams& params, const autodiff::Jet2& spot, const autodiff::Jet2& time);

/// Plain value V(S, t).
double evaluate(const NetworkParams& params, double spot, double time);

/// Same as forward() but recorded on a tape: `theta` must hold one tape
/// parameter per entry of params.values().
autodiff::TapedJet forward_taped(const NetworkConfig& config, std::span<const autodiff::Var> theta,
                                 const autodiff::Jet2& spot, const autodiff::Jet2& time);

enum class JetOrder { ValueOnly, Full };

/// Per-point jet components of a batch of outputs (or their adjoints).
struct JetBatch {
    Eigen::RowVectorXd value;
    Eigen::RowVectorXd d_dS;
    Eigen::RowVectorXd d2_dS2;
    Eigen::RowVectorXd d_dt;

    void resize(Eigen::Index n, JetOrder order);
};

/// Batched evaluation of the network over N points with a layer-level
/// reverse sweep. Every jet component of every point is stacked into one
/// activation matrix per layer, so a dense layer is a single GEMM, and the
/// backward pass visits each layer once. Produces the same numbers as
/// forward_taped up to summation order.
class BatchPass {
public:
    BatchPass(const NetworkParams& params, std::span<const double> spots, std::span<const double> times,
              JetOrder order);

    const JetBatch& output() const noexcept { return output_; }
    Eigen::Index points() const noexcept { return n_; }
    JetOrder order() const noexcept { return order_; }

    /// Adds d(sum_i <adjoint_i, output_i>)/d(theta) into `gradient`.
    void accumulate_gradient(const JetBatch& adjoint, std::span<double> gradient) const;

private:
    struct LayerCache {
        Eigen::MatrixXd input;  // fan_in x (C*N), stacked components
        Eigen::MatrixXd pre;    // fan_out x (C*N), hidden layers only
        Eigen::MatrixXd act;    // tanh(pre) jets, hidden layers only
    };

    Eigen::MatrixXd run_branch(Branch b, std::vector<LayerCache>& caches) const;
    void backward_branch(Branch b, const std::vector<LayerCache>& caches, Eigen::MatrixXd adj,
                         std::span<double> gradient) const;

    const NetworkParams& params_;
    JetOrder order_;
    Eigen::Index n_ = 0;
    Eigen::Index components_ = 1;
    std::vector<LayerCache> shallow_;
    std::vector<LayerCache> deep_;
    Eigen::MatrixXd shallow_out_;  // 1 x (C*N)
    Eigen::MatrixXd deep_out_;
    JetBatch output_;
};

/// Checkpoint text block: config header followed by one row-major matrix
/// per layer tensor. Numbers are written with 17 significant digits, so
/// read_params(write_params(p)) == p bit for bit.
void write_params(std::ostream& out, const NetworkParams& params);
NetworkParams read_params(std::istream& in);

void save_params(const std::string& path, const NetworkParams& params);
NetworkParams load_params(const std::string& path);

}  // namespace pinn
