#include "pinn/network.hpp"

#include "pinn/error.hpp"
#include "pinn/text.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace pinn {

using autodiff::Jet2;
using autodiff::TapedJet;
using autodiff::Var;

void NetworkConfig::validate() const
{
    if (width < 1) {
        throw DomainError("network width must be >= 1");
    }
    if (shallow_layers < 1 || deep_layers < 1) {
        throw DomainError("network branches need at least one hidden layer");
    }
    if (!(shallow_layers < deep_layers)) {
        throw DomainError("network requires shallow_layers < deep_layers");
    }
    if (!(s_scale > 0.0) || !(t_scale > 0.0) || !std::isfinite(s_scale) || !std::isfinite(t_scale)) {
        throw DomainError("network input scales must be positive and finite");
    }
    if (!std::isfinite(s_shift)) {
        throw DomainError("network input shift must be finite");
    }
    if (!std::isfinite(output_scale) || output_scale == 0.0) {
        throw DomainError("network output scale must be finite and nonzero");
    }
}

namespace {

std::vector<LayerLayout> branch_layout(int hidden, int width, bool residual, std::size_t& offset)
{
    std::vector<LayerLayout> layers;
    int fan_in = 2;
    for (int l = 0; l <= hidden; ++l) {
        LayerLayout L;
        L.fan_in = fan_in;
        L.fan_out = l == hidden ? 1 : width;
        L.residual = residual && l < hidden && L.fan_in == L.fan_out;
        L.weight_offset = offset;
        offset += static_cast<std::size_t>(L.fan_in) * L.fan_out;
        L.bias_offset = offset;
        offset += static_cast<std::size_t>(L.fan_out);
        layers.push_back(L);
        fan_in = L.fan_out;
    }
    return layers;
}

}  // namespace

NetworkLayout::NetworkLayout(const NetworkConfig& config)
{
    config.validate();
    std::size_t offset = 0;
    shallow = branch_layout(config.shallow_layers, config.width, false, offset);
    deep = branch_layout(config.deep_layers, config.width, config.residual_connections, offset);
    w_shallow = offset++;
    w_deep = offset++;
    bias_out = offset++;
    size = offset;
}

NetworkParams::NetworkParams(const NetworkConfig& config)
    : config_(config), layout_(config), values_(layout_.size, 0.0)
{
}

NetworkParams::NetworkParams(const NetworkConfig& config, std::vector<double> values)
    : config_(config), layout_(config), values_(std::move(values))
{
    if (values_.size() != layout_.size) {
        throw DomainError("parameter vector has " + std::to_string(values_.size()) + " entries, layout needs " +
                          std::to_string(layout_.size));
    }
}

NetworkParams::ConstMatrixMap NetworkParams::weight(Branch b, std::size_t layer) const
{
    const auto& L = layout_.branch(b).at(layer);
    return ConstMatrixMap(values_.data() + L.weight_offset, L.fan_out, L.fan_in);
}

NetworkParams::ConstVectorMap NetworkParams::bias(Branch b, std::size_t layer) const
{
    const auto& L = layout_.branch(b).at(layer);
    return ConstVectorMap(values_.data() + L.bias_offset, L.fan_out);
}

bool NetworkParams::all_finite() const
{
    for (double v : values_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

NetworkParams init_params(const NetworkConfig& config)
{
    NetworkParams params(config);
    std::mt19937_64 rng(config.seed);
    auto values = params.values();
    for (Branch b : {Branch::Shallow, Branch::Deep}) {
        for (const auto& L : params.layout().branch(b)) {
            const double bound = std::sqrt(6.0 / (L.fan_in + L.fan_out));
            std::uniform_real_distribution<double> dist(-bound, bound);
            const std::size_t n = static_cast<std::size_t>(L.fan_in) * L.fan_out;
            for (std::size_t i = 0; i < n; ++i) {
                values[L.weight_offset + i] = dist(rng);
            }
        }
    }
    values[params.layout().w_shallow] = 1.0;
    values[params.layout().w_deep] = 1.0;
    values[params.layout().bias_out] = 0.0;
    return params;
}

Jet2 forward(const NetworkParams& params, const Jet2& spot, const Jet2& time)
{
    if (!params.all_finite()) {
        throw DomainError("network forward: non-finite parameter");
    }
    if (!autodiff::is_finite(spot) || !autodiff::is_finite(time)) {
        throw DomainError("network forward: non-finite input");
    }
    return forward_generic<double>(params.config(), params.layout(), params.values(), spot, time);
}

double evaluate(const NetworkParams& params, double spot, double time)
{
    return forward(params, Jet2::constant(spot), Jet2::constant(time)).value;
}

TapedJet forward_taped(const NetworkConfig& config, std::span<const Var> theta, const Jet2& spot, const Jet2& time)
{
    const NetworkLayout layout(config);
    if (theta.size() != layout.size) {
        throw DomainError("forward_taped: parameter count mismatch");
    }
    for (const Var& v : theta) {
        if (!std::isfinite(v.value())) {
            throw DomainError("network forward: non-finite parameter");
        }
    }
    if (!autodiff::is_finite(spot) || !autodiff::is_finite(time)) {
        throw DomainError("network forward: non-finite input");
    }
    const TapedJet s{spot.value, spot.d_dS, spot.d2_dS2, spot.d_dt};
    const TapedJet t{time.value, time.d_dS, time.d2_dS2, time.d_dt};
    return forward_generic<Var>(config, layout, theta, s, t);
}

// ---------------------------------------------------------------------------
// Batched pass
// ---------------------------------------------------------------------------

void JetBatch::resize(Eigen::Index n, JetOrder order)
{
    value = Eigen::RowVectorXd::Zero(n);
    const Eigen::Index m = order == JetOrder::Full ? n : 0;
    d_dS = Eigen::RowVectorXd::Zero(m);
    d2_dS2 = Eigen::RowVectorXd::Zero(m);
    d_dt = Eigen::RowVectorXd::Zero(m);
}

namespace {

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Column blocks of the stacked layout: [value | d_dS | d2_dS2 | d_dt].
enum Component : Eigen::Index { kValue = 0, kSpot = 1, kSpot2 = 2, kTime = 3 };

}  // namespace

BatchPass::BatchPass(const NetworkParams& params, std::span<const double> spots, std::span<const double> times,
                     JetOrder order)
    : params_(params), order_(order)
{
    if (spots.size() != times.size()) {
        throw DomainError("BatchPass: spot and time batches differ in length");
    }
    if (!params.all_finite()) {
        throw DomainError("network forward: non-finite parameter");
    }
    n_ = static_cast<Eigen::Index>(spots.size());
    components_ = order == JetOrder::Full ? 4 : 1;
    const auto& cfg = params.config();

    Eigen::MatrixXd input = Eigen::MatrixXd::Zero(2, components_ * n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
        const double s = spots[static_cast<std::size_t>(i)];
        const double t = times[static_cast<std::size_t>(i)];
        if (!std::isfinite(s) || !std::isfinite(t)) {
            throw DomainError("network forward: non-finite input");
        }
        input(0, i) = (s - cfg.s_shift) * (1.0 / cfg.s_scale);
        input(1, i) = t * (1.0 / cfg.t_scale);
    }
    if (order == JetOrder::Full) {
        input.block(0, kSpot * n_, 1, n_).setConstant(1.0 / cfg.s_scale);
        input.block(1, kTime * n_, 1, n_).setConstant(1.0 / cfg.t_scale);
    }

    shallow_.resize(params.layout().shallow.size());
    deep_.resize(params.layout().deep.size());
    shallow_[0].input = input;
    deep_[0].input = std::move(input);
    shallow_out_ = run_branch(Branch::Shallow, shallow_);
    deep_out_ = run_branch(Branch::Deep, deep_);

    const double os = cfg.output_scale;
    const Eigen::RowVectorXd combined =
        os * (params.w_shallow() * shallow_out_.row(0) + params.w_deep() * deep_out_.row(0));
    output_.resize(n_, order);
    output_.value = combined.segment(kValue * n_, n_).array() + os * params.bias_out();
    if (order == JetOrder::Full) {
        output_.d_dS = combined.segment(kSpot * n_, n_);
        output_.d2_dS2 = combined.segment(kSpot2 * n_, n_);
        output_.d_dt = combined.segment(kTime * n_, n_);
    }
}

Eigen::MatrixXd BatchPass::run_branch(Branch b, std::vector<LayerCache>& caches) const
{
    const auto& layers = params_.layout().branch(b);
    const Eigen::Index N = n_;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        LayerCache& cache = caches[l];
        // Owned copies: Eigen's kernels peel by pointer alignment, and the
        // parameter vector has no alignment guarantee.
        const Eigen::MatrixXd w = params_.weight(b, l);
        const Eigen::VectorXd bias = params_.bias(b, l);
        Eigen::MatrixXd z = w * cache.input;
        z.leftCols(N).colwise() += bias;
        if (l + 1 == layers.size()) {
            return z;
        }

        Eigen::MatrixXd h(z.rows(), z.cols());
        const auto zv = z.leftCols(N).array();
        auto hv = h.leftCols(N).array();
        hv = zv.tanh();
        if (order_ == JetOrder::Full) {
            const Eigen::ArrayXXd g1 = 1.0 - hv.square();
            const Eigen::ArrayXXd g2 = -2.0 * hv * g1;
            const auto zs = z.middleCols(kSpot * N, N).array();
            h.middleCols(kSpot * N, N).array() = g1 * zs;
            h.middleCols(kSpot2 * N, N).array() = g1 * z.middleCols(kSpot2 * N, N).array() + g2 * zs.square();
            h.middleCols(kTime * N, N).array() = g1 * z.middleCols(kTime * N, N).array();
        }
        Eigen::MatrixXd next = h;
        if (L.residual) {
            next += cache.input;
        }
        cache.pre = std::move(z);
        cache.act = std::move(h);
        caches[l + 1].input = std::move(next);
    }
    throw NumericalError("network branch without output layer");
}

void BatchPass::backward_branch(Branch b, const std::vector<LayerCache>& caches, Eigen::MatrixXd adj,
                                std::span<double> gradient) const
{
    const auto& layers = params_.layout().branch(b);
    const Eigen::Index N = n_;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& L = layers[l];
        const LayerCache& cache = caches[l];
        const bool output_layer = l + 1 == layers.size();

        Eigen::MatrixXd adj_pre;
        if (output_layer) {
            adj_pre = std::move(adj);
            adj.resize(0, 0);
        } else {
            adj_pre.resize(adj.rows(), adj.cols());
            const auto hv = cache.act.leftCols(N).array();
            const Eigen::ArrayXXd g1 = 1.0 - hv.square();
            if (order_ == JetOrder::Full) {
                const Eigen::ArrayXXd g2 = -2.0 * hv * g1;
                const Eigen::ArrayXXd dg2 = -2.0 * g1.square() + 4.0 * hv.square() * g1;
                const auto zs = cache.pre.middleCols(kSpot * N, N).array();
                const auto zss = cache.pre.middleCols(kSpot2 * N, N).array();
                const auto zt = cache.pre.middleCols(kTime * N, N).array();
                const auto av = adj.leftCols(N).array();
                const auto as = adj.middleCols(kSpot * N, N).array();
                const auto ass = adj.middleCols(kSpot2 * N, N).array();
                const auto at = adj.middleCols(kTime * N, N).array();
                adj_pre.leftCols(N).array() = av * g1 + g2 * (as * zs + ass * zss + at * zt) + ass * zs.square() * dg2;
                adj_pre.middleCols(kSpot * N, N).array() = as * g1 + 2.0 * ass * g2 * zs;
                adj_pre.middleCols(kSpot2 * N, N).array() = ass * g1;
                adj_pre.middleCols(kTime * N, N).array() = at * g1;
            } else {
                adj_pre.array() = adj.array() * g1;
            }
        }

        const Eigen::MatrixXd grad_w = adj_pre * cache.input.transpose();
        const Eigen::VectorXd grad_b = adj_pre.leftCols(N).rowwise().sum();
        RowMajorMap(gradient.data() + L.weight_offset, L.fan_out, L.fan_in) += grad_w;
        Eigen::Map<Eigen::VectorXd>(gradient.data() + L.bias_offset, L.fan_out) += grad_b;

        if (l == 0) {
            break;
        }
        const Eigen::MatrixXd w = params_.weight(b, l);
        Eigen::MatrixXd adj_in = w.transpose() * adj_pre;
        if (L.residual) {
            adj_in += adj;
        }
        adj = std::move(adj_in);
    }
}

void BatchPass::accumulate_gradient(const JetBatch& adjoint, std::span<double> gradient) const
{
    if (gradient.size() != params_.size()) {
        throw DomainError("BatchPass: gradient size mismatch");
    }
    if (adjoint.value.size() != n_) {
        throw DomainError("BatchPass: adjoint size mismatch");
    }
    const Eigen::Index N = n_;
    Eigen::RowVectorXd adj(components_ * N);
    adj.segment(kValue * N, N) = adjoint.value;
    if (order_ == JetOrder::Full) {
        if (adjoint.d_dS.size() != N || adjoint.d2_dS2.size() != N || adjoint.d_dt.size() != N) {
            throw DomainError("BatchPass: adjoint derivative components missing");
        }
        adj.segment(kSpot * N, N) = adjoint.d_dS;
        adj.segment(kSpot2 * N, N) = adjoint.d2_dS2;
        adj.segment(kTime * N, N) = adjoint.d_dt;
    }

    const auto& layout = params_.layout();
    const double os = params_.config().output_scale;
    gradient[layout.w_shallow] += os * adj.dot(shallow_out_.row(0));
    gradient[layout.w_deep] += os * adj.dot(deep_out_.row(0));
    gradient[layout.bias_out] += os * adj.segment(kValue * N, N).sum();

    backward_branch(Branch::Shallow, shallow_, (os * params_.w_shallow()) * adj, gradient);
    backward_branch(Branch::Deep, deep_, (os * params_.w_deep()) * adj, gradient);
}

// ---------------------------------------------------------------------------
// Checkpoint text format
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMagic = "pinn-network";
constexpr int kVersion = 1;

const char* branch_name(Branch b) { return b == Branch::Shallow ? "shallow" : "deep"; }

}  // namespace

void write_params(std::ostream& out, const NetworkParams& params)
{
    const auto& c = params.config();
    out << kMagic << ' ' << kVersion << '\n';
    out << "width " << c.width << '\n';
    out << "deep_layers " << c.deep_layers << '\n';
    out << "shallow_layers " << c.shallow_layers << '\n';
    out << "residual_connections " << (c.residual_connections ? 1 : 0) << '\n';
    out << "s_shift " << text::format_double(c.s_shift) << '\n';
    out << "s_scale " << text::format_double(c.s_scale) << '\n';
    out << "t_scale " << text::format_double(c.t_scale) << '\n';
    out << "output_scale " << text::format_double(c.output_scale) << '\n';
    out << "seed " << c.seed << '\n';
    const auto values = params.values();
    for (Branch b : {Branch::Shallow, Branch::Deep}) {
        const auto& layers = params.layout().branch(b);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& L = layers[l];
            const std::string prefix = std::string(branch_name(b)) + "." + std::to_string(l);
            text::write_tensor(out, prefix + ".weight", values.subspan(L.weight_offset), L.fan_out, L.fan_in);
            text::write_tensor(out, prefix + ".bias", values.subspan(L.bias_offset), L.fan_out, 1);
        }
    }
    text::write_tensor(out, "combine", values.subspan(params.layout().w_shallow), 1, 3);
    out << "end " << kMagic << '\n';
}

NetworkParams read_params(std::istream& in)
{
    const std::string magic = text::next_line(in, "header");
    if (text::trim(magic) != std::string(kMagic) + " " + std::to_string(kVersion)) {
        throw DataError("checkpoint: bad network header '" + magic + "'");
    }
    NetworkConfig c;
    c.width = static_cast<int>(text::parse_int(text::expect_key(in, "width")));
    c.deep_layers = static_cast<int>(text::parse_int(text::expect_key(in, "deep_layers")));
    c.shallow_layers = static_cast<int>(text::parse_int(text::expect_key(in, "shallow_layers")));
    c.residual_connections = text::parse_int(text::expect_key(in, "residual_connections")) != 0;
    c.s_shift = text::parse_double(text::expect_key(in, "s_shift"));
    c.s_scale = text::parse_double(text::expect_key(in, "s_scale"));
    c.t_scale = text::parse_double(text::expect_key(in, "t_scale"));
    c.output_scale = text::parse_double(text::expect_key(in, "output_scale"));
    c.seed = static_cast<std::uint64_t>(std::stoull(text::expect_key(in, "seed")));
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw DataError(std::string("checkpoint: invalid network config: ") + e.what());
    }

    NetworkParams params(c);
    auto values = params.values();
    for (Branch b : {Branch::Shallow, Branch::Deep}) {
        const auto& layers = params.layout().branch(b);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& L = layers[l];
            const std::string prefix = std::string(branch_name(b)) + "." + std::to_string(l);
            text::read_tensor(in, prefix + ".weight", values.subspan(L.weight_offset), L.fan_out, L.fan_in);
            text::read_tensor(in, prefix + ".bias", values.subspan(L.bias_offset), L.fan_out, 1);
        }
    }
    text::read_tensor(in, "combine", values.subspan(params.layout().w_shallow), 1, 3);
    const std::string end = text::next_line(in, "trailer");
    if (text::trim(end) != std::string("end ") + kMagic) {
        throw DataError("checkpoint: missing network trailer");
    }
    return params;
}

void save_params(const std::string& path, const NetworkParams& params)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    write_params(out, params);
    if (!out) {
        throw DataError("failed writing '" + path + "'");
    }
}

NetworkParams load_params(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open checkpoint '" + path + "'");
    }
    return read_params(in);
}

}  // namespace pinn
