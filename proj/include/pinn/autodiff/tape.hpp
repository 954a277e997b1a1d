#pragma once

#include "pinn/autodiff/jet.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace pinn::autodiff {

class Tape;

enum class NodeKind : std::uint8_t {
    Parameter,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    AddConst,
    MulConst,
    Tanh,
    Exp,
    Log,
    MaxConst,
};

/// One recorded elementary operation. Operands always precede the node.
struct TapeNode {
    static constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

    NodeKind kind = NodeKind::Parameter;
    std::uint32_t lhs = none;
    std::uint32_t rhs = none;
    double d_lhs = 0.0;
    double d_rhs = 0.0;
};

/// Scalar that is either a constant (no tape) or a node on a Tape.
class Var {
public:
    Var() = default;
    Var(double constant) : value_(constant) {}  // NOLINT: implicit constants are the point

    double value() const noexcept { return value_; }
    bool is_constant() const noexcept { return tape_ == nullptr; }
    Tape* tape() const noexcept { return tape_; }
    std::uint32_t index() const noexcept { return index_; }

private:
    friend class Tape;
    Var(Tape* tape, std::uint32_t index, double value) : tape_(tape), index_(index), value_(value) {}

    Tape* tape_ = nullptr;
    std::uint32_t index_ = TapeNode::none;
    double value_ = 0.0;
};

inline double primal(const Var& v) noexcept { return v.value(); }

/// Append-only record of elementary operations, differentiated by a single
/// reverse sweep. Parameters are the leaves created through parameter();
/// gradients are reported in creation order.
class Tape {
public:
    Var parameter(double value);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t parameter_count() const noexcept { return parameters_.size(); }
    const TapeNode& node(std::size_t i) const { return nodes_.at(i); }
    std::span<const std::uint32_t> parameter_nodes() const noexcept { return parameters_; }

    /// Adjoint of every node with respect to `output` (zero beyond it).
    std::vector<double> adjoints(const Var& output) const;

    void clear() noexcept
    {
        nodes_.clear();
        parameters_.clear();
    }

    // Recording entry points used by the Var operators.
    Var unary(NodeKind kind, const Var& a, double value, double d_a);
    Var binary(NodeKind kind, const Var& a, const Var& b, double value, double d_a, double d_b);

private:
    std::uint32_t push(const TapeNode& node);

    std::vector<TapeNode> nodes_;
    std::vector<std::uint32_t> parameters_;
};

/// d(output)/d(theta) for every parameter of `tape`, in creation order.
/// Throws DomainError if `output` lives on another tape or past its end.
std::vector<double> tape_gradient(const Tape& tape, const Var& output);

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator+(const Var& a, double c);
Var operator+(double c, const Var& a);
Var operator-(const Var& a, double c);
Var operator-(double c, const Var& a);
Var operator*(const Var& a, double c);
Var operator*(double c, const Var& a);
Var operator/(const Var& a, double c);
Var operator/(double c, const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var max_with(const Var& a, double c);

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }

using TapedJet = BasicJet<Var>;

}  // namespace pinn::autodiff
