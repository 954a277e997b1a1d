#include "pinn/autodiff/jet.hpp"
#include "pinn/autodiff/tape.hpp"

#include <cmath>
#include <string>

namespace pinn::autodiff {

namespace {

void require_arity(ElementaryOp op, std::span<const Jet2> args, std::size_t n)
{
    if (args.size() != n) {
        throw DomainError("jet_apply: operation " + std::to_string(static_cast<int>(op)) + " expects " +
                          std::to_string(n) + " argument(s), got " + std::to_string(args.size()));
    }
}

}  // namespace

Jet2 jet_apply(ElementaryOp op, std::span<const Jet2> args, double constant)
{
    switch (op) {
    case ElementaryOp::Add:
        require_arity(op, args, 2);
        return args[0] + args[1];
    case ElementaryOp::Sub:
        require_arity(op, args, 2);
        return args[0] - args[1];
    case ElementaryOp::Mul:
        require_arity(op, args, 2);
        return args[0] * args[1];
    case ElementaryOp::Div:
        require_arity(op, args, 2);
        return args[0] / args[1];
    case ElementaryOp::Tanh:
        require_arity(op, args, 1);
        return tanh(args[0]);
    case ElementaryOp::Exp:
        require_arity(op, args, 1);
        return exp(args[0]);
    case ElementaryOp::Log:
        require_arity(op, args, 1);
        return log(args[0]);
    case ElementaryOp::MaxWithConstant:
        require_arity(op, args, 1);
        return max_with(args[0], constant);
    }
    throw DomainError("jet_apply: unknown operation");
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

std::uint32_t Tape::push(const TapeNode& node)
{
    if (nodes_.size() >= TapeNode::none) {
        throw NumericalError("tape exhausted 32-bit node index space");
    }
    nodes_.push_back(node);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
}

Var Tape::parameter(double value)
{
    const auto idx = push(TapeNode{NodeKind::Parameter});
    parameters_.push_back(idx);
    return Var(this, idx, value);
}

Var Tape::unary(NodeKind kind, const Var& a, double value, double d_a)
{
    if (a.is_constant()) {
        return Var(value);
    }
    return Var(this, push(TapeNode{kind, a.index(), TapeNode::none, d_a, 0.0}), value);
}

Var Tape::binary(NodeKind kind, const Var& a, const Var& b, double value, double d_a, double d_b)
{
    if (a.is_constant() && b.is_constant()) {
        return Var(value);
    }
    if (a.is_constant()) {
        return Var(this, push(TapeNode{kind, b.index(), TapeNode::none, d_b, 0.0}), value);
    }
    if (b.is_constant()) {
        return Var(this, push(TapeNode{kind, a.index(), TapeNode::none, d_a, 0.0}), value);
    }
    return Var(this, push(TapeNode{kind, a.index(), b.index(), d_a, d_b}), value);
}

std::vector<double> Tape::adjoints(const Var& output) const
{
    std::vector<double> adj(nodes_.size(), 0.0);
    if (output.is_constant()) {
        return adj;
    }
    if (output.tape() != this || output.index() >= nodes_.size()) {
        throw DomainError("tape_gradient: output does not reference a node of this tape");
    }
    adj[output.index()] = 1.0;
    for (std::size_t i = output.index() + 1; i-- > 0;) {
        const double a = adj[i];
        if (a == 0.0) {
            continue;
        }
        const TapeNode& n = nodes_[i];
        if (n.lhs != TapeNode::none) {
            adj[n.lhs] += a * n.d_lhs;
        }
        if (n.rhs != TapeNode::none) {
            adj[n.rhs] += a * n.d_rhs;
        }
    }
    return adj;
}

std::vector<double> tape_gradient(const Tape& tape, const Var& output)
{
    const auto adj = tape.adjoints(output);
    std::vector<double> grad;
    grad.reserve(tape.parameter_count());
    for (auto idx : tape.parameter_nodes()) {
        grad.push_back(adj[idx]);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Var arithmetic
// ---------------------------------------------------------------------------

namespace {

Tape* tape_of(const Var& a, const Var& b)
{
    Tape* ta = a.tape();
    Tape* tb = b.tape();
    if (ta != nullptr && tb != nullptr && ta != tb) {
        throw DomainError("cannot combine variables from different tapes");
    }
    return ta != nullptr ? ta : tb;
}

Var record_binary(NodeKind kind, const Var& a, const Var& b, double value, double d_a, double d_b)
{
    Tape* t = tape_of(a, b);
    if (t == nullptr) {
        return Var(value);
    }
    return t->binary(kind, a, b, value, d_a, d_b);
}

Var record_unary(NodeKind kind, const Var& a, double value, double d_a)
{
    if (a.is_constant()) {
        return Var(value);
    }
    return a.tape()->unary(kind, a, value, d_a);
}

}  // namespace

Var operator+(const Var& a, const Var& b)
{
    return record_binary(NodeKind::Add, a, b, a.value() + b.value(), 1.0, 1.0);
}

Var operator-(const Var& a, const Var& b)
{
    return record_binary(NodeKind::Sub, a, b, a.value() - b.value(), 1.0, -1.0);
}

Var operator*(const Var& a, const Var& b)
{
    return record_binary(NodeKind::Mul, a, b, a.value() * b.value(), b.value(), a.value());
}

Var operator/(const Var& a, const Var& b)
{
    if (b.value() == 0.0) {
        throw DomainError("division by zero");
    }
    const double q = a.value() / b.value();
    return record_binary(NodeKind::Div, a, b, q, 1.0 / b.value(), -q / b.value());
}

Var operator-(const Var& a) { return record_unary(NodeKind::Neg, a, -a.value(), -1.0); }

Var operator+(const Var& a, double c) { return record_unary(NodeKind::AddConst, a, a.value() + c, 1.0); }
Var operator+(double c, const Var& a) { return a + c; }
Var operator-(const Var& a, double c) { return a + (-c); }
Var operator-(double c, const Var& a) { return record_unary(NodeKind::AddConst, a, c - a.value(), -1.0); }
Var operator*(const Var& a, double c) { return record_unary(NodeKind::MulConst, a, a.value() * c, c); }
Var operator*(double c, const Var& a) { return a * c; }

Var operator/(const Var& a, double c)
{
    if (c == 0.0) {
        throw DomainError("division by zero");
    }
    return record_unary(NodeKind::Div, a, a.value() / c, 1.0 / c);
}

Var operator/(double c, const Var& a)
{
    if (a.value() == 0.0) {
        throw DomainError("division by zero");
    }
    const double q = c / a.value();
    return record_unary(NodeKind::Div, a, q, -q / a.value());
}

Var tanh(const Var& a)
{
    const double h = std::tanh(a.value());
    return record_unary(NodeKind::Tanh, a, h, 1.0 - h * h);
}

Var exp(const Var& a)
{
    const double e = std::exp(a.value());
    return record_unary(NodeKind::Exp, a, e, e);
}

Var log(const Var& a)
{
    if (!(a.value() > 0.0)) {
        throw DomainError("ln of non-positive value");
    }
    return record_unary(NodeKind::Log, a, std::log(a.value()), 1.0 / a.value());
}

Var max_with(const Var& a, double c)
{
    if (a.value() > c) {
        return record_unary(NodeKind::MaxConst, a, a.value(), 1.0);
    }
    return Var(c);
}

}  // namespace pinn::autodiff
