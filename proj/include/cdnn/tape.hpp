#pragma once

// Reverse-mode accumulation of the derivative of one scalar with respect to a flat parameter vector.
//
// The tape is a Wengert list of scalar operations. Network layers are recorded as opaque blocks:
// a block contributes a run of output nodes with no tape parents and a callback that maps the
// adjoints of those outputs onto the parameter gradient. The adjoint sweep visits nodes (and
// blocks, at the position of their first output) in exact reverse recording order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cdnn/errors.hpp"

namespace cdnn {

class Tape;

/// A real number that is either a constant or a node on a Tape.
class Var {
public:
    Var() = default;
    Var(double constant) : value_(constant) {}  // NOLINT: implicit by design of the scalar concept

    double value() const noexcept { return value_; }
    bool is_constant() const noexcept { return tape_ == nullptr; }
    Tape* tape() const noexcept { return tape_; }
    std::uint32_t index() const noexcept { return index_; }

private:
    friend class Tape;
    Var(Tape* tape, std::uint32_t index, double value) : tape_(tape), index_(index), value_(value) {}

    Tape* tape_ = nullptr;
    std::uint32_t index_ = 0;
    double value_ = 0.0;
};

inline double scalar_value(const Var& v) noexcept { return v.value(); }

class Tape {
public:
    enum class Op : std::uint8_t {
        parameter,
        block_output,
        add,
        sub,
        mul,
        div,
        norm2,  // sqrt(a^2 + b^2), subgradient 0 at the origin
        norm2_const,  // sqrt(a^2 + k^2)
        neg,
        add_const,   // a + k
        mul_const,   // a * k
        rsub_const,  // k - a
        rdiv_const,  // k / a
        div_const,   // a / k
        sin,
        cos,
        exp,
        tanh,
        sqrt,
        pow_const,  // a^k
    };

    /// Maps block-output adjoints to parameter-gradient contributions (accumulated, not assigned).
    using BlockBackward = std::function<void(std::span<const double> output_adjoints, std::span<double> grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    std::size_t size() const noexcept { return nodes_.size(); }

    void clear() {
        nodes_.clear();
        blocks_.clear();
    }

    void reserve(std::size_t n) { nodes_.reserve(n); }

    /// Leaf bound to entry `index` of the flat parameter vector.
    Var parameter(std::size_t index, double value) {
        return push(Op::parameter, static_cast<std::uint32_t>(index), 0, value, 0.0, 0.0, 0.0);
    }

    /// Records a block whose outputs are `values`; returns the tape index of the first output.
    std::uint32_t record_block(std::span<const double> values, BlockBackward backward) {
        const auto first = static_cast<std::uint32_t>(nodes_.size());
        if (values.empty()) return first;
        nodes_.reserve(nodes_.size() + values.size());
        for (double v : values) nodes_.push_back(Node{Op::block_output, 0, 0, v, 0.0, 0.0, 0.0});
        blocks_.push_back(Block{first, static_cast<std::uint32_t>(values.size()), std::move(backward)});
        return first;
    }

    /// Var referring to an existing node.
    Var at(std::uint32_t index) {
        if (index >= nodes_.size()) throw UsageError("tape index out of range");
        return Var(this, index, nodes_[index].value);
    }

    Op op(std::uint32_t index) const { return nodes_.at(index).op; }

    /// d(root)/d(parameter) for every parameter index in [0, n_params).
    std::vector<double> gradient(const Var& root, std::size_t n_params) const {
        check_rooted(root);
        std::vector<double> grad(n_params, 0.0);
        std::vector<double> adj(root.index() + 1, 0.0);
        adj[root.index()] = 1.0;

        // Blocks that start after the root cannot influence it.
        auto block = blocks_.rbegin();
        while (block != blocks_.rend() && block->first > root.index()) ++block;

        for (std::int64_t i = root.index(); i >= 0; --i) {
            const auto idx = static_cast<std::uint32_t>(i);
            const Node& n = nodes_[idx];
            const double a = adj[idx];
            if (!std::isfinite(a))
                throw NumericalError("non-finite adjoint at tape op " + std::to_string(idx), i);
            if (a != 0.0) {
                switch (n.op) {
                case Op::parameter:
                    if (n.a >= n_params) throw UsageError("parameter index exceeds gradient length");
                    grad[n.a] += a;
                    break;
                case Op::block_output:
                    break;
                case Op::add:
                case Op::sub:
                case Op::mul:
                case Op::div:
                case Op::norm2:
                    adj[n.a] += a * n.da;
                    adj[n.b] += a * n.db;
                    break;
                default:
                    adj[n.a] += a * n.da;
                    break;
                }
            }
            if (block != blocks_.rend() && idx == block->first) {
                const std::size_t count = std::min<std::size_t>(block->count, adj.size() - block->first);
                std::vector<double> out_adj(block->count, 0.0);
                std::copy_n(adj.begin() + block->first, count, out_adj.begin());
                block->backward(out_adj, grad);
                ++block;
            }
        }
        for (std::size_t k = 0; k < grad.size(); ++k)
            if (!std::isfinite(grad[k]))
                throw NumericalError("non-finite gradient entry " + std::to_string(k));
        return grad;
    }

    /// Recomputes every scalar node from the recorded leaves and returns the value of `root`.
    double replay(const Var& root) const {
        check_rooted(root);
        std::vector<double> val(root.index() + 1);
        for (std::uint32_t i = 0; i <= root.index(); ++i) {
            const Node& n = nodes_[i];
            switch (n.op) {
            case Op::parameter:
            case Op::block_output: val[i] = n.value; break;
            case Op::add: val[i] = val[n.a] + val[n.b]; break;
            case Op::sub: val[i] = val[n.a] - val[n.b]; break;
            case Op::mul: val[i] = val[n.a] * val[n.b]; break;
            case Op::div: val[i] = val[n.a] / val[n.b]; break;
            case Op::norm2: val[i] = std::sqrt(val[n.a] * val[n.a] + val[n.b] * val[n.b]); break;
            case Op::norm2_const: val[i] = std::sqrt(val[n.a] * val[n.a] + n.k * n.k); break;
            case Op::neg: val[i] = -val[n.a]; break;
            case Op::add_const: val[i] = val[n.a] + n.k; break;
            case Op::mul_const: val[i] = val[n.a] * n.k; break;
            case Op::rsub_const: val[i] = n.k - val[n.a]; break;
            case Op::rdiv_const: val[i] = n.k / val[n.a]; break;
            case Op::div_const: val[i] = val[n.a] / n.k; break;
            case Op::sin: val[i] = std::sin(val[n.a]); break;
            case Op::cos: val[i] = std::cos(val[n.a]); break;
            case Op::exp: val[i] = std::exp(val[n.a]); break;
            case Op::tanh: val[i] = std::tanh(val[n.a]); break;
            case Op::sqrt: val[i] = std::sqrt(val[n.a]); break;
            case Op::pow_const: val[i] = std::pow(val[n.a], n.k); break;
            }
        }
        return val[root.index()];
    }

    // Node constructors used by the Var operators.

    Var unary(Op op, const Var& a, double value, double da, double k = 0.0) {
        return push(op, a.index(), 0, value, da, 0.0, k);
    }

    Var binary(Op op, const Var& a, const Var& b, double value, double da, double db) {
        return push(op, a.index(), b.index(), value, da, db, 0.0);
    }

private:
    struct Node {
        Op op;
        std::uint32_t a;
        std::uint32_t b;
        double value;
        double da;
        double db;
        double k;
    };

    struct Block {
        std::uint32_t first;
        std::uint32_t count;
        BlockBackward backward;
    };

    Var push(Op op, std::uint32_t a, std::uint32_t b, double value, double da, double db, double k) {
        if (nodes_.size() >= std::numeric_limits<std::uint32_t>::max()) throw UsageError("tape is full");
        const auto index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(Node{op, a, b, value, da, db, k});
        return Var(this, index, value);
    }

    void check_rooted(const Var& root) const {
        if (root.tape() != this || root.index() >= nodes_.size())
            throw UsageError("scalar is not recorded on this tape");
    }

    std::vector<Node> nodes_;
    std::vector<Block> blocks_;
};

/// Exact derivative of a tape-recorded scalar with respect to the flat parameter vector.
inline std::vector<double> gradient_of(const Var& scalar, std::size_t n_params) {
    if (scalar.is_constant()) throw UsageError("gradient_of: scalar is not tape-rooted");
    return scalar.tape()->gradient(scalar, n_params);
}

namespace detail {

inline Tape* common_tape(const Var& a, const Var& b) {
    if (a.tape() && b.tape() && a.tape() != b.tape()) throw UsageError("operands recorded on different tapes");
    return a.tape() ? a.tape() : b.tape();
}

}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
    Tape* t = detail::common_tape(a, b);
    if (!t) return Var(a.value() + b.value());
    if (a.is_constant()) return t->unary(Tape::Op::add_const, b, a.value() + b.value(), 1.0, a.value());
    if (b.is_constant()) return t->unary(Tape::Op::add_const, a, a.value() + b.value(), 1.0, b.value());
    return t->binary(Tape::Op::add, a, b, a.value() + b.value(), 1.0, 1.0);
}

inline Var operator-(const Var& a) {
    if (a.is_constant()) return Var(-a.value());
    return a.tape()->unary(Tape::Op::neg, a, -a.value(), -1.0);
}

inline Var operator-(const Var& a, const Var& b) {
    Tape* t = detail::common_tape(a, b);
    if (!t) return Var(a.value() - b.value());
    if (a.is_constant()) return t->unary(Tape::Op::rsub_const, b, a.value() - b.value(), -1.0, a.value());
    if (b.is_constant()) return t->unary(Tape::Op::add_const, a, a.value() - b.value(), 1.0, -b.value());
    return t->binary(Tape::Op::sub, a, b, a.value() - b.value(), 1.0, -1.0);
}

inline Var operator*(const Var& a, const Var& b) {
    Tape* t = detail::common_tape(a, b);
    if (!t) return Var(a.value() * b.value());
    if (a.is_constant()) return t->unary(Tape::Op::mul_const, b, a.value() * b.value(), a.value(), a.value());
    if (b.is_constant()) return t->unary(Tape::Op::mul_const, a, a.value() * b.value(), b.value(), b.value());
    return t->binary(Tape::Op::mul, a, b, a.value() * b.value(), b.value(), a.value());
}

inline Var operator/(const Var& a, const Var& b) {
    if (b.value() == 0.0) throw DomainError("division by zero");
    Tape* t = detail::common_tape(a, b);
    const double q = a.value() / b.value();
    if (!t) return Var(q);
    if (a.is_constant()) return t->unary(Tape::Op::rdiv_const, b, q, -q / b.value(), a.value());
    if (b.is_constant()) return t->unary(Tape::Op::div_const, a, q, 1.0 / b.value(), b.value());
    return t->binary(Tape::Op::div, a, b, q, 1.0 / b.value(), -q / b.value());
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var sin(const Var& a) {
    if (a.is_constant()) return Var(std::sin(a.value()));
    return a.tape()->unary(Tape::Op::sin, a, std::sin(a.value()), std::cos(a.value()));
}

inline Var cos(const Var& a) {
    if (a.is_constant()) return Var(std::cos(a.value()));
    return a.tape()->unary(Tape::Op::cos, a, std::cos(a.value()), -std::sin(a.value()));
}

inline Var exp(const Var& a) {
    const double e = std::exp(a.value());
    if (a.is_constant()) return Var(e);
    return a.tape()->unary(Tape::Op::exp, a, e, e);
}

inline Var tanh(const Var& a) {
    const double t = std::tanh(a.value());
    if (a.is_constant()) return Var(t);
    return a.tape()->unary(Tape::Op::tanh, a, t, 1.0 - t * t);
}

inline Var sqrt(const Var& a) {
    if (a.value() < 0.0) throw DomainError("sqrt of a negative value");
    const double s = std::sqrt(a.value());
    if (a.is_constant()) return Var(s);
    if (s == 0.0) throw DomainError("sqrt is not differentiable at zero");
    return a.tape()->unary(Tape::Op::sqrt, a, s, 0.5 / s);
}

inline Var pow(const Var& a, double k) {
    const double v = std::pow(a.value(), k);
    if (!std::isfinite(v)) throw DomainError("pow undefined at this value");
    if (a.is_constant()) return Var(v);
    return a.tape()->unary(Tape::Op::pow_const, a, v, k * std::pow(a.value(), k - 1.0), k);
}

/// Euclidean length of (a, b). The derivative at the origin is taken as 0 (minimal-norm subgradient).
inline Var norm2(const Var& a, const Var& b) {
    const double n = std::sqrt(a.value() * a.value() + b.value() * b.value());
    Tape* t = detail::common_tape(a, b);
    if (!t) return Var(n);
    const double da = n > 0.0 ? a.value() / n : 0.0;
    const double db = n > 0.0 ? b.value() / n : 0.0;
    if (a.is_constant()) return t->unary(Tape::Op::norm2_const, b, n, db, a.value());
    if (b.is_constant()) return t->unary(Tape::Op::norm2_const, a, n, da, b.value());
    return t->binary(Tape::Op::norm2, a, b, n, da, db);
}

inline double norm2(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace cdnn
