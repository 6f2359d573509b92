#pragma once

// Fully connected subnetworks and their jet-valued evaluation.
//
// A batch of N points is propagated as one matrix per layer with 5N columns laid out as
// [value | d/dx | d/dy | d2/dx2 | d2/dy2], so every dense layer is a single matrix product.
//
// Flattening order of parameters (checkpoints, gradients): subnetworks in the order
// U_S, U_D, P_S, P_D; inside a subnetwork, layer by layer from the input, each layer's weight
// matrix in row-major order followed by its bias vector.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cdnn/errors.hpp"
#include "cdnn/jet.hpp"
#include "cdnn/point.hpp"
#include "cdnn/rng.hpp"
#include "cdnn/tape.hpp"

namespace cdnn {

enum class Activation { tanh, sin };

inline std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "sin"; }

inline Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "sin") return Activation::sin;
    throw ConfigError("unknown activation '" + name + "' (registered: tanh, sin)");
}

struct MLPArch {
    int input_dim = 2;
    int hidden_layers = 3;
    int width = 16;
    int output_dim = 1;
    Activation activation = Activation::tanh;

    void validate() const {
        if (input_dim != 2) throw ConfigError("network input dimension must be 2");
        if (hidden_layers < 1) throw ConfigError("network needs at least one hidden layer");
        if (width < 1 || output_dim < 1) throw ConfigError("network dimensions must be >= 1");
    }

    /// Fan-in/fan-out of layer `l` (0-based; the last layer is the linear output layer).
    std::pair<int, int> layer_shape(int l) const {
        const int in = l == 0 ? input_dim : width;
        const int out = l == hidden_layers ? output_dim : width;
        return {in, out};
    }

    int layer_count() const { return hidden_layers + 1; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (int l = 0; l < layer_count(); ++l) {
            const auto [in, out] = layer_shape(l);
            n += static_cast<std::size_t>(out) * (in + 1);
        }
        return n;
    }

    bool operator==(const MLPArch&) const = default;
};

struct DenseLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
};

struct MLPParams {
    MLPArch arch;
    std::vector<DenseLayer> layers;

    static MLPParams zeros(const MLPArch& arch) {
        arch.validate();
        MLPParams p{arch, {}};
        for (int l = 0; l < arch.layer_count(); ++l) {
            const auto [in, out] = arch.layer_shape(l);
            p.layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
        }
        return p;
    }

    std::size_t size() const { return arch.parameter_count(); }

    void flatten_into(std::span<double> out) const {
        if (out.size() != size()) throw UsageError("flatten: size mismatch");
        std::size_t k = 0;
        for (const auto& layer : layers) {
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out[k++] = layer.weight(r, c);
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out[k++] = layer.bias(r);
        }
    }

    void assign_from(std::span<const double> in) {
        if (in.size() != size()) throw UsageError("assign: size mismatch");
        std::size_t k = 0;
        for (auto& layer : layers) {
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = in[k++];
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = in[k++];
        }
    }

    bool all_finite() const {
        for (const auto& layer : layers)
            if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
        return true;
    }
};

enum class Subnet : int { stokes_velocity = 0, darcy_velocity = 1, stokes_pressure = 2, darcy_pressure = 3 };

/// The four parallel subnetworks U_S, U_D, P_S, P_D.
struct CoupledParams {
    std::array<MLPParams, 4> nets;

    MLPParams& operator[](Subnet s) { return nets[static_cast<int>(s)]; }
    const MLPParams& operator[](Subnet s) const { return nets[static_cast<int>(s)]; }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& net : nets) n += net.size();
        return n;
    }

    /// Offset of a subnetwork's block inside the flat parameter vector.
    std::size_t offset(Subnet s) const {
        std::size_t n = 0;
        for (int k = 0; k < static_cast<int>(s); ++k) n += nets[k].size();
        return n;
    }

    std::vector<double> flatten() const {
        std::vector<double> flat(size());
        std::size_t off = 0;
        for (const auto& net : nets) {
            net.flatten_into(std::span<double>(flat).subspan(off, net.size()));
            off += net.size();
        }
        return flat;
    }

    void assign(std::span<const double> flat) {
        if (flat.size() != size()) throw UsageError("parameter vector has wrong length");
        std::size_t off = 0;
        for (auto& net : nets) {
            net.assign_from(flat.subspan(off, net.size()));
            off += net.size();
        }
    }

    std::array<MLPArch, 4> archs() const { return {nets[0].arch, nets[1].arch, nets[2].arch, nets[3].arch}; }
};

/// Default architectures: velocity nets have two outputs, pressure nets one.
inline std::array<MLPArch, 4> coupled_archs(int hidden_layers, int width, Activation act = Activation::tanh) {
    std::array<MLPArch, 4> a;
    for (int k = 0; k < 4; ++k) {
        a[k].hidden_layers = hidden_layers;
        a[k].width = width;
        a[k].activation = act;
        a[k].output_dim = (k < 2) ? 2 : 1;
    }
    return a;
}

/// Glorot-uniform weights, zero biases; a pure function of `seed`.
inline CoupledParams init_params(const std::array<MLPArch, 4>& archs, std::uint64_t seed) {
    for (int k = 0; k < 4; ++k) {
        archs[k].validate();
        if (archs[k].output_dim != (k < 2 ? 2 : 1))
            throw ConfigError("velocity subnetworks need 2 outputs and pressure subnetworks 1");
    }
    Rng rng(seed);
    CoupledParams p;
    for (int k = 0; k < 4; ++k) {
        p.nets[k] = MLPParams::zeros(archs[k]);
        for (auto& layer : p.nets[k].layers) {
            const double bound = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
        }
    }
    return p;
}

/// Derivative order carried through a forward pass: values only, gradients, or gradients plus
/// pure second derivatives. A pass of order k has 2k + 1 column blocks.
enum class JetOrder : int { value = 0, first = 1, second = 2 };

inline constexpr Eigen::Index jet_blocks(JetOrder order) { return 2 * static_cast<int>(order) + 1; }

namespace detail {

/// Activation value and its first three derivatives, elementwise.
struct ActivationDerivs {
    Eigen::ArrayXXd f, d1, d2, d3;
};

inline ActivationDerivs activation_derivs(Activation act, const Eigen::ArrayXXd& z, int highest) {
    ActivationDerivs r;
    if (act == Activation::tanh) {
        r.f = z.tanh();
        if (highest >= 1) r.d1 = 1.0 - r.f.square();
        if (highest >= 2) r.d2 = -2.0 * r.f * r.d1;
        if (highest >= 3) r.d3 = -2.0 * (r.d1.square() + r.f * r.d2);
    } else {
        r.f = z.sin();
        if (highest >= 1) r.d1 = z.cos();
        if (highest >= 2) r.d2 = -r.f;
        if (highest >= 3) r.d3 = -r.d1;
    }
    return r;
}

}  // namespace detail

/// Intermediate values kept for the adjoint pass.
struct ForwardCache {
    JetOrder order = JetOrder::second;
    std::vector<Eigen::MatrixXd> inputs;                // input of each layer, rows x (blocks * N)
    std::vector<Eigen::MatrixXd> pre;                   // pre-activation of each hidden layer
    std::vector<detail::ActivationDerivs> activation;  // activation derivatives of each hidden layer
};

/// Jet-valued forward pass over a batch. Returns output_dim x (blocks * N) with column blocks
/// [value | d/dx | d/dy | d2/dx2 | d2/dy2] truncated to `order`.
inline Eigen::MatrixXd forward_batch(const MLPParams& params, std::span<const Point> points,
                                     JetOrder order = JetOrder::second, ForwardCache* cache = nullptr) {
    const auto n = static_cast<Eigen::Index>(points.size());
    const Eigen::Index blocks = jet_blocks(order);
    const int ord = static_cast<int>(order);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, blocks * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(0, i) = points[i].x;
        a(1, i) = points[i].y;
        if (ord >= 1) {
            a(0, n + i) = 1.0;
            a(1, 2 * n + i) = 1.0;
        }
    }
    if (cache) {
        cache->order = order;
        cache->inputs.clear();
        cache->pre.clear();
        cache->activation.clear();
    }
    const int hidden = params.arch.hidden_layers;
    for (int l = 0; l <= hidden; ++l) {
        const DenseLayer& layer = params.layers[l];
        Eigen::MatrixXd z = layer.weight * a;
        z.leftCols(n).colwise() += layer.bias;
        if (cache) cache->inputs.push_back(std::move(a));
        if (l == hidden) {
            if (!z.allFinite()) throw NumericalError("non-finite network output");
            return z;
        }
        // The adjoint needs one derivative more than the forward pass.
        auto d = detail::activation_derivs(params.arch.activation, z.leftCols(n).array(), cache ? ord + 1 : ord);
        a.resize(z.rows(), blocks * n);
        a.leftCols(n) = d.f.matrix();
        if (ord >= 1) {
            const auto zgx = z.middleCols(n, n).array();
            const auto zgy = z.middleCols(2 * n, n).array();
            a.middleCols(n, n) = (d.d1 * zgx).matrix();
            a.middleCols(2 * n, n) = (d.d1 * zgy).matrix();
            if (ord >= 2) {
                a.middleCols(3 * n, n) = (d.d2 * zgx.square() + d.d1 * z.middleCols(3 * n, n).array()).matrix();
                a.middleCols(4 * n, n) = (d.d2 * zgy.square() + d.d1 * z.middleCols(4 * n, n).array()).matrix();
            }
        }
        if (cache) {
            cache->pre.push_back(std::move(z));
            cache->activation.push_back(std::move(d));
        }
    }
    return a;  // unreachable
}

/// Adjoint of forward_batch: accumulates d(loss)/d(params) into `grad` (flattening order).
inline void backward_batch(const MLPParams& params, const ForwardCache& cache, const Eigen::MatrixXd& output_adjoint,
                           std::span<double> grad) {
    const int hidden = params.arch.hidden_layers;
    const int ord = static_cast<int>(cache.order);
    const Eigen::Index n = output_adjoint.cols() / jet_blocks(cache.order);

    std::vector<std::size_t> offsets(params.layers.size());
    std::size_t off = 0;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        offsets[l] = off;
        off += static_cast<std::size_t>(params.layers[l].weight.size() + params.layers[l].bias.size());
    }
    if (grad.size() != off) throw UsageError("backward: gradient span has wrong length");

    Eigen::MatrixXd dz = output_adjoint;
    for (int l = hidden; l >= 0; --l) {
        const DenseLayer& layer = params.layers[l];
        const Eigen::MatrixXd dw = dz * cache.inputs[l].transpose();
        const Eigen::VectorXd db = dz.leftCols(n).rowwise().sum();
        std::size_t k = offsets[l];
        for (Eigen::Index r = 0; r < dw.rows(); ++r)
            for (Eigen::Index c = 0; c < dw.cols(); ++c) grad[k++] += dw(r, c);
        for (Eigen::Index r = 0; r < db.size(); ++r) grad[k++] += db(r);
        if (l == 0) break;

        const Eigen::MatrixXd da = layer.weight.transpose() * dz;
        const Eigen::MatrixXd& z = cache.pre[l - 1];
        const auto& d = cache.activation[l - 1];
        const auto av = da.leftCols(n).array();
        dz.resize(z.rows(), da.cols());
        if (ord == 0) {
            dz = (av * d.d1).matrix();
            continue;
        }
        const auto zgx = z.middleCols(n, n).array();
        const auto zgy = z.middleCols(2 * n, n).array();
        const auto agx = da.middleCols(n, n).array();
        const auto agy = da.middleCols(2 * n, n).array();
        if (ord == 1) {
            dz.leftCols(n) = (av * d.d1 + (agx * zgx + agy * zgy) * d.d2).matrix();
            dz.middleCols(n, n) = (agx * d.d1).matrix();
            dz.middleCols(2 * n, n) = (agy * d.d1).matrix();
            continue;
        }
        const auto zhxx = z.middleCols(3 * n, n).array();
        const auto zhyy = z.middleCols(4 * n, n).array();
        const auto ahxx = da.middleCols(3 * n, n).array();
        const auto ahyy = da.middleCols(4 * n, n).array();
        dz.leftCols(n) = (av * d.d1 + (agx * zgx + agy * zgy + ahxx * zhxx + ahyy * zhyy) * d.d2 +
                          (ahxx * zgx.square() + ahyy * zgy.square()) * d.d3)
                             .matrix();
        dz.middleCols(n, n) = (agx * d.d1 + 2.0 * ahxx * d.d2 * zgx).matrix();
        dz.middleCols(2 * n, n) = (agy * d.d1 + 2.0 * ahyy * d.d2 * zgy).matrix();
        dz.middleCols(3 * n, n) = (ahxx * d.d1).matrix();
        dz.middleCols(4 * n, n) = (ahyy * d.d1).matrix();
    }
}

/// Jets of every output at one point.
inline std::vector<Jet> forward_jet(const MLPParams& params, Point point) {
    const Eigen::MatrixXd out = forward_batch(params, std::span<const Point>(&point, 1));
    std::vector<Jet> jets(static_cast<std::size_t>(params.arch.output_dim));
    for (Eigen::Index o = 0; o < out.rows(); ++o) jets[o] = Jet(out(o, 0), out(o, 1), out(o, 2), out(o, 3), out(o, 4));
    return jets;
}

/// Outputs of one batch viewed as jets; components above the pass order read as zero.
template <class T>
class BatchJets;

template <>
class BatchJets<double> {
public:
    BatchJets(Eigen::MatrixXd out, JetOrder order)
        : out_(std::move(out)), blocks_(jet_blocks(order)), n_(out_.cols() / blocks_) {}

    Jet jet(Eigen::Index i, Eigen::Index o) const {
        auto c = [&](Eigen::Index b) { return b < blocks_ ? out_(o, b * n_ + i) : 0.0; };
        return {c(0), c(1), c(2), c(3), c(4)};
    }

    Eigen::Index size() const { return n_; }

private:
    Eigen::MatrixXd out_;
    Eigen::Index blocks_;
    Eigen::Index n_;
};

/// Handle to a subnetwork evaluation recorded on a tape.
template <>
class BatchJets<Var> {
public:
    BatchJets(Tape* tape, std::uint32_t first, Eigen::Index n, Eigen::Index out_dim, JetOrder order)
        : tape_(tape), first_(first), n_(n), out_dim_(out_dim), blocks_(jet_blocks(order)) {}

    Jet2<Var> jet(Eigen::Index i, Eigen::Index o) const {
        auto at = [&](Eigen::Index b) {
            if (b >= blocks_) return Var(0.0);
            return tape_->at(first_ + static_cast<std::uint32_t>((b * n_ + i) * out_dim_ + o));
        };
        return {at(0), at(1), at(2), at(3), at(4)};
    }

    Eigen::Index size() const { return n_; }

private:
    Tape* tape_;
    std::uint32_t first_;
    Eigen::Index n_;
    Eigen::Index out_dim_;
    Eigen::Index blocks_;
};

/// Batch outputs as plain jets.
inline BatchJets<double> evaluate_batch(const MLPParams& params, std::span<const Point> points,
                                        JetOrder order = JetOrder::second) {
    return {forward_batch(params, points, order), order};
}

/// Batch outputs as a vector of plain jets: result[i][o] is output o at point i.
inline std::vector<std::vector<Jet>> forward_jets(const MLPParams& params, std::span<const Point> points,
                                                  JetOrder order = JetOrder::second) {
    const auto b = evaluate_batch(params, points, order);
    std::vector<std::vector<Jet>> jets(points.size(), std::vector<Jet>(params.arch.output_dim));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int o = 0; o < params.arch.output_dim; ++o) jets[i][o] = b.jet(static_cast<Eigen::Index>(i), o);
    return jets;
}

/// Evaluates subnetwork `which` over `points` and records it as one block on `tape`.
inline BatchJets<Var> record_forward(Tape& tape, const CoupledParams& params, Subnet which,
                                     std::span<const Point> points, JetOrder order = JetOrder::second) {
    const MLPParams& net = params[which];
    auto cache = std::make_shared<ForwardCache>();
    const Eigen::MatrixXd out = forward_batch(net, points, order, cache.get());
    const std::size_t offset = params.offset(which);
    const std::size_t count = net.size();
    const Eigen::Index rows = out.rows();
    const Eigen::Index cols = out.cols();
    const std::uint32_t first = tape.record_block(
        std::span<const double>(out.data(), static_cast<std::size_t>(out.size())),
        [net, cache, offset, count, rows, cols](std::span<const double> adj, std::span<double> grad) {
            const Eigen::Map<const Eigen::MatrixXd> adjoint(adj.data(), rows, cols);
            backward_batch(net, *cache, adjoint, grad.subspan(offset, count));
        });
    return {&tape, first, static_cast<Eigen::Index>(points.size()), rows, order};
}

}  // namespace cdnn
