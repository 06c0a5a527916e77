#include "distillbench/network.hpp"

#include <cmath>

#include "distillbench/errors.hpp"

namespace distillbench {

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "gelu") return Activation::Gelu;
    if (name == "none") return Activation::None;
    throw InvalidArgument("unknown activation '" + name + "' (expected relu, gelu, or none)");
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Gelu: return "gelu";
        case Activation::None: return "none";
    }
    return "?";
}

double activate(Activation a, double x) {
    switch (a) {
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Gelu:
            // Exact Gaussian CDF form x * Phi(x), not the tanh approximation.
            return x * 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
        case Activation::None: return x;
    }
    return 0.0;
}

double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::Relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::Gelu: {
            const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
            const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
            return cdf + x * phi;
        }
        case Activation::None: return 1.0;
    }
    return 0.0;
}

Network::Network(std::vector<LayerSpec> specs, std::uint64_t seed) {
    if (specs.empty()) {
        throw InvalidArgument("network needs at least the classifier layer");
    }
    SeededRng rng(seed);
    layers_.reserve(specs.size());
    for (const LayerSpec& s : specs) {
        if (s.in_dim < 1 || s.out_dim < 1) {
            throw InvalidArgument("layer dims must be >= 1");
        }
        Layer layer;
        layer.weight = init_matrix(s.out_dim, s.in_dim, InitStrategy::FanInUniform, rng);
        layer.bias.resize(s.out_dim);
        const double bound = 1.0 / std::sqrt(static_cast<double>(s.in_dim));
        for (double& b : layer.bias) {
            b = rng.uniform(-bound, bound);
        }
        layer.activation = s.activation;
        layers_.push_back(std::move(layer));
    }
    validate();
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
    validate();
}

void Network::validate() const {
    if (layers_.empty()) {
        throw InvalidArgument("network needs at least the classifier layer");
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        if (l.bias.size() != static_cast<std::size_t>(l.weight.rows())) {
            throw DimensionError("layer " + std::to_string(i) + " bias length " +
                                 std::to_string(l.bias.size()) + " does not match weight " +
                                 l.weight.shape_str());
        }
        if (i > 0 && layers_[i - 1].weight.rows() != l.weight.cols()) {
            throw DimensionError("layer " + std::to_string(i) + " input width " +
                                 std::to_string(l.weight.cols()) + " does not chain from " +
                                 std::to_string(layers_[i - 1].weight.rows()));
        }
    }
    if (layers_.back().activation != Activation::None) {
        throw InvalidArgument("classifier layer must have activation none");
    }
}

int Network::input_dim() const {
    return layers_.front().weight.cols();
}

int Network::feature_dim() const {
    // With no hidden layers the classifier reads the input directly.
    if (layers_.size() == 1) {
        return input_dim();
    }
    return layers_[layers_.size() - 2].weight.rows();
}

int Network::class_count() const {
    return layers_.back().weight.rows();
}

std::vector<LayerSpec> Network::specs() const {
    std::vector<LayerSpec> out;
    out.reserve(layers_.size());
    for (const Layer& l : layers_) {
        out.push_back({l.weight.cols(), l.weight.rows(), l.activation});
    }
    return out;
}

ForwardPass forward(const Network& net, const Matrix& x) {
    if (x.rows() != net.input_dim()) {
        throw DimensionError("forward input has " + std::to_string(x.rows()) +
                             " rows, network expects " + std::to_string(net.input_dim()));
    }
    ForwardPass pass;
    pass.input = x;
    pass.net_version = net.version();
    const Matrix* current = &pass.input;
    for (const Layer& layer : net.layers()) {
        Matrix pre = matmul(layer.weight, *current);
        for (int r = 0; r < pre.rows(); ++r) {
            for (int c = 0; c < pre.cols(); ++c) {
                pre.at(r, c) += layer.bias[r];
            }
        }
        Matrix post(pre.rows(), pre.cols());
        for (int r = 0; r < pre.rows(); ++r) {
            for (int c = 0; c < pre.cols(); ++c) {
                post.at(r, c) = activate(layer.activation, pre.at(r, c));
            }
        }
        pass.pre.push_back(std::move(pre));
        pass.post.push_back(std::move(post));
        current = &pass.post.back();
    }
    pass.logits = pass.post.back();
    pass.features =
        pass.post.size() >= 2 ? pass.post[pass.post.size() - 2] : pass.input;
    return pass;
}

NetGradients backward(const Network& net, const ForwardPass& pass, const Matrix& dz,
                      const Matrix& ds) {
    if (pass.net_version != net.version()) {
        throw InvalidArgument("stale forward tape: network was updated after forward");
    }
    const auto& layers = net.layers();
    if (pass.pre.size() != layers.size()) {
        throw InvalidArgument("forward tape does not match this network");
    }
    const int batch = pass.input.cols();
    if (dz.rows() != net.class_count() || dz.cols() != batch) {
        throw DimensionError("dZ shape " + dz.shape_str() + " does not match logits " +
                             std::to_string(net.class_count()) + "x" + std::to_string(batch));
    }
    if (ds.rows() != net.feature_dim() || ds.cols() != batch) {
        throw DimensionError("dS shape " + ds.shape_str() + " does not match features " +
                             std::to_string(net.feature_dim()) + "x" + std::to_string(batch));
    }

    NetGradients grads;
    grads.weight.resize(layers.size());
    grads.bias.resize(layers.size());

    Matrix dpost = dz; // gradient at the output of the current layer
    for (int li = static_cast<int>(layers.size()) - 1; li >= 0; --li) {
        const Layer& layer = layers[li];
        // The feature head joins at the output of the last hidden layer.
        if (li == static_cast<int>(layers.size()) - 2) {
            add_scaled_inplace(dpost, 1.0, ds);
        }
        Matrix dpre = dpost;
        if (layer.activation != Activation::None) {
            for (int r = 0; r < dpre.rows(); ++r) {
                for (int c = 0; c < dpre.cols(); ++c) {
                    dpre.at(r, c) *= activate_grad(layer.activation, pass.pre[li].at(r, c));
                }
            }
        }
        const Matrix& layer_input = li == 0 ? pass.input : pass.post[li - 1];
        grads.weight[li] = matmul(dpre, transpose(layer_input));
        grads.bias[li] = row_sums(dpre);
        if (li > 0) {
            dpost = matmul(transpose(layer.weight), dpre);
        }
    }
    // A single-layer network routes dS nowhere: the features are the input.
    return grads;
}

void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, const SgdParams& p) {
    if (p.lr <= 0.0) {
        throw InvalidArgument("sgd_step requires lr > 0");
    }
    if (p.momentum < 0.0 || p.momentum >= 1.0) {
        throw InvalidArgument("sgd_step requires momentum in [0, 1)");
    }
    if (!param.same_shape(grad) || !param.same_shape(velocity)) {
        throw DimensionError("sgd_step shape mismatch: param " + param.shape_str() + ", grad " +
                             grad.shape_str() + ", velocity " + velocity.shape_str());
    }
    double* pv = velocity.data();
    double* pp = param.data();
    const double* pg = grad.data();
    for (std::size_t i = 0; i < param.size(); ++i) {
        pv[i] = p.momentum * pv[i] + pg[i] + p.weight_decay * pp[i];
        pp[i] -= p.lr * pv[i];
    }
}

void sgd_step(std::vector<double>& param, const std::vector<double>& grad,
              std::vector<double>& velocity, const SgdParams& p) {
    if (p.lr <= 0.0) {
        throw InvalidArgument("sgd_step requires lr > 0");
    }
    if (p.momentum < 0.0 || p.momentum >= 1.0) {
        throw InvalidArgument("sgd_step requires momentum in [0, 1)");
    }
    if (param.size() != grad.size() || param.size() != velocity.size()) {
        throw DimensionError("sgd_step length mismatch: param " + std::to_string(param.size()) +
                             ", grad " + std::to_string(grad.size()) + ", velocity " +
                             std::to_string(velocity.size()));
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity[i] = p.momentum * velocity[i] + grad[i] + p.weight_decay * param[i];
        param[i] -= p.lr * velocity[i];
    }
}

NetSgdState make_sgd_state(const Network& net) {
    NetSgdState state;
    for (const Layer& l : net.layers()) {
        state.vweight.emplace_back(l.weight.rows(), l.weight.cols());
        state.vbias.emplace_back(l.bias.size(), 0.0);
    }
    return state;
}

void sgd_update(Network& net, const NetGradients& grads, NetSgdState& state, const SgdParams& p) {
    auto& layers = net.layers();
    if (grads.weight.size() != layers.size() || state.vweight.size() != layers.size()) {
        throw DimensionError("sgd_update: gradient/state layer count mismatch");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        sgd_step(layers[i].weight, grads.weight[i], state.vweight[i], p);
        sgd_step(layers[i].bias, grads.bias[i], state.vbias[i], p);
    }
    net.bump_version();
}

} // namespace distillbench
