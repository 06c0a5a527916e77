#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distillbench/matrix.hpp"
#include "distillbench/numkit.hpp"
#include "distillbench/rng.hpp"

namespace distillbench {

enum class Activation { Relu, Gelu, None };

Activation parse_activation(const std::string& name); // relu | gelu | none
std::string activation_name(Activation a);

double activate(Activation a, double x);
// Derivative at the pre-activation value. ReLU uses the right derivative at 0.
double activate_grad(Activation a, double x);

struct LayerSpec {
    int in_dim = 0;
    int out_dim = 0;
    Activation activation = Activation::None;
};

struct Layer {
    Matrix weight; // out_dim x in_dim
    std::vector<double> bias;
    Activation activation = Activation::None;
};

/// Fully-connected network: hidden layers plus a final linear classifier.
/// The post-activation output of the last hidden layer is the feature matrix
/// S that distillation losses consume; the classifier maps S to logits.
/// With no hidden layers the input itself plays the role of S.
class Network {
public:
    // specs chain input -> hidden... -> classifier; the last spec is the
    // classifier and must have activation none. Weights and biases start
    // fan_in_uniform from the given seed.
    Network(std::vector<LayerSpec> specs, std::uint64_t seed);
    // Takes ownership of externally prepared layers (checkpoint loading).
    explicit Network(std::vector<Layer> layers);

    int input_dim() const;
    int feature_dim() const; // output width of the last hidden layer
    int class_count() const;

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    std::vector<LayerSpec> specs() const;

    std::uint64_t version() const { return version_; }
    void bump_version() { ++version_; }

private:
    void validate() const;

    std::vector<Layer> layers_;
    std::uint64_t version_ = 0;
};

/// Forward tape: keeps every intermediate needed by backward. Stale once the
/// network is updated.
struct ForwardPass {
    Matrix input;
    std::vector<Matrix> pre;  // per layer, pre-activation
    std::vector<Matrix> post; // per layer, post-activation
    Matrix features;          // S, feature_dim x b
    Matrix logits;            // Z, c x b
    std::uint64_t net_version = 0;
};

ForwardPass forward(const Network& net, const Matrix& x);

struct NetGradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
};

/// Reverse-mode gradients of the scalar whose output-gradients are dZ (at the
/// logits) and dS (at the features); the two heads sum at the last hidden
/// layer. Either may be zero.
NetGradients backward(const Network& net, const ForwardPass& pass, const Matrix& dz,
                      const Matrix& ds);

struct SgdParams {
    double lr = 0.0;
    double momentum = 0.0;
    double weight_decay = 0.0;
};

/// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v
void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, const SgdParams& p);
void sgd_step(std::vector<double>& param, const std::vector<double>& grad,
              std::vector<double>& velocity, const SgdParams& p);

struct NetSgdState {
    std::vector<Matrix> vweight;
    std::vector<std::vector<double>> vbias;
};

NetSgdState make_sgd_state(const Network& net);
void sgd_update(Network& net, const NetGradients& grads, NetSgdState& state, const SgdParams& p);

} // namespace distillbench
