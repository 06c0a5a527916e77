#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distillbench/matrix.hpp"
#include "distillbench/network.hpp"

namespace distillbench {

/// 1L is the single linear map; 2L/3L/4L stack m-wide layers; 2Lx2 and 2Lx3
/// are two-layer variants with hidden widths 2m and 3m.
enum class ProjArch { L1, L2, L3, L4, L2x2, L2x3 };

ProjArch parse_proj_arch(const std::string& name); // 1L | 2L | 3L | 4L | 2Lx2 | 2Lx3
std::string proj_arch_name(ProjArch a);

// Bias-free chain of (in, out) widths for an arch mapping d -> m.
std::vector<std::pair<int, int>> projector_layer_dims(ProjArch arch, int d, int m);

struct ProjLayer {
    Matrix weight; // out x in, no bias
    Activation activation = Activation::None;
};

/// Student-side feature transform: every layer is activation(W x), bias-free.
struct Projector {
    std::vector<ProjLayer> layers;
    std::uint64_t version = 0;

    int in_dim() const { return layers.front().weight.cols(); }
    int out_dim() const { return layers.back().weight.rows(); }
};

Projector make_projector(ProjArch arch, int d, int m, Activation act, InitStrategy init,
                         SeededRng& rng);

struct ProjectorPass {
    Matrix input;
    std::vector<Matrix> pre;
    std::vector<Matrix> post;
    std::uint64_t version = 0;

    const Matrix& output() const { return post.back(); }
};

ProjectorPass project(const Projector& p, const Matrix& s);

struct ProjectorGradients {
    std::vector<Matrix> weight;
    Matrix input; // dS
};

ProjectorGradients project_backward(const Projector& p, const ProjectorPass& pass,
                                    const Matrix& dout);

/// q projectors of identical shape, independently seeded; the ensemble output
/// is the arithmetic mean of the member outputs.
struct ProjectorEnsemble {
    std::vector<Projector> members;
    std::uint64_t version = 0;

    int size() const { return static_cast<int>(members.size()); }
    int in_dim() const { return members.front().in_dim(); }
    int out_dim() const { return members.front().out_dim(); }
};

/// Member k draws its weights from seed base_seed + k. init "mixed" cycles
/// fan_in_uniform, he, orthogonal across members.
ProjectorEnsemble build_ensemble(int d, int m, int q, ProjArch arch, Activation act,
                                 const std::string& init, std::uint64_t base_seed);

struct EnsemblePass {
    std::vector<ProjectorPass> member_passes;
    Matrix output;
    std::uint64_t version = 0;
};

EnsemblePass ensemble_project(const ProjectorEnsemble& e, const Matrix& s);

struct EnsembleGradients {
    std::vector<std::vector<Matrix>> member_weight; // [member][layer]
    Matrix input;                                   // dS, summed over members
};

/// Each member receives dF/q through its own chain; dS sums the members'
/// input gradients.
EnsembleGradients ensemble_backward(const ProjectorEnsemble& e, const EnsemblePass& pass,
                                    const Matrix& df);

struct ProjSgdState {
    std::vector<std::vector<Matrix>> velocity; // [member][layer]
};

ProjSgdState make_sgd_state(const ProjectorEnsemble& e);
void sgd_update(ProjectorEnsemble& e, const EnsembleGradients& grads, ProjSgdState& state,
                const SgdParams& p);

/// Square map on logits, v = W z; trained jointly with the student during
/// logit distillation.
struct LogitProjector {
    Matrix weight; // c x c
    std::uint64_t version = 0;
};

// Identity plus small fan_in_uniform noise, so early training tracks the
// unprojected objective.
inline constexpr double kLogitProjNoiseScale = 0.01;
LogitProjector make_logit_projector(int class_count, SeededRng& rng);

Matrix project_logits(const LogitProjector& lp, const Matrix& z);

struct LogitProjGradients {
    Matrix weight; // dW
    Matrix logits; // dZ
};

LogitProjGradients project_logits_backward(const LogitProjector& lp, const Matrix& z,
                                           const Matrix& dv);

} // namespace distillbench
