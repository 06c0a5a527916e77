#include "distillbench/projector.hpp"

#include "distillbench/errors.hpp"

namespace distillbench {

ProjArch parse_proj_arch(const std::string& name) {
    if (name == "1L") return ProjArch::L1;
    if (name == "2L") return ProjArch::L2;
    if (name == "3L") return ProjArch::L3;
    if (name == "4L") return ProjArch::L4;
    if (name == "2Lx2") return ProjArch::L2x2;
    if (name == "2Lx3") return ProjArch::L2x3;
    throw InvalidArgument("unknown projector arch '" + name +
                          "' (expected 1L, 2L, 3L, 4L, 2Lx2, or 2Lx3)");
}

std::string proj_arch_name(ProjArch a) {
    switch (a) {
        case ProjArch::L1: return "1L";
        case ProjArch::L2: return "2L";
        case ProjArch::L3: return "3L";
        case ProjArch::L4: return "4L";
        case ProjArch::L2x2: return "2Lx2";
        case ProjArch::L2x3: return "2Lx3";
    }
    return "?";
}

std::vector<std::pair<int, int>> projector_layer_dims(ProjArch arch, int d, int m) {
    switch (arch) {
        case ProjArch::L1: return {{d, m}};
        case ProjArch::L2: return {{d, m}, {m, m}};
        case ProjArch::L3: return {{d, m}, {m, m}, {m, m}};
        case ProjArch::L4: return {{d, m}, {m, m}, {m, m}, {m, m}};
        case ProjArch::L2x2: return {{d, 2 * m}, {2 * m, m}};
        case ProjArch::L2x3: return {{d, 3 * m}, {3 * m, m}};
    }
    throw InvalidArgument("unknown projector arch");
}

Projector make_projector(ProjArch arch, int d, int m, Activation act, InitStrategy init,
                         SeededRng& rng) {
    if (d < 1 || m < 1) {
        throw InvalidArgument("projector dims must be >= 1");
    }
    Projector p;
    for (auto [in, out] : projector_layer_dims(arch, d, m)) {
        ProjLayer layer;
        layer.weight = init_matrix(out, in, init, rng);
        layer.activation = act;
        p.layers.push_back(std::move(layer));
    }
    return p;
}

ProjectorPass project(const Projector& p, const Matrix& s) {
    if (s.rows() != p.in_dim()) {
        throw DimensionError("project input has " + std::to_string(s.rows()) +
                             " rows, projector expects " + std::to_string(p.in_dim()));
    }
    ProjectorPass pass;
    pass.input = s;
    pass.version = p.version;
    const Matrix* current = &pass.input;
    for (const ProjLayer& layer : p.layers) {
        Matrix pre = matmul(layer.weight, *current);
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
    return pass;
}

ProjectorGradients project_backward(const Projector& p, const ProjectorPass& pass,
                                    const Matrix& dout) {
    if (pass.version != p.version) {
        throw InvalidArgument("stale projector tape: projector was updated after forward");
    }
    if (pass.pre.size() != p.layers.size()) {
        throw InvalidArgument("projector tape does not match this projector");
    }
    if (dout.rows() != p.out_dim() || dout.cols() != pass.input.cols()) {
        throw DimensionError("projector output gradient shape " + dout.shape_str() +
                             " does not match output " + std::to_string(p.out_dim()) + "x" +
                             std::to_string(pass.input.cols()));
    }
    ProjectorGradients grads;
    grads.weight.resize(p.layers.size());
    Matrix dpost = dout;
    for (int li = static_cast<int>(p.layers.size()) - 1; li >= 0; --li) {
        const ProjLayer& layer = p.layers[li];
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
        dpost = matmul(transpose(layer.weight), dpre);
    }
    grads.input = std::move(dpost);
    return grads;
}

ProjectorEnsemble build_ensemble(int d, int m, int q, ProjArch arch, Activation act,
                                 const std::string& init, std::uint64_t base_seed) {
    if (q < 1) {
        throw InvalidArgument("ensemble needs q >= 1 projectors, got " + std::to_string(q));
    }
    const bool mixed = init == "mixed";
    InitStrategy fixed = InitStrategy::FanInUniform;
    if (!mixed) {
        fixed = parse_init_strategy(init);
    }
    static const InitStrategy kCycle[] = {InitStrategy::FanInUniform, InitStrategy::He,
                                          InitStrategy::Orthogonal};
    ProjectorEnsemble e;
    for (int k = 0; k < q; ++k) {
        SeededRng rng(base_seed + static_cast<std::uint64_t>(k));
        InitStrategy strategy = mixed ? kCycle[k % 3] : fixed;
        e.members.push_back(make_projector(arch, d, m, act, strategy, rng));
    }
    return e;
}

EnsemblePass ensemble_project(const ProjectorEnsemble& e, const Matrix& s) {
    if (e.members.empty()) {
        throw InvalidArgument("ensemble_project on an empty ensemble");
    }
    EnsemblePass pass;
    pass.version = e.version;
    pass.member_passes.reserve(e.members.size());
    for (const Projector& p : e.members) {
        pass.member_passes.push_back(project(p, s));
    }
    const double inv_q = 1.0 / static_cast<double>(e.members.size());
    Matrix out(e.out_dim(), s.cols());
    for (const ProjectorPass& mp : pass.member_passes) {
        add_scaled_inplace(out, inv_q, mp.output());
    }
    pass.output = std::move(out);
    return pass;
}

EnsembleGradients ensemble_backward(const ProjectorEnsemble& e, const EnsemblePass& pass,
                                    const Matrix& df) {
    if (pass.version != e.version) {
        throw InvalidArgument("stale ensemble tape: ensemble was updated after forward");
    }
    if (pass.member_passes.size() != e.members.size()) {
        throw InvalidArgument("ensemble tape does not match this ensemble");
    }
    const double inv_q = 1.0 / static_cast<double>(e.members.size());
    Matrix dmember = scale(df, inv_q);
    EnsembleGradients grads;
    grads.member_weight.resize(e.members.size());
    grads.input = Matrix(e.in_dim(), pass.member_passes.front().input.cols());
    for (std::size_t k = 0; k < e.members.size(); ++k) {
        ProjectorGradients g = project_backward(e.members[k], pass.member_passes[k], dmember);
        grads.member_weight[k] = std::move(g.weight);
        add_scaled_inplace(grads.input, 1.0, g.input);
    }
    return grads;
}

ProjSgdState make_sgd_state(const ProjectorEnsemble& e) {
    ProjSgdState state;
    state.velocity.resize(e.members.size());
    for (std::size_t k = 0; k < e.members.size(); ++k) {
        for (const ProjLayer& layer : e.members[k].layers) {
            state.velocity[k].emplace_back(layer.weight.rows(), layer.weight.cols());
        }
    }
    return state;
}

void sgd_update(ProjectorEnsemble& e, const EnsembleGradients& grads, ProjSgdState& state,
                const SgdParams& p) {
    if (grads.member_weight.size() != e.members.size()) {
        throw DimensionError("ensemble sgd_update: gradient member count mismatch");
    }
    for (std::size_t k = 0; k < e.members.size(); ++k) {
        Projector& member = e.members[k];
        for (std::size_t li = 0; li < member.layers.size(); ++li) {
            sgd_step(member.layers[li].weight, grads.member_weight[k][li], state.velocity[k][li],
                     p);
        }
        ++member.version;
    }
    ++e.version;
}

LogitProjector make_logit_projector(int class_count, SeededRng& rng) {
    if (class_count < 1) {
        throw InvalidArgument("logit projector needs class_count >= 1");
    }
    LogitProjector lp;
    Matrix noise = init_matrix(class_count, class_count, InitStrategy::FanInUniform, rng);
    lp.weight = scaled_add(identity(class_count), kLogitProjNoiseScale, noise);
    return lp;
}

Matrix project_logits(const LogitProjector& lp, const Matrix& z) {
    if (z.rows() != lp.weight.cols()) {
        throw DimensionError("project_logits input has " + std::to_string(z.rows()) +
                             " rows, projector expects " + std::to_string(lp.weight.cols()));
    }
    return matmul(lp.weight, z);
}

LogitProjGradients project_logits_backward(const LogitProjector& lp, const Matrix& z,
                                           const Matrix& dv) {
    if (dv.rows() != lp.weight.rows() || dv.cols() != z.cols()) {
        throw DimensionError("project_logits_backward gradient shape " + dv.shape_str() +
                             " does not match output " + std::to_string(lp.weight.rows()) + "x" +
                             std::to_string(z.cols()));
    }
    LogitProjGradients grads;
    grads.weight = matmul(dv, transpose(z));
    grads.logits = matmul(transpose(lp.weight), dv);
    return grads;
}

} // namespace distillbench
