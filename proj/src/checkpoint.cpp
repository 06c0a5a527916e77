#include "distillbench/checkpoint.hpp"

#include <sstream>

#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"

namespace distillbench {

namespace {

constexpr const char* kMagic = "DISTILLBENCH-CKPT v1";

std::string spec_list_string(const std::vector<LayerSpec>& specs) {
    std::string out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(specs[i].in_dim) + ':' + std::to_string(specs[i].out_dim) + ':' +
               activation_name(specs[i].activation);
    }
    return out;
}

std::vector<LayerSpec> parse_spec_list(const std::string& text) {
    std::vector<LayerSpec> specs;
    for (const std::string& item : split(text, ',')) {
        std::vector<std::string> parts = split(trim(item), ':');
        if (parts.size() != 3) {
            throw ParseError("line 2: layer spec '" + item + "' is not in:out:act");
        }
        LayerSpec spec;
        spec.in_dim = static_cast<int>(parse_int(parts[0], "line 2"));
        spec.out_dim = static_cast<int>(parse_int(parts[1], "line 2"));
        spec.activation = parse_activation(parts[2]);
        specs.push_back(spec);
    }
    return specs;
}

} // namespace

std::string container_text(const CheckpointContainer& container) {
    std::ostringstream out;
    out << kMagic << '\n';
    out << spec_list_string(container.specs) << '\n';
    out << container.seed << ' ' << container.epoch << '\n';
    for (const NamedTensor& tensor : container.tensors) {
        out << tensor.name << ' ' << tensor.values.rows() << ' ' << tensor.values.cols();
        const double* p = tensor.values.data();
        for (std::size_t i = 0; i < tensor.values.size(); ++i) {
            out << ' ' << format_double(p[i]);
        }
        out << '\n';
    }
    return out.str();
}

void write_container(const CheckpointContainer& container, const std::string& path) {
    write_text_file(path, container_text(container));
}

CheckpointContainer read_container(const std::string& path) {
    const std::string text = read_text_file(path);
    std::vector<std::string> lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    if (lines.size() < 4) {
        throw ParseError("checkpoint '" + path + "' truncated: only " +
                         std::to_string(lines.size()) + " line(s), need at least 4");
    }
    if (trim(lines[0]) != kMagic) {
        throw ParseError("line 1: expected '" + std::string(kMagic) + "' in " + path);
    }
    CheckpointContainer container;
    container.specs = parse_spec_list(trim(lines[1]));
    {
        std::vector<std::string> parts;
        for (const std::string& tok : split(trim(lines[2]), ' ')) {
            if (!tok.empty()) parts.push_back(tok);
        }
        if (parts.size() != 2) {
            throw ParseError("line 3: expected 'seed epoch', got '" + lines[2] + "'");
        }
        container.seed = static_cast<std::uint64_t>(parse_int(parts[0], "line 3"));
        container.epoch = static_cast<int>(parse_int(parts[1], "line 3"));
    }
    for (std::size_t li = 3; li < lines.size(); ++li) {
        const std::string context = "line " + std::to_string(li + 1);
        std::vector<std::string> tokens;
        for (const std::string& tok : split(trim(lines[li]), ' ')) {
            if (!tok.empty()) tokens.push_back(tok);
        }
        if (tokens.empty()) {
            continue;
        }
        if (tokens.size() < 3) {
            throw ParseError(context + ": expected 'name rows cols values...'");
        }
        NamedTensor tensor;
        tensor.name = tokens[0];
        const int rows = static_cast<int>(parse_int(tokens[1], context));
        const int cols = static_cast<int>(parse_int(tokens[2], context));
        if (rows < 1 || cols < 1) {
            throw ParseError(context + ": tensor dims must be >= 1");
        }
        const std::size_t expected = static_cast<std::size_t>(rows) * cols;
        if (tokens.size() - 3 != expected) {
            throw ParseError(context + ": tensor '" + tensor.name + "' declares " +
                             std::to_string(expected) + " values but carries " +
                             std::to_string(tokens.size() - 3));
        }
        std::vector<double> values;
        values.reserve(expected);
        for (std::size_t i = 3; i < tokens.size(); ++i) {
            values.push_back(parse_double(tokens[i], context));
        }
        tensor.values = Matrix(rows, cols, std::move(values));
        container.tensors.push_back(std::move(tensor));
    }
    return container;
}

namespace {

const Matrix& find_tensor(const CheckpointContainer& container, const std::string& name,
                          const std::string& path) {
    for (const NamedTensor& tensor : container.tensors) {
        if (tensor.name == name) {
            return tensor.values;
        }
    }
    throw ParseError("checkpoint '" + path + "' is missing tensor '" + name + "'");
}

} // namespace

void save_checkpoint(const Network& net, std::uint64_t seed, int epoch, const std::string& path) {
    CheckpointContainer container;
    container.specs = net.specs();
    container.seed = seed;
    container.epoch = epoch;
    const auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string prefix = "layer." + std::to_string(i) + '.';
        container.tensors.push_back({prefix + "weight", layers[i].weight});
        container.tensors.push_back(
            {prefix + "bias", Matrix(static_cast<int>(layers[i].bias.size()), 1, layers[i].bias)});
    }
    write_container(container, path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    CheckpointContainer container = read_container(path);
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < container.specs.size(); ++i) {
        const LayerSpec& spec = container.specs[i];
        const std::string prefix = "layer." + std::to_string(i) + '.';
        const Matrix& weight = find_tensor(container, prefix + "weight", path);
        const Matrix& bias = find_tensor(container, prefix + "bias", path);
        if (weight.rows() != spec.out_dim || weight.cols() != spec.in_dim) {
            throw ParseError("checkpoint '" + path + "': tensor '" + prefix + "weight' is " +
                             weight.shape_str() + " but the header declares " +
                             std::to_string(spec.out_dim) + "x" + std::to_string(spec.in_dim));
        }
        if (bias.rows() != spec.out_dim || bias.cols() != 1) {
            throw ParseError("checkpoint '" + path + "': tensor '" + prefix + "bias' is " +
                             bias.shape_str() + " but the header declares " +
                             std::to_string(spec.out_dim) + "x1");
        }
        Layer layer;
        layer.weight = weight;
        layer.bias.assign(bias.data(), bias.data() + bias.size());
        layer.activation = spec.activation;
        layers.push_back(std::move(layer));
    }
    return {Network(std::move(layers)), container.seed, container.epoch};
}

void save_ensemble(const ProjectorEnsemble& ensemble, std::uint64_t seed, int epoch,
                   const std::string& path) {
    CheckpointContainer container;
    container.seed = seed;
    container.epoch = epoch;
    const Projector& first = ensemble.members.front();
    for (const ProjLayer& layer : first.layers) {
        container.specs.push_back(
            {layer.weight.cols(), layer.weight.rows(), layer.activation});
    }
    for (std::size_t k = 0; k < ensemble.members.size(); ++k) {
        const Projector& member = ensemble.members[k];
        for (std::size_t j = 0; j < member.layers.size(); ++j) {
            container.tensors.push_back({"proj." + std::to_string(k) + ".layer." +
                                             std::to_string(j),
                                         member.layers[j].weight});
        }
    }
    write_container(container, path);
}

ProjectorEnsemble load_ensemble(const std::string& path) {
    CheckpointContainer container = read_container(path);
    const std::size_t layers_per_member = container.specs.size();
    if (layers_per_member == 0 || container.tensors.empty() ||
        container.tensors.size() % layers_per_member != 0) {
        throw ParseError("checkpoint '" + path + "': tensor count " +
                         std::to_string(container.tensors.size()) +
                         " is not a multiple of the declared " +
                         std::to_string(layers_per_member) + " layer(s)");
    }
    const std::size_t q = container.tensors.size() / layers_per_member;
    ProjectorEnsemble ensemble;
    for (std::size_t k = 0; k < q; ++k) {
        Projector member;
        for (std::size_t j = 0; j < layers_per_member; ++j) {
            const std::string name =
                "proj." + std::to_string(k) + ".layer." + std::to_string(j);
            const Matrix& weight = find_tensor(container, name, path);
            const LayerSpec& spec = container.specs[j];
            if (weight.rows() != spec.out_dim || weight.cols() != spec.in_dim) {
                throw ParseError("checkpoint '" + path + "': tensor '" + name + "' is " +
                                 weight.shape_str() + " but the header declares " +
                                 std::to_string(spec.out_dim) + "x" +
                                 std::to_string(spec.in_dim));
            }
            member.layers.push_back({weight, spec.activation});
        }
        ensemble.members.push_back(std::move(member));
    }
    return ensemble;
}

void save_logit_projector(const LogitProjector& lp, std::uint64_t seed, int epoch,
                          const std::string& path) {
    CheckpointContainer container;
    container.seed = seed;
    container.epoch = epoch;
    container.specs.push_back({lp.weight.cols(), lp.weight.rows(), Activation::None});
    container.tensors.push_back({"logit_proj.weight", lp.weight});
    write_container(container, path);
}

LogitProjector load_logit_projector(const std::string& path) {
    CheckpointContainer container = read_container(path);
    LogitProjector lp;
    lp.weight = find_tensor(container, "logit_proj.weight", path);
    if (lp.weight.rows() != lp.weight.cols()) {
        throw ParseError("checkpoint '" + path + "': logit projector must be square, got " +
                         lp.weight.shape_str());
    }
    return lp;
}

} // namespace distillbench
