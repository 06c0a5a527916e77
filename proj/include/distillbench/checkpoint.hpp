#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distillbench/network.hpp"
#include "distillbench/projector.hpp"

namespace distillbench {

// Text checkpoint container; all values use shortest round-trip formatting,
// so a load reproduces forward outputs bitwise. Layout:
//   line 1: DISTILLBENCH-CKPT v1
//   line 2: layer spec list in:out:act,...
//   line 3: seed epoch
//   then one line per tensor: name rows cols values...

struct NamedTensor {
    std::string name;
    Matrix values;
};

struct CheckpointContainer {
    std::vector<LayerSpec> specs;
    std::uint64_t seed = 0;
    int epoch = 0;
    std::vector<NamedTensor> tensors;
};

std::string container_text(const CheckpointContainer& container);
void write_container(const CheckpointContainer& container, const std::string& path);
CheckpointContainer read_container(const std::string& path);

// Networks: tensors layer.<i>.weight and layer.<i>.bias.
void save_checkpoint(const Network& net, std::uint64_t seed, int epoch, const std::string& path);

struct LoadedCheckpoint {
    Network net;
    std::uint64_t seed = 0;
    int epoch = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Projector ensembles ride the same container: line 2 describes one member's
// bias-free chain, tensors are named proj.<k>.layer.<j>.
void save_ensemble(const ProjectorEnsemble& ensemble, std::uint64_t seed, int epoch,
                   const std::string& path);
ProjectorEnsemble load_ensemble(const std::string& path);

// Logit projectors: single tensor logit_proj.weight.
void save_logit_projector(const LogitProjector& lp, std::uint64_t seed, int epoch,
                          const std::string& path);
LogitProjector load_logit_projector(const std::string& path);

} // namespace distillbench
