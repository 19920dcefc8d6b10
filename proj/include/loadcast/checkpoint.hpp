#pragma once

#include "loadcast/model.hpp"
#include "loadcast/optimizer.hpp"

#include <optional>
#include <string>

#include "json.hpp"

namespace loadcast {

// Versioned JSON checkpoint of named parameter tensors:
//   {"format": "loadcast-checkpoint", "version": 1, "cell": "lstm",
//    "input_size": D, "hidden_size": H,
//    "tensors": [{"name": "W", "shape": [G*H, D], "data": [...]}, ...],
//    "optimizer": {"learning_rate", "decay", "epsilon", "accum": [...]}}
// Tensor data is row-major; doubles are written with round-trip precision.
// "optimizer" is optional.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    ModelParameters params;
    std::optional<OptimizerState> optimizer;
};

nlohmann::json checkpoint_to_json(const ModelParameters& params, const OptimizerState* optimizer = nullptr);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const ModelParameters& params,
                     const OptimizerState* optimizer = nullptr);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace loadcast
