#pragma once

#include "loadcast/model.hpp"

#include <vector>

namespace loadcast {

struct RmsPropConfig {
    double learning_rate = 1e-3;
    double decay = 0.9;
    double epsilon = 1e-8;
};

// Running mean of squared gradients, one entry per parameter.
struct OptimizerState {
    RmsPropConfig config;
    std::vector<double> accum;

    OptimizerState() = default;
    OptimizerState(const ModelParameters& params, RmsPropConfig cfg = {})
        : config(cfg), accum(params.size(), 0.0) {}
};

// acc <- rho*acc + (1-rho)*g^2 ;  theta <- theta - lr*g/sqrt(acc + eps)
void rmsprop_step(ModelParameters& params, const Gradients& grads, OptimizerState& state);

}  // namespace loadcast
