#include "loadcast/optimizer.hpp"

#include "loadcast/error.hpp"

#include <cmath>

namespace loadcast {

void rmsprop_step(ModelParameters& params, const Gradients& grads, OptimizerState& state) {
    if (!params.same_shape(grads) || state.accum.size() != params.size())
        throw ShapeMismatch("rmsprop_step: parameter, gradient and accumulator shapes differ");
    const auto& cfg = state.config;
    auto theta = params.values();
    const auto g = grads.values();
    for (std::size_t k = 0; k < theta.size(); ++k) {
        double& acc = state.accum[k];
        acc = cfg.decay * acc + (1.0 - cfg.decay) * g[k] * g[k];
        theta[k] -= cfg.learning_rate * g[k] / std::sqrt(acc + cfg.epsilon);
    }
}

}  // namespace loadcast
