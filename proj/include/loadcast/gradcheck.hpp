#pragma once

#include "loadcast/cell.hpp"
#include "loadcast/model.hpp"

#include <cstdint>
#include <string>

namespace loadcast {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::string worst_param;
    double analytic = 0.0;  // at the worst index
    double numeric = 0.0;
    bool passed = true;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric) noexcept;

// Compares `analytic` against central differences of the squared error
// (prediction - target)^2 for every parameter.
GradCheckReport compare_gradients(const ModelParameters& params, const SequenceWindow& window, double target,
                                  const Gradients& analytic, double step = 1e-5, double tolerance = 1e-4);

GradCheckReport grad_check(const ModelParameters& params, const SequenceWindow& window, double target,
                           double step = 1e-5, double tolerance = 1e-4);

struct GradCheckSweep {
    std::size_t models = 0;
    std::size_t failures = 0;
    double max_rel_error = 0.0;
    std::string worst;  // description of the worst parameter
    bool passed() const noexcept { return failures == 0; }
};

// Random small models: H=4, D alternating 1/3, M=5, inputs and target
// N(0,1), weights from the standard initializer. Model k uses seed
// derive_seed(root, "gradcheck", k).
GradCheckSweep grad_check_sweep(std::size_t models, CellKind kind, std::uint64_t root_seed = 0,
                                double step = 1e-5, double tolerance = 1e-4);

}  // namespace loadcast
