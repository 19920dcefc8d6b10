#pragma once

#include "loadcast/calls.hpp"
#include "loadcast/cell.hpp"
#include "loadcast/model.hpp"

#include <span>
#include <vector>

namespace loadcast {

// Batch-level kernels. The Parallel path distributes windows over OpenMP
// threads; the Serial path is the reference it is tested against. Both
// reduce per-sample results in sample order, so their outputs are
// bit-identical for any thread count.

// Scratch reused across batch_gradient calls.
class GradientWorkspace {
public:
    std::vector<Gradients> per_sample;
    std::vector<ForwardTrace> traces;  // one per thread
    std::vector<double> losses;
};

// Mean squared error of the batch; `out` receives its gradient.
double batch_gradient(const ModelParameters& params, std::span<const SequenceWindow> windows,
                      std::span<const std::size_t> batch, Gradients& out, GradientWorkspace& ws,
                      Exec exec = Exec::Parallel);

std::vector<double> predict(const ModelParameters& params, std::span<const SequenceWindow> windows,
                            Exec exec = Exec::Parallel);

// MAE of predictions against each window's training target.
double evaluate_mae(const ModelParameters& params, std::span<const SequenceWindow> windows,
                    Exec exec = Exec::Parallel);

}  // namespace loadcast
