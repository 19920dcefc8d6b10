#include "loadcast/kernels.hpp"

#include "loadcast/error.hpp"

#include <omp.h>

namespace loadcast {

namespace {

void prepare(GradientWorkspace& ws, const ModelParameters& params, std::size_t batch, std::size_t threads) {
    if (ws.per_sample.size() < batch) ws.per_sample.resize(batch);
    for (auto& g : ws.per_sample)
        if (!g.same_shape(params)) g = Gradients(params.kind(), params.input_size(), params.hidden_size());
    if (ws.traces.size() < threads) ws.traces.resize(threads);
    ws.losses.assign(batch, 0.0);
}

void sample_gradient(const ModelParameters& params, const SequenceWindow& w, ForwardTrace& trace, Gradients& g,
                     double& loss) {
    if (w.dim != params.input_size()) throw ShapeMismatch("window dimension does not match model input size");
    const double y = forward(params, w.inputs, w.steps, trace);
    const double err = y - training_target(w);
    loss = err * err;
    backward(params, trace, w.inputs, 2.0 * err, g);
}

}  // namespace

double batch_gradient(const ModelParameters& params, std::span<const SequenceWindow> windows,
                      std::span<const std::size_t> batch, Gradients& out, GradientWorkspace& ws, Exec exec) {
    const std::size_t n = batch.size();
    if (n == 0) throw EmptyBatch("batch_gradient on empty batch");
    if (!out.same_shape(params)) out = Gradients(params.kind(), params.input_size(), params.hidden_size());

    const std::size_t threads = exec == Exec::Parallel ? static_cast<std::size_t>(omp_get_max_threads()) : 1;
    prepare(ws, params, n, threads);

    if (exec == Exec::Serial) {
        for (std::size_t s = 0; s < n; ++s)
            sample_gradient(params, windows[batch[s]], ws.traces[0], ws.per_sample[s], ws.losses[s]);
    } else {
        // exceptions may not cross the parallel region
        bool bad_shape = false;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
            const auto& w = windows[batch[static_cast<std::size_t>(s)]];
            if (w.dim != params.input_size()) {
#pragma omp atomic write
                bad_shape = true;
                continue;
            }
            auto& trace = ws.traces[static_cast<std::size_t>(omp_get_thread_num())];
            sample_gradient(params, w, trace, ws.per_sample[static_cast<std::size_t>(s)],
                            ws.losses[static_cast<std::size_t>(s)]);
        }
        if (bad_shape) throw ShapeMismatch("window dimension does not match model input size");
    }

    const double scale = 1.0 / static_cast<double>(n);
    auto total = out.values();
    const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(total.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (std::ptrdiff_t k = 0; k < p; ++k) {
        double sum = 0.0;
        for (std::size_t s = 0; s < n; ++s) sum += ws.per_sample[s].values()[static_cast<std::size_t>(k)];
        total[static_cast<std::size_t>(k)] = sum * scale;
    }
    double loss = 0.0;
    for (std::size_t s = 0; s < n; ++s) loss += ws.losses[s];
    return loss * scale;
}

std::vector<double> predict(const ModelParameters& params, std::span<const SequenceWindow> windows, Exec exec) {
    for (const auto& w : windows)
        if (w.dim != params.input_size()) throw ShapeMismatch("window dimension does not match model input size");
    std::vector<double> out(windows.size());
    if (exec == Exec::Serial) {
        ForwardTrace trace;
        for (std::size_t i = 0; i < windows.size(); ++i)
            out[i] = forward(params, windows[i].inputs, windows[i].steps, trace);
        return out;
    }
#pragma omp parallel
    {
        ForwardTrace trace;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(windows.size()); ++i) {
            const auto& w = windows[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] = forward(params, w.inputs, w.steps, trace);
        }
    }
    return out;
}

double evaluate_mae(const ModelParameters& params, std::span<const SequenceWindow> windows, Exec exec) {
    const auto preds = predict(params, windows, exec);
    std::vector<double> targets;
    targets.reserve(windows.size());
    for (const auto& w : windows) targets.push_back(training_target(w));
    return metric_mae(preds, targets);
}

}  // namespace loadcast
