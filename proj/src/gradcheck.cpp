#include "loadcast/gradcheck.hpp"

#include "loadcast/rng.hpp"

#include <algorithm>
#include <cmath>

namespace loadcast {

double relative_error(double analytic, double numeric) noexcept {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

GradCheckReport compare_gradients(const ModelParameters& params, const SequenceWindow& window, double target,
                                  const Gradients& analytic, double step, double tolerance) {
    ModelParameters probe = params;
    ForwardTrace trace;
    auto loss = [&] {
        const double y = forward(probe, window.inputs, window.steps, trace);
        return (y - target) * (y - target);
    };
    GradCheckReport report;
    auto theta = probe.values();
    const auto a = analytic.values();
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double saved = theta[k];
        theta[k] = saved + step;
        const double up = loss();
        theta[k] = saved - step;
        const double down = loss();
        theta[k] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double err = relative_error(a[k], numeric);
        if (err > report.max_rel_error || k == 0) {
            report.max_rel_error = err;
            report.worst_index = k;
            report.analytic = a[k];
            report.numeric = numeric;
        }
    }
    report.worst_param = params.describe(report.worst_index);
    report.passed = report.max_rel_error <= tolerance;
    return report;
}

GradCheckReport grad_check(const ModelParameters& params, const SequenceWindow& window, double target,
                           double step, double tolerance) {
    const auto fc = forward(params, window);
    return compare_gradients(params, window, target, backward(params, fc.trace, window, target), step, tolerance);
}

GradCheckSweep grad_check_sweep(std::size_t models, CellKind kind, std::uint64_t root_seed, double step,
                                double tolerance) {
    constexpr std::size_t kHidden = 4, kSteps = 5;
    GradCheckSweep sweep;
    sweep.models = models;
    for (std::size_t k = 0; k < models; ++k) {
        const std::uint64_t seed = derive_seed(root_seed, "gradcheck", k);
        const std::size_t dim = k % 2 == 0 ? 1 : 3;
        auto params = ModelParameters::initialized(kind, dim, kHidden, seed);
        Rng rng(derive_seed(seed, "data"));
        std::normal_distribution<double> gauss(0.0, 1.0);
        SequenceWindow w;
        w.steps = kSteps;
        w.dim = dim;
        for (std::size_t i = 0; i < kSteps * dim; ++i) w.inputs.push_back(gauss(rng));
        const double target = gauss(rng);
        w.target = {target};

        const auto report = grad_check(params, w, target, step, tolerance);
        if (!report.passed) ++sweep.failures;
        if (report.max_rel_error >= sweep.max_rel_error) {
            sweep.max_rel_error = report.max_rel_error;
            sweep.worst = "model " + std::to_string(k) + " " + report.worst_param;
        }
    }
    return sweep;
}

}  // namespace loadcast
