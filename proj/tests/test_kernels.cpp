#include "doctest.h"

#include "loadcast/cell.hpp"
#include "loadcast/error.hpp"
#include "loadcast/kernels.hpp"

#include <numeric>
#include <random>

using namespace loadcast;

namespace {

std::vector<SequenceWindow> random_windows(std::size_t n, std::size_t dim, std::size_t steps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<SequenceWindow> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& w = out[i];
        w.dim = dim;
        w.steps = steps;
        w.inputs.resize(dim * steps);
        for (auto& v : w.inputs) v = n01(rng);
        w.target = {n01(rng)};
        w.anchor = i;
    }
    return out;
}

}  // namespace

TEST_CASE("serial and parallel batch gradients are bit-identical") {
    for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
        const auto p = ModelParameters::initialized(kind, 3, 16, 7);
        const auto ws = random_windows(100, 3, 18, 1);
        std::vector<std::size_t> batch(64);
        std::iota(batch.begin(), batch.end(), 20);
        Gradients gs, gp;
        GradientWorkspace a, b;
        const double ls = batch_gradient(p, ws, batch, gs, a, Exec::Serial);
        const double lp = batch_gradient(p, ws, batch, gp, b, Exec::Parallel);
        CHECK(ls == lp);
        CHECK(gs == gp);
        CHECK(predict(p, ws, Exec::Serial) == predict(p, ws, Exec::Parallel));
        CHECK(evaluate_mae(p, ws, Exec::Serial) == evaluate_mae(p, ws, Exec::Parallel));
    }
}

TEST_CASE("batch gradient is the mean of per-sample gradients") {
    const auto p = ModelParameters::initialized(CellKind::LSTM, 1, 4, 2);
    const auto ws = random_windows(5, 1, 6, 3);
    const std::vector<std::size_t> batch{0, 2, 4, 2};
    Gradients g;
    GradientWorkspace gw;
    const double loss = batch_gradient(p, ws, batch, g, gw, Exec::Serial);

    Gradients sum(CellKind::LSTM, 1, 4);
    double lsum = 0.0;
    for (auto i : batch) {
        const auto f = forward(p, ws[i]);
        const double e = f.prediction - ws[i].target[0];
        lsum += e * e;
        const auto gi = backward(p, f.trace, ws[i], ws[i].target[0]);
        for (std::size_t k = 0; k < sum.size(); ++k) sum.values()[k] += gi.values()[k];
    }
    CHECK(loss == doctest::Approx(lsum / 4).epsilon(1e-14));
    for (std::size_t k = 0; k < sum.size(); ++k)
        CHECK(g.values()[k] == doctest::Approx(sum.values()[k] / 4).epsilon(1e-12));
}

TEST_CASE("empty inputs") {
    const auto p = ModelParameters::initialized(CellKind::GRU, 1, 4, 2);
    const auto ws = random_windows(3, 1, 4, 3);
    Gradients g;
    GradientWorkspace gw;
    CHECK_THROWS_AS(batch_gradient(p, ws, {}, g, gw), EmptyBatch);
    CHECK_THROWS_AS(evaluate_mae(p, {}), EmptyBatch);
    CHECK(predict(p, {}).empty());
}
