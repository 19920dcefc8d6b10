#include "doctest.h"

#include "loadcast/cell.hpp"
#include "loadcast/error.hpp"
#include "loadcast/gradcheck.hpp"
#include "loadcast/kernels.hpp"
#include "loadcast/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <random>

using namespace loadcast;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Straightforward per-gate evaluation reading parameters by (gate, unit, k)
// indices; independent of the kernel layout helpers.
double oracle_forward(const ModelParameters& p, const std::vector<double>& x, std::size_t steps) {
    const std::size_t H = p.hidden_size(), D = p.input_size();
    auto W = [&](std::size_t g, std::size_t j, std::size_t k) { return p.W()[(g * H + j) * D + k]; };
    auto U = [&](std::size_t g, std::size_t j, std::size_t k) { return p.U()[(g * H + j) * H + k]; };
    auto B = [&](std::size_t g, std::size_t j) { return p.b()[g * H + j]; };
    auto pre = [&](std::size_t g, std::size_t j, std::size_t t, const std::vector<double>& h, bool with_u) {
        double s = B(g, j);
        for (std::size_t k = 0; k < D; ++k) s += W(g, j, k) * x[t * D + k];
        if (with_u)
            for (std::size_t k = 0; k < H; ++k) s += U(g, j, k) * h[k];
        return s;
    };
    std::vector<double> h(H, 0.0), c(H, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> hn(H), cn(H);
        for (std::size_t j = 0; j < H; ++j) {
            if (p.kind() == CellKind::LSTM) {
                const double i = sig(pre(0, j, t, h, true)), f = sig(pre(1, j, t, h, true));
                const double g = std::tanh(pre(2, j, t, h, true)), o = sig(pre(3, j, t, h, true));
                cn[j] = f * c[j] + i * g;
                hn[j] = o * std::tanh(cn[j]);
            } else {
                const double z = sig(pre(0, j, t, h, true)), r = sig(pre(1, j, t, h, true));
                double un = 0.0;
                for (std::size_t k = 0; k < H; ++k) un += U(2, j, k) * h[k];
                const double n = std::tanh(pre(2, j, t, h, false) + r * un);
                hn[j] = (1 - z) * n + z * h[j];
            }
        }
        h = hn;
        c = cn;
    }
    double y = p.dense_b();
    for (std::size_t j = 0; j < H; ++j) y += p.dense_w()[j] * h[j];
    return y;
}

SequenceWindow window_of(std::vector<double> inputs, std::size_t dim, double target) {
    SequenceWindow w;
    w.dim = dim;
    w.steps = inputs.size() / dim;
    w.inputs = std::move(inputs);
    w.target = {target};
    return w;
}

}  // namespace

TEST_CASE("zero parameters predict zero") {
    for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
        ModelParameters p(kind, 3, 5);
        auto w = window_of(std::vector<double>(30, 0.7), 3, 1.0);
        CHECK(forward(p, w).prediction == 0.0);
    }
}

TEST_CASE("scalar LSTM matches hand evaluation") {
    ModelParameters p(CellKind::LSTM, 1, 1);
    // gates i, f, g, o
    const double Wv[4] = {0.5, -0.3, 0.8, 0.1}, Uv[4] = {0.2, 0.4, -0.6, 0.7}, bv[4] = {0.0, 1.0, 0.1, -0.2};
    for (int g = 0; g < 4; ++g) p.W()[g] = Wv[g], p.U()[g] = Uv[g], p.b()[g] = bv[g];
    p.dense_w()[0] = 1.5;
    p.dense_b() = 0.25;

    const double x = 1.0;
    const double i = sig(0.5 * x), f = sig(-0.3 * x + 1.0), g = std::tanh(0.8 * x + 0.1), o = sig(0.1 * x - 0.2);
    (void)f;  // c_0 = 0
    const double c1 = i * g, h1 = o * std::tanh(c1);
    const double expected = 1.5 * h1 + 0.25;
    CHECK(forward(p, window_of({x}, 1, 0)).prediction == doctest::Approx(expected).epsilon(1e-15));

    // second step uses the recurrent weights and the forget gate
    const double x2 = -0.5;
    const double i2 = sig(0.5 * x2 + 0.2 * h1), f2 = sig(-0.3 * x2 + 0.4 * h1 + 1.0);
    const double g2 = std::tanh(0.8 * x2 - 0.6 * h1 + 0.1), o2 = sig(0.1 * x2 + 0.7 * h1 - 0.2);
    const double c2 = f2 * c1 + i2 * g2, h2 = o2 * std::tanh(c2);
    CHECK(forward(p, window_of({x, x2}, 1, 0)).prediction == doctest::Approx(1.5 * h2 + 0.25).epsilon(1e-15));
}

TEST_CASE("forward agrees with an index-based oracle on random models") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const std::size_t D = 1 + seed % 3, H = 2 + seed % 5, M = 1 + seed % 7;
            const auto p = ModelParameters::initialized(kind, D, H, seed);
            std::vector<double> x(M * D);
            for (auto& v : x) v = n01(rng);
            const double y = forward(p, window_of(x, D, 0)).prediction;
            CHECK(y == doctest::Approx(oracle_forward(p, x, M)).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward is deterministic and validates shapes") {
    const auto p = ModelParameters::initialized(CellKind::GRU, 3, 8, 11);
    const auto w = window_of(std::vector<double>(18 * 3, 0.3), 3, 0);
    CHECK(forward(p, w).prediction == forward(p, w).prediction);
    CHECK(ModelParameters::initialized(CellKind::GRU, 3, 8, 11) == p);
    CHECK_FALSE(ModelParameters::initialized(CellKind::GRU, 3, 8, 12) == p);
    ForwardTrace tr;
    std::vector<double> bad(7, 0.0);
    CHECK_THROWS_AS(forward(p, bad, 3, tr), ShapeMismatch);
    CHECK_THROWS_AS(forward(p, {}, 0, tr), ShapeMismatch);
}

TEST_CASE("initializer bounds and forget bias") {
    const std::size_t H = 16;
    const auto p = ModelParameters::initialized(CellKind::LSTM, 3, H, 4);
    const double bound = 1.0 / std::sqrt(16.0);
    for (std::size_t j = 0; j < H; ++j) CHECK(p.b()[H + j] == 1.0);
    for (double v : p.W()) CHECK(std::abs(v) <= bound);
    for (double v : p.U()) CHECK(std::abs(v) <= bound);
    CHECK(p.size() == 4 * H * 3 + 4 * H * H + 4 * H + H + 1);
    CHECK(ModelParameters(CellKind::GRU, 3, H).size() == 3 * H * 3 + 3 * H * H + 3 * H + H + 1);
    CHECK(p.describe(p.size() - 1) == "dense_b[0]");
}

TEST_CASE("loss and metric values") {
    const std::vector<double> zero{0, 0}, t{1, 3};
    CHECK(loss_mse(zero, t) == 5.0);
    CHECK(metric_mae(zero, t) == 2.0);
    const std::vector<double> a{2}, b{5};
    CHECK(loss_mse(a, b) == 9.0);
    CHECK(metric_mae(a, b) == 3.0);
    CHECK(metric_mae(b, a) == metric_mae(a, b));
    CHECK_THROWS_AS(loss_mse({}, {}), EmptyBatch);
    CHECK_THROWS_AS(metric_mae({}, {}), EmptyBatch);
    CHECK_THROWS_AS(loss_mse(zero, b), ShapeMismatch);
}

TEST_CASE("gradient edge cases") {
    const auto p = ModelParameters::initialized(CellKind::LSTM, 1, 4, 3);
    const auto w = window_of({0.1, -0.4, 0.9}, 1, 0);
    const auto f = forward(p, w);
    const auto at_target = backward(p, f.trace, w, f.prediction);
    CHECK(at_target.dense_b() == 0.0);
    for (double g : at_target.values()) CHECK(g == 0.0);

    Gradients g;
    backward(p, f.trace, w.inputs, 0.0, g);
    CHECK(g.same_shape(p));
    for (double v : g.values()) CHECK(v == 0.0);

    // dL/d dense_b = 2 (y - target)
    const auto off = backward(p, f.trace, w, f.prediction - 0.5);
    CHECK(off.dense_b() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gradient check over 100 random models per cell") {
    const auto t0 = std::chrono::steady_clock::now();
    for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
        const auto sweep = grad_check_sweep(100, kind);
        INFO(to_string(kind) << " worst " << sweep.max_rel_error << " at " << sweep.worst);
        CHECK(sweep.models == 100);
        CHECK(sweep.passed());
        CHECK(sweep.max_rel_error <= 1e-4);
    }
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(30));
}

TEST_CASE("gradient check detects a broken recurrent gradient") {
    for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
        const auto p = ModelParameters::initialized(kind, 3, 4, 21);
        auto w = window_of({0.3, -1.0, 0.5, 1.2, 0.1, -0.7, -0.2, 0.8, 0.4, 1.0, -1.1, 0.6, 0.2, 0.3, -0.5}, 3, 0.9);
        const auto f = forward(p, w);
        auto g = backward(p, f.trace, w, 0.9);
        CHECK(compare_gradients(p, w, 0.9, g).passed);
        for (double& v : g.U()) v = 0.0;
        const auto r = compare_gradients(p, w, 0.9, g);
        CHECK_FALSE(r.passed);
        CHECK(r.worst_param.rfind("U[", 0) == 0);
    }
}

TEST_CASE("a coarse step degrades the numeric gradient") {
    const auto p = ModelParameters::initialized(CellKind::LSTM, 1, 4, 8);
    const auto w = window_of({1.5, -2.0, 0.5, 2.5, -1.0}, 1, 3.0);
    const auto fine = grad_check(p, w, 3.0);
    const auto coarse = grad_check(p, w, 3.0, 1e-1);
    CHECK(fine.passed);
    CHECK(coarse.max_rel_error > fine.max_rel_error);
}

TEST_CASE("states stay finite on long bounded inputs") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
        const auto p = ModelParameters::initialized(kind, 3, 8, 1);
        std::vector<double> x(300);
        for (auto& v : x) v = u(rng);
        const auto f = forward(p, window_of(x, 3, 0));
        CHECK(std::isfinite(f.prediction));
        for (double h : f.trace.h) CHECK(std::abs(h) <= 1.0);
        const auto g = backward(p, f.trace, window_of(x, 3, 0), 0.0);
        CHECK(g.all_finite());
    }
}

TEST_CASE("both cells learn to echo the last input") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    std::vector<SequenceWindow> ws;
    for (int i = 0; i < 256; ++i) {
        std::vector<double> x(5);
        for (auto& v : x) v = 0.5 * n01(rng);
        const double last = x.back();
        ws.push_back(window_of(x, 1, last));
    }
    for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
        auto p = ModelParameters::initialized(kind, 1, 8, 2);
        OptimizerState opt(p, RmsPropConfig{1e-2, 0.9, 1e-8});
        GradientWorkspace gw;
        Gradients g;
        std::vector<std::size_t> batch(32);
        std::uniform_int_distribution<std::size_t> pick(0, ws.size() - 1);
        const double start = [&] {
            const auto y = predict(p, ws);
            double s = 0;
            for (std::size_t i = 0; i < ws.size(); ++i) s += (y[i] - ws[i].target[0]) * (y[i] - ws[i].target[0]);
            return s / ws.size();
        }();
        for (int step = 0; step < 2000; ++step) {
            for (auto& b : batch) b = pick(rng);
            batch_gradient(p, ws, batch, g, gw);
            rmsprop_step(p, g, opt);
        }
        const auto y = predict(p, ws);
        std::vector<double> t;
        for (const auto& w : ws) t.push_back(w.target[0]);
        const double mse = loss_mse(y, t);
        INFO(to_string(kind) << " start " << start << " end " << mse);
        CHECK(mse < 1e-3);
        CHECK(mse < start);
    }
}
