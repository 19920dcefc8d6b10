#include "loadcast/cell.hpp"

#include "loadcast/error.hpp"

#include <cmath>

namespace loadcast {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// a[r] += sum_k M[r][k] * v[k]  for a row-major rows x cols matrix
inline void gemv_add(const double* m, const double* v, double* a, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * cols;
        double s = 0.0;
        for (std::size_t k = 0; k < cols; ++k) s += row[k] * v[k];
        a[r] += s;
    }
}

// out[k] += sum_r M[r][k] * a[r]
inline void gemv_t_add(const double* m, const double* a, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double ar = a[r];
        if (ar == 0.0) continue;
        const double* row = m + r * cols;
        for (std::size_t k = 0; k < cols; ++k) out[k] += row[k] * ar;
    }
}

// M[r][k] += a[r] * v[k]
inline void outer_add(double* m, const double* a, const double* v, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double ar = a[r];
        if (ar == 0.0) continue;
        double* row = m + r * cols;
        for (std::size_t k = 0; k < cols; ++k) row[k] += ar * v[k];
    }
}

void check_shapes(const ModelParameters& params, std::span<const double> inputs, std::size_t steps) {
    if (steps == 0) throw ShapeMismatch("input sequence is empty");
    if (inputs.size() != steps * params.input_size())
        throw ShapeMismatch("input of " + std::to_string(inputs.size()) + " values does not match " +
                            std::to_string(steps) + " steps x D=" + std::to_string(params.input_size()));
}

}  // namespace

void ForwardTrace::reset(CellKind k, std::size_t m, std::size_t hsize) {
    kind = k;
    steps = m;
    hidden = hsize;
    h.assign((m + 1) * hsize, 0.0);
    c.assign(k == CellKind::LSTM ? (m + 1) * hsize : 0, 0.0);
    act.resize(m * gate_count(k) * hsize);
    aux.resize(m * hsize);
}

double forward(const ModelParameters& params, std::span<const double> inputs, std::size_t steps,
               ForwardTrace& trace) {
    check_shapes(params, inputs, steps);
    const std::size_t H = params.hidden_size(), D = params.input_size(), G = params.gates(), GH = G * H;
    trace.reset(params.kind(), steps, H);
    const double* W = params.W().data();
    const double* U = params.U().data();
    const double* b = params.b().data();

    for (std::size_t t = 0; t < steps; ++t) {
        const double* x = inputs.data() + t * D;
        const double* hp = trace.h.data() + t * H;
        double* hn = trace.h.data() + (t + 1) * H;
        double* a = trace.act.data() + t * GH;
        double* aux = trace.aux.data() + t * H;

        for (std::size_t r = 0; r < GH; ++r) a[r] = b[r];
        gemv_add(W, x, a, GH, D);

        if (params.kind() == CellKind::LSTM) {
            gemv_add(U, hp, a, GH, H);
            const double* cp = trace.c.data() + t * H;
            double* cn = trace.c.data() + (t + 1) * H;
            for (std::size_t j = 0; j < H; ++j) {
                const double i = sigmoid(a[j]);
                const double f = sigmoid(a[H + j]);
                const double g = std::tanh(a[2 * H + j]);
                const double o = sigmoid(a[3 * H + j]);
                a[j] = i;
                a[H + j] = f;
                a[2 * H + j] = g;
                a[3 * H + j] = o;
                cn[j] = f * cp[j] + i * g;
                aux[j] = std::tanh(cn[j]);
                hn[j] = o * aux[j];
            }
        } else {
            // update and reset gates see U h directly; the candidate sees r * (U_n h)
            gemv_add(U, hp, a, 2 * H, H);
            for (std::size_t j = 0; j < H; ++j) aux[j] = 0.0;
            gemv_add(U + 2 * H * H, hp, aux, H, H);
            for (std::size_t j = 0; j < H; ++j) {
                const double z = sigmoid(a[j]);
                const double r = sigmoid(a[H + j]);
                const double n = std::tanh(a[2 * H + j] + r * aux[j]);
                a[j] = z;
                a[H + j] = r;
                a[2 * H + j] = n;
                hn[j] = (1.0 - z) * n + z * hp[j];
            }
        }
    }

    const auto hM = trace.final_hidden();
    const auto w = params.dense_w();
    double y = params.dense_b();
    for (std::size_t j = 0; j < H; ++j) y += w[j] * hM[j];
    trace.prediction = y;
    return y;
}

Forecast forward(const ModelParameters& params, const SequenceWindow& window) {
    if (window.dim != params.input_size())
        throw ShapeMismatch("window dimension " + std::to_string(window.dim) + " != model input size " +
                            std::to_string(params.input_size()));
    Forecast out;
    out.prediction = forward(params, window.inputs, window.steps, out.trace);
    return out;
}

void backward(const ModelParameters& params, const ForwardTrace& trace, std::span<const double> inputs,
              double output_grad, Gradients& out) {
    check_shapes(params, inputs, trace.steps);
    if (trace.kind != params.kind() || trace.hidden != params.hidden_size())
        throw ShapeMismatch("trace was not produced by a model of this shape");
    if (!out.same_shape(params)) out = Gradients(params.kind(), params.input_size(), params.hidden_size());
    else out.set_zero();

    const std::size_t H = params.hidden_size(), D = params.input_size(), G = params.gates(), GH = G * H;
    const std::size_t M = trace.steps;
    const double* U = params.U().data();
    double* dW = out.W().data();
    double* dU = out.U().data();
    double* db = out.b().data();

    const auto hM = trace.final_hidden();
    const auto w = params.dense_w();
    auto dw = out.dense_w();
    std::vector<double> dh(H), dh_prev(H), dc(H, 0.0), da(GH), dq(H);
    for (std::size_t j = 0; j < H; ++j) {
        dw[j] = output_grad * hM[j];
        dh[j] = output_grad * w[j];
    }
    out.dense_b() = output_grad;

    for (std::size_t t = M; t-- > 0;) {
        const double* x = inputs.data() + t * D;
        const double* hp = trace.h.data() + t * H;
        const double* a = trace.act.data() + t * GH;
        const double* aux = trace.aux.data() + t * H;

        if (params.kind() == CellKind::LSTM) {
            const double* cp = trace.c.data() + t * H;
            for (std::size_t j = 0; j < H; ++j) {
                const double i = a[j], f = a[H + j], g = a[2 * H + j], o = a[3 * H + j];
                const double tc = aux[j];
                const double dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
                da[j] = dcj * g * i * (1.0 - i);
                da[H + j] = dcj * cp[j] * f * (1.0 - f);
                da[2 * H + j] = dcj * i * (1.0 - g * g);
                da[3 * H + j] = dh[j] * tc * o * (1.0 - o);
                dc[j] = dcj * f;
            }
            outer_add(dU, da.data(), hp, GH, H);
            std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
            gemv_t_add(U, da.data(), dh_prev.data(), GH, H);
        } else {
            for (std::size_t j = 0; j < H; ++j) {
                const double z = a[j], r = a[H + j], n = a[2 * H + j];
                const double dn = dh[j] * (1.0 - z);
                const double dz = dh[j] * (hp[j] - n);
                const double dan = dn * (1.0 - n * n);
                da[j] = dz * z * (1.0 - z);
                da[H + j] = dan * aux[j] * r * (1.0 - r);
                da[2 * H + j] = dan;
                dq[j] = dan * r;
                dh_prev[j] = dh[j] * z;
            }
            outer_add(dU, da.data(), hp, 2 * H, H);
            outer_add(dU + 2 * H * H, dq.data(), hp, H, H);
            gemv_t_add(U, da.data(), dh_prev.data(), 2 * H, H);
            gemv_t_add(U + 2 * H * H, dq.data(), dh_prev.data(), H, H);
        }
        outer_add(dW, da.data(), x, GH, D);
        for (std::size_t r = 0; r < GH; ++r) db[r] += da[r];
        dh.swap(dh_prev);
    }
}

Gradients backward(const ModelParameters& params, const ForwardTrace& trace, const SequenceWindow& window,
                   double target) {
    Gradients g;
    backward(params, trace, window.inputs, 2.0 * (trace.prediction - target), g);
    return g;
}

}  // namespace loadcast
