#pragma once

#include "loadcast/features.hpp"
#include "loadcast/model.hpp"

#include <span>
#include <vector>

namespace loadcast {

// Activations retained by forward() for backpropagation through time.
struct ForwardTrace {
    CellKind kind = CellKind::LSTM;
    std::size_t steps = 0;
    std::size_t hidden = 0;
    std::vector<double> h;    // (steps + 1) x H, row 0 is the zero initial state
    std::vector<double> c;    // (steps + 1) x H, LSTM cell state
    std::vector<double> act;  // steps x G*H, post-activation gates
    std::vector<double> aux;  // steps x H: tanh(c_t) for LSTM, U_n h_{t-1} for GRU
    double prediction = 0.0;

    void reset(CellKind kind, std::size_t steps, std::size_t hidden);
    std::span<const double> final_hidden() const { return {h.data() + steps * hidden, hidden}; }
};

// Runs the recurrent layer over `steps` input rows and applies the linear
// head to the final hidden state. ShapeMismatch when the input length is not
// steps * D.
double forward(const ModelParameters& params, std::span<const double> inputs, std::size_t steps,
               ForwardTrace& trace);

struct Forecast {
    double prediction = 0.0;
    ForwardTrace trace;
};

Forecast forward(const ModelParameters& params, const SequenceWindow& window);

// The model is trained on the last horizon step of each window.
inline double training_target(const SequenceWindow& w) { return w.target.back(); }

// Exact gradients of a loss whose derivative with respect to the prediction
// is `output_grad`. `out` is reshaped if needed and overwritten.
void backward(const ModelParameters& params, const ForwardTrace& trace, std::span<const double> inputs,
              double output_grad, Gradients& out);

// Gradients of the squared error (prediction - target)^2.
Gradients backward(const ModelParameters& params, const ForwardTrace& trace, const SequenceWindow& window,
                   double target);

}  // namespace loadcast
