#include "loadcast/model.hpp"

#include "loadcast/error.hpp"
#include "loadcast/rng.hpp"

#include <algorithm>
#include <cmath>

namespace loadcast {

std::string to_string(CellKind kind) { return kind == CellKind::LSTM ? "lstm" : "gru"; }

CellKind parse_cell_kind(const std::string& text) {
    if (text == "lstm") return CellKind::LSTM;
    if (text == "gru") return CellKind::GRU;
    throw ConfigError("unknown cell kind '" + text + "' (expected lstm or gru)");
}

std::size_t gate_count(CellKind kind) noexcept { return kind == CellKind::LSTM ? 4 : 3; }

ModelParameters::ModelParameters(CellKind kind, std::size_t input_size, std::size_t hidden_size)
    : kind_(kind), input_(input_size), hidden_(hidden_size) {
    if (input_size == 0 || hidden_size == 0) throw ShapeMismatch("input and hidden sizes must be positive");
    const std::size_t gh = gates() * hidden_;
    const std::size_t sizes[5] = {gh * input_, gh * hidden_, gh, hidden_, 1};
    offset_[0] = 0;
    for (int k = 0; k < 5; ++k) offset_[k + 1] = offset_[k] + sizes[k];
    data_.assign(offset_[5], 0.0);
}

ModelParameters ModelParameters::initialized(CellKind kind, std::size_t input_size, std::size_t hidden_size,
                                             std::uint64_t seed) {
    ModelParameters p(kind, input_size, hidden_size);
    Rng rng(derive_seed(seed, "init"));
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    std::uniform_real_distribution<double> unif(-bound, bound);
    for (double& v : p.data_) v = unif(rng);
    if (kind == CellKind::LSTM) {
        auto b = p.b();
        std::fill(b.begin() + static_cast<std::ptrdiff_t>(hidden_size),
                  b.begin() + static_cast<std::ptrdiff_t>(2 * hidden_size), 1.0);
    }
    return p;
}

std::vector<TensorInfo> ModelParameters::tensors() const {
    const std::size_t gh = gates() * hidden_;
    const std::vector<std::size_t> shapes[5] = {{gh, input_}, {gh, hidden_}, {gh}, {hidden_}, {1}};
    static constexpr const char* names[5] = {"W", "U", "b", "dense_w", "dense_b"};
    std::vector<TensorInfo> out;
    for (int k = 0; k < 5; ++k) out.push_back({names[k], shapes[k], offset_[k], offset_[k + 1] - offset_[k]});
    return out;
}

std::string ModelParameters::describe(std::size_t flat_index) const {
    for (const auto& t : tensors()) {
        if (flat_index < t.offset || flat_index >= t.offset + t.size) continue;
        const std::size_t local = flat_index - t.offset;
        if (t.shape.size() == 2)
            return t.name + "[" + std::to_string(local / t.shape[1]) + "," + std::to_string(local % t.shape[1]) + "]";
        return t.name + "[" + std::to_string(local) + "]";
    }
    return "?";
}

bool ModelParameters::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void ModelParameters::set_zero() noexcept { std::fill(data_.begin(), data_.end(), 0.0); }

namespace {
void check_batch(std::span<const double> p, std::span<const double> t) {
    if (p.size() != t.size()) throw ShapeMismatch("prediction and target counts differ");
    if (p.empty()) throw EmptyBatch("empty batch");
}
}  // namespace

double loss_mse(std::span<const double> predictions, std::span<const double> targets) {
    check_batch(predictions, targets);
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = targets[i] - predictions[i];
        s += d * d;
    }
    return s / static_cast<double>(predictions.size());
}

double metric_mae(std::span<const double> predictions, std::span<const double> targets) {
    check_batch(predictions, targets);
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) s += std::abs(targets[i] - predictions[i]);
    return s / static_cast<double>(predictions.size());
}

}  // namespace loadcast
