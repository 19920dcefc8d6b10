#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace loadcast {

enum class CellKind { LSTM, GRU };

std::string to_string(CellKind kind);
CellKind parse_cell_kind(const std::string& text);
std::size_t gate_count(CellKind kind) noexcept;

struct TensorInfo {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
};

// All weights of one recurrent layer and its single-unit linear head, stored
// in one flat buffer. Tensors, in buffer order:
//   W        [G*H x D]  input weights, gate blocks stacked row-wise
//   U        [G*H x H]  recurrent weights
//   b        [G*H]
//   dense_w  [H]
//   dense_b  [1]
// LSTM gate blocks are (input, forget, candidate, output); GRU blocks are
// (update, reset, candidate).
class ModelParameters {
public:
    ModelParameters() = default;
    ModelParameters(CellKind kind, std::size_t input_size, std::size_t hidden_size);

    // Uniform in [-1/sqrt(H), 1/sqrt(H)]; LSTM forget-gate bias set to +1.
    static ModelParameters initialized(CellKind kind, std::size_t input_size, std::size_t hidden_size,
                                       std::uint64_t seed);

    CellKind kind() const noexcept { return kind_; }
    std::size_t input_size() const noexcept { return input_; }
    std::size_t hidden_size() const noexcept { return hidden_; }
    std::size_t gates() const noexcept { return gate_count(kind_); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    std::span<double> W() noexcept { return slice(0); }
    std::span<double> U() noexcept { return slice(1); }
    std::span<double> b() noexcept { return slice(2); }
    std::span<double> dense_w() noexcept { return slice(3); }
    double& dense_b() noexcept { return data_[offset_[4]]; }
    std::span<const double> W() const noexcept { return slice(0); }
    std::span<const double> U() const noexcept { return slice(1); }
    std::span<const double> b() const noexcept { return slice(2); }
    std::span<const double> dense_w() const noexcept { return slice(3); }
    double dense_b() const noexcept { return data_[offset_[4]]; }

    std::vector<TensorInfo> tensors() const;
    // "W[3,1]"-style label of a flat index.
    std::string describe(std::size_t flat_index) const;

    bool same_shape(const ModelParameters& other) const noexcept {
        return kind_ == other.kind_ && input_ == other.input_ && hidden_ == other.hidden_;
    }
    bool all_finite() const noexcept;
    void set_zero() noexcept;

    bool operator==(const ModelParameters& other) const {
        return same_shape(other) && data_ == other.data_;
    }

private:
    std::span<double> slice(int k) noexcept { return {data_.data() + offset_[k], offset_[k + 1] - offset_[k]}; }
    std::span<const double> slice(int k) const noexcept {
        return {data_.data() + offset_[k], offset_[k + 1] - offset_[k]};
    }

    CellKind kind_ = CellKind::LSTM;
    std::size_t input_ = 0;
    std::size_t hidden_ = 0;
    std::size_t offset_[6] = {};
    std::vector<double> data_;
};

// Gradients share the parameter layout.
using Gradients = ModelParameters;

// Mean squared error and mean absolute error; EmptyBatch on n = 0.
double loss_mse(std::span<const double> predictions, std::span<const double> targets);
double metric_mae(std::span<const double> predictions, std::span<const double> targets);

}  // namespace loadcast
