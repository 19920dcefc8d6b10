#pragma once

#include "loadcast/calls.hpp"
#include "loadcast/features.hpp"
#include "loadcast/model.hpp"
#include "loadcast/optimizer.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace loadcast {

struct TrainConfig {
    CellKind cell = CellKind::LSTM;
    std::size_t hidden = 32;
    RmsPropConfig optimizer;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 50;
    std::size_t patience = 5;  // epochs without validation-MAE improvement
    Exec exec = Exec::Parallel;
};

struct TrainResult {
    ModelParameters best;              // parameters of the best validation epoch
    std::vector<double> train_loss;    // mean MSE per epoch
    std::vector<double> val_mae;       // per epoch
    std::size_t best_epoch = 0;        // 1-based
    double best_val_mae = 0.0;
    std::size_t epochs_run() const noexcept { return train_loss.size(); }
};

// Minibatch RMSProp on shuffled training windows with early stopping on
// validation MAE. Initialization uses derive_seed(seed, "init") and epoch
// shuffles derive_seed(seed, "shuffle", epoch).
TrainResult train_model(std::span<const SequenceWindow> train, std::span<const SequenceWindow> val,
                        const TrainConfig& config, std::uint64_t seed);

}  // namespace loadcast
