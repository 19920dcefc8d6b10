#include "loadcast/trainer.hpp"

#include "loadcast/error.hpp"
#include "loadcast/kernels.hpp"
#include "loadcast/rng.hpp"

#include <algorithm>
#include <numeric>

namespace loadcast {

TrainResult train_model(std::span<const SequenceWindow> train, std::span<const SequenceWindow> val,
                        const TrainConfig& config, std::uint64_t seed) {
    if (train.empty() || val.empty()) throw InsufficientData("training needs non-empty train and validation windows");
    if (config.batch_size == 0 || config.max_epochs == 0 || config.hidden == 0)
        throw InvalidArgument("neuralnet", "batch size, epochs and hidden size must be positive");

    auto params = ModelParameters::initialized(config.cell, train.front().dim, config.hidden, derive_seed(seed, "init"));
    OptimizerState opt(params, config.optimizer);
    Gradients grads;
    GradientWorkspace ws;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.best = params;
    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng rng(derive_seed(seed, "shuffle", epoch));
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            std::span<const std::size_t> batch(order.data() + start, len);
            loss_sum += batch_gradient(params, train, batch, grads, ws, config.exec) * static_cast<double>(len);
            rmsprop_step(params, grads, opt);
        }
        result.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

        const double mae = evaluate_mae(params, val, config.exec);
        result.val_mae.push_back(mae);
        if (epoch == 1 || mae < result.best_val_mae) {
            result.best_val_mae = mae;
            result.best_epoch = epoch;
            result.best = params;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    if (!result.best.all_finite()) throw InvalidArgument("neuralnet", "training diverged to non-finite parameters");
    return result;
}

}  // namespace loadcast
