#include "metaxfer/transfer.hpp"

#include <cmath>
#include <stdexcept>

#include "metaxfer/errors.hpp"
#include "metaxfer/rng.hpp"

namespace metaxfer {

MlpModel transplant(const MlpModel& source, size_t target_classes, const TransferConfig& config,
                    const MlpSizes* expected) {
    if (config.frozen_hidden_layers < 0 || config.frozen_hidden_layers > 2)
        throw std::invalid_argument("frozen_hidden_layers must be 0, 1 or 2");
    if (target_classes < 2) throw ShapeMismatch("transplant: need at least 2 target classes");
    if (expected) {
        if (expected->input != source.sizes.input || expected->hidden1 != source.sizes.hidden1 ||
            expected->hidden2 != source.sizes.hidden2) {
            throw ShapeMismatch("transplant: source sizes (" + std::to_string(source.sizes.input) +
                                "," + std::to_string(source.sizes.hidden1) + "," +
                                std::to_string(source.sizes.hidden2) +
                                ") disagree with the target architecture (" +
                                std::to_string(expected->input) + "," +
                                std::to_string(expected->hidden1) + "," +
                                std::to_string(expected->hidden2) + ")");
        }
    }

    MlpModel model;
    model.sizes = source.sizes;
    model.sizes.classes = target_classes;
    model.w1 = source.w1;
    model.b1 = source.b1;
    model.w2 = source.w2;
    model.b2 = source.b2;

    Prng rng(config.reinit_seed);
    model.w_out = Matrix(target_classes, source.sizes.hidden2);
    const double stddev = std::sqrt(2.0 / static_cast<double>(source.sizes.hidden2));
    for (double& entry : model.w_out.data) entry = rng.normal(0.0, stddev);
    model.b_out.assign(target_classes, 0.0);

    model.freeze_mask = {config.frozen_hidden_layers >= 1, config.frozen_hidden_layers >= 2,
                         false};
    return model;
}

}  // namespace metaxfer
