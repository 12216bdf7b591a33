#pragma once

#include <cstdint>

#include "metaxfer/mlp.hpp"

namespace metaxfer {

// Number of hidden layers to freeze after transplanting: 2 freezes both
// hidden layers, 1 only the first, 0 none (pure warm start). The output
// layer is always re-initialized and never frozen.
struct TransferConfig {
    int frozen_hidden_layers = 0;
    uint64_t reinit_seed = 0;
};

// Copies the source's hidden layers into a fresh model with target_classes
// outputs, He-initializes the output layer, and sets the freeze mask. Never
// mutates the source. `expected` (when given) pins the input/hidden sizes
// the target pipeline requires; a disagreement throws ShapeMismatch.
MlpModel transplant(const MlpModel& source, size_t target_classes, const TransferConfig& config,
                    const MlpSizes* expected = nullptr);

}  // namespace metaxfer
