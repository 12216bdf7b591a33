#pragma once

#include <optional>
#include <string>
#include <vector>

namespace metaxfer {

// Published reference results for the four CSP scenarios; used only to print
// side-by-side deltas after a reproduction run, never as unit-test oracles.
struct ReferenceCell {
    std::string target;
    std::string source;  // empty for normal training
    int freeze = 0;      // 0/1/2 hidden layers frozen
    double acc_mean = 0.0;
    double acc_std = 0.0;
    double loss_mean = 0.0;
    double loss_std = 0.0;
};

const std::vector<ReferenceCell>& reference_results();

std::optional<ReferenceCell> find_reference(const std::string& target, const std::string& source,
                                            int freeze);

// Targets in reference order, with each target's source columns.
const std::vector<std::string>& reference_targets();
std::vector<std::string> reference_sources(const std::string& target);

}  // namespace metaxfer
