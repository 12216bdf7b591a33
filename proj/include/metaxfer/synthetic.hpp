#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace metaxfer {

// Linearly separable synthetic scenario used by tests and demos. The first
// `algorithms` features carry the class signal; the rest are noise, a slice
// of which gets missing entries. Runtimes are constructed so that the best
// algorithm of every instance equals its generating class, including a few
// timeout rows that must be PAR10-penalized to keep the label correct.
struct SyntheticSpec {
    std::string name = "SYNTH-A";
    size_t instances = 240;
    size_t features = 12;
    size_t algorithms = 3;
    uint64_t seed = 1;
    double missing_fraction = 0.02;  // applied to noise features only
    double cutoff_time = 100.0;
};

void write_synthetic_scenario(const std::filesystem::path& directory, const SyntheticSpec& spec);

}  // namespace metaxfer
