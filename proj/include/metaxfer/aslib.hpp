#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metaxfer/matrix.hpp"

namespace metaxfer {

enum class RunStatus { ok, timeout, memout, crash, other, unknown };

std::string to_string(RunStatus status);
RunStatus run_status_from_string(const std::string& token);

struct RunRecord {
    double performance = 0.0;  // always finite
    RunStatus status = RunStatus::unknown;

    bool operator==(const RunRecord&) const = default;
};

struct ScenarioDescription {
    std::string performance_measure;
    bool maximize = false;
    std::optional<double> cutoff_time;
    std::optional<std::string> scenario_id;
};

// Line-oriented "key: value" reader for the ASlib description format,
// including the YAML-style "key:\n- value" list form. Throws MissingKey /
// UnparsableValue.
ScenarioDescription parse_description(std::istream& in);

struct AslibScenario {
    std::string scenario_id;
    std::vector<std::string> instances;      // feature-file order
    std::vector<std::string> feature_names;
    Matrix feature_values;                   // |instances| x |feature_names|, NaN = missing
    std::vector<std::string> algorithms;     // strictly sorted, duplicate-free
    std::map<std::pair<std::string, std::string>, RunRecord> runs;  // (instance, algorithm)
    std::string performance_measure_name;
    bool maximize = false;
    std::optional<double> cutoff_time;

    size_t algorithm_index(const std::string& id) const;  // npos when absent
    const RunRecord* find_run(const std::string& instance, const std::string& algorithm) const;
};

// Assembles a scenario from description.txt, feature_values.arff and
// algorithm_runs.arff. Rows with repetition != 1 are dropped; instances
// present in only one of the two tables are dropped with a warning.
AslibScenario load_scenario(const std::filesystem::path& directory,
                            std::ostream* warnings = nullptr);

// Canonical text dump; two loads of the same directory produce identical
// digests. Also the basis for provenance fingerprints.
std::string scenario_digest(const AslibScenario& scenario);

}  // namespace metaxfer
