#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "metaxfer/meta_dataset.hpp"
#include "metaxfer/mlp.hpp"
#include "metaxfer/reference_table.hpp"

namespace metaxfer {

struct Mode {
    enum class Kind { normal, transfer };
    Kind kind = Kind::normal;
    std::string source;  // transfer only
    int freeze = 0;      // transfer only, in {0,1,2}

    static Mode normal() { return {}; }
    static Mode transfer(std::string source_name, int freeze_level) {
        Mode m;
        m.kind = Kind::transfer;
        m.source = std::move(source_name);
        m.freeze = freeze_level;
        return m;
    }
    bool is_transfer() const { return kind == Kind::transfer; }

    // seed-derivation and filename tag, e.g. "normal" or "transfer-CSP-MZN-1HL"
    std::string tag() const;
};

struct Architecture {
    size_t hidden1 = 64;
    size_t hidden2 = 32;
};

struct ExperimentSpec {
    std::string target;
    Mode mode;
    size_t repetitions = 30;
    uint64_t base_seed = 0;
    TrainConfig train;
    Architecture arch;
    size_t k = 0;
    bool fixed_split = false;
    std::vector<std::string> scenario_set;  // scenarios K was chosen over

    void validate() const;
};

struct RunResult {
    size_t repetition = 0;
    uint64_t seed = 0;
    double accuracy = 0.0;
    double test_loss = 0.0;
};

struct ExperimentSummary {
    ExperimentSpec spec;
    std::vector<RunResult> runs;  // ordered by repetition
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double mean_loss = 0.0;
    double std_loss = 0.0;
    std::map<std::string, std::string> dataset_fingerprints;
};

// Mean and population standard deviation (divide by n).
std::pair<double, double> summarize(std::span<const double> values);

// Deterministic per-repetition seed.
uint64_t cell_seed(uint64_t base_seed, const std::string& target, const std::string& mode_tag,
                   size_t repetition);

// Trained source models, keyed by (scenario, repetition, training recipe).
// The repetition-r source model is exactly what the Normal cell on that
// scenario trains at repetition r, so it is shared across freeze levels.
class SourceModelCache {
public:
    std::shared_ptr<const MlpModel> get_or_train(
        const std::string& key, const std::function<MlpModel()>& train_fn);

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_future<std::shared_ptr<const MlpModel>>> entries_;
};

// Runs every repetition of one (target, mode) cell. Any repetition failure
// aborts the whole cell. `jobs` > 1 parallelizes repetitions; results are
// identical to the sequential order because every repetition owns a
// pre-assigned seed.
ExperimentSummary run_cell(const ExperimentSpec& spec,
                           const std::map<std::string, MetaDataset>& datasets,
                           SourceModelCache* cache = nullptr, size_t jobs = 1);

nlohmann::ordered_json summary_to_json(const ExperimentSummary& summary);

// Rebuilds the spec from a result document's provenance echo; running it
// again reproduces the document byte for byte.
ExperimentSpec spec_from_json(const nlohmann::json& doc);

struct TableGrid {
    std::vector<std::string> targets;
    // per target: Normal first, then sources x freeze {0,1,2}
    std::vector<std::vector<ExperimentSummary>> cells;
};

// Full grid: for each target, Normal plus every (other scenario, freeze)
// combination. `report` (when given) receives one line per finished cell.
TableGrid run_table(const std::vector<std::string>& targets,
                    const std::map<std::string, MetaDataset>& datasets,
                    const ExperimentSpec& prototype, size_t jobs = 1,
                    const std::function<void(const std::string&)>& report = nullptr);

std::string render_table_markdown(const TableGrid& grid, bool with_reference);
std::string render_table_csv(const TableGrid& grid);

// results/<target>/<mode>.json plus table.csv and table.md
void write_results(const TableGrid& grid, const std::filesystem::path& results_dir,
                   bool with_reference);

}  // namespace metaxfer
