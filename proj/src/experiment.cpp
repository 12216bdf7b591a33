#include "metaxfer/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "metaxfer/arff.hpp"
#include "metaxfer/errors.hpp"
#include "metaxfer/transfer.hpp"

namespace metaxfer {

namespace {

// sub-seed stream tags
constexpr uint64_t kStreamSplit = 1;
constexpr uint64_t kStreamInit = 2;
constexpr uint64_t kStreamShuffle = 3;
constexpr uint64_t kStreamReinit = 4;

std::string format_fixed(double v, int precision) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

}  // namespace

std::string Mode::tag() const {
    if (kind == Kind::normal) return "normal";
    return "transfer-" + source + "-" + std::to_string(freeze) + "HL";
}

void ExperimentSpec::validate() const {
    if (target.empty()) throw std::invalid_argument("experiment target must be named");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (mode.is_transfer()) {
        if (mode.source.empty()) throw std::invalid_argument("transfer mode needs a source");
        if (mode.source == target)
            throw std::invalid_argument("transfer source must differ from the target");
        if (mode.freeze < 0 || mode.freeze > 2)
            throw std::invalid_argument("freeze level must be 0, 1 or 2");
    }
    train.validate();
}

std::pair<double, double> summarize(std::span<const double> values) {
    if (values.empty()) throw EmptyCollection("summarize over no values");
    double sum = 0.0;
    for (const double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (const double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

uint64_t cell_seed(uint64_t base_seed, const std::string& target, const std::string& mode_tag,
                   size_t repetition) {
    const std::string key = std::to_string(base_seed) + "|" + target + "|" + mode_tag + "|" +
                            std::to_string(repetition);
    return fnv1a64(key);
}

std::shared_ptr<const MlpModel> SourceModelCache::get_or_train(
    const std::string& key, const std::function<MlpModel()>& train_fn) {
    std::shared_future<std::shared_ptr<const MlpModel>> future;
    std::promise<std::shared_ptr<const MlpModel>> promise;
    bool is_owner = false;
    {
        std::lock_guard lock(mutex_);
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            future = promise.get_future().share();
            entries_.emplace(key, future);
            is_owner = true;
        } else {
            future = it->second;
        }
    }
    if (is_owner) {
        try {
            promise.set_value(std::make_shared<const MlpModel>(train_fn()));
        } catch (...) {
            promise.set_exception(std::current_exception());
            {
                std::lock_guard lock(mutex_);
                entries_.erase(key);
            }
            throw;
        }
    }
    return future.get();
}

namespace {

struct PreparedData {
    Matrix x_train;
    std::vector<int> y_train;
    Matrix x_test;
    std::vector<int> y_test;
};

PreparedData prepare_split(const MetaDataset& dataset, size_t k, uint64_t split_seed) {
    Prng split_rng(split_seed);
    const SplitIndices split = stratified_split(dataset.y, 0.2, split_rng);

    PreparedData out;
    const Matrix raw_train = take_rows(dataset.X, split.train_rows);
    const Matrix raw_test = take_rows(dataset.X, split.test_rows);
    out.y_train.reserve(split.train_rows.size());
    for (const size_t r : split.train_rows) out.y_train.push_back(dataset.y[r]);
    out.y_test.reserve(split.test_rows.size());
    for (const size_t r : split.test_rows) out.y_test.push_back(dataset.y[r]);

    const FittedPreprocessor prep = fit_preprocessor(raw_train, out.y_train, k);
    out.x_train = apply_preprocessor(prep, raw_train);
    out.x_test = apply_preprocessor(prep, raw_test);
    return out;
}

uint64_t split_seed_for(const ExperimentSpec& spec, const std::string& scenario,
                        const std::string& mode_tag, size_t repetition) {
    // --fixed-split reuses repetition 0's split stream for every repetition
    const size_t split_rep = spec.fixed_split ? 0 : repetition;
    return mix_seed(cell_seed(spec.base_seed, scenario, mode_tag, split_rep), kStreamSplit);
}

std::string recipe_fingerprint(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << spec.base_seed << '|' << spec.k << '|' << spec.arch.hidden1 << '|' << spec.arch.hidden2
        << '|' << format_double(spec.train.learning_rate) << '|' << spec.train.epochs << '|'
        << spec.train.batch_size << '|' << format_double(spec.train.beta1) << '|'
        << format_double(spec.train.beta2) << '|' << format_double(spec.train.epsilon) << '|'
        << (spec.fixed_split ? 1 : 0);
    return to_hex(fnv1a64(out.str()));
}

// The Normal-mode training of `scenario` at repetition r; doubles as the
// transfer source model.
MlpModel train_normal_model(const ExperimentSpec& spec, const MetaDataset& dataset,
                            size_t repetition) {
    const uint64_t seed = cell_seed(spec.base_seed, dataset.name, "normal", repetition);
    const PreparedData data =
        prepare_split(dataset, spec.k, split_seed_for(spec, dataset.name, "normal", repetition));

    Prng init_rng(mix_seed(seed, kStreamInit));
    MlpSizes sizes{spec.k, spec.arch.hidden1, spec.arch.hidden2, dataset.class_count()};
    MlpModel model = he_init(sizes, init_rng);

    TrainConfig cfg = spec.train;
    cfg.seed = mix_seed(seed, kStreamShuffle);
    train(model, data.x_train, data.y_train, cfg);
    return model;
}

RunResult run_repetition(const ExperimentSpec& spec,
                         const std::map<std::string, MetaDataset>& datasets, size_t repetition,
                         SourceModelCache& cache) {
    const MetaDataset& target = datasets.at(spec.target);
    const std::string mode_tag = spec.mode.tag();
    const uint64_t seed = cell_seed(spec.base_seed, spec.target, mode_tag, repetition);

    const PreparedData data =
        prepare_split(target, spec.k, split_seed_for(spec, spec.target, mode_tag, repetition));

    MlpModel model;
    if (spec.mode.is_transfer()) {
        const MetaDataset& source = datasets.at(spec.mode.source);
        const std::string cache_key =
            spec.mode.source + "|" + std::to_string(repetition) + "|" + recipe_fingerprint(spec);
        const std::shared_ptr<const MlpModel> source_model = cache.get_or_train(
            cache_key, [&] { return train_normal_model(spec, source, repetition); });

        TransferConfig tc;
        tc.frozen_hidden_layers = spec.mode.freeze;
        tc.reinit_seed = mix_seed(seed, kStreamReinit);
        const MlpSizes expected{spec.k, spec.arch.hidden1, spec.arch.hidden2, 0};
        model = transplant(*source_model, target.class_count(), tc, &expected);
    } else {
        Prng init_rng(mix_seed(seed, kStreamInit));
        MlpSizes sizes{spec.k, spec.arch.hidden1, spec.arch.hidden2, target.class_count()};
        model = he_init(sizes, init_rng);
    }

    TrainConfig cfg = spec.train;
    cfg.seed = mix_seed(seed, kStreamShuffle);
    train(model, data.x_train, data.y_train, cfg);

    const EvalResult eval = evaluate(model, data.x_test, data.y_test);
    return {repetition, seed, eval.accuracy, eval.loss};
}

}  // namespace

ExperimentSummary run_cell(const ExperimentSpec& spec,
                           const std::map<std::string, MetaDataset>& datasets,
                           SourceModelCache* cache, size_t jobs) {
    spec.validate();
    if (!datasets.count(spec.target))
        throw std::invalid_argument("unknown target scenario '" + spec.target + "'");
    if (spec.mode.is_transfer() && !datasets.count(spec.mode.source))
        throw std::invalid_argument("unknown source scenario '" + spec.mode.source + "'");

    SourceModelCache local_cache;
    SourceModelCache& models = cache ? *cache : local_cache;

    ExperimentSummary summary;
    summary.spec = spec;
    summary.runs.resize(spec.repetitions);

    if (jobs <= 1 || spec.repetitions == 1) {
        for (size_t r = 0; r < spec.repetitions; ++r)
            summary.runs[r] = run_repetition(spec, datasets, r, models);
    } else {
        std::vector<std::exception_ptr> errors(spec.repetitions);
        std::vector<std::thread> workers;
        std::atomic<size_t> next{0};
        const size_t worker_count = std::min(jobs, spec.repetitions);
        for (size_t w = 0; w < worker_count; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const size_t r = next.fetch_add(1);
                    if (r >= spec.repetitions) return;
                    try {
                        summary.runs[r] = run_repetition(spec, datasets, r, models);
                    } catch (...) {
                        errors[r] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : workers) t.join();
        for (const std::exception_ptr& e : errors) {
            if (e) std::rethrow_exception(e);  // first failed repetition aborts the cell
        }
    }

    std::vector<double> accs, losses;
    accs.reserve(spec.repetitions);
    losses.reserve(spec.repetitions);
    for (const RunResult& run : summary.runs) {
        accs.push_back(run.accuracy);
        losses.push_back(run.test_loss);
    }
    std::tie(summary.mean_acc, summary.std_acc) = summarize(accs);
    std::tie(summary.mean_loss, summary.std_loss) = summarize(losses);

    summary.dataset_fingerprints[spec.target] =
        meta_dataset_fingerprint(datasets.at(spec.target));
    if (spec.mode.is_transfer()) {
        summary.dataset_fingerprints[spec.mode.source] =
            meta_dataset_fingerprint(datasets.at(spec.mode.source));
    }
    return summary;
}

nlohmann::ordered_json summary_to_json(const ExperimentSummary& summary) {
    const ExperimentSpec& spec = summary.spec;
    nlohmann::ordered_json doc;
    doc["schema"] = "metaxfer-cell-v1";
    doc["target"] = spec.target;
    if (spec.mode.is_transfer()) {
        doc["mode"] = {{"kind", "transfer"}, {"source", spec.mode.source}, {"freeze", spec.mode.freeze}};
    } else {
        doc["mode"] = {{"kind", "normal"}};
    }
    doc["repetitions"] = spec.repetitions;
    doc["base_seed"] = spec.base_seed;
    doc["train_config"] = {{"learning_rate", spec.train.learning_rate},
                           {"epochs", spec.train.epochs},
                           {"batch_size", spec.train.batch_size},
                           {"beta1", spec.train.beta1},
                           {"beta2", spec.train.beta2},
                           {"epsilon", spec.train.epsilon}};
    doc["architecture"] = {{"hidden1", spec.arch.hidden1}, {"hidden2", spec.arch.hidden2}};
    doc["k"] = spec.k;
    doc["fixed_split"] = spec.fixed_split;
    doc["scenario_set"] = spec.scenario_set;
    doc["runs"] = nlohmann::ordered_json::array();
    for (const RunResult& run : summary.runs) {
        doc["runs"].push_back({{"repetition", run.repetition},
                               {"seed", run.seed},
                               {"accuracy", run.accuracy},
                               {"test_loss", run.test_loss}});
    }
    doc["aggregates"] = {{"mean_acc", summary.mean_acc},
                         {"std_acc", summary.std_acc},
                         {"mean_loss", summary.mean_loss},
                         {"std_loss", summary.std_loss},
                         {"std_kind", "population"}};
    doc["provenance"] = {{"dataset_fingerprints", summary.dataset_fingerprints},
                         {"loss_reported", "test"},
                         {"split_policy", spec.fixed_split ? "fixed" : "per_repetition"}};
    return doc;
}

ExperimentSpec spec_from_json(const nlohmann::json& doc) {
    ExperimentSpec spec;
    spec.target = doc.at("target").get<std::string>();
    const auto& mode = doc.at("mode");
    if (mode.at("kind").get<std::string>() == "transfer") {
        spec.mode = Mode::transfer(mode.at("source").get<std::string>(),
                                   mode.at("freeze").get<int>());
    } else {
        spec.mode = Mode::normal();
    }
    spec.repetitions = doc.at("repetitions").get<size_t>();
    spec.base_seed = doc.at("base_seed").get<uint64_t>();
    const auto& train = doc.at("train_config");
    spec.train.learning_rate = train.at("learning_rate").get<double>();
    spec.train.epochs = train.at("epochs").get<size_t>();
    spec.train.batch_size = train.at("batch_size").get<size_t>();
    spec.train.beta1 = train.at("beta1").get<double>();
    spec.train.beta2 = train.at("beta2").get<double>();
    spec.train.epsilon = train.at("epsilon").get<double>();
    const auto& arch = doc.at("architecture");
    spec.arch.hidden1 = arch.at("hidden1").get<size_t>();
    spec.arch.hidden2 = arch.at("hidden2").get<size_t>();
    spec.k = doc.at("k").get<size_t>();
    spec.fixed_split = doc.at("fixed_split").get<bool>();
    spec.scenario_set = doc.at("scenario_set").get<std::vector<std::string>>();
    return spec;
}

TableGrid run_table(const std::vector<std::string>& targets,
                    const std::map<std::string, MetaDataset>& datasets,
                    const ExperimentSpec& prototype, size_t jobs,
                    const std::function<void(const std::string&)>& report) {
    TableGrid grid;
    grid.targets = targets;
    SourceModelCache cache;

    for (const std::string& target : targets) {
        std::vector<ExperimentSummary> row;
        std::vector<Mode> modes;
        modes.push_back(Mode::normal());
        for (const std::string& source : targets) {
            if (source == target) continue;
            for (int freeze = 0; freeze <= 2; ++freeze)
                modes.push_back(Mode::transfer(source, freeze));
        }
        for (const Mode& mode : modes) {
            ExperimentSpec spec = prototype;
            spec.target = target;
            spec.mode = mode;
            row.push_back(run_cell(spec, datasets, &cache, jobs));
            if (report) {
                const ExperimentSummary& s = row.back();
                report(target + " " + mode.tag() + ": acc " + format_fixed(s.mean_acc, 2) +
                       " +/- " + format_fixed(s.std_acc, 2) + ", loss " +
                       format_fixed(s.mean_loss, 2) + " +/- " + format_fixed(s.std_loss, 2));
            }
        }
        grid.cells.push_back(std::move(row));
    }
    return grid;
}

namespace {

std::string cell_label(const Mode& mode) {
    if (!mode.is_transfer()) return "Normal";
    return mode.source + " " + std::to_string(mode.freeze) + "HL";
}

std::vector<size_t> best_indices(const std::vector<double>& means, bool maximize) {
    double best = means.front();
    for (const double m : means) best = maximize ? std::max(best, m) : std::min(best, m);
    std::vector<size_t> flagged;
    for (size_t i = 0; i < means.size(); ++i) {
        if (std::abs(means[i] - best) <= 1e-12) flagged.push_back(i);
    }
    return flagged;
}

void append_metric_row(std::ostringstream& out, const std::string& label,
                       const std::vector<std::string>& cells) {
    out << "| " << label << " |";
    for (const std::string& cell : cells) out << ' ' << cell << " |";
    out << '\n';
}

}  // namespace

std::string render_table_markdown(const TableGrid& grid, bool with_reference) {
    std::ostringstream out;
    out << "# Results\n";
    for (size_t t = 0; t < grid.targets.size(); ++t) {
        const std::vector<ExperimentSummary>& row = grid.cells[t];
        out << "\n## " << grid.targets[t] << "\n\n";

        out << "| |";
        for (const ExperimentSummary& s : row) out << ' ' << cell_label(s.spec.mode) << " |";
        out << "\n|---|";
        for (size_t i = 0; i < row.size(); ++i) out << "---|";
        out << '\n';

        std::vector<double> acc_means, loss_means;
        for (const ExperimentSummary& s : row) {
            acc_means.push_back(s.mean_acc);
            loss_means.push_back(s.mean_loss);
        }
        const std::vector<size_t> best_acc = best_indices(acc_means, true);
        const std::vector<size_t> best_loss = best_indices(loss_means, false);

        std::vector<std::string> acc_cells, loss_cells;
        for (size_t i = 0; i < row.size(); ++i) {
            std::string acc = format_fixed(row[i].mean_acc, 2) + " ± " +
                              format_fixed(row[i].std_acc, 2);
            std::string loss = format_fixed(row[i].mean_loss, 2) + " ± " +
                               format_fixed(row[i].std_loss, 2);
            if (std::find(best_acc.begin(), best_acc.end(), i) != best_acc.end())
                acc = "**" + acc + "**";
            if (std::find(best_loss.begin(), best_loss.end(), i) != best_loss.end())
                loss = "**" + loss + "**";
            acc_cells.push_back(acc);
            loss_cells.push_back(loss);
        }
        append_metric_row(out, "Acc", acc_cells);

        if (with_reference) {
            std::vector<std::string> ref_acc, delta_acc;
            for (const ExperimentSummary& s : row) {
                const auto ref = find_reference(s.spec.target, s.spec.mode.source, s.spec.mode.freeze);
                if (ref) {
                    ref_acc.push_back(format_fixed(ref->acc_mean, 2) + " ± " +
                                      format_fixed(ref->acc_std, 2));
                    const double delta = s.mean_acc - ref->acc_mean;
                    delta_acc.push_back((delta >= 0 ? "+" : "") + format_fixed(delta, 2));
                } else {
                    ref_acc.push_back("-");
                    delta_acc.push_back("-");
                }
            }
            append_metric_row(out, "Acc (reference)", ref_acc);
            append_metric_row(out, "Acc (delta)", delta_acc);
        }

        append_metric_row(out, "Loss", loss_cells);

        if (with_reference) {
            std::vector<std::string> ref_loss, delta_loss;
            for (const ExperimentSummary& s : row) {
                const auto ref = find_reference(s.spec.target, s.spec.mode.source, s.spec.mode.freeze);
                if (ref) {
                    ref_loss.push_back(format_fixed(ref->loss_mean, 2) + " ± " +
                                       format_fixed(ref->loss_std, 2));
                    const double delta = s.mean_loss - ref->loss_mean;
                    delta_loss.push_back((delta >= 0 ? "+" : "") + format_fixed(delta, 2));
                } else {
                    ref_loss.push_back("-");
                    delta_loss.push_back("-");
                }
            }
            append_metric_row(out, "Loss (reference)", ref_loss);
            append_metric_row(out, "Loss (delta)", delta_loss);
        }
    }
    return out.str();
}

std::string render_table_csv(const TableGrid& grid) {
    std::ostringstream out;
    out << "target,mode,source,freeze,repetitions,mean_acc,std_acc,mean_loss,std_loss\n";
    for (const auto& row : grid.cells) {
        for (const ExperimentSummary& s : row) {
            const Mode& mode = s.spec.mode;
            out << s.spec.target << ',' << (mode.is_transfer() ? "transfer" : "normal") << ','
                << mode.source << ',' << (mode.is_transfer() ? std::to_string(mode.freeze) : "")
                << ',' << s.spec.repetitions << ',' << format_double(s.mean_acc) << ','
                << format_double(s.std_acc) << ',' << format_double(s.mean_loss) << ','
                << format_double(s.std_loss) << '\n';
        }
    }
    return out.str();
}

void write_results(const TableGrid& grid, const std::filesystem::path& results_dir,
                   bool with_reference) {
    namespace fs = std::filesystem;
    for (size_t t = 0; t < grid.targets.size(); ++t) {
        const fs::path target_dir = results_dir / grid.targets[t];
        fs::create_directories(target_dir);
        for (const ExperimentSummary& s : grid.cells[t]) {
            std::ofstream out(target_dir / (s.spec.mode.tag() + ".json"));
            out << summary_to_json(s).dump(2) << '\n';
        }
    }
    fs::create_directories(results_dir);
    {
        std::ofstream out(results_dir / "table.csv");
        out << render_table_csv(grid);
    }
    {
        std::ofstream out(results_dir / "table.md");
        out << render_table_markdown(grid, with_reference);
    }
}

}  // namespace metaxfer
