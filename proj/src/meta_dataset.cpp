#include "metaxfer/meta_dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "metaxfer/arff.hpp"
#include "metaxfer/errors.hpp"

namespace metaxfer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void warn(std::ostream* sink, const std::string& message) {
    if (sink) *sink << "[warn] " << message << '\n';
}

}  // namespace

MetaDataset derive_labels(const AslibScenario& scenario, std::ostream* warnings) {
    const size_t algo_count = scenario.algorithms.size();
    const double penalty =
        scenario.cutoff_time ? 10.0 * *scenario.cutoff_time : kNaN;

    std::vector<size_t> kept_rows;
    std::vector<int> raw_labels;
    size_t no_ok_dropped = 0;

    for (size_t i = 0; i < scenario.instances.size(); ++i) {
        const std::string& instance = scenario.instances[i];
        bool has_ok = false;
        int best = -1;
        double best_value = 0.0;
        for (size_t a = 0; a < algo_count; ++a) {
            const RunRecord* run = scenario.find_run(instance, scenario.algorithms[a]);
            if (!run) continue;
            double value;
            if (run->status == RunStatus::ok) {
                value = run->performance;
                has_ok = true;
            } else if (!scenario.maximize && scenario.cutoff_time) {
                value = penalty;  // PAR10
            } else {
                continue;  // no meaningful "worst" value; exclude
            }
            const bool better =
                best < 0 || (scenario.maximize ? value > best_value : value < best_value);
            if (better) {
                best = static_cast<int>(a);
                best_value = value;
            }
            // ties keep the earlier (lexicographically smaller) algorithm
        }
        if (!has_ok || best < 0) {
            ++no_ok_dropped;
            continue;
        }
        kept_rows.push_back(i);
        raw_labels.push_back(best);
    }
    if (no_ok_dropped > 0) {
        warn(warnings, std::to_string(no_ok_dropped) +
                           " instances without an ok run dropped from " + scenario.scenario_id);
    }

    // drop classes that cannot survive a stratified split
    std::vector<size_t> class_counts(algo_count, 0);
    for (const int label : raw_labels) ++class_counts[static_cast<size_t>(label)];
    std::vector<int> dense_id(algo_count, -1);
    MetaDataset dataset;
    dataset.name = scenario.scenario_id;
    for (size_t a = 0; a < algo_count; ++a) {
        if (class_counts[a] >= 2) {
            dense_id[a] = static_cast<int>(dataset.class_names.size());
            dataset.class_names.push_back(scenario.algorithms[a]);
        } else if (class_counts[a] > 0) {
            warn(warnings, "class '" + scenario.algorithms[a] + "' has " +
                               std::to_string(class_counts[a]) +
                               " instance(s); dropped with its instances");
        }
    }

    std::vector<size_t> final_rows;
    for (size_t r = 0; r < kept_rows.size(); ++r) {
        const int mapped = dense_id[static_cast<size_t>(raw_labels[r])];
        if (mapped < 0) continue;
        final_rows.push_back(kept_rows[r]);
        dataset.y.push_back(mapped);
    }

    if (dataset.class_names.size() < 2) {
        throw DegenerateDataset(scenario.scenario_id + ": fewer than 2 classes survive (" +
                                std::to_string(dataset.class_names.size()) + ")");
    }
    if (final_rows.size() < 10) {
        throw DegenerateDataset(scenario.scenario_id + ": fewer than 10 instances survive (" +
                                std::to_string(final_rows.size()) + ")");
    }

    dataset.feature_names = scenario.feature_names;
    dataset.X = take_rows(scenario.feature_values, final_rows);
    return dataset;
}

double anova_f(std::span<const double> column, std::span<const int> labels) {
    if (column.size() != labels.size())
        throw DimensionMismatch("anova_f: column and labels differ in length");

    std::map<int, std::vector<double>> groups;
    for (size_t i = 0; i < column.size(); ++i) groups[labels[i]].push_back(column[i]);
    const size_t group_count = groups.size();
    const size_t total = column.size();
    if (group_count < 2)
        throw InsufficientGroups("anova_f needs at least 2 classes, got " +
                                 std::to_string(group_count));

    // Exact degenerate handling: within-group SS is zero iff every group is
    // internally constant, which float noise in the mean must not obscure.
    bool all_groups_constant = true;
    for (const auto& [label, values] : groups) {
        for (const double v : values) {
            if (v != values.front()) {
                all_groups_constant = false;
                break;
            }
        }
        if (!all_groups_constant) break;
    }
    if (all_groups_constant) {
        const double first = groups.begin()->second.front();
        for (const auto& [label, values] : groups) {
            if (values.front() != first) return kAnovaPerfectSeparationSentinel;
        }
        return 0.0;  // between and within both vanish
    }

    double grand_sum = 0.0;
    for (const double v : column) grand_sum += v;
    const double grand_mean = grand_sum / static_cast<double>(total);

    double between_ss = 0.0;
    double within_ss = 0.0;
    for (const auto& [label, values] : groups) {
        double sum = 0.0;
        for (const double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        between_ss += static_cast<double>(values.size()) * (mean - grand_mean) * (mean - grand_mean);
        for (const double v : values) within_ss += (v - mean) * (v - mean);
    }

    const double df_between = static_cast<double>(group_count - 1);
    const double df_within = static_cast<double>(total - group_count);
    if (within_ss <= 0.0) {
        return between_ss > 0.0 ? kAnovaPerfectSeparationSentinel : 0.0;
    }
    return (between_ss / df_between) / (within_ss / df_within);
}

FittedPreprocessor fit_preprocessor(const Matrix& x_train, const std::vector<int>& y_train,
                                    size_t k) {
    if (x_train.rows == 0 || x_train.rows != y_train.size())
        throw DimensionMismatch("fit_preprocessor: X_train/y_train shape mismatch");
    const size_t d = x_train.cols;
    if (k < 1) throw KTooLarge("k must be at least 1");
    if (k > d) throw KTooLarge("k = " + std::to_string(k) + " exceeds feature count " +
                               std::to_string(d));

    FittedPreprocessor prep;
    prep.feature_median.resize(d);
    prep.feature_min.resize(d);
    prep.feature_max.resize(d);
    prep.f_scores.resize(d);

    std::vector<double> scratch;
    std::vector<double> normalized(x_train.rows);
    for (size_t j = 0; j < d; ++j) {
        scratch.clear();
        for (size_t i = 0; i < x_train.rows; ++i) {
            const double v = x_train.at(i, j);
            if (!std::isnan(v)) scratch.push_back(v);
        }
        double median = 0.0;
        if (!scratch.empty()) {
            std::sort(scratch.begin(), scratch.end());
            const size_t mid = scratch.size() / 2;
            median = scratch.size() % 2 == 1 ? scratch[mid]
                                             : 0.5 * (scratch[mid - 1] + scratch[mid]);
        }
        prep.feature_median[j] = median;

        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < x_train.rows; ++i) {
            double v = x_train.at(i, j);
            if (std::isnan(v)) v = median;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        prep.feature_min[j] = lo;
        prep.feature_max[j] = hi;

        const double range = hi - lo;
        for (size_t i = 0; i < x_train.rows; ++i) {
            double v = x_train.at(i, j);
            if (std::isnan(v)) v = median;
            normalized[i] = range > 0.0 ? (v - lo) / range : 0.0;
        }
        prep.f_scores[j] = anova_f(normalized, y_train);
    }

    std::vector<size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&prep](size_t a, size_t b) {
        if (prep.f_scores[a] != prep.f_scores[b]) return prep.f_scores[a] > prep.f_scores[b];
        return a < b;
    });
    prep.selected_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(prep.selected_indices.begin(), prep.selected_indices.end());
    return prep;
}

Matrix apply_preprocessor(const FittedPreprocessor& prep, const Matrix& x) {
    const size_t d = prep.input_dim();
    if (x.cols != d)
        throw DimensionMismatch("apply_preprocessor: X has " + std::to_string(x.cols) +
                                " columns, preprocessor expects " + std::to_string(d));

    Matrix out(x.rows, prep.selected_indices.size());
    for (size_t i = 0; i < x.rows; ++i) {
        for (size_t s = 0; s < prep.selected_indices.size(); ++s) {
            const size_t j = prep.selected_indices[s];
            double v = x.at(i, j);
            if (std::isnan(v)) v = prep.feature_median[j];
            const double range = prep.feature_max[j] - prep.feature_min[j];
            double scaled = range > 0.0 ? (v - prep.feature_min[j]) / range : 0.0;
            scaled = std::clamp(scaled, 0.0, 1.0);
            out.at(i, s) = scaled;
        }
    }
    return out;
}

size_t choose_k(const std::vector<MetaDataset>& datasets) {
    if (datasets.empty()) throw EmptyCollection("choose_k over an empty dataset list");
    size_t k = datasets.front().feature_count();
    for (const MetaDataset& d : datasets) k = std::min(k, d.feature_count());
    return k;
}

SplitIndices stratified_split(const std::vector<int>& y, double test_fraction, Prng& rng) {
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);

    SplitIndices split;
    for (auto& [cls, members] : by_class) {
        const size_t n = members.size();
        if (n < 2)
            throw ClassTooSmall("class " + std::to_string(cls) + " has " + std::to_string(n) +
                                " member(s); need at least 2");
        const auto rounded =
            static_cast<size_t>(std::llround(test_fraction * static_cast<double>(n)));
        const size_t test_count = std::clamp<size_t>(rounded, 1, n - 1);
        rng.shuffle(members);
        split.test_rows.insert(split.test_rows.end(), members.begin(),
                               members.begin() + static_cast<std::ptrdiff_t>(test_count));
        split.train_rows.insert(split.train_rows.end(),
                                members.begin() + static_cast<std::ptrdiff_t>(test_count),
                                members.end());
    }
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    return split;
}

void save_meta_dataset(const MetaDataset& dataset, const std::filesystem::path& csv_path,
                       const std::filesystem::path& sidecar_path, const FittedPreprocessor* prep) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    for (size_t j = 0; j < dataset.feature_names.size(); ++j) {
        csv << dataset.feature_names[j] << ',';
    }
    csv << "label\n";
    for (size_t i = 0; i < dataset.X.rows; ++i) {
        for (size_t j = 0; j < dataset.X.cols; ++j) {
            const double v = dataset.X.at(i, j);
            if (!std::isnan(v)) csv << format_double(v);
            csv << ',';
        }
        csv << dataset.y[i] << '\n';
    }

    nlohmann::ordered_json sidecar;
    sidecar["name"] = dataset.name;
    sidecar["feature_names"] = dataset.feature_names;
    sidecar["class_names"] = dataset.class_names;
    sidecar["rows"] = dataset.X.rows;
    if (prep) {
        sidecar["preprocessor"] = {{"min", prep->feature_min},
                                   {"max", prep->feature_max},
                                   {"median", prep->feature_median},
                                   {"selected_indices", prep->selected_indices},
                                   {"f_scores", prep->f_scores}};
    } else {
        sidecar["preprocessor"] = nullptr;
    }
    std::ofstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot write " + sidecar_path.string());
    side << sidecar.dump(2) << '\n';
}

MetaDataset load_meta_dataset(const std::filesystem::path& csv_path,
                              const std::filesystem::path& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot read " + sidecar_path.string());
    const nlohmann::json sidecar = nlohmann::json::parse(side);

    MetaDataset dataset;
    dataset.name = sidecar.at("name").get<std::string>();
    dataset.feature_names = sidecar.at("feature_names").get<std::vector<std::string>>();
    dataset.class_names = sidecar.at("class_names").get<std::vector<std::string>>();

    std::ifstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot read " + csv_path.string());
    std::string line;
    if (!std::getline(csv, line)) throw std::runtime_error("empty CSV " + csv_path.string());

    std::vector<double> values;
    const size_t d = dataset.feature_names.size();
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col < d) {
                if (cell.empty()) {
                    values.push_back(kNaN);
                } else {
                    double v = 0.0;
                    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                    if (ec != std::errc() || ptr != cell.data() + cell.size())
                        throw std::runtime_error("bad CSV cell '" + cell + "'");
                    values.push_back(v);
                }
            } else {
                dataset.y.push_back(std::stoi(cell));
            }
            ++col;
        }
        if (col != d + 1)
            throw DimensionMismatch("CSV row has " + std::to_string(col) + " cells, expected " +
                                    std::to_string(d + 1));
    }
    dataset.X.rows = dataset.y.size();
    dataset.X.cols = d;
    dataset.X.data = std::move(values);
    return dataset;
}

std::string meta_dataset_fingerprint(const MetaDataset& dataset) {
    std::ostringstream out;
    out << dataset.name << '\n';
    for (const std::string& f : dataset.feature_names) out << f << ',';
    out << '\n';
    for (const std::string& c : dataset.class_names) out << c << ',';
    out << '\n';
    for (size_t i = 0; i < dataset.X.rows; ++i) {
        for (size_t j = 0; j < dataset.X.cols; ++j) {
            const double v = dataset.X.at(i, j);
            out << (std::isnan(v) ? "?" : format_double(v)) << ',';
        }
        out << dataset.y[i] << '\n';
    }
    return to_hex(fnv1a64(out.str()));
}

}  // namespace metaxfer
