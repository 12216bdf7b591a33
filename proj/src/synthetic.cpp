#include "metaxfer/synthetic.hpp"

#include <fstream>
#include <stdexcept>

#include "metaxfer/arff.hpp"
#include "metaxfer/rng.hpp"

namespace metaxfer {

namespace fs = std::filesystem;

namespace {

std::string algorithm_name(size_t index) {
    std::string id = std::to_string(index);
    while (id.size() < 2) id = "0" + id;
    return "algo_" + id;
}

std::string instance_name(size_t index) {
    std::string id = std::to_string(index);
    while (id.size() < 4) id = "0" + id;
    return "inst_" + id;
}

}  // namespace

void write_synthetic_scenario(const fs::path& directory, const SyntheticSpec& spec) {
    if (spec.algorithms < 2 || spec.features < spec.algorithms || spec.instances < 2 * spec.algorithms)
        throw std::invalid_argument("synthetic spec too small to be a usable scenario");

    fs::create_directories(directory);
    Prng rng(spec.seed);

    ArffRelation features;
    features.name = spec.name + "_FEATURES";
    features.attributes.push_back({"instance_id", ArffType::string, {}});
    features.attributes.push_back({"repetition", ArffType::numeric, {}});
    for (size_t j = 0; j < spec.features; ++j)
        features.attributes.push_back({"f" + std::to_string(j), ArffType::numeric, {}});

    ArffRelation runs;
    runs.name = spec.name + "_RUNS";
    runs.attributes.push_back({"instance_id", ArffType::string, {}});
    runs.attributes.push_back({"repetition", ArffType::numeric, {}});
    runs.attributes.push_back({"algorithm", ArffType::string, {}});
    runs.attributes.push_back({"runtime", ArffType::numeric, {}});
    runs.attributes.push_back(
        {"runstatus", ArffType::nominal, {"ok", "timeout", "memout", "not_applicable", "crash", "other"}});

    for (size_t i = 0; i < spec.instances; ++i) {
        const size_t cls = i % spec.algorithms;
        std::vector<ArffCell> row;
        row.push_back(ArffCell::of(instance_name(i)));
        row.push_back(ArffCell::of(1.0));
        for (size_t j = 0; j < spec.features; ++j) {
            const bool informative = j < spec.algorithms;
            if (!informative && rng.uniform01() < spec.missing_fraction) {
                row.push_back(ArffCell::missing_cell());
                continue;
            }
            const double base = informative ? (j == cls ? 3.0 : 0.0) : 0.0;
            const double noise = informative ? rng.normal(0.0, 0.15) : rng.normal(0.0, 1.0);
            row.push_back(ArffCell::of(base + noise));
        }
        features.rows.push_back(std::move(row));

        for (size_t a = 0; a < spec.algorithms; ++a) {
            std::vector<ArffCell> run_row;
            run_row.push_back(ArffCell::of(instance_name(i)));
            run_row.push_back(ArffCell::of(1.0));
            run_row.push_back(ArffCell::of(algorithm_name(a)));
            if (a == cls) {
                run_row.push_back(ArffCell::of(1.0 + 0.5 * rng.uniform01()));
                run_row.push_back(ArffCell::of(std::string("ok")));
            } else if (rng.uniform01() < 0.1) {
                // timeout rows must be PAR10-penalized for the label to stay put
                run_row.push_back(ArffCell::of(spec.cutoff_time));
                run_row.push_back(ArffCell::of(std::string("timeout")));
            } else {
                run_row.push_back(ArffCell::of(20.0 + 10.0 * rng.uniform01()));
                run_row.push_back(ArffCell::of(std::string("ok")));
            }
            runs.rows.push_back(std::move(run_row));
        }
    }

    {
        std::ofstream out(directory / "feature_values.arff");
        write_arff(features, out);
    }
    {
        std::ofstream out(directory / "algorithm_runs.arff");
        write_arff(runs, out);
    }
    {
        std::ofstream out(directory / "description.txt");
        out << "scenario_id: " << spec.name << "\n";
        out << "performance_measures:\n- runtime\n";
        out << "maximize:\n- false\n";
        out << "performance_type:\n- runtime\n";
        out << "algorithm_cutoff_time: " << format_double(spec.cutoff_time) << "\n";
    }
}

}  // namespace metaxfer
