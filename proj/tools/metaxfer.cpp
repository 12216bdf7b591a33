#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "metaxfer/arff.hpp"
#include "metaxfer/aslib.hpp"
#include "metaxfer/errors.hpp"
#include "metaxfer/experiment.hpp"
#include "metaxfer/fetch.hpp"
#include "metaxfer/meta_dataset.hpp"
#include "metaxfer/reference_table.hpp"
#include "metaxfer/synthetic.hpp"

namespace fs = std::filesystem;
using namespace metaxfer;

namespace {

const std::vector<std::string> kDefaultScenarios = {"CSP-2010", "CSP-MZN", "CSP-Minizinc-Obj",
                                                    "CSP-Minizinc-Time"};

struct GlobalOptions {
    std::string cache_dir;
    std::string results_dir;
    std::string url_template = kDefaultUrlTemplate;
    std::vector<std::string> scenarios = kDefaultScenarios;
    size_t jobs = 1;
};

fs::path resolve_cache_dir(const GlobalOptions& opts) {
    if (!opts.cache_dir.empty()) return fs::path(opts.cache_dir);
    return default_cache_dir();
}

fs::path resolve_results_dir(const GlobalOptions& opts) {
    if (!opts.results_dir.empty()) return fs::path(opts.results_dir);
    if (const char* env = std::getenv("METAXFER_RESULTS"); env && *env) return fs::path(env);
    return fs::path("results");
}

MetaDataset load_dataset(const std::string& name, const GlobalOptions& opts, bool allow_fetch) {
    const fs::path cache = resolve_cache_dir(opts);
    fs::path dir = cache / name;
    if (!scenario_cached(dir)) {
        if (!allow_fetch)
            throw IncompleteScenario("scenario '" + name + "' is not cached under " +
                                     cache.string());
        FetchConfig config;
        config.cache_dir = cache;
        config.url_template = opts.url_template;
        dir = fetch_scenario(name, config);
    }
    const AslibScenario scenario = load_scenario(dir, &std::cerr);
    return derive_labels(scenario, &std::cerr);
}

// K is chosen over an explicit --scenarios list when given; otherwise over
// the default list when every participant belongs to it; otherwise over the
// participants themselves.
std::vector<std::string> k_set_for(const std::vector<std::string>& participants,
                                   const GlobalOptions& opts, bool scenarios_overridden) {
    if (scenarios_overridden) {
        std::vector<std::string> set = opts.scenarios;
        for (const std::string& p : participants) {
            if (std::find(set.begin(), set.end(), p) == set.end()) set.push_back(p);
        }
        return set;
    }
    const bool all_default = std::all_of(
        participants.begin(), participants.end(), [](const std::string& p) {
            return std::find(kDefaultScenarios.begin(), kDefaultScenarios.end(), p) !=
                   kDefaultScenarios.end();
        });
    if (all_default) return kDefaultScenarios;
    return participants;
}

int cmd_fetch(const GlobalOptions& opts, const std::vector<std::string>& names) {
    const std::vector<std::string>& list = names.empty() ? opts.scenarios : names;
    FetchConfig config;
    config.cache_dir = resolve_cache_dir(opts);
    config.url_template = opts.url_template;
    bool ok = true;
    for (const std::string& name : list) {
        try {
            const fs::path dir = fetch_scenario(name, config);
            std::cout << name << ": cached at " << dir.string() << "\n";
        } catch (const std::exception& e) {
            std::cerr << name << ": " << e.what() << "\n";
            ok = false;
        }
    }
    return ok ? 0 : 1;
}

int cmd_inspect(const GlobalOptions& opts, const std::string& name, const std::string& export_dir) {
    const fs::path dir = resolve_cache_dir(opts) / name;
    const AslibScenario scenario = load_scenario(dir, &std::cerr);
    std::cout << "scenario:    " << scenario.scenario_id << "\n";
    std::cout << "instances:   " << scenario.instances.size() << "\n";
    std::cout << "features:    " << scenario.feature_names.size() << "\n";
    std::cout << "algorithms:  " << scenario.algorithms.size() << "\n";
    std::cout << "measure:     " << scenario.performance_measure_name
              << (scenario.maximize ? " (maximize)" : " (minimize)") << "\n";
    if (scenario.cutoff_time)
        std::cout << "cutoff:      " << format_double(*scenario.cutoff_time) << "s\n";

    const MetaDataset dataset = derive_labels(scenario, &std::cerr);
    std::cout << "usable rows: " << dataset.X.rows << "\n";
    std::cout << "classes:     " << dataset.class_count() << "\n";
    std::vector<size_t> counts(dataset.class_count(), 0);
    for (const int label : dataset.y) ++counts[static_cast<size_t>(label)];
    for (size_t c = 0; c < counts.size(); ++c) {
        std::cout << "  " << dataset.class_names[c] << ": " << counts[c] << "\n";
    }
    std::cout << "k-eligible:  yes (classes >= 2, rows >= 10)\n";

    if (!export_dir.empty()) {
        fs::create_directories(export_dir);
        const fs::path base = fs::path(export_dir) / dataset.name;
        save_meta_dataset(dataset, base.string() + ".csv", base.string() + ".json");
        std::cout << "exported:    " << base.string() << ".{csv,json}\n";
    }
    return 0;
}

struct RunOptions {
    std::string target;
    std::string source;
    int freeze = -1;
    size_t reps = 30;
    uint64_t seed = 0;
    double learning_rate = 1e-3;
    size_t epochs = 200;
    size_t batch_size = 32;
    size_t hidden1 = 64;
    size_t hidden2 = 32;
    bool fixed_split = false;
    std::string out_file;
    std::string save_models_dir;
    std::string history_file;
};

ExperimentSpec build_spec(const RunOptions& run, const std::vector<std::string>& k_set) {
    ExperimentSpec spec;
    spec.target = run.target;
    spec.mode = run.source.empty() ? Mode::normal() : Mode::transfer(run.source, run.freeze);
    spec.repetitions = run.reps;
    spec.base_seed = run.seed;
    spec.train.learning_rate = run.learning_rate;
    spec.train.epochs = run.epochs;
    spec.train.batch_size = run.batch_size;
    spec.arch.hidden1 = run.hidden1;
    spec.arch.hidden2 = run.hidden2;
    spec.fixed_split = run.fixed_split;
    spec.scenario_set = k_set;
    return spec;
}

int cmd_run(const GlobalOptions& opts, const RunOptions& run, bool scenarios_overridden) {
    std::vector<std::string> participants = {run.target};
    if (!run.source.empty()) participants.push_back(run.source);
    const std::vector<std::string> k_set = k_set_for(participants, opts, scenarios_overridden);

    std::map<std::string, MetaDataset> datasets;
    std::vector<MetaDataset> k_datasets;
    for (const std::string& name : k_set) {
        MetaDataset d = load_dataset(name, opts, true);
        k_datasets.push_back(d);
        datasets.emplace(name, std::move(d));
    }
    ExperimentSpec spec = build_spec(run, k_set);
    spec.k = choose_k(k_datasets);

    const ExperimentSummary summary = run_cell(spec, datasets, nullptr, opts.jobs);

    const fs::path results = resolve_results_dir(opts);
    const fs::path target_dir = results / spec.target;
    fs::create_directories(target_dir);
    const fs::path out_path =
        run.out_file.empty() ? target_dir / (spec.mode.tag() + ".json") : fs::path(run.out_file);
    {
        std::ofstream out(out_path);
        out << summary_to_json(summary).dump(2) << '\n';
    }
    std::cout << spec.target << " " << spec.mode.tag() << ": acc " << format_double(summary.mean_acc)
              << " +/- " << format_double(summary.std_acc) << ", loss "
              << format_double(summary.mean_loss) << " +/- " << format_double(summary.std_loss)
              << "\n";
    std::cout << "wrote " << out_path.string() << "\n";

    if (!run.save_models_dir.empty() || !run.history_file.empty()) {
        // retrain repetition 0 to materialize its artifacts; same seeds, so
        // this reproduces the run_cell models bit for bit
        const MetaDataset& target = datasets.at(spec.target);
        Prng split_rng(mix_seed(cell_seed(spec.base_seed, spec.target, spec.mode.tag(), 0), 1));
        const SplitIndices split = stratified_split(target.y, 0.2, split_rng);
        const Matrix raw_train = take_rows(target.X, split.train_rows);
        std::vector<int> y_train;
        for (const size_t r : split.train_rows) y_train.push_back(target.y[r]);
        const FittedPreprocessor prep = fit_preprocessor(raw_train, y_train, spec.k);
        const Matrix x_train = apply_preprocessor(prep, raw_train);

        Prng init_rng(mix_seed(cell_seed(spec.base_seed, spec.target, spec.mode.tag(), 0), 2));
        MlpModel model = he_init({spec.k, spec.arch.hidden1, spec.arch.hidden2,
                                  target.class_count()},
                                 init_rng);
        TrainConfig cfg = spec.train;
        cfg.seed = mix_seed(cell_seed(spec.base_seed, spec.target, spec.mode.tag(), 0), 3);
        const std::vector<double> history = train(model, x_train, y_train, cfg);
        if (!run.save_models_dir.empty()) {
            fs::create_directories(run.save_models_dir);
            const fs::path model_path = fs::path(run.save_models_dir) / "model_rep0.json";
            save_model(model, model_path, &cfg);
            std::cout << "wrote " << model_path.string() << "\n";
        }
        if (!run.history_file.empty()) {
            save_history_csv(history, run.history_file);
            std::cout << "wrote " << run.history_file << "\n";
        }
    }
    return 0;
}

int cmd_reproduce(const GlobalOptions& opts, const RunOptions& run, bool scenarios_overridden) {
    const std::vector<std::string> targets =
        scenarios_overridden ? opts.scenarios : kDefaultScenarios;

    std::map<std::string, MetaDataset> datasets;
    std::vector<MetaDataset> k_datasets;
    for (const std::string& name : targets) {
        MetaDataset d = load_dataset(name, opts, true);
        k_datasets.push_back(d);
        datasets.emplace(name, std::move(d));
    }

    ExperimentSpec prototype = build_spec(run, targets);
    prototype.k = choose_k(k_datasets);
    prototype.target = targets.front();  // placeholder; run_table assigns per cell

    std::cout << "k = " << prototype.k << " over";
    for (const std::string& t : targets) std::cout << ' ' << t;
    std::cout << "\n";

    int failures = 0;
    TableGrid grid;
    try {
        grid = run_table(targets, datasets, prototype, opts.jobs,
                         [](const std::string& line) { std::cout << line << "\n"; });
    } catch (const std::exception& e) {
        std::cerr << "grid failed: " << e.what() << "\n";
        return 1;
    }

    const fs::path results = resolve_results_dir(opts);
    const bool with_reference = !scenarios_overridden;
    write_results(grid, results, with_reference);
    std::cout << "\n" << render_table_markdown(grid, with_reference);
    std::cout << "wrote " << (results / "table.md").string() << " and table.csv\n";
    return failures == 0 ? 0 : 1;
}

int cmd_synth(const GlobalOptions& opts, const std::string& name, size_t instances,
              size_t features, size_t algorithms, uint64_t seed, bool pair) {
    const fs::path cache = resolve_cache_dir(opts);
    if (pair) {
        SyntheticSpec a;
        a.name = "SYNTH-A";
        a.seed = 1;
        write_synthetic_scenario(cache / a.name, a);
        SyntheticSpec b;
        b.name = "SYNTH-B";
        b.instances = 260;
        b.features = 14;
        b.algorithms = 4;
        b.seed = 2;
        write_synthetic_scenario(cache / b.name, b);
        std::cout << "wrote SYNTH-A and SYNTH-B under " << cache.string() << "\n";
        return 0;
    }
    SyntheticSpec spec;
    spec.name = name;
    spec.instances = instances;
    spec.features = features;
    spec.algorithms = algorithms;
    spec.seed = seed;
    write_synthetic_scenario(cache / spec.name, spec);
    std::cout << "wrote " << (cache / spec.name).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-level transfer learning for ASlib algorithm selection"};
    app.set_version_flag("--version", "metaxfer 0.1.0");
    app.require_subcommand(1);

    GlobalOptions opts;
    bool scenarios_overridden = false;
    app.add_option("--cache-dir", opts.cache_dir,
                   "scenario cache directory (env METAXFER_CACHE)");
    app.add_option("--results-dir", opts.results_dir,
                   "results directory (env METAXFER_RESULTS)");
    app.add_option("--url-template", opts.url_template,
                   "download URL template with {scenario}/{file} placeholders");
    app.add_option("--scenarios", opts.scenarios, "scenario list defining K")
        ->delimiter(',')
        ->each([&scenarios_overridden](const std::string&) { scenarios_overridden = true; });
    app.add_option("-j,--jobs", opts.jobs, "parallel workers for repetitions")
        ->check(CLI::Range(static_cast<size_t>(1), static_cast<size_t>(256)));

    auto* fetch = app.add_subcommand("fetch", "download and cache scenarios");
    std::vector<std::string> fetch_names;
    fetch->add_option("names", fetch_names, "scenario names (default: configured list)");

    auto* inspect = app.add_subcommand("inspect", "summarize a cached scenario");
    std::string inspect_name;
    std::string export_dir;
    inspect->add_option("name", inspect_name, "scenario name")->required();
    inspect->add_option("--export", export_dir, "write the derived CSV + JSON sidecar here");

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "run one experiment cell");
    run->add_option("target", run_opts.target, "target scenario")->required();
    run->add_option("--source", run_opts.source, "transfer source scenario");
    auto* freeze_opt =
        run->add_option("--freeze", run_opts.freeze, "hidden layers to freeze (0, 1 or 2)")
            ->check(CLI::Range(0, 2));
    run->add_option("--reps", run_opts.reps, "repetitions")->check(CLI::PositiveNumber);
    run->add_option("--seed", run_opts.seed, "base seed");
    run->add_option("--learning-rate", run_opts.learning_rate, "Adam learning rate");
    run->add_option("--epochs", run_opts.epochs, "training epochs")->check(CLI::PositiveNumber);
    run->add_option("--batch-size", run_opts.batch_size, "minibatch size")
        ->check(CLI::PositiveNumber);
    run->add_option("--h1", run_opts.hidden1, "first hidden layer width")
        ->check(CLI::PositiveNumber);
    run->add_option("--h2", run_opts.hidden2, "second hidden layer width")
        ->check(CLI::PositiveNumber);
    run->add_flag("--fixed-split", run_opts.fixed_split,
                  "reuse repetition 0's train/test split for every repetition");
    run->add_option("--out", run_opts.out_file, "result JSON path (default under results dir)");
    run->add_option("--save-models", run_opts.save_models_dir,
                    "directory for repetition 0's trained model artifact");
    run->add_option("--history", run_opts.history_file,
                    "CSV path for repetition 0's per-epoch train loss");

    RunOptions repro_opts;
    auto* reproduce = app.add_subcommand("reproduce", "run the full grid and compare to the bundled reference table");
    reproduce->add_option("--reps", repro_opts.reps, "repetitions per cell");
    reproduce->add_option("--seed", repro_opts.seed, "base seed");
    reproduce->add_option("--learning-rate", repro_opts.learning_rate, "Adam learning rate");
    reproduce->add_option("--epochs", repro_opts.epochs, "training epochs")
        ->check(CLI::PositiveNumber);
    reproduce->add_option("--batch-size", repro_opts.batch_size, "minibatch size")
        ->check(CLI::PositiveNumber);
    reproduce->add_option("--h1", repro_opts.hidden1, "first hidden layer width")
        ->check(CLI::PositiveNumber);
    reproduce->add_option("--h2", repro_opts.hidden2, "second hidden layer width")
        ->check(CLI::PositiveNumber);
    reproduce->add_flag("--fixed-split", repro_opts.fixed_split,
                        "reuse repetition 0's split for every repetition");

    auto* synth = app.add_subcommand("synth", "generate synthetic scenarios into the cache");
    std::string synth_name = "SYNTH-A";
    size_t synth_instances = 240;
    size_t synth_features = 12;
    size_t synth_algorithms = 3;
    uint64_t synth_seed = 1;
    bool synth_pair = false;
    synth->add_option("--name", synth_name, "scenario name");
    synth->add_option("--instances", synth_instances, "instance count");
    synth->add_option("--features", synth_features, "feature count");
    synth->add_option("--algorithms", synth_algorithms, "algorithm count");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_flag("--pair", synth_pair, "write the SYNTH-A / SYNTH-B fixture pair");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fetch->parsed()) return cmd_fetch(opts, fetch_names);
        if (inspect->parsed()) return cmd_inspect(opts, inspect_name, export_dir);
        if (run->parsed()) {
            if (!run_opts.source.empty() && freeze_opt->count() == 0) {
                std::cerr << "--source requires --freeze {0,1,2}\n";
                return 1;
            }
            if (run_opts.source.empty() && freeze_opt->count() > 0) {
                std::cerr << "--freeze requires --source\n";
                return 1;
            }
            return cmd_run(opts, run_opts, scenarios_overridden);
        }
        if (reproduce->parsed()) return cmd_reproduce(opts, repro_opts, scenarios_overridden);
        if (synth->parsed())
            return cmd_synth(opts, synth_name, synth_instances, synth_features, synth_algorithms,
                             synth_seed, synth_pair);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
