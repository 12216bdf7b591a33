#include "metaxfer/aslib.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "metaxfer/arff.hpp"
#include "metaxfer/errors.hpp"

namespace metaxfer {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"'))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

void warn(std::ostream* sink, const std::string& message) {
    if (sink) *sink << "[warn] " << message << '\n';
}

}  // namespace

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::ok: return "ok";
        case RunStatus::timeout: return "timeout";
        case RunStatus::memout: return "memout";
        case RunStatus::crash: return "crash";
        case RunStatus::other: return "other";
        case RunStatus::unknown: return "unknown";
    }
    return "unknown";
}

RunStatus run_status_from_string(const std::string& token) {
    const std::string t = lower(trim(token));
    if (t == "ok") return RunStatus::ok;
    if (t == "timeout") return RunStatus::timeout;
    if (t == "memout") return RunStatus::memout;
    if (t == "crash") return RunStatus::crash;
    if (t == "other") return RunStatus::other;
    return RunStatus::unknown;
}

ScenarioDescription parse_description(std::istream& in) {
    std::map<std::string, std::string> values;
    std::string pending_key;  // top-level key awaiting a "- item" list value
    std::string line;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const bool indented = !line.empty() && std::isspace(static_cast<unsigned char>(line[0]));
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;

        if (stripped[0] == '-') {
            // list item; the first one after a bare key becomes its value
            if (!pending_key.empty()) {
                const std::string item = strip_quotes(trim(stripped.substr(1)));
                if (!item.empty() && !values.count(pending_key)) values[pending_key] = item;
            }
            continue;
        }

        const size_t colon = stripped.find(':');
        if (colon == std::string::npos) {
            pending_key.clear();
            continue;
        }
        const std::string key = lower(trim(stripped.substr(0, colon)));
        const std::string value = strip_quotes(trim(stripped.substr(colon + 1)));
        if (indented) {
            pending_key.clear();  // nested block; not one of ours
            continue;
        }
        if (value.empty()) {
            pending_key = key;
        } else {
            pending_key.clear();
            values[key] = value;
        }
    }

    ScenarioDescription desc;
    const auto measures = values.find("performance_measures");
    if (measures == values.end()) throw MissingKey("performance_measures");
    std::string first = measures->second;
    if (const size_t comma = first.find(','); comma != std::string::npos)
        first = first.substr(0, comma);
    desc.performance_measure = trim(first);
    if (desc.performance_measure.empty()) throw MissingKey("performance_measures");

    const auto maximize = values.find("maximize");
    if (maximize == values.end()) throw MissingKey("maximize");
    const std::string m = lower(maximize->second);
    if (m == "true") {
        desc.maximize = true;
    } else if (m == "false") {
        desc.maximize = false;
    } else {
        throw UnparsableValue("maximize must be true or false, got '" + maximize->second + "'");
    }

    if (const auto cutoff = values.find("algorithm_cutoff_time"); cutoff != values.end()) {
        double v = 0.0;
        const std::string& text = cutoff->second;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v) || v <= 0.0)
            throw UnparsableValue("algorithm_cutoff_time must be a positive real, got '" + text + "'");
        desc.cutoff_time = v;
    }
    if (const auto id = values.find("scenario_id"); id != values.end() && !id->second.empty())
        desc.scenario_id = id->second;
    return desc;
}

size_t AslibScenario::algorithm_index(const std::string& id) const {
    const auto it = std::lower_bound(algorithms.begin(), algorithms.end(), id);
    if (it == algorithms.end() || *it != id) return static_cast<size_t>(-1);
    return static_cast<size_t>(it - algorithms.begin());
}

const RunRecord* AslibScenario::find_run(const std::string& instance,
                                         const std::string& algorithm) const {
    const auto it = runs.find({instance, algorithm});
    return it == runs.end() ? nullptr : &it->second;
}

namespace {

struct ColumnRoles {
    size_t instance_col = static_cast<size_t>(-1);
    size_t repetition_col = static_cast<size_t>(-1);
};

ColumnRoles find_id_columns(const ArffRelation& rel) {
    ColumnRoles roles;
    for (size_t i = 0; i < rel.attributes.size(); ++i) {
        const std::string name = lower(rel.attributes[i].name);
        if (name == "instance_id") roles.instance_col = i;
        if (name == "repetition") roles.repetition_col = i;
    }
    return roles;
}

std::string cell_as_text(const ArffCell& cell) {
    switch (cell.kind) {
        case ArffCell::Kind::text: return cell.text;
        case ArffCell::Kind::number: return format_double(cell.number);
        case ArffCell::Kind::missing: return "?";
    }
    return "?";
}

bool row_is_repetition_one(const std::vector<ArffCell>& row, size_t rep_col) {
    if (rep_col == static_cast<size_t>(-1)) return true;
    const ArffCell& cell = row[rep_col];
    return cell.kind == ArffCell::Kind::number && cell.number == 1.0;
}

}  // namespace

AslibScenario load_scenario(const std::filesystem::path& directory, std::ostream* warnings) {
    namespace fs = std::filesystem;
    const fs::path desc_path = directory / "description.txt";
    const fs::path features_path = directory / "feature_values.arff";
    const fs::path runs_path = directory / "algorithm_runs.arff";
    for (const fs::path& p : {desc_path, features_path, runs_path}) {
        if (!fs::exists(p))
            throw IncompleteScenario("required file missing: " + p.string());
    }

    std::ifstream desc_in(desc_path);
    const ScenarioDescription desc = parse_description(desc_in);

    AslibScenario scenario;
    scenario.performance_measure_name = desc.performance_measure;
    scenario.maximize = desc.maximize;
    scenario.cutoff_time = desc.cutoff_time;
    scenario.scenario_id = desc.scenario_id.value_or(directory.filename().string());

    // feature table
    const ArffRelation features = parse_arff_file(features_path.string());
    const ColumnRoles feat_roles = find_id_columns(features);
    if (feat_roles.instance_col == static_cast<size_t>(-1))
        throw InconsistentScenario("feature_values.arff has no instance_id attribute");
    std::vector<size_t> feature_cols;
    for (size_t i = 0; i < features.attributes.size(); ++i) {
        if (i == feat_roles.instance_col || i == feat_roles.repetition_col) continue;
        if (features.attributes[i].type != ArffType::numeric) {
            throw InconsistentScenario("non-numeric feature attribute '" +
                                       features.attributes[i].name +
                                       "' is not supported by this pipeline");
        }
        feature_cols.push_back(i);
        scenario.feature_names.push_back(features.attributes[i].name);
    }

    std::vector<std::string> feat_instances;
    std::vector<const std::vector<ArffCell>*> feat_rows;
    std::unordered_set<std::string> seen_instances;
    for (const auto& row : features.rows) {
        if (!row_is_repetition_one(row, feat_roles.repetition_col)) continue;
        std::string id = cell_as_text(row[feat_roles.instance_col]);
        if (!seen_instances.insert(id).second) {
            warn(warnings, "duplicate feature row for instance '" + id + "' ignored");
            continue;
        }
        feat_instances.push_back(std::move(id));
        feat_rows.push_back(&row);
    }

    // run table
    const ArffRelation runs = parse_arff_file(runs_path.string());
    const ColumnRoles run_roles = find_id_columns(runs);
    if (run_roles.instance_col == static_cast<size_t>(-1))
        throw InconsistentScenario("algorithm_runs.arff has no instance_id attribute");
    size_t algorithm_col = static_cast<size_t>(-1);
    size_t status_col = static_cast<size_t>(-1);
    size_t perf_col = static_cast<size_t>(-1);
    for (size_t i = 0; i < runs.attributes.size(); ++i) {
        const std::string name = lower(runs.attributes[i].name);
        if (name == "algorithm") algorithm_col = i;
        if (name == "runstatus") status_col = i;
        if (name == lower(scenario.performance_measure_name)) perf_col = i;
    }
    if (algorithm_col == static_cast<size_t>(-1))
        throw InconsistentScenario("algorithm_runs.arff has no algorithm attribute");
    if (status_col == static_cast<size_t>(-1))
        throw InconsistentScenario("algorithm_runs.arff has no runstatus attribute");
    if (perf_col == static_cast<size_t>(-1))
        throw InconsistentScenario("algorithm_runs.arff has no '" +
                                   scenario.performance_measure_name + "' attribute");

    const std::unordered_set<std::string> feature_instance_set(feat_instances.begin(),
                                                               feat_instances.end());
    std::set<std::string> algorithm_set;
    std::unordered_set<std::string> instances_with_runs;
    size_t dropped_run_rows = 0;

    for (const auto& row : runs.rows) {
        if (!row_is_repetition_one(row, run_roles.repetition_col)) continue;
        const std::string instance = cell_as_text(row[run_roles.instance_col]);
        if (!feature_instance_set.count(instance)) {
            ++dropped_run_rows;
            continue;
        }
        const std::string algorithm = cell_as_text(row[algorithm_col]);

        RunRecord record;
        record.status = run_status_from_string(cell_as_text(row[status_col]));
        const ArffCell& perf = row[perf_col];
        if (perf.kind == ArffCell::Kind::number && std::isfinite(perf.number)) {
            record.performance = perf.number;
        } else {
            warn(warnings, "run (" + instance + ", " + algorithm +
                               ") has no usable performance value; status set to unknown");
            record.performance = 0.0;
            record.status = RunStatus::unknown;
        }

        const auto key = std::make_pair(instance, algorithm);
        if (scenario.runs.count(key)) {
            warn(warnings, "duplicate run row for (" + instance + ", " + algorithm + ") ignored");
            continue;
        }
        scenario.runs.emplace(key, record);
        algorithm_set.insert(algorithm);
        instances_with_runs.insert(instance);
    }
    if (dropped_run_rows > 0) {
        warn(warnings, std::to_string(dropped_run_rows) +
                           " run rows reference instances absent from feature_values.arff; dropped");
    }

    scenario.algorithms.assign(algorithm_set.begin(), algorithm_set.end());

    size_t dropped_feature_rows = 0;
    std::vector<size_t> kept;
    for (size_t i = 0; i < feat_instances.size(); ++i) {
        if (instances_with_runs.count(feat_instances[i])) {
            kept.push_back(i);
        } else {
            ++dropped_feature_rows;
        }
    }
    if (dropped_feature_rows > 0) {
        warn(warnings, std::to_string(dropped_feature_rows) +
                           " feature rows have no runs in algorithm_runs.arff; dropped");
    }

    if (kept.empty())
        throw InconsistentScenario("no instances shared between the feature and run tables");
    if (scenario.algorithms.empty())
        throw InconsistentScenario("run table contains no usable algorithms");

    scenario.instances.reserve(kept.size());
    scenario.feature_values = Matrix(kept.size(), feature_cols.size());
    for (size_t out_row = 0; out_row < kept.size(); ++out_row) {
        const size_t in_row = kept[out_row];
        scenario.instances.push_back(feat_instances[in_row]);
        const std::vector<ArffCell>& row = *feat_rows[in_row];
        for (size_t j = 0; j < feature_cols.size(); ++j) {
            const ArffCell& cell = row[feature_cols[j]];
            scenario.feature_values.at(out_row, j) =
                cell.kind == ArffCell::Kind::number ? cell.number
                                                    : std::numeric_limits<double>::quiet_NaN();
        }
    }

    return scenario;
}

std::string scenario_digest(const AslibScenario& s) {
    std::ostringstream out;
    out << "scenario " << s.scenario_id << '\n';
    out << "measure " << s.performance_measure_name << " maximize " << (s.maximize ? 1 : 0)
        << " cutoff " << (s.cutoff_time ? format_double(*s.cutoff_time) : "none") << '\n';
    out << "features";
    for (const std::string& f : s.feature_names) out << ' ' << f;
    out << '\n';
    out << "algorithms";
    for (const std::string& a : s.algorithms) out << ' ' << a;
    out << '\n';
    for (size_t i = 0; i < s.instances.size(); ++i) {
        out << s.instances[i];
        for (size_t j = 0; j < s.feature_values.cols; ++j) {
            const double v = s.feature_values.at(i, j);
            out << ' ' << (std::isnan(v) ? "?" : format_double(v));
        }
        out << '\n';
    }
    for (const auto& [key, record] : s.runs) {
        out << key.first << '|' << key.second << ' ' << format_double(record.performance) << ' '
            << to_string(record.status) << '\n';
    }
    return out.str();
}

}  // namespace metaxfer
