#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace metaxfer {

inline constexpr const char* kDefaultUrlTemplate =
    "https://raw.githubusercontent.com/coseal/aslib_data/master/{scenario}/{file}";

inline const std::vector<std::string> kRequiredScenarioFiles = {
    "description.txt", "feature_values.arff", "algorithm_runs.arff"};

struct FetchConfig {
    std::filesystem::path cache_dir;
    std::string url_template = kDefaultUrlTemplate;
    int timeout_seconds = 30;
};

// Paper-facing scenario names to upstream directory names
// (e.g. CSP-MZN -> CSP-MZN-2013). Unknown names map to themselves.
std::string resolve_scenario_alias(const std::string& name);

// METAXFER_CACHE env var when set, else ~/.cache/metaxfer (or ./metaxfer_cache
// when no home directory is available).
std::filesystem::path default_cache_dir();

bool scenario_cached(const std::filesystem::path& scenario_dir);

// Ensures cache_dir/<name> holds the three required scenario files,
// downloading missing ones from the configured URL template. Idempotent on a
// warm cache (no network touched). Writes a manifest.json recording the
// resolved URLs and fetch date next to downloaded files. Throws NetworkError
// on transport failure and IncompleteScenario when the server lacks a file.
std::filesystem::path fetch_scenario(const std::string& name, const FetchConfig& config);

// Expands {scenario}/{file} placeholders; a template without placeholders is
// treated as a base URL.
std::string expand_url_template(const std::string& url_template, const std::string& scenario,
                                const std::string& file);

}  // namespace metaxfer
