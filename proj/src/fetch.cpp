#include "metaxfer/fetch.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>

#include "httplib.h"
#include "json.hpp"
#include "metaxfer/errors.hpp"

namespace metaxfer {

namespace fs = std::filesystem;

std::string resolve_scenario_alias(const std::string& name) {
    static const std::map<std::string, std::string> aliases = {
        {"CSP-MZN", "CSP-MZN-2013"},
        {"CSP-Minizinc-Obj", "CSP-Minizinc-Obj-2016"},
        {"CSP-Minizinc-Time", "CSP-Minizinc-Time-2016"},
    };
    const auto it = aliases.find(name);
    return it == aliases.end() ? name : it->second;
}

fs::path default_cache_dir() {
    if (const char* env = std::getenv("METAXFER_CACHE"); env && *env) return fs::path(env);
    if (const char* home = std::getenv("HOME"); home && *home)
        return fs::path(home) / ".cache" / "metaxfer";
    return fs::path("metaxfer_cache");
}

bool scenario_cached(const fs::path& scenario_dir) {
    for (const std::string& file : kRequiredScenarioFiles) {
        if (!fs::exists(scenario_dir / file)) return false;
    }
    return true;
}

std::string expand_url_template(const std::string& url_template, const std::string& scenario,
                                const std::string& file) {
    std::string url = url_template;
    const auto replace_all = [&url](const std::string& token, const std::string& value) {
        bool replaced = false;
        size_t pos = 0;
        while ((pos = url.find(token, pos)) != std::string::npos) {
            url.replace(pos, token.size(), value);
            pos += value.size();
            replaced = true;
        }
        return replaced;
    };
    const bool had_scenario = replace_all("{scenario}", scenario);
    const bool had_file = replace_all("{file}", file);
    if (!had_scenario && !had_file) {
        if (!url.empty() && url.back() == '/') url.pop_back();
        url += "/" + scenario + "/" + file;
    }
    return url;
}

namespace {

struct SplitUrl {
    std::string scheme_host;  // e.g. "https://host:443"
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw NetworkError("unsupported URL: " + url);
    const size_t host_start = scheme_end + 3;
    const size_t path_start = url.find('/', host_start);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.scheme_host = url;
        out.path = "/";
    } else {
        out.scheme_host = url.substr(0, path_start);
        out.path = url.substr(path_start);
    }
    return out;
}

std::string http_get(const std::string& url, int timeout_seconds) {
    const SplitUrl parts = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (parts.scheme_host.rfind("https://", 0) == 0)
        throw NetworkError("built without TLS support; cannot fetch " + url);
#endif
    httplib::Client client(parts.scheme_host);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_follow_location(true);
    const httplib::Result res = client.Get(parts.path);
    if (!res) throw NetworkError("request failed for " + url + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw IncompleteScenario("server returned HTTP " + std::to_string(res->status) + " for " + url);
    }
    return res->body;
}

std::string utc_date_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

fs::path fetch_scenario(const std::string& name, const FetchConfig& config) {
    const std::string resolved = resolve_scenario_alias(name);
    const fs::path dir = config.cache_dir / name;
    if (scenario_cached(dir)) return dir;

    fs::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["scenario"] = name;
    manifest["resolved_name"] = resolved;
    manifest["url_template"] = config.url_template;
    manifest["fetched_at"] = utc_date_now();
    manifest["files"] = nlohmann::ordered_json::object();

    for (const std::string& file : kRequiredScenarioFiles) {
        const fs::path target = dir / file;
        if (fs::exists(target)) continue;
        const std::string url = expand_url_template(config.url_template, resolved, file);
        const std::string body = http_get(url, config.timeout_seconds);
        const fs::path tmp = target.string() + ".part";
        {
            std::ofstream out(tmp, std::ios::binary);
            out.write(body.data(), static_cast<std::streamsize>(body.size()));
            if (!out) throw IncompleteScenario("cannot write " + target.string());
        }
        fs::rename(tmp, target);
        manifest["files"][file] = {{"url", url}, {"bytes", body.size()}};
    }

    if (!scenario_cached(dir))
        throw IncompleteScenario("scenario " + name + " is still missing required files");

    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
    return dir;
}

}  // namespace metaxfer
