#include "metaxfer/reference_table.hpp"

#include <algorithm>

namespace metaxfer {

namespace {

std::vector<ReferenceCell> build_table() {
    std::vector<ReferenceCell> t;
    const auto add = [&t](const std::string& target, const std::string& source, int freeze,
                          double am, double as, double lm, double ls) {
        t.push_back({target, source, freeze, am, as, lm, ls});
    };

    // CSP-2010
    add("CSP-2010", "", 0, 0.87, 0.01, 0.64, 0.15);
    add("CSP-2010", "CSP-MZN", 0, 0.88, 0.01, 0.56, 0.12);
    add("CSP-2010", "CSP-MZN", 1, 0.87, 0.01, 0.84, 0.08);
    add("CSP-2010", "CSP-MZN", 2, 0.87, 0.01, 1.01, 0.06);
    add("CSP-2010", "CSP-Minizinc-Obj", 0, 0.87, 0.01, 0.65, 0.15);
    add("CSP-2010", "CSP-Minizinc-Obj", 1, 0.86, 0.01, 0.90, 0.04);
    add("CSP-2010", "CSP-Minizinc-Obj", 2, 0.87, 0.01, 1.01, 0.09);
    add("CSP-2010", "CSP-Minizinc-Time", 0, 0.87, 0.01, 0.65, 0.17);
    add("CSP-2010", "CSP-Minizinc-Time", 1, 0.86, 0.01, 1.00, 0.06);
    add("CSP-2010", "CSP-Minizinc-Time", 2, 0.85, 0.01, 1.07, 0.09);

    // CSP-MZN
    add("CSP-MZN", "", 0, 0.71, 0.01, 1.23, 0.19);
    add("CSP-MZN", "CSP-2010", 0, 0.71, 0.01, 1.27, 0.22);
    add("CSP-MZN", "CSP-2010", 1, 0.70, 0.01, 1.71, 0.07);
    add("CSP-MZN", "CSP-2010", 2, 0.71, 0.01, 1.95, 0.07);
    add("CSP-MZN", "CSP-Minizinc-Obj", 0, 0.71, 0.01, 1.25, 0.21);
    add("CSP-MZN", "CSP-Minizinc-Obj", 1, 0.71, 0.01, 1.71, 0.08);
    add("CSP-MZN", "CSP-Minizinc-Obj", 2, 0.72, 0.01, 1.98, 0.08);
    add("CSP-MZN", "CSP-Minizinc-Time", 0, 0.71, 0.01, 1.18, 0.18);
    add("CSP-MZN", "CSP-Minizinc-Time", 1, 0.72, 0.01, 1.63, 0.11);
    add("CSP-MZN", "CSP-Minizinc-Time", 2, 0.71, 0.01, 1.92, 0.06);

    // CSP-Minizinc-Obj
    add("CSP-Minizinc-Obj", "", 0, 0.91, 0.02, 0.77, 0.06);
    add("CSP-Minizinc-Obj", "CSP-2010", 0, 0.87, 0.04, 1.01, 0.16);
    add("CSP-Minizinc-Obj", "CSP-2010", 1, 0.90, 0.00, 1.37, 0.11);
    add("CSP-Minizinc-Obj", "CSP-2010", 2, 0.90, 0.00, 1.55, 0.06);
    add("CSP-Minizinc-Obj", "CSP-MZN", 0, 0.66, 0.02, 3.26, 0.06);
    add("CSP-Minizinc-Obj", "CSP-MZN", 1, 0.70, 0.00, 3.30, 0.01);
    add("CSP-Minizinc-Obj", "CSP-MZN", 2, 0.70, 0.00, 3.27, 0.01);
    add("CSP-Minizinc-Obj", "CSP-Minizinc-Time", 0, 0.90, 0.00, 0.79, 0.11);
    add("CSP-Minizinc-Obj", "CSP-Minizinc-Time", 1, 0.90, 0.00, 1.01, 0.10);
    add("CSP-Minizinc-Obj", "CSP-Minizinc-Time", 2, 0.90, 0.00, 1.37, 0.15);

    // CSP-Minizinc-Time
    add("CSP-Minizinc-Time", "", 0, 0.65, 0.00, 4.11, 0.60);
    add("CSP-Minizinc-Time", "CSP-2010", 0, 0.65, 0.01, 3.78, 0.92);
    add("CSP-Minizinc-Time", "CSP-2010", 1, 0.65, 0.00, 5.24, 0.18);
    add("CSP-Minizinc-Time", "CSP-2010", 2, 0.65, 0.00, 5.59, 0.04);
    add("CSP-Minizinc-Time", "CSP-MZN", 0, 0.67, 0.03, 3.27, 0.30);
    add("CSP-Minizinc-Time", "CSP-MZN", 1, 0.70, 0.00, 3.81, 0.10);
    add("CSP-Minizinc-Time", "CSP-MZN", 2, 0.73, 0.02, 4.04, 0.03);
    add("CSP-Minizinc-Time", "CSP-Minizinc-Obj", 0, 0.70, 0.00, 3.87, 0.74);
    add("CSP-Minizinc-Time", "CSP-Minizinc-Obj", 1, 0.70, 0.00, 4.54, 0.07);
    add("CSP-Minizinc-Time", "CSP-Minizinc-Obj", 2, 0.70, 0.00, 4.60, 0.02);
    return t;
}

}  // namespace

const std::vector<ReferenceCell>& reference_results() {
    static const std::vector<ReferenceCell> table = build_table();
    return table;
}

std::optional<ReferenceCell> find_reference(const std::string& target, const std::string& source,
                                            int freeze) {
    for (const ReferenceCell& cell : reference_results()) {
        if (cell.target == target && cell.source == source &&
            (cell.source.empty() || cell.freeze == freeze)) {
            return cell;
        }
    }
    return std::nullopt;
}

const std::vector<std::string>& reference_targets() {
    static const std::vector<std::string> targets = {"CSP-2010", "CSP-MZN", "CSP-Minizinc-Obj",
                                                     "CSP-Minizinc-Time"};
    return targets;
}

std::vector<std::string> reference_sources(const std::string& target) {
    std::vector<std::string> sources;
    for (const ReferenceCell& cell : reference_results()) {
        if (cell.target == target && !cell.source.empty() &&
            std::find(sources.begin(), sources.end(), cell.source) == sources.end()) {
            sources.push_back(cell.source);
        }
    }
    return sources;
}

}  // namespace metaxfer
