#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metaxfer {

// Subset of ARFF used by ASlib tables: '%' comments, @relation, @attribute
// with NUMERIC/REAL/INTEGER/STRING or {nominal} types, @data with
// comma-separated rows, '?' for missing. Keywords are case-insensitive.

enum class ArffType { numeric, string, nominal };

struct ArffAttribute {
    std::string name;
    ArffType type = ArffType::numeric;
    std::vector<std::string> nominal_values;  // only for nominal

    bool operator==(const ArffAttribute&) const = default;
};

struct ArffCell {
    enum class Kind { missing, number, text };
    Kind kind = Kind::missing;
    double number = 0.0;
    std::string text;

    static ArffCell missing_cell() { return {}; }
    static ArffCell of(double v) { return {Kind::number, v, {}}; }
    static ArffCell of(std::string s) { return {Kind::text, 0.0, std::move(s)}; }

    bool is_missing() const { return kind == Kind::missing; }
    bool operator==(const ArffCell&) const = default;
};

struct ArffRelation {
    std::string name;
    std::vector<ArffAttribute> attributes;
    std::vector<std::vector<ArffCell>> rows;

    bool operator==(const ArffRelation&) const = default;
};

// Throws MalformedArff (with line number) on structural problems: arity
// mismatch, unknown attribute type, nominal value outside the declared set,
// numeric parse failure, missing @relation/@data.
ArffRelation parse_arff(std::istream& in);
ArffRelation parse_arff_file(const std::string& path);

// Canonical emission; parse_arff(write_arff(r)) is structurally equal to r.
void write_arff(const ArffRelation& relation, std::ostream& out);
std::string arff_to_string(const ArffRelation& relation);

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

}  // namespace metaxfer
