#include "metaxfer/arff.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

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

bool parse_number(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string current;
    for (const char c : s) {
        if (c == ',') {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);
    return parts;
}

ArffAttribute parse_attribute_decl(const std::string& rest, size_t line_no) {
    // rest = NAME TYPE, name possibly quoted
    std::string name;
    size_t pos = 0;
    const std::string trimmed = trim(rest);
    if (trimmed.empty()) throw MalformedArff(line_no, "@attribute without a name");
    if (trimmed[0] == '\'' || trimmed[0] == '"') {
        const char quote = trimmed[0];
        const size_t close = trimmed.find(quote, 1);
        if (close == std::string::npos)
            throw MalformedArff(line_no, "unterminated quoted attribute name");
        name = trimmed.substr(1, close - 1);
        pos = close + 1;
    } else {
        const size_t ws = trimmed.find_first_of(" \t");
        if (ws == std::string::npos)
            throw MalformedArff(line_no, "@attribute missing a type");
        name = trimmed.substr(0, ws);
        pos = ws;
    }
    const std::string type_text = trim(trimmed.substr(pos));
    if (type_text.empty()) throw MalformedArff(line_no, "@attribute missing a type");

    ArffAttribute attr;
    attr.name = name;
    if (type_text.front() == '{') {
        if (type_text.back() != '}')
            throw MalformedArff(line_no, "unterminated nominal value set");
        attr.type = ArffType::nominal;
        const std::string inner = type_text.substr(1, type_text.size() - 2);
        for (const std::string& raw : split_commas(inner)) {
            const std::string value = strip_quotes(trim(raw));
            if (value.empty())
                throw MalformedArff(line_no, "empty nominal value in declaration");
            attr.nominal_values.push_back(value);
        }
        if (attr.nominal_values.empty())
            throw MalformedArff(line_no, "nominal attribute with no values");
        return attr;
    }
    const std::string t = lower(type_text);
    if (t == "numeric" || t == "real" || t == "integer") {
        attr.type = ArffType::numeric;
    } else if (t == "string") {
        attr.type = ArffType::string;
    } else {
        throw MalformedArff(line_no, "unknown attribute type '" + type_text + "'");
    }
    return attr;
}

ArffCell parse_cell(const std::string& raw, const ArffAttribute& attr, size_t line_no) {
    const std::string token = trim(raw);
    if (token == "?") return ArffCell::missing_cell();
    switch (attr.type) {
        case ArffType::numeric: {
            double v = 0.0;
            if (!parse_number(token, v))
                throw MalformedArff(line_no, "numeric parse failure for '" + token +
                                                 "' in attribute '" + attr.name + "'");
            return ArffCell::of(v);
        }
        case ArffType::string:
            return ArffCell::of(strip_quotes(token));
        case ArffType::nominal: {
            const std::string value = strip_quotes(token);
            if (std::find(attr.nominal_values.begin(), attr.nominal_values.end(), value) ==
                attr.nominal_values.end()) {
                throw MalformedArff(line_no, "value '" + value +
                                                 "' outside the declared set of attribute '" +
                                                 attr.name + "'");
            }
            return ArffCell::of(value);
        }
    }
    throw MalformedArff(line_no, "unreachable cell type");
}

bool needs_quoting(const std::string& s) {
    if (s.empty() || s == "?") return true;
    return s.find_first_of(",% \t'\"{}") != std::string::npos;
}

void write_token(std::ostream& out, const std::string& s) {
    // Commas and newlines inside tokens cannot survive the comma-split
    // reader of this subset; refuse rather than emit unreadable output.
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw std::invalid_argument("token contains a comma or newline: '" + s + "'");
    if (!needs_quoting(s)) {
        out << s;
    } else if (s.find('\'') == std::string::npos) {
        out << '\'' << s << '\'';
    } else {
        out << '"' << s << '"';
    }
}

}  // namespace

ArffRelation parse_arff(std::istream& in) {
    ArffRelation relation;
    bool seen_relation = false;
    bool in_data = false;
    std::string line;
    size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '%') continue;

        if (!in_data && stripped[0] == '@') {
            const size_t ws = stripped.find_first_of(" \t");
            const std::string keyword = lower(stripped.substr(0, ws));
            const std::string rest = ws == std::string::npos ? "" : stripped.substr(ws + 1);
            if (keyword == "@relation") {
                if (seen_relation) throw MalformedArff(line_no, "duplicate @relation");
                relation.name = strip_quotes(trim(rest));
                if (relation.name.empty())
                    throw MalformedArff(line_no, "@relation without a name");
                seen_relation = true;
            } else if (keyword == "@attribute") {
                if (!seen_relation)
                    throw MalformedArff(line_no, "@attribute before @relation");
                relation.attributes.push_back(parse_attribute_decl(rest, line_no));
            } else if (keyword == "@data") {
                if (!seen_relation) throw MalformedArff(line_no, "@data before @relation");
                if (relation.attributes.empty())
                    throw MalformedArff(line_no, "@data with no attributes declared");
                in_data = true;
            } else {
                throw MalformedArff(line_no, "unknown directive '" + keyword + "'");
            }
            continue;
        }

        if (!in_data)
            throw MalformedArff(line_no, "data before @data directive");
        if (stripped[0] == '@')
            throw MalformedArff(line_no, "unexpected directive in data section");
        if (stripped[0] == '{')
            throw MalformedArff(line_no, "sparse data rows are not supported");

        const std::vector<std::string> cells = split_commas(stripped);
        if (cells.size() != relation.attributes.size()) {
            throw MalformedArff(line_no, "row has " + std::to_string(cells.size()) +
                                             " values, expected " +
                                             std::to_string(relation.attributes.size()));
        }
        std::vector<ArffCell> row;
        row.reserve(cells.size());
        for (size_t i = 0; i < cells.size(); ++i)
            row.push_back(parse_cell(cells[i], relation.attributes[i], line_no));
        relation.rows.push_back(std::move(row));
    }

    if (!seen_relation) throw MalformedArff(line_no, "missing @relation");
    if (!in_data) throw MalformedArff(line_no, "missing @data");
    return relation;
}

ArffRelation parse_arff_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedArff(0, "cannot open file " + path);
    return parse_arff(in);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "0";
    return std::string(buf, ptr);
}

void write_arff(const ArffRelation& relation, std::ostream& out) {
    out << "@relation " << relation.name << "\n";
    for (const ArffAttribute& attr : relation.attributes) {
        out << "@attribute ";
        write_token(out, attr.name);
        switch (attr.type) {
            case ArffType::numeric:
                out << " NUMERIC";
                break;
            case ArffType::string:
                out << " STRING";
                break;
            case ArffType::nominal: {
                out << " {";
                for (size_t i = 0; i < attr.nominal_values.size(); ++i) {
                    if (i > 0) out << ',';
                    out << attr.nominal_values[i];
                }
                out << '}';
                break;
            }
        }
        out << '\n';
    }
    out << "@data\n";
    for (const std::vector<ArffCell>& row : relation.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out << ',';
            const ArffCell& cell = row[i];
            switch (cell.kind) {
                case ArffCell::Kind::missing:
                    out << '?';
                    break;
                case ArffCell::Kind::number:
                    out << format_double(cell.number);
                    break;
                case ArffCell::Kind::text:
                    write_token(out, cell.text);
                    break;
            }
        }
        out << '\n';
    }
}

std::string arff_to_string(const ArffRelation& relation) {
    std::ostringstream out;
    write_arff(relation, out);
    return out.str();
}

}  // namespace metaxfer
