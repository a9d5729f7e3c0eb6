#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace scia11y::csv {

// RFC 4180 style reader: quoted fields, embedded commas, quotes and newlines.
inline std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_started = false;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            row_started = true;
            ++i;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            row_started = true;
            ++i;
            break;
        case '\r':
            ++i;
            break;
        case '\n':
            if (row_started || !field.empty() || !row.empty()) {
                row.push_back(std::move(field));
                field.clear();
                rows.push_back(std::move(row));
                row.clear();
            }
            row_started = false;
            ++i;
            break;
        default:
            field.push_back(c);
            row_started = true;
            ++i;
            break;
        }
    }
    if (row_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string escape_field(std::string_view field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out << ',';
        out << escape_field(row[i]);
    }
    out << '\n';
}

} // namespace scia11y::csv
