#ifndef AUDIT_CSV_HPP
#define AUDIT_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "audit/error.hpp"

namespace audit::csv {

inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    out.push_back('\n');
    return out;
}

inline std::vector<std::string> parse_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

// Quote-aware reader: newlines inside quoted fields belong to the field.
inline std::vector<std::vector<std::string>> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AuditError("io_error", "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(cur));
            cur.clear();
        } else if (c == '\n') {
            if (!row.empty() || !cur.empty()) {
                row.push_back(std::move(cur));
                cur.clear();
                rows.push_back(std::move(row));
                row.clear();
            }
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    if (!row.empty() || !cur.empty()) {
        row.push_back(std::move(cur));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string format_double(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

}  // namespace audit::csv

#endif
