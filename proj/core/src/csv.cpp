#include "trajmine/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace trajmine {

namespace {

std::vector<std::string> split_row(const std::string& line, const std::string& path,
                                   std::int64_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    CsvTable table;
    table.path = path;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            table.header = split_row(line, path, lineno);
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_row(line, path, lineno);
        if (fields.size() != table.header.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(table.header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.lines.push_back(lineno);
    }
    if (table.header.empty()) throw std::runtime_error(path + ": missing header row");
    return table;
}

void require_columns(const CsvTable& table, const std::vector<std::string>& expected) {
    if (table.header != expected) {
        std::ostringstream msg;
        msg << table.path << ": unexpected header, want ";
        for (std::size_t i = 0; i < expected.size(); ++i)
            msg << (i ? "," : "") << expected[i];
        msg << " got ";
        for (std::size_t i = 0; i < table.header.size(); ++i)
            msg << (i ? "," : "") << table.header[i];
        throw std::runtime_error(msg.str());
    }
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::optional<double> parse_double_text(const std::string& s) {
    if (s.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    if (errno == ERANGE && (v == HUGE_VAL || v == -HUGE_VAL)) return std::nullopt;
    return v;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(std::string path)
    : path_(std::move(path)), tmp_path_(path_ + ".tmp"), out_(tmp_path_, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open file for writing: " + tmp_path_);
}

CsvWriter::~CsvWriter() {
    if (!done_) abandon();
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_escape(fields[i]);
    }
    out_ << '\n';
    ++rows_;
}

void CsvWriter::commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + tmp_path_);
    out_.close();
    std::filesystem::rename(tmp_path_, path_);
    done_ = true;
}

void CsvWriter::abandon() {
    if (done_) return;
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_path_, path_ + ".partial", ec);
    done_ = true;
}

}  // namespace trajmine
