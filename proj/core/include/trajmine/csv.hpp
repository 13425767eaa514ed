#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace trajmine {

struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based file line of each row, for error reporting.
    std::vector<std::int64_t> lines;
};

/// Reads a whole CSV file. Minimal RFC-4180: double-quoted fields with ""
/// escapes; no embedded newlines. Throws std::runtime_error on I/O failure.
CsvTable read_csv(const std::string& path);

/// Throws if the table header differs from `expected` (exact order).
void require_columns(const CsvTable& table, const std::vector<std::string>& expected);

/// Round-trip formatting for doubles persisted in stage artifacts ("%.17g").
std::string fmt_double(double v);
/// Fixed-decimal formatting for report values.
std::string fmt_fixed(double v, int decimals);

/// Whole-string double parse. Unlike std::stod this accepts subnormal values
/// (tiny exact p-values round-trip through artifacts); only true overflow and
/// trailing garbage are rejected.
std::optional<double> parse_double_text(const std::string& s);

/// CSV writer with atomic commit: rows go to `<path>.tmp`; commit() renames
/// to the final path, abandon() (or destruction without commit) renames to
/// `<path>.partial` so aborted stages leave inspectable debris.
class CsvWriter {
  public:
    explicit CsvWriter(std::string path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& fields);
    std::int64_t rows_written() const { return rows_; }
    void commit();
    void abandon();

  private:
    std::string path_;
    std::string tmp_path_;
    std::ofstream out_;
    std::int64_t rows_ = 0;
    bool done_ = false;
};

std::string csv_escape(const std::string& field);

}  // namespace trajmine
