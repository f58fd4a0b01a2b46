#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fvsim/measures.hpp"

namespace fvsim {

/// Shortest round-trip decimal form of x ('.' decimal separator, locale-free).
std::string format_double(double x);

/// Write content to path atomically (temp file + rename), creating parent
/// directories as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Minimal RFC-4180 CSV builder: comma separated, LF line endings, '.'
/// decimal separator. Field values here are numbers and plain identifiers,
/// which never need quoting.
class CsvBuilder {
  public:
    explicit CsvBuilder(std::vector<std::string> header);

    CsvBuilder& begin_row();
    CsvBuilder& add(double v);
    CsvBuilder& add(long v);
    CsvBuilder& add(const std::string& v);

    std::string str() const;
    void write(const std::filesystem::path& path) const;

  private:
    size_t columns_;
    size_t row_fields_ = 0;
    std::string body_;
};

/// Survivor/particle cloud as CSV: header x0..x{d-1}, one row per point.
void write_cloud_csv(const std::filesystem::path& path, const EmpiricalMeasure& cloud);

}  // namespace fvsim
