#include "fvsim/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fvsim {

std::string format_double(double x) {
    char buf[64];
    // shortest representation that round-trips a double
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == x) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
        if (!out.good()) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

CsvBuilder::CsvBuilder(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw std::invalid_argument("csv: empty header");
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) body_ += ',';
        body_ += header[i];
    }
    body_ += '\n';
}

CsvBuilder& CsvBuilder::begin_row() {
    if (row_fields_ != 0 && row_fields_ != columns_)
        throw std::logic_error("csv: incomplete row");
    if (row_fields_ == columns_) body_ += '\n';
    row_fields_ = 0;
    return *this;
}

CsvBuilder& CsvBuilder::add(double v) { return add(format_double(v)); }

CsvBuilder& CsvBuilder::add(long v) { return add(std::to_string(v)); }

CsvBuilder& CsvBuilder::add(const std::string& v) {
    if (row_fields_ == columns_) throw std::logic_error("csv: too many fields in row");
    if (row_fields_) body_ += ',';
    body_ += v;
    ++row_fields_;
    return *this;
}

std::string CsvBuilder::str() const {
    std::string s = body_;
    if (row_fields_ == columns_) s += '\n';
    return s;
}

void CsvBuilder::write(const std::filesystem::path& path) const {
    write_file_atomic(path, str());
}

void write_cloud_csv(const std::filesystem::path& path, const EmpiricalMeasure& cloud) {
    std::vector<std::string> header;
    for (int i = 0; i < cloud.dim; ++i) header.push_back("x" + std::to_string(i));
    CsvBuilder csv(std::move(header));
    for (const auto& p : cloud.points) {
        csv.begin_row();
        for (int i = 0; i < cloud.dim; ++i) csv.add(p[i]);
    }
    csv.write(path);
}

}  // namespace fvsim
