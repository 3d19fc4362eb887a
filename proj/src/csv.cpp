#include "pricemfg/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace pricemfg {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), n_cols_(header.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != n_cols_) throw std::runtime_error("CsvWriter: column count mismatch");
    char buf[40];
    for (size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        out_ << (i ? "," : "") << buf;
    }
    out_ << "\n";
}

}  // namespace pricemfg
