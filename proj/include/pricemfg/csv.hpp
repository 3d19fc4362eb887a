#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace pricemfg {

// Deterministic CSV writer: fixed %.17g formatting so identical runs produce
// byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);

private:
    std::ofstream out_;
    size_t n_cols_;
};

}  // namespace pricemfg
