// Minimal RFC-4180-style CSV output: header row, '.' decimal separator and
// 17 significant digits so that doubles round-trip losslessly for
// regression baselines.
#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "qmb/errors.hpp"

namespace qmb {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw IoError("cannot open CSV file for writing: " + path);
        columns_ = header.size();
        write_strings(header);
    }

    void write_row(const std::vector<double>& values) {
        if (values.size() != columns_)
            throw IoError("CSV row width mismatch");
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += format_double(values[i]);
        }
        line += '\n';
        out_ << line;
        if (!out_) throw IoError("CSV write failed");
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("CSV close failed");
    }

private:
    void write_strings(const std::vector<std::string>& fields) {
        std::string line;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) line += ',';
            line += fields[i];
        }
        line += '\n';
        out_ << line;
    }

    std::ofstream out_;
    std::size_t columns_ = 0;
};

}  // namespace qmb
