#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspolicy::io {

/// Scientific notation with 17 significant digits.
inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::initializer_list<const char*> header) : os_(path) {
        if (!os_) throw std::runtime_error("cannot write " + path);
        bool first = true;
        for (const char* h : header) {
            os_ << (first ? "" : ",") << h;
            first = false;
        }
        os_ << '\n';
    }

    /// Cells are either numbers (formatted with fmt17) or pre-formatted text.
    struct Cell {
        Cell(double v) : text(fmt17(v)) {}
        Cell(int v) : text(std::to_string(v)) {}
        Cell(long v) : text(std::to_string(v)) {}
        Cell(unsigned long v) : text(std::to_string(v)) {}
        Cell(const char* s) : text(s) {}
        Cell(std::string s) : text(std::move(s)) {}
        std::string text;
    };

    void row(std::initializer_list<Cell> cells) {
        bool first = true;
        for (const auto& c : cells) {
            os_ << (first ? "" : ",") << c.text;
            first = false;
        }
        os_ << '\n';
    }

private:
    std::ofstream os_;
};

}  // namespace sspolicy::io
