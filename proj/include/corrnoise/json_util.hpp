// Small helpers for writing artifact files. Floats are always emitted
// with 17 significant digits (%.17g) so parsed values are bit-identical
// to the originals.
#pragma once

#include <Eigen/Core>
#include <cstdio>
#include <string>

namespace corrnoise {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Row-major JSON array of all matrix entries.
inline std::string matrix_to_json_array(const Eigen::MatrixXd& m) {
    std::string out = "[";
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            if (r + c > 0) out += ",";
            out += fmt_g17(m(r, c));
        }
    out += "]";
    return out;
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace corrnoise
