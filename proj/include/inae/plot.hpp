#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "inae/common.hpp"

namespace inae {

/// Static SVG scatter of rows 0 and 1 of H, one color per label.
inline void write_scatter_svg(std::ostream& out, const Matrix& H, const std::vector<int>& labels,
                              const std::string& title) {
    detail::require(H.rows() >= 2, "need >= 2 hidden dims to scatter");
    detail::require(static_cast<Index>(labels.size()) == H.cols(), "labels must cover every column");
    constexpr double size = 480.0;
    constexpr double margin = 32.0;
    static constexpr std::array<const char*, 10> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double x0 = H.row(0).minCoeff();
    const double x1 = H.row(0).maxCoeff();
    const double y0 = H.row(1).minCoeff();
    const double y1 = H.row(1).maxCoeff();
    const double sx = x1 > x0 ? (size - 2 * margin) / (x1 - x0) : 0.0;
    const double sy = y1 > y0 ? (size - 2 * margin) / (y1 - y0) : 0.0;

    char buf[160];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" viewBox=\"0 0 480 480\">\n";
    out << "<rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
    out << "<text x=\"240\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"472\" font-family=\"sans-serif\" font-size=\"10\">h0 [%.4g, %.4g]</text>\n",
                  margin, x0, x1);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%g\" font-family=\"sans-serif\" font-size=\"10\">h1 [%.4g, %.4g]</text>\n",
                  margin - 8, y0, y1);
    out << buf;
    for (Index i = 0; i < H.cols(); ++i) {
        const double px = sx > 0.0 ? margin + (H(0, i) - x0) * sx : size / 2;
        const double py = sy > 0.0 ? size - margin - (H(1, i) - y0) * sy : size / 2;
        const int l = labels[static_cast<std::size_t>(i)];
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\" fill-opacity=\"0.7\"/>\n",
                      px, py, palette[static_cast<std::size_t>(l) % palette.size()]);
        out << buf;
    }
    out << "</svg>\n";
}

} // namespace inae
