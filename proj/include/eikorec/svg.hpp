#ifndef EIKOREC_SVG_HPP
#define EIKOREC_SVG_HPP

#include <string>
#include <vector>

#include "eikorec/vec2.hpp"

namespace eikorec {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Static line chart (no scripting, no timestamps); log_y uses a log10 axis.
void write_line_chart_svg(const std::string& path, const std::vector<SvgSeries>& series,
                          bool log_y, const std::string& x_label, const std::string& y_label,
                          const std::string& title);

// Unit-square plot of the midpoint paths: circles for the start positions,
// asterisk-style markers for the reference positions.
void write_midpoint_paths_svg(const std::string& path, const std::vector<std::vector<Vec2>>& paths,
                              const std::vector<Vec2>& start, const std::vector<Vec2>& reference);

} // namespace eikorec

#endif
