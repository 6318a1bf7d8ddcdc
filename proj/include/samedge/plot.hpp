#pragma once

#include "samedge/log_io.hpp"

#include <string>
#include <vector>

namespace samedge {

enum class YScale { linear, log_scale };

/// A figure built from one or more run logs: x is the wall_s column, y is
/// each selected numeric series. Diverged tails are drawn dashed.
struct PlotSpec {
    std::vector<std::string> inputs;
    std::vector<std::string> series;
    YScale yscale = YScale::linear;
    std::string output;
};

/// Renders the SVG document. `run_names` prefixes legend labels when more
/// than one log is plotted. Throws ConfigError for unknown series or empty
/// logs.
std::string render_plot(const std::vector<ParsedLog>& logs,
                        const std::vector<std::string>& run_names, const PlotSpec& spec);

/// Loads spec.inputs, renders and writes spec.output.
void write_plot(const PlotSpec& spec);

}  // namespace samedge
