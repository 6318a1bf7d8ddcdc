#include "samedge/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace samedge {

namespace {

constexpr double kWidth = 960, kHeight = 540;
constexpr double kLeft = 70, kRight = 24, kTop = 24, kBottom = 48;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

double column_value(const StepRecord& r, const std::string& name, int k) {
    if (name == "step") return static_cast<double>(r.step);
    if (name == "wall_s") return r.wall_s;
    if (name == "loss") return r.loss;
    if (name == "grad_norm") return r.grad_norm;
    if (name == "uphill_grad_norm") return r.uphill_grad_norm;
    if (name == "gd_edge") return r.gd_edge;
    if (name == "sam_edge") return r.sam_edge;
    if (name == "align_iterate") return r.align_iterate;
    if (name == "align_uphill") return r.align_uphill;
    if (name.rfind("lambda", 0) == 0) {
        const int idx = std::atoi(name.c_str() + 6);
        if (idx >= 1 && idx <= k && idx <= r.lambda_mags.size()) return r.lambda_mags[idx - 1];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (wall_s, value)
    std::size_t dash_from;  // index where the diverged tail starts; npos if none
    const char* color;
};

}  // namespace

std::string render_plot(const std::vector<ParsedLog>& logs,
                        const std::vector<std::string>& run_names, const PlotSpec& spec) {
    if (logs.empty()) throw ConfigError("plot: no input logs");
    if (spec.series.empty()) throw ConfigError("plot: no series selected");
    const bool log_y = spec.yscale == YScale::log_scale;

    for (std::size_t i = 0; i < logs.size(); ++i) {
        if (logs[i].records.empty()) {
            throw ConfigError("plot: log '" + run_names[i] + "' has no records");
        }
        for (const std::string& name : spec.series) {
            if (name == "flags" ||
                std::find(logs[i].columns.begin(), logs[i].columns.end(), name) ==
                    logs[i].columns.end()) {
                throw ConfigError("plot: unknown series '" + name + "' in log '" + run_names[i] +
                                  "'");
            }
        }
    }

    std::vector<Series> all;
    int color_idx = 0;
    for (std::size_t li = 0; li < logs.size(); ++li) {
        const ParsedLog& log = logs[li];
        std::size_t diverged_at = std::string::npos;
        for (std::size_t ri = 0; ri < log.records.size(); ++ri) {
            if (log.records[ri].diverged) {
                diverged_at = ri;
                break;
            }
        }
        for (const std::string& name : spec.series) {
            Series s;
            s.label = logs.size() > 1 ? run_names[li] + ":" + name : name;
            s.color = kPalette[color_idx++ % (sizeof kPalette / sizeof kPalette[0])];
            s.dash_from = std::string::npos;
            for (std::size_t ri = 0; ri < log.records.size(); ++ri) {
                const double y = column_value(log.records[ri], name, log.k);
                if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
                if (ri >= diverged_at && s.dash_from == std::string::npos) {
                    s.dash_from = s.points.empty() ? 0 : s.points.size() - 1;
                }
                s.points.emplace_back(log.records[ri].wall_s, y);
            }
            all.push_back(std::move(s));
        }
    }

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Series& s : all) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            const double yv = log_y ? std::log10(y) : y;
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
    }
    if (!(xmin <= xmax)) throw ConfigError("plot: selected series contain no drawable points");
    if (xmin == xmax) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymin == ymax) {
        ymin -= 1.0;
        ymax += 1.0;
    }

    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    const auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    const auto sy = [&](double y) {
        const double v = log_y ? std::log10(y) : y;
        return kTop + (1.0 - (v - ymin) / (ymax - ymin)) * plot_h;
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
        << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    // axes, gridlines and tick labels
    svg << "<g font-family=\"monospace\" font-size=\"12\" fill=\"#333333\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = xmin + (xmax - xmin) * i / 5.0;
        svg << "<line x1=\"" << num(sx(x)) << "\" y1=\"" << kTop << "\" x2=\"" << num(sx(x))
            << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << num(sx(x)) << "\" y=\"" << kHeight - kBottom + 18
            << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
    }
    std::vector<double> yticks;
    if (log_y) {
        const int lo = static_cast<int>(std::floor(ymin)), hi = static_cast<int>(std::ceil(ymax));
        const int stride = std::max(1, (hi - lo) / 8);
        for (int e = lo; e <= hi; e += stride) yticks.push_back(std::pow(10.0, e));
    } else {
        for (int i = 0; i <= 5; ++i) yticks.push_back(ymin + (ymax - ymin) * i / 5.0);
    }
    for (const double yt : yticks) {
        const double py = sy(yt);
        if (py < kTop - 1 || py > kHeight - kBottom + 1) continue;
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(py) << "\" x2=\"" << kWidth - kRight
            << "\" y2=\"" << num(py) << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py + 4)
            << "\" text-anchor=\"end\">" << num(yt) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\">wall_s</text>\n";
    svg << "</g>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    const auto emit_polyline = [&](const std::vector<std::pair<double, double>>& pts,
                                   std::size_t from, std::size_t to, const char* color,
                                   bool dashed) {
        if (to - from < 2) return;
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (dashed) svg << " stroke-dasharray=\"6 4\"";
        svg << " points=\"";
        for (std::size_t i = from; i < to; ++i) {
            svg << num(sx(pts[i].first)) << ',' << num(sy(pts[i].second)) << ' ';
        }
        svg << "\"/>\n";
    };

    for (const Series& s : all) {
        if (s.points.empty()) continue;
        const std::size_t cut =
            s.dash_from == std::string::npos ? s.points.size() : s.dash_from + 1;
        emit_polyline(s.points, 0, cut, s.color, false);
        if (s.dash_from != std::string::npos) {
            emit_polyline(s.points, s.dash_from, s.points.size(), s.color, true);
        }
    }

    // legend
    double ly = kTop + 14;
    for (const Series& s : all) {
        const double lx = kWidth - kRight - 220;
        svg << "<line x1=\"" << lx << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << lx + 26
            << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << lx + 32 << "\" y=\"" << num(ly)
            << "\" font-family=\"monospace\" font-size=\"12\" fill=\"#333333\">"
            << xml_escape(s.label) << "</text>\n";
        ly += 16;
    }

    svg << "</svg>\n";
    return svg.str();
}

void write_plot(const PlotSpec& spec) {
    if (spec.inputs.empty()) throw ConfigError("plot: no input logs given");
    if (spec.output.empty()) throw ConfigError("plot: no output path given");
    std::vector<ParsedLog> logs;
    std::vector<std::string> names;
    for (const std::string& path : spec.inputs) {
        logs.push_back(read_log(path));
        names.push_back(std::filesystem::path(path).stem().string());
    }
    const std::string svg = render_plot(logs, names, spec);
    std::ofstream out(spec.output, std::ios::binary);
    if (!out) throw IoError("cannot open plot output: " + spec.output);
    out << svg;
    if (!out) throw IoError("failed writing plot: " + spec.output);
}

}  // namespace samedge
