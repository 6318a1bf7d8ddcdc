#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "samedge/harness.hpp"
#include "samedge/log_io.hpp"
#include "samedge/plot.hpp"

#include <filesystem>
#include <fstream>
#include <vector>

using namespace samedge;

namespace {

// Minimal strict XML well-formedness check: balanced tags, quoted
// attributes, sane entities. Throws doctest failures via return value.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    const auto fail = [](const char*) { return false; };
    if (text.rfind("<?xml", 0) == 0) {
        i = text.find("?>");
        if (i == std::string::npos) return false;
        i += 2;
    }
    while (i < text.size()) {
        const char c = text[i];
        if (c == '<') {
            const std::size_t end = text.find('>', i);
            if (end == std::string::npos) return fail("unterminated tag");
            std::string tag = text.substr(i + 1, end - i - 1);
            if (tag.empty()) return fail("empty tag");
            bool closing = false, self_closing = false;
            if (tag.front() == '/') {
                closing = true;
                tag.erase(0, 1);
            } else if (tag.back() == '/') {
                self_closing = true;
                tag.pop_back();
            }
            // attribute quoting: quotes inside the tag must pair up, and no
            // '<' may appear
            int quotes = 0;
            for (char t : tag) {
                if (t == '"') ++quotes;
                if (t == '<') return fail("nested <");
            }
            if (quotes % 2 != 0) return fail("unbalanced quotes");
            const std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
            if (name.empty()) return fail("missing tag name");
            if (closing) {
                if (stack.empty() || stack.back() != name) return fail("mismatched close");
                stack.pop_back();
            } else if (!self_closing) {
                stack.push_back(name);
            }
            i = end + 1;
        } else if (c == '&') {
            const std::size_t semi = text.find(';', i);
            if (semi == std::string::npos || semi - i > 8) return fail("bad entity");
            const std::string entity = text.substr(i + 1, semi - i - 1);
            if (entity != "amp" && entity != "lt" && entity != "gt" && entity != "quot" &&
                entity != "apos" && (entity.empty() || entity[0] != '#')) {
                return fail("unknown entity");
            }
            i = semi + 1;
        } else {
            if (c == '>') return fail("stray >");
            ++i;
        }
    }
    return stack.empty();
}

std::vector<StepRecord> synthetic_records(int count, int k, bool diverge_tail) {
    std::vector<StepRecord> records;
    for (int i = 0; i < count; ++i) {
        StepRecord r;
        r.step = i * 10;
        r.wall_s = 0.5 * i;
        r.loss = 2.0 / (1.0 + i);
        r.grad_norm = 1.0 / (1.0 + i);
        r.uphill_grad_norm = r.grad_norm * 1.1;
        r.lambda_mags = Eigen::VectorXd::Zero(k);
        for (int j = 0; j < k; ++j) r.lambda_mags[j] = 10.0 - j - 0.1 * i;
        r.gd_edge = 20.0;
        r.sam_edge = 9.0 + 0.05 * i;
        r.align_iterate = 0.4;
        r.align_uphill = 0.6;
        r.diverged = diverge_tail && i >= count - 2;
        records.push_back(r);
    }
    return records;
}

std::string temp_log(const std::string& name, const std::vector<StepRecord>& records, int k) {
    const auto dir = std::filesystem::temp_directory_path() / "samedge_plot_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / name).string();
    write_log(path, records, k);
    return path;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("three series render as three data polylines with a legend") {
    const auto path = temp_log("basic.csv", synthetic_records(12, 3, false), 3);
    PlotSpec spec;
    spec.inputs = {path};
    spec.series = {"lambda1", "sam_edge", "gd_edge"};
    spec.yscale = YScale::log_scale;

    const ParsedLog log = read_log(path);
    const std::string svg = render_plot({log}, {"basic"}, spec);
    CHECK(xml_well_formed(svg));
    CHECK(count_occurrences(svg, "<polyline") == 3);
    CHECK(svg.find(">lambda1</text>") != std::string::npos);
    CHECK(svg.find(">sam_edge</text>") != std::string::npos);
    CHECK(svg.find(">gd_edge</text>") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") == std::string::npos);
}

TEST_CASE("diverged tails are dashed") {
    const auto path = temp_log("diverged.csv", synthetic_records(12, 2, true), 2);
    PlotSpec spec;
    spec.inputs = {path};
    spec.series = {"loss"};
    const std::string svg = render_plot({read_log(path)}, {"diverged"}, spec);
    CHECK(xml_well_formed(svg));
    CHECK(count_occurrences(svg, "<polyline") == 2);  // solid head + dashed tail
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
}

TEST_CASE("two logs overlay with run-name prefixes") {
    const auto a = temp_log("runa.csv", synthetic_records(10, 2, false), 2);
    const auto b = temp_log("runb.csv", synthetic_records(10, 2, false), 2);
    PlotSpec spec;
    spec.inputs = {a, b};
    spec.series = {"lambda1"};
    const std::string svg = render_plot({read_log(a), read_log(b)}, {"runa", "runb"}, spec);
    CHECK(xml_well_formed(svg));
    CHECK(svg.find(">runa:lambda1</text>") != std::string::npos);
    CHECK(svg.find(">runb:lambda1</text>") != std::string::npos);
    CHECK(count_occurrences(svg, "<polyline") == 2);
}

TEST_CASE("unknown series and empty logs are rejected") {
    const auto path = temp_log("errors.csv", synthetic_records(10, 2, false), 2);
    PlotSpec spec;
    spec.inputs = {path};
    spec.series = {"lambda9"};
    CHECK_THROWS_AS(render_plot({read_log(path)}, {"errors"}, spec), ConfigError);
    spec.series = {"flags"};
    CHECK_THROWS_AS(render_plot({read_log(path)}, {"errors"}, spec), ConfigError);

    const auto empty = temp_log("empty.csv", {}, 2);
    spec.series = {"lambda1"};
    spec.output = (std::filesystem::temp_directory_path() / "samedge_plot_test" /
                   "should_not_exist.svg")
                      .string();
    PlotSpec file_spec = spec;
    file_spec.inputs = {empty};
    CHECK_THROWS_AS(write_plot(file_spec), ConfigError);
    CHECK_FALSE(std::filesystem::exists(file_spec.output));
}

TEST_CASE("write_plot produces a parseable file end to end") {
    const auto path = temp_log("endtoend.csv", synthetic_records(15, 3, true), 3);
    PlotSpec spec;
    spec.inputs = {path};
    spec.series = {"lambda1", "lambda2", "sam_edge"};
    spec.yscale = YScale::linear;
    spec.output =
        (std::filesystem::temp_directory_path() / "samedge_plot_test" / "endtoend.svg").string();
    write_plot(spec);
    std::ifstream in(spec.output, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(xml_well_formed(buf.str()));
    CHECK(buf.str().find("</svg>") != std::string::npos);
}

TEST_CASE("labels with XML metacharacters are escaped") {
    const auto path = temp_log("escape<&>.csv", synthetic_records(10, 2, false), 2);
    PlotSpec spec;
    spec.inputs = {path};
    spec.series = {"lambda1"};
    const std::string svg = render_plot({read_log(path), read_log(path)},
                                        {"escape<&>", "other"}, spec);
    CHECK(xml_well_formed(svg));
    CHECK(svg.find("escape&lt;&amp;&gt;:lambda1") != std::string::npos);
}
