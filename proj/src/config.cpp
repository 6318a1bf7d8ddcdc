#include "samedge/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace samedge {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

long to_long(const std::string& key, const std::string& value) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + value + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::istringstream in(value);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        out.push_back(static_cast<int>(to_long(key, trim(cell))));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': expected a comma-separated list");
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.seed = to_u64(k, v);
         }},
        {"objective.kind",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "quadratic") c.objective.kind = ObjectiveKind::quadratic;
             else if (v == "mlp") c.objective.kind = ObjectiveKind::mlp;
             else throw ConfigError("key '" + k + "': expected quadratic or mlp, got '" + v + "'");
         }},
        {"objective.dim", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.objective.dim = static_cast<int>(to_long(k, v));
         }},
        {"objective.lambda_min", [](ExperimentConfig& c, const std::string& k,
                                    const std::string& v) { c.objective.lambda_min = to_double(k, v); }},
        {"objective.lambda_max", [](ExperimentConfig& c, const std::string& k,
                                    const std::string& v) { c.objective.lambda_max = to_double(k, v); }},
        {"objective.widths", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.objective.widths = to_int_list(k, v);
         }},
        {"objective.activation",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "relu") c.objective.activation = Activation::relu;
             else if (v == "tanh") c.objective.activation = Activation::tanh;
             else throw ConfigError("key '" + k + "': expected relu or tanh, got '" + v + "'");
         }},
        {"optim.eta", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.optim.eta = to_double(k, v);
         }},
        {"optim.rho", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.optim.rho = to_double(k, v);
         }},
        {"optim.max_steps", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.optim.max_steps = to_long(k, v);
         }},
        {"optim.divergence_threshold",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.optim.divergence_threshold = to_double(k, v);
         }},
        {"spectral.k", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.spectral.k = static_cast<int>(to_long(k, v));
         }},
        {"spectral.tol", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.spectral.tol = to_double(k, v);
         }},
        {"spectral.period", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.spectral.period = static_cast<int>(to_long(k, v));
         }},
        {"spectral.max_iters", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.spectral.max_iters = static_cast<int>(to_long(k, v));
         }},
        {"data.source",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "synthetic_gaussian_mixture") {
                 c.objective.data.source = DataSource::synthetic_gaussian_mixture;
             } else if (v == "idx_files") {
                 c.objective.data.source = DataSource::idx_files;
             } else {
                 throw ConfigError("key '" + k +
                                   "': expected synthetic_gaussian_mixture or idx_files");
             }
         }},
        {"data.n", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.objective.data.n = static_cast<int>(to_long(k, v));
         }},
        {"data.center", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.objective.data.center = to_bool(k, v);
         }},
        {"data.one_hot", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.objective.data.one_hot = to_bool(k, v);
         }},
        {"data.classes", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.objective.data.classes = static_cast<int>(to_long(k, v));
         }},
        {"data.input_dim", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.objective.data.input_dim = static_cast<int>(to_long(k, v));
         }},
        {"data.images", [](ExperimentConfig& c, const std::string&, const std::string& v) {
             c.objective.data.images = v;
         }},
        {"data.labels", [](ExperimentConfig& c, const std::string&, const std::string& v) {
             c.objective.data.labels = v;
         }},
        {"log.path", [](ExperimentConfig& c, const std::string&, const std::string& v) {
             c.log_path = v;
         }},
    };
    return table;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [key, setter] : setters()) keys.push_back(key);
    return keys;
}

void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(config, key, value);
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line, section;
    bool saw_eta = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "objective" && section != "optim" && section != "spectral" &&
                section != "data" && section != "log") {
                throw ConfigError("unknown config section '" + section + "'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string key = section.empty() ? name : section + "." + name;
        if (section.empty() && name != "seed") {
            throw ConfigError("unknown top-level config key '" + name + "'");
        }
        apply_override(config, key, value);
        if (key == "optim.eta") saw_eta = true;
    }
    if (!saw_eta) throw ConfigError("missing required key [optim] eta");
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

}  // namespace samedge
