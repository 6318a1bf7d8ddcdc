#include "samedge/log_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace samedge {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::vector<std::string> log_columns(int k) {
    std::vector<std::string> cols = {"step", "wall_s", "loss", "grad_norm", "uphill_grad_norm"};
    for (int i = 1; i <= k; ++i) cols.push_back("lambda" + std::to_string(i));
    for (const char* name : {"gd_edge", "sam_edge", "align_iterate", "align_uphill", "flags"}) {
        cols.emplace_back(name);
    }
    return cols;
}

namespace {

std::string flags_cell(const StepRecord& r) {
    std::string out;
    const auto append = [&out](const char* token) {
        if (!out.empty()) out += '|';
        out += token;
    };
    if (r.diverged) append("diverged");
    if (r.zero_grad) append("zero_grad");
    if (r.spectral_unconverged) append("spectral_unconverged");
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) cells.push_back(cell);
    if (!line.empty() && line.back() == sep) cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, const std::string& path) {
    try {
        return std::stod(cell);
    } catch (const std::exception&) {
        throw IoError("bad numeric cell '" + cell + "' in " + path);
    }
}

}  // namespace

void write_log(const std::string& path, const std::vector<StepRecord>& records, int k) {
    std::ofstream out(path, std::ios::binary);  // '\n' line endings on every platform
    if (!out) throw IoError("cannot open log for writing: " + path);
    const auto cols = log_columns(k);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const StepRecord& r : records) {
        out << r.step << ',' << format_double(r.wall_s) << ',' << format_double(r.loss) << ','
            << format_double(r.grad_norm) << ',' << format_double(r.uphill_grad_norm);
        for (int i = 0; i < k; ++i) {
            out << ',' << format_double(i < r.lambda_mags.size() ? r.lambda_mags[i] : 0.0);
        }
        out << ',' << format_double(r.gd_edge) << ',' << format_double(r.sam_edge) << ','
            << format_double(r.align_iterate) << ',' << format_double(r.align_uphill) << ','
            << flags_cell(r) << '\n';
    }
    if (!out) throw IoError("failed writing log: " + path);
}

ParsedLog read_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open log: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty log: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    ParsedLog log;
    log.columns = split(line, ',');
    const int k = static_cast<int>(log.columns.size()) - 10;
    if (k < 1 || log.columns != log_columns(k)) {
        throw IoError("unrecognized log header in " + path);
    }
    log.k = k;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != log.columns.size()) {
            throw IoError("row with " + std::to_string(cells.size()) + " cells in " + path);
        }
        StepRecord r;
        r.step = static_cast<long>(parse_double(cells[0], path));
        r.wall_s = parse_double(cells[1], path);
        r.loss = parse_double(cells[2], path);
        r.grad_norm = parse_double(cells[3], path);
        r.uphill_grad_norm = parse_double(cells[4], path);
        r.lambda_mags.resize(k);
        for (int i = 0; i < k; ++i) r.lambda_mags[i] = parse_double(cells[5 + i], path);
        r.gd_edge = parse_double(cells[5 + k], path);
        r.sam_edge = parse_double(cells[6 + k], path);
        r.align_iterate = parse_double(cells[7 + k], path);
        r.align_uphill = parse_double(cells[8 + k], path);
        for (const auto& token : split(cells[9 + k], '|')) {
            if (token == "diverged") r.diverged = true;
            else if (token == "zero_grad") r.zero_grad = true;
            else if (token == "spectral_unconverged") r.spectral_unconverged = true;
            else if (!token.empty()) throw IoError("unknown flag '" + token + "' in " + path);
        }
        log.records.push_back(std::move(r));
    }
    return log;
}

}  // namespace samedge
