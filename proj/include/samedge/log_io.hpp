#pragma once

#include "samedge/harness.hpp"

#include <string>
#include <vector>

namespace samedge {

/// Formats a float64 with 17 significant digits (lossless round-trip).
std::string format_double(double value);

/// CSV column names for a log with k eigenvalue columns:
/// step,wall_s,loss,grad_norm,uphill_grad_norm,lambda1..lambdaK,
/// gd_edge,sam_edge,align_iterate,align_uphill,flags
std::vector<std::string> log_columns(int k);

/// Writes records as CSV. Flags are |-joined tokens from
/// {diverged, zero_grad, spectral_unconverged}; the cell is empty when none
/// are set.
void write_log(const std::string& path, const std::vector<StepRecord>& records, int k);

struct ParsedLog {
    std::vector<std::string> columns;
    std::vector<StepRecord> records;
    int k = 0;
};

ParsedLog read_log(const std::string& path);

}  // namespace samedge
