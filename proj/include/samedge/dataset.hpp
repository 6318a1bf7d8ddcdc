#pragma once

#include "samedge/types.hpp"

#include <cstdint>
#include <string>

namespace samedge {

enum class DataSource { synthetic_gaussian_mixture, idx_files };

/// Where training data comes from and how it is prepared. For idx_files the
/// first n examples of the referenced IDX image/label pair are used; inputs
/// are scaled by 1/255 before optional centering.
struct DatasetSpec {
    DataSource source = DataSource::synthetic_gaussian_mixture;
    int n = 1000;
    bool center = true;
    bool one_hot = true;
    int classes = 4;
    int input_dim = 16;          // synthetic only; idx dimension comes from the file
    std::string images;          // idx_files only
    std::string labels;          // idx_files only
};

struct Dataset {
    Eigen::MatrixXd inputs;       // n x p
    Eigen::MatrixXd targets;      // n x q (one-hot) or n x 1 (raw label value)
    Eigen::VectorXi class_labels; // n
};

void validate(const DatasetSpec& spec);

/// Loads or synthesizes the dataset. The synthetic Gaussian mixture pairs
/// classes on coordinate axes (class 2a at +e_a, class 2a+1 at -e_a) with
/// isotropic noise of standard deviation 0.5; labels cycle through the
/// classes so they are balanced. Deterministic for a fixed seed.
Dataset load_dataset(const DatasetSpec& spec, std::uint64_t seed);

}  // namespace samedge
