#include "samedge/dataset.hpp"

#include "samedge/rng.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

namespace samedge {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr double kSyntheticNoiseStdev = 0.5;

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw IoError("truncated IDX file: " + path);
    }
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

Dataset load_idx(const DatasetSpec& spec) {
    std::ifstream images(spec.images, std::ios::binary);
    if (!images) throw IoError("cannot open IDX image file: " + spec.images);
    std::ifstream labels(spec.labels, std::ios::binary);
    if (!labels) throw IoError("cannot open IDX label file: " + spec.labels);

    if (read_be_u32(images, spec.images) != kImageMagic) {
        throw IoError("bad IDX magic in image file: " + spec.images);
    }
    const std::uint32_t image_count = read_be_u32(images, spec.images);
    const std::uint32_t rows = read_be_u32(images, spec.images);
    const std::uint32_t cols = read_be_u32(images, spec.images);

    if (read_be_u32(labels, spec.labels) != kLabelMagic) {
        throw IoError("bad IDX magic in label file: " + spec.labels);
    }
    const std::uint32_t label_count = read_be_u32(labels, spec.labels);
    if (label_count != image_count) {
        throw IoError("IDX image/label count mismatch: " + std::to_string(image_count) + " vs " +
                      std::to_string(label_count));
    }
    if (static_cast<std::uint32_t>(spec.n) > image_count) {
        throw IoError("IDX file holds " + std::to_string(image_count) + " examples, " +
                      std::to_string(spec.n) + " requested");
    }

    const Eigen::Index p = static_cast<Eigen::Index>(rows) * cols;
    Dataset data;
    data.inputs.resize(spec.n, p);
    data.class_labels.resize(spec.n);
    std::vector<unsigned char> pixel_row(static_cast<std::size_t>(p));
    for (int i = 0; i < spec.n; ++i) {
        if (!images.read(reinterpret_cast<char*>(pixel_row.data()), p)) {
            throw IoError("truncated IDX image data: " + spec.images);
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            data.inputs(i, j) = static_cast<double>(pixel_row[static_cast<std::size_t>(j)]) / 255.0;
        }
        char label = 0;
        if (!labels.read(&label, 1)) throw IoError("truncated IDX label data: " + spec.labels);
        const int value = static_cast<unsigned char>(label);
        if (value >= spec.classes) {
            throw IoError("IDX label " + std::to_string(value) + " out of range for " +
                          std::to_string(spec.classes) + " classes");
        }
        data.class_labels[i] = value;
    }
    return data;
}

Dataset synthesize_mixture(const DatasetSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    const int p = spec.input_dim;
    Dataset data;
    data.inputs.resize(spec.n, p);
    data.class_labels.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        const int label = i % spec.classes;
        data.class_labels[i] = label;
        const int axis = label / 2;  // classes pair up as +e_axis / -e_axis
        const double sign = label % 2 == 0 ? 1.0 : -1.0;
        for (int j = 0; j < p; ++j) {
            data.inputs(i, j) = kSyntheticNoiseStdev * rng.normal() + (j == axis ? sign : 0.0);
        }
    }
    return data;
}

}  // namespace

void validate(const DatasetSpec& spec) {
    if (spec.n < 1) throw ConfigError("data.n must be >= 1");
    if (spec.classes < 1) throw ConfigError("data.classes must be >= 1");
    if (spec.source == DataSource::synthetic_gaussian_mixture) {
        if (spec.input_dim < 1) throw ConfigError("data.input_dim must be >= 1");
        if (spec.classes > 2 * spec.input_dim) {
            throw ConfigError("data.classes must be <= 2 * input_dim for the synthetic mixture");
        }
    } else {
        if (spec.images.empty()) throw ConfigError("data.images is required for idx_files");
        if (spec.labels.empty()) throw ConfigError("data.labels is required for idx_files");
    }
}

Dataset load_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    validate(spec);
    Dataset data = spec.source == DataSource::idx_files ? load_idx(spec)
                                                        : synthesize_mixture(spec, seed);
    if (spec.center) {
        data.inputs.rowwise() -= data.inputs.colwise().mean();
    }
    if (spec.one_hot) {
        data.targets = Eigen::MatrixXd::Zero(spec.n, spec.classes);
        for (int i = 0; i < spec.n; ++i) data.targets(i, data.class_labels[i]) = 1.0;
    } else {
        data.targets.resize(spec.n, 1);
        for (int i = 0; i < spec.n; ++i) data.targets(i, 0) = data.class_labels[i];
    }
    return data;
}

}  // namespace samedge
