#pragma once

// Dataset ingestion (IDX files), subsampling, batching and synthetic data.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectral_damp/linalg.hpp"
#include "spectral_damp/random.hpp"

namespace spectral_damp {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct Dataset {
    Matrix inputs;            // N x d_x, row per example
    std::vector<int> labels;  // N entries in [0, num_classes)
    int num_classes = 0;
    std::string name;

    std::size_t size() const { return labels.size(); }
    Eigen::Index input_dim() const { return inputs.cols(); }
    /// Throws DataError when the invariants do not hold.
    void validate() const;
};

/// Raw IDX payloads, exactly as stored on disk (pixel bytes unscaled).
struct IdxImages {
    std::uint32_t count = 0, rows = 0, cols = 0;
    std::vector<std::uint8_t> pixels;
};
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

/// Parses an images/labels pair; pixels are scaled to [0, 1].
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 int num_classes = 10);

/// Inverse of the pixel scaling in load_idx: round(x * 255).
IdxImages to_idx_images(const Dataset& d, std::uint32_t rows, std::uint32_t cols);

enum class Split { train, test };

/// Dataset root: $SPECTRAL_DAMP_DATA_DIR, falling back to ./data.
std::filesystem::path data_root();

/// Loads "mnist" or "fashion" from <root>/<name>/{train,t10k}-{images-idx3,labels-idx1}-ubyte.
Dataset load_named(const std::string& name, Split split,
                   const std::filesystem::path& root = data_root());

/// Class histogram of `d`, one entry per class.
std::vector<std::size_t> class_counts(const Dataset& d);

/// Deterministic uniform subset of n rows drawn without replacement.
/// Logs the class histogram and warns when a class is absent.
Dataset subsample(const Dataset& d, std::size_t n, std::uint64_t seed);

/// Rows of `d` selected by `indices`.
Dataset select_rows(const Dataset& d, std::span<const std::size_t> indices);

/// Average-pools square images by `factor` (e.g. 28x28 -> 7x7 with factor 4).
Dataset downsample(const Dataset& d, int side, int factor);

/// Gaussian class clusters: example of class c is mu_c + noise with
/// mu_c ~ N(0, separation^2 I).
Dataset synthetic_classification(std::size_t n, int input_dim, int num_classes, double separation,
                                 std::uint64_t seed);

/// Random quadratic H = Q^T diag(spectrum) Q and a unit-norm start point.
struct QuadraticProblem {
    SymMatrix hessian;
    ParamVector w0;
};
QuadraticProblem synthetic_quadratic(std::span<const double> spectrum, std::uint64_t seed);

/// Index sampler over a dataset of size N.
class BatchSampler {
public:
    BatchSampler(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
                 bool with_replacement = false);

    /// Next batch of indices. Without replacement, consecutive batches walk a
    /// fresh permutation per epoch; the last batch of an epoch may be short.
    std::vector<std::size_t> next();

    /// All batches of one epoch (without replacement: each index exactly once).
    std::vector<std::vector<std::size_t>> epoch();

    std::size_t batch_size() const { return batch_size_; }
    std::size_t dataset_size() const { return n_; }
    std::size_t batches_per_epoch() const { return (n_ + batch_size_ - 1) / batch_size_; }

private:
    void reshuffle();

    std::size_t n_, batch_size_;
    bool with_replacement_;
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

}  // namespace spectral_damp
