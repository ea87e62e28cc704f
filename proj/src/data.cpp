#include "spectral_damp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

namespace spectral_damp {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
    if (buf.size() < offset + 4) throw DataError("truncated IDX header in " + path.string());
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                           static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(bytes, 4);
}

}  // namespace

void Dataset::validate() const {
    if (labels.empty()) throw DataError("dataset '" + name + "' is empty");
    if (static_cast<std::size_t>(inputs.rows()) != labels.size())
        throw DataError("dataset '" + name + "': input rows do not match label count");
    for (int y : labels)
        if (y < 0 || y >= num_classes)
            throw DataError("dataset '" + name + "': label " + std::to_string(y) + " out of range");
}

IdxImages read_idx_images(const std::filesystem::path& path) {
    const auto buf = read_file(path);
    const auto magic = read_be32(buf, 0, path);
    if (magic != kIdxImagesMagic)
        throw DataError("bad IDX image magic in " + path.string());
    IdxImages img;
    img.count = read_be32(buf, 4, path);
    img.rows = read_be32(buf, 8, path);
    img.cols = read_be32(buf, 12, path);
    const std::size_t expected = std::size_t{img.count} * img.rows * img.cols;
    if (buf.size() - 16 < expected)
        throw DataError("truncated IDX image payload in " + path.string() + ": expected " +
                        std::to_string(expected) + " bytes, found " + std::to_string(buf.size() - 16));
    img.pixels.assign(buf.begin() + 16, buf.begin() + 16 + static_cast<std::ptrdiff_t>(expected));
    return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
    const auto buf = read_file(path);
    const auto magic = read_be32(buf, 0, path);
    if (magic != kIdxLabelsMagic)
        throw DataError("bad IDX label magic in " + path.string());
    const std::size_t count = read_be32(buf, 4, path);
    if (buf.size() - 8 < count)
        throw DataError("truncated IDX label payload in " + path.string());
    return {buf.begin() + 8, buf.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    put_be32(out, kIdxImagesMagic);
    put_be32(out, images.count);
    put_be32(out, images.rows);
    put_be32(out, images.cols);
    out.write(reinterpret_cast<const char*>(images.pixels.data()),
              static_cast<std::streamsize>(images.pixels.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    put_be32(out, kIdxLabelsMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 int num_classes) {
    const auto img = read_idx_images(images_path);
    const auto lab = read_idx_labels(labels_path);
    if (lab.size() != img.count)
        throw DataError("count mismatch: " + std::to_string(img.count) + " images vs " +
                        std::to_string(lab.size()) + " labels");
    const std::size_t dim = std::size_t{img.rows} * img.cols;

    Dataset d;
    d.name = images_path.parent_path().filename().string();
    d.num_classes = num_classes;
    d.inputs.resize(img.count, static_cast<Eigen::Index>(dim));
    for (std::size_t n = 0; n < img.count; ++n)
        for (std::size_t j = 0; j < dim; ++j)
            d.inputs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) =
                img.pixels[n * dim + j] / 255.0;
    d.labels.assign(lab.begin(), lab.end());
    d.validate();
    return d;
}

IdxImages to_idx_images(const Dataset& d, std::uint32_t rows, std::uint32_t cols) {
    if (static_cast<std::size_t>(d.input_dim()) != std::size_t{rows} * cols)
        throw DimensionError("to_idx_images: input dimension does not match rows*cols");
    IdxImages img;
    img.count = static_cast<std::uint32_t>(d.size());
    img.rows = rows;
    img.cols = cols;
    img.pixels.resize(d.size() * rows * cols);
    for (Eigen::Index n = 0; n < d.inputs.rows(); ++n)
        for (Eigen::Index j = 0; j < d.inputs.cols(); ++j)
            img.pixels[static_cast<std::size_t>(n * d.inputs.cols() + j)] =
                static_cast<std::uint8_t>(std::lround(d.inputs(n, j) * 255.0));
    return img;
}

std::filesystem::path data_root() {
    if (const char* env = std::getenv("SPECTRAL_DAMP_DATA_DIR"); env && *env) return env;
    return "data";
}

Dataset load_named(const std::string& name, Split split, const std::filesystem::path& root) {
    if (name != "mnist" && name != "fashion")
        throw DataError("unknown dataset '" + name + "' (expected mnist or fashion)");
    const std::string prefix = split == Split::train ? "train" : "t10k";
    const auto dir = root / name;
    Dataset d = load_idx(dir / (prefix + "-images-idx3-ubyte"), dir / (prefix + "-labels-idx1-ubyte"));
    d.name = name + (split == Split::train ? "-train" : "-test");
    return d;
}

std::vector<std::size_t> class_counts(const Dataset& d) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(d.num_classes), 0);
    for (int y : d.labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

Dataset select_rows(const Dataset& d, std::span<const std::size_t> indices) {
    Dataset out;
    out.name = d.name;
    out.num_classes = d.num_classes;
    out.inputs.resize(static_cast<Eigen::Index>(indices.size()), d.inputs.cols());
    out.labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= d.size()) throw DimensionError("select_rows: index out of range");
        out.inputs.row(static_cast<Eigen::Index>(i)) = d.inputs.row(static_cast<Eigen::Index>(indices[i]));
        out.labels[i] = d.labels[indices[i]];
    }
    return out;
}

Dataset subsample(const Dataset& d, std::size_t n, std::uint64_t seed) {
    if (n > d.size())
        throw std::invalid_argument("subsample: requested " + std::to_string(n) + " rows from " +
                                    std::to_string(d.size()));
    if (n == d.size()) return d;
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    // Partial Fisher-Yates: the first n entries are a uniform n-subset.
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    Dataset out = select_rows(d, idx);

    const auto counts = class_counts(out);
    std::string hist;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        hist += (c ? " " : "") + std::to_string(counts[c]);
        if (counts[c] == 0) spdlog::warn("subsample of '{}': class {} absent", d.name, c);
    }
    spdlog::info("subsample of '{}': {} rows, class counts [{}]", d.name, n, hist);
    return out;
}

Dataset downsample(const Dataset& d, int side, int factor) {
    if (side * side != d.input_dim() || side % factor != 0)
        throw DimensionError("downsample: input is not a square image divisible by the factor");
    const int out_side = side / factor;
    Dataset out;
    out.name = d.name + "-pool" + std::to_string(factor);
    out.num_classes = d.num_classes;
    out.labels = d.labels;
    out.inputs = Matrix::Zero(d.inputs.rows(), out_side * out_side);
    const double scale = 1.0 / (factor * factor);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            out.inputs.col((r / factor) * out_side + c / factor) += scale * d.inputs.col(r * side + c);
    return out;
}

Dataset synthetic_classification(std::size_t n, int input_dim, int num_classes, double separation,
                                 std::uint64_t seed) {
    if (n == 0 || input_dim <= 0 || num_classes <= 0)
        throw std::invalid_argument("synthetic_classification: sizes must be positive");
    Rng rng(seed);
    const Matrix means = separation * gaussian_matrix(rng, num_classes, input_dim);
    Dataset d;
    d.name = "synthetic";
    d.num_classes = num_classes;
    d.inputs.resize(static_cast<Eigen::Index>(n), input_dim);
    d.labels.resize(n);
    std::uniform_int_distribution<int> cls(0, num_classes - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = cls(rng);
        d.labels[i] = y;
        d.inputs.row(static_cast<Eigen::Index>(i)) =
            means.row(y) + gaussian_vector(rng, input_dim).transpose();
    }
    return d;
}

QuadraticProblem synthetic_quadratic(std::span<const double> spectrum, std::uint64_t seed) {
    if (spectrum.empty()) throw std::invalid_argument("synthetic_quadratic: empty spectrum");
    for (double l : spectrum)
        if (!(l >= 0.0)) throw std::invalid_argument("synthetic_quadratic: spectrum entries must be >= 0");
    const auto p = static_cast<Eigen::Index>(spectrum.size());
    Rng rng(seed);
    const Matrix q = orthonormal_columns(gaussian_matrix(rng, p, p));
    const Vector lambda = Eigen::Map<const Vector>(spectrum.data(), p);
    const Matrix h = q * lambda.asDiagonal() * q.transpose();
    return {SymMatrix::from_upper(h), unit_gaussian(rng, p)};
}

BatchSampler::BatchSampler(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
                           bool with_replacement)
    : n_(dataset_size), batch_size_(batch_size), with_replacement_(with_replacement), rng_(seed) {
    if (batch_size == 0 || batch_size > dataset_size)
        throw std::invalid_argument("BatchSampler: need 0 < batch_size <= dataset size");
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!with_replacement_) reshuffle();
}

void BatchSampler::reshuffle() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::next() {
    std::vector<std::size_t> batch;
    if (with_replacement_) {
        std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
        batch.reserve(batch_size_);
        for (std::size_t i = 0; i < batch_size_; ++i) batch.push_back(pick(rng_));
        return batch;
    }
    if (cursor_ >= n_) reshuffle();
    const std::size_t end = std::min(n_, cursor_ + batch_size_);
    batch.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                 order_.begin() + static_cast<std::ptrdiff_t>(end));
    cursor_ = end;
    return batch;
}

std::vector<std::vector<std::size_t>> BatchSampler::epoch() {
    std::vector<std::vector<std::size_t>> out;
    if (!with_replacement_ && cursor_ != 0) reshuffle();
    for (std::size_t b = 0; b < batches_per_epoch(); ++b) out.push_back(next());
    return out;
}

}  // namespace spectral_damp
