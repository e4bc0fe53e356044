#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "advsec/error.hpp"
#include "advsec/tensor.hpp"

namespace advsec {

/// Labeled samples: X is (n_samples, n_features), labels live in [0, n_classes).
struct Dataset {
    Tensor X;
    std::vector<int> y;
    int n_classes = 0;
    std::optional<std::vector<std::pair<double, double>>> feature_bounds;

    std::size_t n_samples() const { return X.ndim() == 2 ? X.shape()[0] : 0; }
    std::size_t n_features() const { return X.ndim() == 2 ? X.shape()[1] : 0; }
};

/// Validating constructor for Dataset.
inline Dataset make_dataset(Tensor X, std::vector<int> y, int n_classes,
                            std::optional<std::vector<std::pair<double, double>>> bounds = {}) {
    if (X.ndim() != 2) throw ShapeError("dataset X must be a matrix");
    if (X.shape()[0] != y.size())
        throw ShapeError("X row count " + std::to_string(X.shape()[0]) +
                         " != label count " + std::to_string(y.size()));
    if (n_classes < 1) throw InvalidArgumentError("n_classes must be positive");
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] < 0 || y[i] >= n_classes)
            throw InvalidArgumentError("label " + std::to_string(y[i]) + " at row " +
                                       std::to_string(i) + " outside [0, n_classes)");
    if (bounds) {
        if (bounds->size() != X.shape()[1])
            throw ShapeError("feature_bounds length != n_features");
        for (const auto& [lo, hi] : *bounds)
            if (!(lo <= hi)) throw InvalidArgumentError("feature bound with lo > hi");
        for (std::size_t i = 0; i < X.shape()[0]; ++i)
            for (std::size_t j = 0; j < X.shape()[1]; ++j) {
                const double v = X.at(i, j);
                if (v < (*bounds)[j].first || v > (*bounds)[j].second)
                    throw InvalidArgumentError("sample " + std::to_string(i) +
                                               " violates feature_bounds at column " +
                                               std::to_string(j));
            }
    }
    Dataset ds;
    ds.X = std::move(X);
    ds.y = std::move(y);
    ds.n_classes = n_classes;
    ds.feature_bounds = std::move(bounds);
    return ds;
}

/// Isotropic Gaussian blobs around the given centers; label = center index,
/// centers assigned round-robin. Pure function of its arguments.
inline Dataset make_blobs(std::size_t n, const std::vector<Tensor>& centers, double spread,
                          std::uint64_t seed) {
    if (n == 0) throw EmptyDatasetError("make_blobs: n must be positive");
    if (centers.empty()) throw InvalidArgumentError("make_blobs: centers must be non-empty");
    if (!(spread > 0.0)) throw InvalidArgumentError("make_blobs: spread must be positive");
    const std::size_t d = centers.front().size();
    for (const Tensor& c : centers)
        if (c.ndim() != 1 || c.size() != d)
            throw ShapeError("make_blobs: centers must share one dimension");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> values(n * d);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % centers.size();
        labels[i] = static_cast<int>(c);
        const std::vector<double> center = centers[c].to_dense_vector();
        for (std::size_t j = 0; j < d; ++j)
            values[i * d + j] = center[j] + spread * gauss(rng);
    }
    return make_dataset(Tensor::dense({n, d}, std::move(values)), std::move(labels),
                        static_cast<int>(centers.size()));
}

/// Two interleaving half-circles in 2-D: upper arc is the unit circle around
/// the origin, lower arc the reflected unit circle through (1, 0.5), its
/// lowest point at (1, -0.5). Gaussian noise added per coordinate.
inline Dataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
    if (n == 0) throw EmptyDatasetError("make_moons: n must be positive");
    if (noise < 0.0) throw InvalidArgumentError("make_moons: noise must be non-negative");
    const std::size_t n_out = n / 2;
    const std::size_t n_in = n - n_out;
    constexpr double pi = 3.14159265358979323846;

    std::vector<double> values(n * 2);
    std::vector<int> labels(n);
    auto arc_t = [pi](std::size_t k, std::size_t count) {
        return count > 1 ? pi * static_cast<double>(k) / static_cast<double>(count - 1) : 0.0;
    };
    for (std::size_t k = 0; k < n_out; ++k) {
        const double t = arc_t(k, n_out);
        values[k * 2] = std::cos(t);
        values[k * 2 + 1] = std::sin(t);
        labels[k] = 0;
    }
    for (std::size_t k = 0; k < n_in; ++k) {
        const double t = arc_t(k, n_in);
        const std::size_t i = n_out + k;
        values[i * 2] = 1.0 - std::cos(t);
        values[i * 2 + 1] = 0.5 - std::sin(t);
        labels[i] = 1;
    }
    if (noise > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, noise);
        for (double& v : values) v += gauss(rng);
    }
    return make_dataset(Tensor::dense({n, 2}, std::move(values)), std::move(labels), 2);
}

// Synthetic 16x16 "license plate" images: both classes share a noisy
// background, the plate region carries the class signal (vertical stripes
// for class 0, horizontal for class 1). Pixels stay inside [0, 1].
inline constexpr std::size_t kPlateImageSide = 16;
inline constexpr std::size_t kPlateRow0 = 10, kPlateRow1 = 12;  // inclusive
inline constexpr std::size_t kPlateCol0 = 4, kPlateCol1 = 11;   // inclusive

/// Boolean mask over the 256 pixels selecting the plate rectangle.
inline std::vector<bool> plate_mask() {
    std::vector<bool> mask(kPlateImageSide * kPlateImageSide, false);
    for (std::size_t r = kPlateRow0; r <= kPlateRow1; ++r)
        for (std::size_t c = kPlateCol0; c <= kPlateCol1; ++c)
            mask[r * kPlateImageSide + c] = true;
    return mask;
}

inline Dataset make_plates(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw EmptyDatasetError("make_plates: n must be positive");
    const std::size_t d = kPlateImageSide * kPlateImageSide;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> bg(0.2, 0.5);
    std::normal_distribution<double> gauss(0.0, 0.03);

    std::vector<double> values(n * d);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        labels[i] = label;
        for (std::size_t p = 0; p < d; ++p) values[i * d + p] = bg(rng);
        for (std::size_t r = kPlateRow0; r <= kPlateRow1; ++r)
            for (std::size_t c = kPlateCol0; c <= kPlateCol1; ++c) {
                const bool bright = label == 0 ? ((c - kPlateCol0) % 2 == 0)
                                               : ((r - kPlateRow0) % 2 == 0);
                values[i * d + r * kPlateImageSide + c] = bright ? 0.9 : 0.1;
            }
        for (std::size_t p = 0; p < d; ++p) {
            double v = values[i * d + p] + gauss(rng);
            values[i * d + p] = std::min(1.0, std::max(0.0, v));
        }
    }
    std::vector<std::pair<double, double>> bounds(d, {0.0, 1.0});
    return make_dataset(Tensor::dense({n, d}, std::move(values)), std::move(labels), 2,
                        std::move(bounds));
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

}  // namespace detail

/// Load a comma-separated file: features in column order with the label
/// column removed. A header row is auto-detected when every field of the
/// first row is non-numeric. Labels (integers or strings alike) are mapped
/// to dense indices in first-appearance order.
inline Dataset load_csv(const std::string& path, std::size_t label_column) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!detail::trim(line).empty()) lines.push_back(line);
    }
    if (lines.empty()) throw ParseError("file contains no data rows: " + path);

    // Header detection: all fields non-numeric.
    std::size_t first_data = 0;
    {
        auto fields = detail::split_csv_line(lines[0]);
        bool any_numeric = false;
        double tmp;
        for (const auto& f : fields)
            if (detail::parse_double(f, tmp)) any_numeric = true;
        if (!any_numeric) first_data = 1;
    }
    if (first_data >= lines.size())
        throw ParseError("file contains no data rows after header: " + path);

    const std::size_t n_cols = detail::split_csv_line(lines[first_data]).size();
    if (n_cols < 2) throw ParseError("need at least one feature column and a label column");
    if (label_column >= n_cols)
        throw ParseError("label_column " + std::to_string(label_column) + " out of range for " +
                         std::to_string(n_cols) + " columns");

    const std::size_t n = lines.size() - first_data;
    const std::size_t d = n_cols - 1;
    std::vector<double> values;
    values.reserve(n * d);
    std::vector<std::string> raw_labels;
    raw_labels.reserve(n);

    for (std::size_t r = 0; r < n; ++r) {
        auto fields = detail::split_csv_line(lines[first_data + r]);
        if (fields.size() != n_cols)
            throw ParseError("ragged row: row " + std::to_string(r + 1) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(n_cols),
                             r + 1);
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c == label_column) {
                raw_labels.push_back(fields[c]);
                continue;
            }
            double v;
            if (!detail::parse_double(fields[c], v))
                throw ParseError("non-numeric feature '" + fields[c] + "' at row " +
                                     std::to_string(r + 1) + ", column " + std::to_string(c + 1),
                                 r + 1, c + 1);
            values.push_back(v);
        }
    }

    // First-appearance label encoding.
    std::vector<std::string> seen;
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto it = std::find(seen.begin(), seen.end(), raw_labels[r]);
        if (it == seen.end()) {
            seen.push_back(raw_labels[r]);
            labels[r] = static_cast<int>(seen.size()) - 1;
        } else {
            labels[r] = static_cast<int>(it - seen.begin());
        }
    }
    return make_dataset(Tensor::dense({n, d}, std::move(values)), std::move(labels),
                        static_cast<int>(seen.size()));
}

namespace detail {

inline Dataset gather_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
    const std::size_t d = ds.n_features();
    std::vector<int> y(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) y[i] = ds.y[idx[i]];

    Tensor X;
    if (ds.X.is_sparse()) {
        std::vector<std::size_t> row_ptr(idx.size() + 1, 0), col;
        std::vector<double> vals;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const Tensor r = ds.X.row(idx[i]);
            r.for_each_nonzero([&](std::size_t j, double v) {
                col.push_back(j);
                vals.push_back(v);
            });
            row_ptr[i + 1] = col.size();
        }
        X = Tensor::sparse_csr(idx.size(), d, std::move(row_ptr), std::move(col), std::move(vals));
    } else {
        std::vector<double> vals(idx.size() * d);
        const auto& src = ds.X.dense_values();
        for (std::size_t i = 0; i < idx.size(); ++i)
            std::copy(src.begin() + idx[i] * d, src.begin() + (idx[i] + 1) * d,
                      vals.begin() + i * d);
        X = Tensor::dense({idx.size(), d}, std::move(vals));
    }
    return make_dataset(std::move(X), std::move(y), ds.n_classes, ds.feature_bounds);
}

}  // namespace detail

/// Disjoint (train, test) partition with test size round(n * test_fraction).
/// Row order within each half follows the original dataset.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                                    std::uint64_t seed) {
    if (ds.n_samples() == 0) throw EmptyDatasetError("train_test_split: empty dataset");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw InvalidArgumentError("test_fraction must lie in (0, 1)");
    const std::size_t n = ds.n_samples();
    const auto test_n = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * test_fraction));

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + test_n);
    std::vector<std::size_t> train_idx(idx.begin() + test_n, idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    return {detail::gather_rows(ds, train_idx), detail::gather_rows(ds, test_idx)};
}

/// Fraction of exact label matches.
inline double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw InvalidArgumentError("accuracy: label vectors must be non-empty and equal length");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

}  // namespace advsec
