#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vatscope {

/// n records of d real features, row-major. Row order is the canonical record
/// index that every permutation downstream refers to.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    /// Throws InputError on a shape mismatch or a non-finite value (naming its row).
    FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dims() const noexcept { return dims_; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * dims_, dims_};
    }
    double at(std::size_t i, std::size_t c) const noexcept { return values_[i * dims_ + c]; }
    std::span<const double> values() const noexcept { return values_; }

    /// Rows selected by `indices`, in that order.
    FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

private:
    std::size_t rows_ = 0;
    std::size_t dims_ = 0;
    std::vector<double> values_;
};

/// Square, symmetric, non-negative distances with an exactly zero diagonal.
class DissimilarityMatrix {
public:
    DissimilarityMatrix() = default;

    /// Validates every invariant; throws InputError naming the first violation.
    static DissimilarityMatrix from_values(std::size_t n, std::vector<double> values);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * n_, n_}; }
    std::span<const double> values() const noexcept { return values_; }
    double max_value() const noexcept;

private:
    struct Unchecked {};
    DissimilarityMatrix(Unchecked, std::size_t n, std::vector<double> values)
        : n_(n), values_(std::move(values)) {}

    friend DissimilarityMatrix make_dissim_unchecked(std::size_t, std::vector<double>);

    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// Internal constructor for kernels whose output is correct by construction.
DissimilarityMatrix make_dissim_unchecked(std::size_t n, std::vector<double> values);

/// A bijection on [0, n).
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<std::size_t> order);  // throws InputError if not a bijection

    static Permutation identity(std::size_t n);

    std::size_t size() const noexcept { return order_.size(); }
    std::size_t operator[](std::size_t i) const noexcept { return order_[i]; }
    std::span<const std::size_t> indices() const noexcept { return order_; }
    Permutation inverse() const;

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> order_;
};

struct DissimDiagnostic {
    bool ok = true;
    std::string violation;  // empty when ok
    std::size_t row = 0;
    std::size_t col = 0;

    explicit operator bool() const noexcept { return ok; }
};

inline constexpr double kSymmetryTolerance = 1e-12;

/// First violated invariant in row-major scan order, or pass.
DissimDiagnostic validate_dissim(std::size_t n, std::span<const double> values);
DissimDiagnostic validate_dissim(const DissimilarityMatrix& m);

struct DistanceOptions {
    unsigned threads = 1;
    bool zscore = false;   // standardize each feature dimension first
    std::size_t tile = 64;
};

/// Pluggable metric hook; must be symmetric, non-negative and zero on identical rows.
using MetricFn = std::function<double(std::span<const double>, std::span<const double>)>;

DissimilarityMatrix euclidean_dissim(const FeatureMatrix& features, const DistanceOptions& opts = {});
DissimilarityMatrix pairwise_dissim(const FeatureMatrix& features, const MetricFn& metric,
                                    const DistanceOptions& opts = {});

/// Per-dimension z-scoring; zero-variance dimensions become all zero.
FeatureMatrix zscore_columns(const FeatureMatrix& features);

/// out[i][j] = m[p[i]][p[j]].
DissimilarityMatrix permute_matrix(const DissimilarityMatrix& m, const Permutation& p);

// VATF feature store: "VATF", u32 version=1, u32 n, u32 d, then n*d f64, all little-endian.
inline constexpr std::uint32_t kVatfVersion = 1;

std::vector<std::uint8_t> encode_vatf(const FeatureMatrix& features);
FeatureMatrix decode_vatf(std::span<const std::uint8_t> bytes);
void write_vatf(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_vatf(const std::filesystem::path& path);

}  // namespace vatscope
