#include "vatscope/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "vatscope/error.hpp"
#include "vatscope/io.hpp"
#include "vatscope/parallel.hpp"

namespace vatscope {

namespace {

void check_finite_rows(std::size_t rows, std::size_t dims, std::span<const double> values) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < dims; ++c)
            if (!std::isfinite(values[i * dims + c]))
                throw InputError("non-finite feature value at row " + std::to_string(i) + ", column " +
                                 std::to_string(c));
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<double> values)
    : rows_(rows), dims_(dims), values_(std::move(values)) {
    if (rows_ == 0 || dims_ == 0) throw InputError("feature matrix needs n >= 1 and d >= 1");
    if (values_.size() != rows_ * dims_)
        throw InputError("feature matrix holds " + std::to_string(values_.size()) + " values, expected " +
                         std::to_string(rows_ * dims_));
    check_finite_rows(rows_, dims_, values_);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * dims_);
    for (auto i : indices) {
        if (i >= rows_) throw InputError("row index " + std::to_string(i) + " out of range");
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return FeatureMatrix(indices.size(), dims_, std::move(out));
}

DissimilarityMatrix DissimilarityMatrix::from_values(std::size_t n, std::vector<double> values) {
    if (auto diag = validate_dissim(n, values); !diag)
        throw InputError("invalid dissimilarity matrix: " + diag.violation);
    return DissimilarityMatrix(Unchecked{}, n, std::move(values));
}

double DissimilarityMatrix::max_value() const noexcept {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

DissimilarityMatrix make_dissim_unchecked(std::size_t n, std::vector<double> values) {
    return DissimilarityMatrix(DissimilarityMatrix::Unchecked{}, n, std::move(values));
}

Permutation::Permutation(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
        const auto v = order_[pos];
        if (v >= order_.size())
            throw InputError("permutation entry " + std::to_string(v) + " at position " + std::to_string(pos) +
                             " is out of range");
        if (seen[v]) throw InputError("permutation repeats index " + std::to_string(v));
        seen[v] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return Permutation(std::move(order));
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) inv[order_[i]] = i;
    return Permutation(std::move(inv));
}

DissimDiagnostic validate_dissim(std::size_t n, std::span<const double> values) {
    auto fail = [](std::string what, std::size_t i, std::size_t j) {
        return DissimDiagnostic{false,
                                what + " at (" + std::to_string(i) + ", " + std::to_string(j) + ")", i, j};
    };
    if (n == 0) return DissimDiagnostic{false, "empty matrix", 0, 0};
    if (values.size() != n * n)
        return DissimDiagnostic{false,
                                "matrix holds " + std::to_string(values.size()) + " values, expected " +
                                    std::to_string(n * n) + " (not square)",
                                0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = values[i * n + j];
            if (!std::isfinite(v)) return fail("non-finite entry", i, j);
            if (v < 0.0) return fail("negative entry", i, j);
            if (i == j && v != 0.0) return fail("non-zero diagonal", i, j);
            if (j > i && std::abs(v - values[j * n + i]) > kSymmetryTolerance) return fail("asymmetric entry", i, j);
        }
    }
    return {};
}

DissimDiagnostic validate_dissim(const DissimilarityMatrix& m) { return validate_dissim(m.size(), m.values()); }

FeatureMatrix zscore_columns(const FeatureMatrix& features) {
    const auto n = features.rows();
    const auto d = features.dims();
    std::vector<double> out(features.values().begin(), features.values().end());
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += features.at(i, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (features.at(i, c) - mean) * (features.at(i, c) - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) out[i * d + c] = sd > 0.0 ? (features.at(i, c) - mean) / sd : 0.0;
    }
    return FeatureMatrix(n, d, std::move(out));
}

namespace {

// Fills the upper triangle tile by tile and mirrors it. Each entry is computed
// by the same sequential reduction regardless of which worker owns its tile.
template <typename Dist>
DissimilarityMatrix tiled_dissim(const FeatureMatrix& x, const DistanceOptions& opts, Dist&& dist) {
    const std::size_t n = x.rows();
    const std::size_t tile = std::max<std::size_t>(1, opts.tile);
    const std::size_t tiles = (n + tile - 1) / tile;
    std::vector<double> out(n * n, 0.0);

    parallel_for_chunks(tiles, opts.threads, [&](std::size_t tbegin, std::size_t tend) {
        for (std::size_t ti = tbegin; ti < tend; ++ti) {
            const std::size_t i0 = ti * tile, i1 = std::min(n, i0 + tile);
            for (std::size_t j0 = i0; j0 < n; j0 += tile) {
                const std::size_t j1 = std::min(n, j0 + tile);
                for (std::size_t i = i0; i < i1; ++i) {
                    const auto xi = x.row(i);
                    for (std::size_t j = std::max(j0, i + 1); j < j1; ++j) out[i * n + j] = dist(xi, x.row(j));
                }
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out[j * n + i] = out[i * n + j];
    return make_dissim_unchecked(n, std::move(out));
}

double euclidean(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double diff = a[c] - b[c];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

}  // namespace

DissimilarityMatrix euclidean_dissim(const FeatureMatrix& features, const DistanceOptions& opts) {
    if (features.rows() == 0) throw InputError("euclidean_dissim: empty feature matrix");
    if (opts.zscore) return tiled_dissim(zscore_columns(features), opts, euclidean);
    return tiled_dissim(features, opts, euclidean);
}

DissimilarityMatrix pairwise_dissim(const FeatureMatrix& features, const MetricFn& metric,
                                    const DistanceOptions& opts) {
    if (features.rows() == 0) throw InputError("pairwise_dissim: empty feature matrix");
    auto checked = [&](std::span<const double> a, std::span<const double> b) {
        const double v = metric(a, b);
        if (!std::isfinite(v) || v < 0.0) throw InputError("metric returned a negative or non-finite distance");
        return v;
    };
    if (opts.zscore) return tiled_dissim(zscore_columns(features), opts, checked);
    return tiled_dissim(features, opts, checked);
}

DissimilarityMatrix permute_matrix(const DissimilarityMatrix& m, const Permutation& p) {
    const std::size_t n = m.size();
    if (p.size() != n)
        throw InputError("permutation length " + std::to_string(p.size()) + " does not match matrix size " +
                         std::to_string(n));
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = m.row(p[i]);
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = src[p[j]];
    }
    return make_dissim_unchecked(n, std::move(out));
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
    return v;
}

double get_f64(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(in[at + b]) << (8 * b);
    return std::bit_cast<double>(v);
}

constexpr std::size_t kVatfHeader = 16;

}  // namespace

std::vector<std::uint8_t> encode_vatf(const FeatureMatrix& features) {
    std::vector<std::uint8_t> out;
    out.reserve(kVatfHeader + features.values().size() * 8);
    for (char c : {'V', 'A', 'T', 'F'}) out.push_back(static_cast<std::uint8_t>(c));
    put_u32(out, kVatfVersion);
    put_u32(out, static_cast<std::uint32_t>(features.rows()));
    put_u32(out, static_cast<std::uint32_t>(features.dims()));
    for (double v : features.values()) put_f64(out, v);
    return out;
}

FeatureMatrix decode_vatf(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kVatfHeader) throw InputError("VATF: truncated header");
    if (bytes[0] != 'V' || bytes[1] != 'A' || bytes[2] != 'T' || bytes[3] != 'F')
        throw InputError("VATF: bad magic");
    if (const auto version = get_u32(bytes, 4); version != kVatfVersion)
        throw InputError("VATF: unsupported version " + std::to_string(version));
    const std::size_t n = get_u32(bytes, 8);
    const std::size_t d = get_u32(bytes, 12);
    if (bytes.size() != kVatfHeader + n * d * 8)
        throw InputError("VATF: payload is " + std::to_string(bytes.size() - kVatfHeader) + " bytes, expected " +
                         std::to_string(n * d * 8));
    std::vector<double> values(n * d);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = get_f64(bytes, kVatfHeader + 8 * k);
    return FeatureMatrix(n, d, std::move(values));
}

void write_vatf(const std::filesystem::path& path, const FeatureMatrix& features) {
    write_file_atomic(path, encode_vatf(features));
}

FeatureMatrix read_vatf(const std::filesystem::path& path) {
    try {
        return decode_vatf(read_file_bytes(path));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

}  // namespace vatscope
