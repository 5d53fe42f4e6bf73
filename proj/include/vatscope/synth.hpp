#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vatscope/core.hpp"

namespace vatscope {

/// SplitMix64 (Steele, Lea & Flood). The fixture generator for every synthetic
/// data set: state += 0x9e3779b97f4a7c15, then the standard xor-shift-multiply
/// finalizer. Uniform doubles take the top 53 bits.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// [0, 1)
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Box-Muller, cosine branch only: two draws per normal.
    double normal() noexcept;

private:
    std::uint64_t state_;
};

struct BlobSpec {
    std::size_t clusters = 3;
    std::size_t n_per = 40;
    std::size_t dim = 8;
    double sep = 10.0;    // center offset along each axis, in units of sigma
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

struct LabeledFeatures {
    FeatureMatrix features;
    std::vector<std::size_t> labels;
};

/// Centers at sep * sigma * e_c on the first `clusters` axes, so every pair
/// of centers is sep * sigma * sqrt(2) >= sep * sigma apart. Rows are grouped
/// by cluster. Requires dim >= clusters.
LabeledFeatures gaussian_blobs(const BlobSpec& spec);

/// Ideal block-diagonal matrix: `within` inside blocks, `between` across them.
DissimilarityMatrix block_dissim(std::span<const std::size_t> sizes, double within, double between);

/// As block_dissim, with each within-block entry drawn as
/// max(0, within + N(0, within_sd)) (symmetric, zero diagonal).
DissimilarityMatrix noisy_block_dissim(std::span<const std::size_t> sizes, double within, double within_sd,
                                       double between, std::uint64_t seed);

/// "index,label" CSV.
std::string labels_to_csv(std::span<const std::size_t> labels);

}  // namespace vatscope
