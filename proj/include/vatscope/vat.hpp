#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vatscope/core.hpp"

namespace vatscope {

/// VAT reordering: `order` is the Prim vertex-addition sequence and
/// link_dist[i] (i >= 1) the MST edge that attached order[i]; link_dist[0] = 0.
struct VatOrdering {
    Permutation order;
    std::vector<double> link_dist;
};

/// n x n 8-bit grayscale image, row-major. 0 is black (zero distance).
class OdImage {
public:
    OdImage() = default;
    OdImage(std::size_t n, std::vector<std::uint8_t> pixels);  // throws InputError unless pixels.size() == n*n

    std::size_t size() const noexcept { return n_; }
    std::uint8_t operator()(std::size_t i, std::size_t j) const noexcept { return pixels_[i * n_ + j]; }
    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

    friend bool operator==(const OdImage&, const OdImage&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Starts at the smaller index of the lexicographically first maximum-distance
/// pair, then repeatedly appends the unordered point nearest to the ordered set
/// (smallest index on ties). O(n^2) time, O(n) extra memory.
VatOrdering vat_order(const DissimilarityMatrix& m);

/// pixel(i, j) = round(255 * D[o[i]][o[j]] / dmax), all zero when dmax == 0.
OdImage odi_from(const DissimilarityMatrix& m, const VatOrdering& o);

/// Binary PGM ("P5", maxval 255).
std::vector<std::uint8_t> encode_pgm(const OdImage& img);
OdImage decode_pgm(std::span<const std::uint8_t> bytes);
void write_pgm(const OdImage& img, const std::filesystem::path& path);
OdImage read_pgm(const std::filesystem::path& path);

/// {"order": [...], "link_dist": [...]}
std::string ordering_to_json(const VatOrdering& o);
VatOrdering ordering_from_json(std::string_view text);

}  // namespace vatscope
