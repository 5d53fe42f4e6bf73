#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vatscope/vat.hpp"

namespace vatscope {

struct OtsuResult {
    std::uint8_t threshold = 0;      // dark iff intensity <= threshold
    double between_variance = 0.0;   // at the chosen threshold
    double total_variance = 0.0;     // of the whole histogram
    /// between / total, in [0, 1].
    double separability() const noexcept { return total_variance > 0.0 ? between_variance / total_variance : 0.0; }
};

/// Maximizes between-class variance over all 256 thresholds of the intensity
/// histogram, smallest threshold on ties (compared exactly, not in floating
/// point). Throws NumericError when the image has a single intensity.
OtsuResult otsu(std::span<const std::uint8_t> pixels);
std::uint8_t otsu_threshold(std::span<const std::uint8_t> pixels);
std::uint8_t otsu_threshold(const OdImage& img);

enum class ThresholdMode { half_max, zero };

struct CceConfig {
    std::optional<std::size_t> band_width;  // default max(1, n / 50)
    ThresholdMode threshold_mode = ThresholdMode::half_max;
    std::optional<std::size_t> explicit_b;

    std::size_t resolved_band_width(std::size_t n) const noexcept;
};

struct CceReport {
    std::uint8_t otsu_threshold = 0;
    std::size_t band_width = 0;
    std::vector<std::size_t> signal;
    std::size_t b = 0;
    std::size_t cluster_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> run_spans;  // half-open [begin, end) over signal indices
    std::size_t min_detectable_block = 0;                         // w + 1
    std::vector<std::string> warnings;
};

/// signal[i] = number of dark pixels among (i+u, i), u = 1..w, for i in [0, n-1-w].
std::vector<std::size_t> offdiag_signal(const OdImage& img, std::uint8_t threshold, std::size_t band_width);

/// Otsu binarization, band signal, then the number of maximal runs with signal > b.
CceReport cce_count(const OdImage& img, const CceConfig& cfg = {});

std::string cce_report_to_json(const CceReport& report);
std::string to_string(ThresholdMode mode);
ThresholdMode threshold_mode_from_string(const std::string& s);

}  // namespace vatscope
