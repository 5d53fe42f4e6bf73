#include "vatscope/cce.hpp"

#include <algorithm>
#include <array>

#include <json.hpp>

#include "vatscope/error.hpp"

namespace vatscope {

namespace {

using u128 = unsigned __int128;

// a * b as a 192-bit value split into (high 128, low 128) for lexicographic compare.
std::pair<u128, u128> mul_128_64(u128 a, std::uint64_t b) {
    const u128 lo = static_cast<std::uint64_t>(a) * static_cast<u128>(b);
    const u128 hi = static_cast<std::uint64_t>(a >> 64) * static_cast<u128>(b);
    const u128 mid = hi + (lo >> 64);
    return {mid >> 64, (mid << 64) | static_cast<std::uint64_t>(lo)};
}

// Between-class variance up to the common positive factor 1/N^2:
//   (S0*N - S*n0)^2 / (n0 * n1), held as numerator / denominator.
struct Score {
    u128 num = 0;
    std::uint64_t den = 1;
};

bool greater(const Score& a, const Score& b) { return mul_128_64(a.num, b.den) > mul_128_64(b.num, a.den); }

// Exact arithmetic needs |S0*N - S*n0| < 2^64, i.e. 255 * N^2 < 2^64.
constexpr std::uint64_t kExactPixelLimit = 260'000'000ULL;

}  // namespace

OtsuResult otsu(std::span<const std::uint8_t> pixels) {
    if (pixels.empty()) throw InputError("otsu: empty image");
    std::array<std::uint64_t, 256> hist{};
    for (auto p : pixels) ++hist[p];

    const std::uint64_t total = pixels.size();
    std::uint64_t sum = 0;
    long double sum_sq = 0.0L;
    for (std::size_t v = 0; v < 256; ++v) {
        sum += v * hist[v];
        sum_sq += static_cast<long double>(v) * v * hist[v];
    }

    const bool exact = total < kExactPixelLimit;
    Score best_exact;
    long double best_approx = 0.0L;
    std::size_t best_t = 256;
    std::uint64_t n0 = 0, s0 = 0;
    for (std::size_t t = 0; t < 255; ++t) {
        n0 += hist[t];
        s0 += t * hist[t];
        const std::uint64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        if (exact) {
            const std::uint64_t a = s0 * total, b = sum * n0;
            const std::uint64_t diff = a > b ? a - b : b - a;
            Score s{static_cast<u128>(diff) * diff, n0 * n1};
            if (diff != 0 && (best_t == 256 || greater(s, best_exact))) {
                best_exact = s;
                best_t = t;
            }
        } else {
            const long double diff = static_cast<long double>(s0) * total - static_cast<long double>(sum) * n0;
            const long double s = diff * diff / (static_cast<long double>(n0) * n1);
            if (s > 0.0L && (best_t == 256 || s > best_approx)) {
                best_approx = s;
                best_t = t;
            }
        }
    }
    if (best_t == 256) throw NumericError("otsu: degenerate histogram (image has a single intensity)");

    // Recompute the winning variance in floating point for reporting.
    std::uint64_t w0 = 0, m0 = 0;
    for (std::size_t v = 0; v <= best_t; ++v) {
        w0 += hist[v];
        m0 += v * hist[v];
    }
    const long double N = static_cast<long double>(total);
    const long double diff = static_cast<long double>(m0) * N - static_cast<long double>(sum) * w0;
    OtsuResult r;
    r.threshold = static_cast<std::uint8_t>(best_t);
    r.between_variance = static_cast<double>(diff * diff / (N * N * w0 * (total - w0)));
    r.total_variance = static_cast<double>((N * sum_sq - static_cast<long double>(sum) * sum) / (N * N));
    return r;
}

std::uint8_t otsu_threshold(std::span<const std::uint8_t> pixels) { return otsu(pixels).threshold; }
std::uint8_t otsu_threshold(const OdImage& img) { return otsu(img.pixels()).threshold; }

std::size_t CceConfig::resolved_band_width(std::size_t n) const noexcept {
    return band_width.value_or(std::max<std::size_t>(1, n / 50));
}

std::vector<std::size_t> offdiag_signal(const OdImage& img, std::uint8_t threshold, std::size_t band_width) {
    const std::size_t n = img.size();
    if (band_width < 1 || band_width >= n)
        throw InputError("band width " + std::to_string(band_width) + " must lie in [1, " + std::to_string(n - 1) +
                         "] for a " + std::to_string(n) + "x" + std::to_string(n) + " image");
    std::vector<std::size_t> signal(n - band_width, 0);
    for (std::size_t i = 0; i < signal.size(); ++i)
        for (std::size_t u = 1; u <= band_width; ++u)
            if (img(i + u, i) <= threshold) ++signal[i];
    return signal;
}

CceReport cce_count(const OdImage& img, const CceConfig& cfg) {
    CceReport r;
    r.band_width = cfg.resolved_band_width(img.size());
    r.min_detectable_block = r.band_width + 1;
    r.otsu_threshold = otsu_threshold(img);
    r.signal = offdiag_signal(img, r.otsu_threshold, r.band_width);

    const std::size_t peak = *std::max_element(r.signal.begin(), r.signal.end());
    if (cfg.explicit_b) {
        r.b = *cfg.explicit_b;
    } else {
        r.b = cfg.threshold_mode == ThresholdMode::half_max ? peak / 2 : 0;
    }
    if (peak == 0) {
        r.warnings.push_back("off-diagonal signal is identically zero; no dark blocks detected");
        return r;
    }

    std::size_t i = 0;
    while (i < r.signal.size()) {
        if (r.signal[i] <= r.b) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        while (i < r.signal.size() && r.signal[i] > r.b) ++i;
        r.run_spans.emplace_back(begin, i);
    }
    r.cluster_count = r.run_spans.size();
    return r;
}

std::string to_string(ThresholdMode mode) { return mode == ThresholdMode::half_max ? "half_max" : "zero"; }

ThresholdMode threshold_mode_from_string(const std::string& s) {
    if (s == "half_max") return ThresholdMode::half_max;
    if (s == "zero") return ThresholdMode::zero;
    throw InputError("unknown threshold mode '" + s + "' (expected half_max or zero)");
}

std::string cce_report_to_json(const CceReport& report) {
    nlohmann::json j;
    j["otsu_threshold"] = report.otsu_threshold;
    j["band_width"] = report.band_width;
    j["b"] = report.b;
    j["cluster_count"] = report.cluster_count;
    j["min_detectable_block"] = report.min_detectable_block;
    auto spans = nlohmann::json::array();
    for (auto [b, e] : report.run_spans) spans.push_back({b, e});
    j["run_spans"] = spans;
    j["signal"] = report.signal;
    j["warnings"] = report.warnings;
    return j.dump() + "\n";
}

}  // namespace vatscope
