#include "vatscope/synth.hpp"

#include <cmath>
#include <numbers>

#include "vatscope/error.hpp"

namespace vatscope {

double SplitMix64::normal() noexcept {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

LabeledFeatures gaussian_blobs(const BlobSpec& spec) {
    if (spec.clusters < 1 || spec.n_per < 1 || spec.dim < 1)
        throw InputError("blob spec needs clusters, n_per and dim >= 1");
    if (!(spec.sep >= 0.0) || !(spec.sigma > 0.0)) throw InputError("blob spec needs sep >= 0 and sigma > 0");
    if (spec.dim < spec.clusters)
        throw InputError("dim = " + std::to_string(spec.dim) + " cannot hold " + std::to_string(spec.clusters) +
                         " equidistant centers (needs dim >= clusters)");

    SplitMix64 rng(spec.seed);
    const double offset = spec.sep * spec.sigma;
    const std::size_t n = spec.clusters * spec.n_per;
    std::vector<double> values(n * spec.dim);
    std::vector<std::size_t> labels(n);
    for (std::size_t c = 0; c < spec.clusters; ++c) {
        for (std::size_t p = 0; p < spec.n_per; ++p) {
            const std::size_t i = c * spec.n_per + p;
            labels[i] = c;
            for (std::size_t d = 0; d < spec.dim; ++d)
                values[i * spec.dim + d] = (d == c ? offset : 0.0) + spec.sigma * rng.normal();
        }
    }
    return {FeatureMatrix(n, spec.dim, std::move(values)), std::move(labels)};
}

namespace {

std::vector<std::size_t> block_ids(std::span<const std::size_t> sizes) {
    if (sizes.empty()) throw InputError("block sizes must not be empty");
    std::vector<std::size_t> ids;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        if (sizes[b] == 0) throw InputError("block " + std::to_string(b) + " is empty");
        ids.insert(ids.end(), sizes[b], b);
    }
    return ids;
}

}  // namespace

DissimilarityMatrix block_dissim(std::span<const std::size_t> sizes, double within, double between) {
    if (!(within >= 0.0) || !(within < between)) throw InputError("block_dissim needs 0 <= within < between");
    const auto ids = block_ids(sizes);
    const std::size_t n = ids.size();
    std::vector<double> values(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) values[i * n + j] = ids[i] == ids[j] ? within : between;
    return DissimilarityMatrix::from_values(n, std::move(values));
}

DissimilarityMatrix noisy_block_dissim(std::span<const std::size_t> sizes, double within, double within_sd,
                                       double between, std::uint64_t seed) {
    if (!(within >= 0.0) || !(within < between) || !(within_sd >= 0.0))
        throw InputError("noisy_block_dissim needs 0 <= within < between and within_sd >= 0");
    const auto ids = block_ids(sizes);
    const std::size_t n = ids.size();
    SplitMix64 rng(seed);
    std::vector<double> values(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = ids[i] == ids[j] ? std::max(0.0, within + within_sd * rng.normal()) : between;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    return DissimilarityMatrix::from_values(n, std::move(values));
}

std::string labels_to_csv(std::span<const std::size_t> labels) {
    std::string out = "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
    return out;
}

}  // namespace vatscope
