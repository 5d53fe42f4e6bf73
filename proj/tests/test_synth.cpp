#include <doctest.h>

#include <cmath>

#include "vatscope/cce.hpp"
#include "vatscope/error.hpp"
#include "vatscope/synth.hpp"
#include "vatscope/vat.hpp"

using namespace vatscope;

TEST_CASE("SplitMix64 reference outputs") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(rng.next() == 0x06c45d188009454fULL);
}

TEST_CASE("SplitMix64 uniform and normal") {
    SplitMix64 rng(7);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("gaussian_blobs") {
    SUBCASE("same seed, same data") {
        BlobSpec spec;
        spec.seed = 42;
        const auto a = gaussian_blobs(spec);
        const auto b = gaussian_blobs(spec);
        CHECK(a.features.values().size() == b.features.values().size());
        CHECK(std::equal(a.features.values().begin(), a.features.values().end(), b.features.values().begin()));
        spec.seed = 43;
        const auto c = gaussian_blobs(spec);
        CHECK_FALSE(std::equal(a.features.values().begin(), a.features.values().end(), c.features.values().begin()));
    }
    SUBCASE("shape and labels") {
        BlobSpec spec;
        spec.clusters = 1;
        const auto one = gaussian_blobs(spec);
        CHECK(one.features.rows() == 40);
        CHECK(one.features.dims() == 8);
        CHECK(std::all_of(one.labels.begin(), one.labels.end(), [](std::size_t l) { return l == 0; }));
        spec.clusters = 3;
        const auto three = gaussian_blobs(spec);
        REQUIRE(three.labels.size() == 120);
        for (std::size_t i = 0; i < 120; ++i) CHECK(three.labels[i] == i / 40);
    }
    SUBCASE("sample means sit near axis centers sep*sigma*sqrt(2) apart") {
        BlobSpec spec;
        spec.clusters = 3;
        spec.n_per = 2000;
        spec.sigma = 2.0;
        spec.seed = 5;
        const auto blobs = gaussian_blobs(spec);
        std::vector<std::vector<double>> mean(3, std::vector<double>(spec.dim, 0.0));
        for (std::size_t i = 0; i < blobs.features.rows(); ++i)
            for (std::size_t j = 0; j < spec.dim; ++j)
                mean[blobs.labels[i]][j] += blobs.features.at(i, j) / static_cast<double>(spec.n_per);
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a + 1; b < 3; ++b) {
                double d = 0;
                for (std::size_t j = 0; j < spec.dim; ++j) d += (mean[a][j] - mean[b][j]) * (mean[a][j] - mean[b][j]);
                CHECK(std::sqrt(d) == doctest::Approx(spec.sep * spec.sigma * std::sqrt(2.0)).epsilon(0.02));
                CHECK(std::sqrt(d) >= spec.sep * spec.sigma);
            }
    }
    SUBCASE("well separated blobs: every between distance exceeds every within distance") {
        BlobSpec spec;
        spec.clusters = 3;
        spec.sep = 10;
        int ok = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            spec.seed = seed;
            const auto blobs = gaussian_blobs(spec);
            const auto d = euclidean_dissim(blobs.features);
            double within = 0, between = 1e300;
            for (std::size_t i = 0; i < d.size(); ++i)
                for (std::size_t j = i + 1; j < d.size(); ++j) {
                    if (blobs.labels[i] == blobs.labels[j]) within = std::max(within, d(i, j));
                    else between = std::min(between, d(i, j));
                }
            ok += within < between;
        }
        CHECK(ok >= 99);
    }
    SUBCASE("invalid specs") {
        BlobSpec spec;
        spec.clusters = 9;
        CHECK_THROWS_AS(gaussian_blobs(spec), InputError);
        spec = BlobSpec{};
        spec.sigma = 0;
        CHECK_THROWS_AS(gaussian_blobs(spec), InputError);
        spec = BlobSpec{};
        spec.n_per = 0;
        CHECK_THROWS_AS(gaussian_blobs(spec), InputError);
    }
}

TEST_CASE("block_dissim") {
    const std::vector<std::size_t> sizes{2, 3};
    const auto d = block_dissim(sizes, 0.1, 1.0);
    REQUIRE(d.size() == 5);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == 0.1);
    CHECK(d(0, 2) == 1.0);
    CHECK(d(2, 4) == 0.1);
    CHECK(d(4, 1) == 1.0);
    CHECK(validate_dissim(5, d.values()).ok);

    const std::vector<std::size_t> three{10, 10, 10};
    const auto img = odi_from(block_dissim(three, 0.01, 1.0), vat_order(block_dissim(three, 0.01, 1.0)));
    CHECK(cce_count(img, CceConfig{}).cluster_count == 3);
}

TEST_CASE("noisy_block_dissim") {
    const std::vector<std::size_t> sizes{15, 15, 15};
    const auto d = noisy_block_dissim(sizes, 0.1, 0.02, 1.0, 9);
    CHECK(validate_dissim(d.size(), d.values()).ok);
    double mean = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < 45; ++i)
        for (std::size_t j = 0; j < 45; ++j) {
            if (i == j) continue;
            if (i / 15 != j / 15) CHECK(d(i, j) == 1.0);
            else {
                CHECK(d(i, j) >= 0.0);
                mean += d(i, j);
                ++count;
            }
        }
    CHECK(mean / static_cast<double>(count) == doctest::Approx(0.1).epsilon(0.05));
    const auto again = noisy_block_dissim(sizes, 0.1, 0.02, 1.0, 9);
    CHECK(std::equal(d.values().begin(), d.values().end(), again.values().begin()));
}

TEST_CASE("labels_to_csv") {
    const std::vector<std::size_t> labels{0, 0, 2};
    CHECK(labels_to_csv(labels) == "index,label\n0,0\n1,0\n2,2\n");
}
