#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "vatscope/cce.hpp"
#include "vatscope/error.hpp"
#include "vatscope/synth.hpp"

using namespace vatscope;

namespace {

// Ideal ODI of consecutive blocks: `inside` within blocks (and on the diagonal
// band), `outside` elsewhere, 0 on the diagonal.
OdImage block_image(const std::vector<std::size_t>& sizes, std::uint8_t inside = 0, std::uint8_t outside = 255,
                    std::uint8_t diagonal = 0) {
    std::vector<std::size_t> id;
    for (std::size_t b = 0; b < sizes.size(); ++b) id.insert(id.end(), sizes[b], b);
    const std::size_t n = id.size();
    std::vector<std::uint8_t> px(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) px[i * n + j] = i == j ? diagonal : id[i] == id[j] ? inside : outside;
    return OdImage(n, std::move(px));
}

}  // namespace

TEST_CASE("otsu_threshold examples") {
    SUBCASE("half 0, half 255: plateau of maximizers, smallest wins") {
        std::vector<std::uint8_t> px(100, 0);
        std::fill(px.begin() + 50, px.end(), 255);
        CHECK(oracle::otsu_bruteforce(px) == 0);
        CHECK(otsu_threshold(px) == 0);
    }
    SUBCASE("ramp 0..255") {
        std::vector<std::uint8_t> px(256);
        std::iota(px.begin(), px.end(), 0);
        CHECK(oracle::otsu_bruteforce(px) == 127);
        CHECK(otsu_threshold(px) == 127);
    }
    SUBCASE("constant image is degenerate") {
        CHECK_THROWS_AS(otsu_threshold(std::vector<std::uint8_t>(16, 77)), NumericError);
        CHECK_THROWS_AS(otsu_threshold(std::vector<std::uint8_t>{}), InputError);
    }
    SUBCASE("two-level image is perfectly separable") {
        std::vector<std::uint8_t> px{10, 10, 10, 200};
        const auto r = otsu(px);
        CHECK(r.threshold == 10);
        CHECK(r.separability() == doctest::Approx(1.0));
    }
}

TEST_CASE("property: otsu matches exhaustive search on random images") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t w = 1 + rng.next() % 64, h = 1 + rng.next() % 64;
        // Few distinct levels make exact ties likely.
        const unsigned levels = 2 + static_cast<unsigned>(rng.next() % 6);
        const bool coarse = trial % 2 == 0;
        std::vector<std::uint8_t> px(w * h);
        for (auto& p : px)
            p = coarse ? static_cast<std::uint8_t>((rng.next() % levels) * (255 / (levels - 1)))
                       : static_cast<std::uint8_t>(rng.next() & 0xff);
        const int expected = oracle::otsu_bruteforce(px);
        if (expected < 0) {
            CHECK_THROWS_AS(otsu_threshold(px), NumericError);
        } else {
            CHECK(otsu_threshold(px) == expected);
        }
    }
}

TEST_CASE("offdiag_signal") {
    SUBCASE("single dark block gives a constant w") {
        const auto s = offdiag_signal(block_image({12}), 0, 3);
        CHECK(s.size() == 9);
        CHECK(std::all_of(s.begin(), s.end(), [](auto v) { return v == 3; }));
    }
    SUBCASE("all-light image gives zero") {
        std::vector<std::uint8_t> px(25, 255);
        for (int i = 0; i < 5; ++i) px[i * 5 + i] = 0;
        const auto s = offdiag_signal(OdImage(5, px), 0, 2);
        CHECK(std::all_of(s.begin(), s.end(), [](auto v) { return v == 0; }));
    }
    SUBCASE("two blocks of 10, w = 2: direct count") {
        // Column 8 sees (9,8) dark and (10,8) light; column 9 sees only light.
        const auto s = offdiag_signal(block_image({10, 10}), 0, 2);
        const std::vector<std::size_t> expected{2, 2, 2, 2, 2, 2, 2, 2, 1, 0, 2, 2, 2, 2, 2, 2, 2, 2};
        CHECK(s == expected);
    }
    SUBCASE("band width must be below n") {
        CHECK_THROWS_AS(offdiag_signal(block_image({4}), 0, 4), InputError);
        CHECK_THROWS_AS(offdiag_signal(block_image({4}), 0, 0), InputError);
    }
}

TEST_CASE("cce_count") {
    SUBCASE("three ideal blocks of 10, w = 2") {
        CceConfig cfg;
        cfg.band_width = 2;
        const auto r = cce_count(block_image({10, 10, 10}), cfg);
        CHECK(r.cluster_count == 3);
        CHECK(r.b == 1);
        CHECK(r.otsu_threshold == 0);
        CHECK(r.min_detectable_block == 3);
        REQUIRE(r.run_spans.size() == 3);
        CHECK(r.run_spans[0] == std::pair<std::size_t, std::size_t>{0, 8});
        CHECK(r.run_spans[1] == std::pair<std::size_t, std::size_t>{10, 18});
        CHECK(r.run_spans[2] == std::pair<std::size_t, std::size_t>{20, 28});
    }
    SUBCASE("single ideal block") {
        std::vector<std::uint8_t> px(100, 0);
        px[1] = px[10] = 3;  // keep the histogram non-constant
        CHECK(cce_count(OdImage(10, px)).cluster_count == 1);
    }
    SUBCASE("zero-threshold mode and explicit b") {
        CceConfig cfg;
        cfg.band_width = 2;
        cfg.threshold_mode = ThresholdMode::zero;
        // With b = 0 the partially dark boundary column joins the first run.
        const auto r = cce_count(block_image({10, 10}), cfg);
        CHECK(r.b == 0);
        CHECK(r.cluster_count == 2);
        CHECK(r.run_spans[0].second == 9);
        cfg.explicit_b = 2;
        CHECK(cce_count(block_image({10, 10}), cfg).cluster_count == 0);
    }
    SUBCASE("no dark pixels near the diagonal") {
        std::vector<std::uint8_t> px(16, 255);
        for (int i = 0; i < 4; ++i) px[i * 4 + i] = 0;
        CceConfig cfg;
        cfg.band_width = 1;
        const auto r = cce_count(OdImage(4, px), cfg);
        CHECK(r.cluster_count == 0);
        CHECK_FALSE(r.warnings.empty());
    }
    SUBCASE("default band width") {
        CHECK(CceConfig{}.resolved_band_width(40) == 1);
        CHECK(CceConfig{}.resolved_band_width(240) == 4);
        CHECK(CceConfig{}.resolved_band_width(8640) == 172);
    }
    SUBCASE("constant image propagates the degenerate histogram") {
        CHECK_THROWS_AS(cce_count(OdImage(3, std::vector<std::uint8_t>(9, 0))), NumericError);
    }
}

TEST_CASE("property: ideal block images recover the block count") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t w = 1 + rng.next() % 4;
        const std::size_t blocks = 1 + rng.next() % 7;
        std::vector<std::size_t> sizes(blocks);
        for (auto& s : sizes) s = w + 2 + rng.next() % 12;
        CceConfig cfg;
        cfg.band_width = w;
        auto img = block_image(sizes);
        if (blocks == 1) {
            // a single block is all dark; add one light pixel pair far from the band
            auto px = std::vector<std::uint8_t>(img.pixels().begin(), img.pixels().end());
            const auto n = img.size();
            px[n - 1] = px[(n - 1) * n] = 255;
            img = OdImage(n, px);
        }
        CHECK(cce_count(img, cfg).cluster_count == blocks);
    }
}

TEST_CASE("property: strictly increasing intensity remaps leave the count unchanged") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto lo = static_cast<std::uint8_t>(rng.next() % 128);
        const auto hi = static_cast<std::uint8_t>(lo + 1 + rng.next() % (255 - lo));
        CceConfig cfg;
        cfg.band_width = 2;
        const auto base = cce_count(block_image({6, 9, 12, 5}), cfg);
        const auto mapped = cce_count(block_image({6, 9, 12, 5}, lo, hi, lo), cfg);
        CHECK(mapped.cluster_count == base.cluster_count);
        CHECK(mapped.cluster_count == 4);
    }
}

TEST_CASE("CCE report JSON carries the fields") {
    CceConfig cfg;
    cfg.band_width = 2;
    const auto json = cce_report_to_json(cce_count(block_image({5, 5}), cfg));
    for (const char* key : {"\"otsu_threshold\"", "\"b\"", "\"cluster_count\"", "\"run_spans\"", "\"signal\""})
        CHECK(json.find(key) != std::string::npos);
}
