// Acceptance gates. One PASS/FAIL/SKIP line per criterion; exit status is
// non-zero if any gating criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "vatscope/audio.hpp"
#include "vatscope/cce.hpp"
#include "vatscope/error.hpp"
#include "vatscope/io.hpp"
#include "vatscope/labels.hpp"
#include "vatscope/report.hpp"
#include "vatscope/specvat.hpp"
#include "vatscope/synth.hpp"
#include "vatscope/vat.hpp"

using namespace vatscope;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void vat_prim_equivalence() {
    SplitMix64 rng(101);
    const auto t0 = std::chrono::steady_clock::now();
    int exact = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 63);  // [2, 64]
        const auto m = oracle::random_dissim(n, rng);
        const auto got = vat_order(m);
        const auto [order, weights] = oracle::prim(m, oracle::furthest_pair_seed(m));
        exact += std::equal(order.begin(), order.end(), got.order.indices().begin());
    }
    const double secs = seconds_since(t0);
    verdict(1, exact == 500 && secs < 10.0, "VAT-Prim equivalence",
            fmt("%d/500 exact orders, %.2f s (limit 10 s)", exact, secs));
}

void mst_weight() {
    SplitMix64 rng(202);
    int ok = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 8);  // [2, 9]
        const auto m = oracle::random_dissim(n, rng);
        const auto got = vat_order(m);
        double sum = 0.0;
        for (double w : got.link_dist) sum += w;
        const double err = std::abs(sum - oracle::kruskal_weight(m));
        worst = std::max(worst, err);
        ok += err <= 1e-12;
    }
    verdict(2, ok == 200, "MST weight", fmt("%d/200 within 1e-12, worst |diff| %.3g", ok, worst));
}

void otsu_oracle() {
    SplitMix64 rng(303);
    int ok = 0, compared = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 64);
        std::vector<std::uint8_t> px(n * n);
        // Alternate full-range noise with few-level images, which produce ties.
        const int levels = trial % 2 == 0 ? 256 : 2 + static_cast<int>(rng.uniform() * 6);
        const int step = 255 / std::max(1, levels - 1);
        for (auto& p : px) p = static_cast<std::uint8_t>(std::min(255, static_cast<int>(rng.uniform() * levels) * step));
        const int expected = oracle::otsu_bruteforce(px);
        ++compared;
        if (expected < 0) {
            try {
                otsu_threshold(OdImage(n, px));
            } catch (const NumericError&) {
                ++ok;
            }
            continue;
        }
        ok += otsu_threshold(OdImage(n, px)) == expected;
    }
    verdict(3, ok == 1000, "Otsu oracle", fmt("%d/%d thresholds equal exhaustive search", ok, compared));
}

void cce_recovery() {
    std::string detail;
    bool all = true;
    for (std::size_t c = 1; c <= 6; ++c) {
        int hits = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            BlobSpec spec;
            spec.clusters = c;
            spec.n_per = 40;
            spec.dim = 8;
            spec.sep = 10;
            spec.seed = seed;
            const auto d = euclidean_dissim(gaussian_blobs(spec).features);
            const auto img = odi_from(d, vat_order(d));
            hits += cce_count(img, CceConfig{}).cluster_count == c;
        }
        all = all && hits >= 95;
        detail += fmt("%sc=%zu %d/100", c == 1 ? "" : ", ", c, hits);
    }
    verdict(4, all, "CCE synthetic recovery", detail + " (need >= 95 each)");
}

DissimilarityMatrix shuffled(const DissimilarityMatrix& m, SplitMix64& rng, std::vector<std::size_t>& block_of,
                             const std::vector<std::size_t>& sizes) {
    const std::size_t n = m.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform() * i)]);
    std::vector<std::size_t> orig_block;
    for (std::size_t b = 0; b < sizes.size(); ++b) orig_block.insert(orig_block.end(), sizes[b], b);
    block_of.assign(n, 0);
    std::vector<double> v(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        block_of[i] = orig_block[perm[i]];
        for (std::size_t j = 0; j < n; ++j) v[i * n + j] = m(perm[i], perm[j]);
    }
    return DissimilarityMatrix::from_values(n, std::move(v));
}

void specvat_fidelity() {
    const std::vector<std::size_t> sizes{15, 15, 15};
    const auto ideal = block_dissim(sizes, 0.01, 1.0);
    SplitMix64 rng(505);
    int separated = 0;
    for (int trial = 0; trial < 100; ++trial) {
        // trial 0 is the matrix as built; the rest are random relabelings of it
        std::vector<std::size_t> block_of;
        const auto m = trial == 0 ? ideal : shuffled(ideal, rng, block_of, sizes);
        if (trial == 0)
            for (std::size_t b = 0; b < 3; ++b) block_of.insert(block_of.end(), 15, b);
        SpecVatConfig cfg;
        cfg.k = 3;
        const auto r = specvat(m, cfg);
        double within = 0.0, between = 1e300;
        for (std::size_t i = 0; i < 45; ++i)
            for (std::size_t j = i + 1; j < 45; ++j) {
                if (block_of[i] == block_of[j]) within = std::max(within, r.d_prime(i, j));
                else between = std::min(between, r.d_prime(i, j));
            }
        separated += within < between;
    }
    int picked = 0;
    std::vector<std::size_t> ks;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto m = noisy_block_dissim(sizes, 0.1, 0.02, 1.0, seed);
        const auto sel = a_specvat_select_k(m, SpecVatConfig{});
        picked += sel.k_best == 3;
    }
    verdict(5, separated == 100 && picked >= 90, "SpecVAT block fidelity",
            fmt("ideal blocks separated %d/100 (need 100), noisy k_best = 3 in %d/100 (need >= 90)", separated,
                picked));
}

void eigensolver() {
    SplitMix64 rng(606);
    int ok = 0;
    double worst_res = 0.0, worst_orth = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd a(50, 50);
        for (int i = 0; i < 50; ++i)
            for (int j = i; j < 50; ++j) a(i, j) = a(j, i) = 2.0 * rng.uniform() - 1.0;
        const auto pairs = sym_eigen_topk(a, 50);
        const double fro = a.norm();
        double res = 0.0;
        for (Eigen::Index c = 0; c < pairs.vectors.cols(); ++c)
            res = std::max(res, (a * pairs.vectors.col(c) - pairs.values(c) * pairs.vectors.col(c)).norm() / fro);
        const Eigen::MatrixXd gram = pairs.vectors.transpose() * pairs.vectors;
        const double orth = (gram - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff();
        worst_res = std::max(worst_res, res);
        worst_orth = std::max(worst_orth, orth);
        ok += pairs.vectors.cols() == 50 && res <= 1e-8 && orth <= 1e-8;
    }
    verdict(6, ok == 100, "Eigensolver",
            fmt("%d/100 matrices, worst residual/||A||_F %.2e, worst |V'V - I| %.2e (limits 1e-8)", ok, worst_res,
                worst_orth));
}

std::vector<double> tone(double freq, double rate, std::size_t len) {
    std::vector<double> s(len);
    for (std::size_t i = 0; i < len; ++i) s[i] = 0.5 * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
    return s;
}

void audio_anchors() {
    const AudioConfig cfg;
    const AudioClip ten{tone(220.0, 22050, 220500), 22050};
    const auto spec = stft_power(ten, cfg);
    const auto feat = log_mel_mean(ten, cfg);

    const auto a440 = log_mel_mean(AudioClip{tone(440.0, 22050, 22050), 22050}, cfg);
    const auto fb = mel_filterbank(cfg);
    std::size_t nearest = 0;
    for (std::size_t m = 0; m < fb.n_mels; ++m)
        if (std::abs(fb.centers_hz[m] - 440.0) < std::abs(fb.centers_hz[nearest] - 440.0)) nearest = m;
    const auto argmax = static_cast<std::size_t>(std::max_element(a440.begin(), a440.end()) - a440.begin());

    const auto out = resample(AudioClip{tone(1000.0, 48000, 48000), 48000}, 22050);
    const auto ideal = tone(1000.0, 22050, out.samples.size());
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        dot += out.samples[i] * ideal[i];
        na += out.samples[i] * out.samples[i];
        nb += ideal[i] * ideal[i];
    }
    const double corr = dot / std::sqrt(na * nb);

    verdict(7, spec.frames == 431 && feat.size() == 128 && argmax == nearest && corr >= 0.999, "Audio anchors",
            fmt("frames %zu (want 431), dim %zu (want 128), 440 Hz band %zu vs nearest center %zu, "
                "48k->22.05k correlation %.6f (need >= 0.999)",
                spec.frames, feat.size(), argmax, nearest, corr));
}

std::vector<std::pair<fs::path, std::string>> tree_bytes(const fs::path& root) {
    std::vector<std::pair<fs::path, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().parent_path().filename() == "cache") continue;
        const auto b = read_file_bytes(e.path());
        files.emplace_back(fs::relative(e.path(), root), std::string(b.begin(), b.end()));
    }
    std::sort(files.begin(), files.end());
    return files;
}

void pipeline_shape() {
    const fs::path work = fs::temp_directory_path() / ("vatscope_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work / "audio");

    // 60 half-second clips: one per (scene, city), each a scene-specific tone
    // plus a city-specific second partial and seeded noise.
    SplitMix64 rng(808);
    LabeledManifest manifest;
    for (std::size_t s = 0; s < kScenes.size(); ++s)
        for (std::size_t c = 0; c < kCities.size(); ++c) {
            std::vector<double> x(11025);
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double t = static_cast<double>(i) / 22050.0;
                x[i] = 0.3 * std::sin(2 * std::numbers::pi * (200.0 + 150.0 * s) * t) +
                       0.1 * std::sin(2 * std::numbers::pi * (3000.0 + 400.0 * c) * t) + 0.01 * rng.normal();
            }
            const std::string name = std::string(kScenes[s]) + "-" + std::string(kCities[c]) + "-" +
                                     std::to_string(s * 10 + c) + "-0-a.wav";
            const std::vector<std::vector<double>> ch{x};
            write_file_atomic(work / "audio" / name, encode_wav(ch, 22050, WavSampleFormat::pcm16));
            manifest.records.push_back({"audio/" + name, std::string(kScenes[s]), std::string(kCities[c])});
        }

    auto run = [&](const fs::path& out) {
        const auto features = compute_features(manifest, work, FeatureOptions{AudioConfig{}, out / "cache", 1});
        std::size_t reports = 0;
        for (auto g : {Grouping::by_scene, Grouping::by_city}) {
            ReportOptions opts;
            opts.grouping = g;
            opts.out_dir = out;
            const auto summary = run_report(manifest, features, opts);
            reports += summary.emitted();
        }
        return reports;
    };
    const auto first = run(work / "run1");
    const auto second = run(work / "run2");
    std::size_t odi = 0;
    for (const auto& e : fs::recursive_directory_iterator(work / "run1")) odi += e.path().filename() == "odi.pgm";
    const bool same = tree_bytes(work / "run1") == tree_bytes(work / "run2");
    fs::remove_all(work);
    verdict(8, first == 16 && second == 16 && odi == 16 && same, "Pipeline shape",
            fmt("%zu subset reports (want 16), %zu ODIs, reruns %s", first, odi, same ? "byte-identical" : "DIFFER"));
}

void full_dataset() {
    const char* manifest_path = std::getenv("VATSCOPE_DCASE_MANIFEST");
    if (!manifest_path || !*manifest_path) {
        std::printf("SKIP [9] Full-dataset experiment: set VATSCOPE_DCASE_MANIFEST to run (non-gating)\n");
        return;
    }
    const auto manifest = read_manifest(manifest_path);
    const char* cache = std::getenv("VATSCOPE_CACHE");
    const fs::path out = fs::temp_directory_path() / "vatscope_full_dataset";
    const auto features = compute_features(manifest, fs::path(manifest_path).parent_path(),
                                           FeatureOptions{AudioConfig{}, cache ? fs::path(cache) : out / "cache", 4});
    ReportOptions opts;
    opts.out_dir = out;
    opts.threads = 4;
    opts.grouping = Grouping::by_city;
    std::string detail;
    bool in_range = true;
    for (const auto& s : run_report(manifest, features, opts).subsets) {
        if (s.skipped) continue;
        const auto c = s.cluster_count.value_or(0);
        in_range = in_range && c >= 6 && c <= 18;
        detail += s.name + "=" + std::to_string(c) + " ";
    }
    opts.grouping = Grouping::all;
    const auto all = run_report(manifest, features, opts).subsets.at(0).cluster_count.value_or(0);
    detail += "all=" + std::to_string(all);
    std::printf("INFO [9] Full-dataset experiment (non-gating): %s; per-city in 6..18: %s; all-data > 10: %s\n",
                detail.c_str(), in_range ? "yes" : "no", all > 10 ? "yes" : "no");
}

}  // namespace

int main() {
    vat_prim_equivalence();
    mst_weight();
    otsu_oracle();
    cce_recovery();
    specvat_fidelity();
    eigensolver();
    audio_anchors();
    pipeline_shape();
    full_dataset();
    std::printf("%s: %d gating criteria failed\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures);
    return failures == 0 ? 0 : 1;
}
