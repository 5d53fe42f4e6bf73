// vatscope: cluster-tendency analysis of audio feature sets.
//
// Exit codes: 0 ok, 2 input error, 3 numeric failure.

#include <algorithm>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vatscope/audio.hpp"
#include "vatscope/cce.hpp"
#include "vatscope/config.hpp"
#include "vatscope/core.hpp"
#include "vatscope/error.hpp"
#include "vatscope/io.hpp"
#include "vatscope/labels.hpp"
#include "vatscope/report.hpp"
#include "vatscope/specvat.hpp"
#include "vatscope/synth.hpp"
#include "vatscope/vat.hpp"

namespace fs = std::filesystem;
using namespace vatscope;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct Shared {
    std::string config_path;
    std::string out_dir = ".";
    unsigned threads = 1;

    PipelineConfig config() const { return config_path.empty() ? PipelineConfig{} : load_config(config_path); }
};

void add_shared(CLI::App* cmd, Shared& s) {
    cmd->add_option("--config", s.config_path, "JSON config (audio/specvat/cce/distance sections)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", s.out_dir, "Output directory");
    cmd->add_option("--threads", s.threads, "Worker threads")->check(CLI::PositiveNumber);
}

std::string text_of(const fs::path& p) {
    const auto bytes = read_file_bytes(p);
    return std::string(bytes.begin(), bytes.end());
}

// "index,label" CSV as written by `synth`.
std::vector<std::string> read_label_csv(const fs::path& p) {
    const auto text = text_of(p);
    std::vector<std::string> labels;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw InputError(p.string() + ":" + std::to_string(line_no) + ": expected 'index,label'");
        if (std::stoul(line.substr(0, comma)) != labels.size())
            throw InputError(p.string() + ":" + std::to_string(line_no) + ": indices must run 0..n-1 in order");
        labels.push_back(line.substr(comma + 1));
    }
    return labels;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vatscope: VAT / SpecVAT cluster-tendency analysis for audio feature sets"};
    app.require_subcommand(1);

    // features
    Shared feat_shared;
    std::string feat_manifest, feat_audio_dir, feat_base, feat_cache;
    auto* feat = app.add_subcommand("features", "Extract log-mel feature vectors for a manifest");
    add_shared(feat, feat_shared);
    auto* feat_m =
        feat->add_option("--manifest", feat_manifest, "CSV with header path,scene,city")->check(CLI::ExistingFile);
    auto* feat_d = feat->add_option("--audio-dir", feat_audio_dir,
                                    "Label every scene-city-location-segment-device.wav below this directory")
                       ->check(CLI::ExistingDirectory);
    feat_m->excludes(feat_d);
    feat->add_option("--base-dir", feat_base, "Directory relative paths resolve against (default: manifest dir)");
    feat->add_option("--cache", feat_cache, "Feature cache directory (default: <out>/cache)");

    // vat
    Shared vat_shared;
    std::string vat_features;
    bool vat_zscore = false;
    auto* vat = app.add_subcommand("vat", "VAT ordering and ordered dissimilarity image");
    add_shared(vat, vat_shared);
    vat->add_option("--features", vat_features, "VATF feature store")->required()->check(CLI::ExistingFile);
    vat->add_flag("--zscore", vat_zscore, "Standardize each feature dimension first");

    // specvat
    Shared spec_shared;
    std::string spec_features;
    std::optional<std::size_t> spec_k;
    bool spec_zscore = false;
    auto* spec = app.add_subcommand("specvat", "SpecVAT ordering and image (k chosen automatically unless --k)");
    add_shared(spec, spec_shared);
    spec->add_option("--features", spec_features, "VATF feature store")->required()->check(CLI::ExistingFile);
    spec->add_option("--k", spec_k, "Eigenvector count")->check(CLI::PositiveNumber);
    spec->add_flag("--zscore", spec_zscore, "Standardize each feature dimension first");

    // cce
    Shared cce_shared;
    std::string cce_image, cce_mode;
    std::optional<std::size_t> cce_width, cce_b;
    auto* cce = app.add_subcommand("cce", "Cluster count extraction from an ODI (PGM)");
    add_shared(cce, cce_shared);
    cce->add_option("--image", cce_image, "Binary PGM image")->required()->check(CLI::ExistingFile);
    cce->add_option("--band-width", cce_width, "Off-diagonal band width in pixels")->check(CLI::PositiveNumber);
    cce->add_option("--threshold-mode", cce_mode, "half_max (default) or zero");
    cce->add_option("--b", cce_b, "Explicit signal cutoff");

    // stack
    Shared stack_shared;
    std::string stack_ordering, stack_manifest, stack_labels;
    auto* stack = app.add_subcommand("stack", "Label stacks for an ordering");
    add_shared(stack, stack_shared);
    stack->add_option("--ordering", stack_ordering, "ordering.json")->required()->check(CLI::ExistingFile);
    auto* stack_m = stack->add_option("--manifest", stack_manifest, "Manifest CSV (scene and city stacks)")
                        ->check(CLI::ExistingFile);
    auto* stack_l =
        stack->add_option("--labels", stack_labels, "index,label CSV (single stack)")->check(CLI::ExistingFile);
    stack_m->excludes(stack_l);

    // synth
    Shared synth_shared;
    BlobSpec blob;
    auto* synth = app.add_subcommand("synth", "Gaussian blob fixtures with ground-truth labels");
    add_shared(synth, synth_shared);
    synth->add_option("--clusters", blob.clusters, "Cluster count")->check(CLI::PositiveNumber);
    synth->add_option("--n-per", blob.n_per, "Points per cluster")->check(CLI::PositiveNumber);
    synth->add_option("--dim", blob.dim, "Dimension")->check(CLI::PositiveNumber);
    synth->add_option("--sep", blob.sep, "Center separation in units of sigma");
    synth->add_option("--sigma", blob.sigma, "Within-cluster standard deviation");
    synth->add_option("--seed", blob.seed, "SplitMix64 seed");

    // report
    Shared rep_shared;
    std::string rep_manifest, rep_features, rep_base, rep_cache, rep_group = "by_scene", rep_method = "vat",
                                                                 rep_subset;
    std::optional<std::size_t> rep_k;
    bool rep_svg_time = false;
    auto* rep = app.add_subcommand("report", "Per-subset VAT/SpecVAT analysis with cluster counts and label stacks");
    add_shared(rep, rep_shared);
    rep->add_option("--manifest", rep_manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
    rep->add_option("--features", rep_features, "Precomputed VATF store in manifest order")->check(CLI::ExistingFile);
    rep->add_option("--base-dir", rep_base, "Directory relative paths resolve against (default: manifest dir)");
    rep->add_option("--cache", rep_cache, "Feature cache directory (default: <out>/cache)");
    rep->add_option("--group", rep_group, "by_scene, by_city, all or single_subset");
    rep->add_option("--subset", rep_subset, "Scene or city for --group single_subset");
    rep->add_option("--method", rep_method, "vat or specvat");
    rep->add_option("--k", rep_k, "SpecVAT eigenvector count (automatic when omitted)")->check(CLI::PositiveNumber);
    rep->add_flag("--svg-timestamp", rep_svg_time, "Stamp SVG files with a generation-time comment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    try {
        if (*feat) {
            const auto cfg = feat_shared.config();
            const fs::path out(feat_shared.out_dir);
            LabeledManifest manifest;
            fs::path base;
            if (!feat_manifest.empty()) {
                manifest = read_manifest(feat_manifest);
                base = feat_base.empty() ? fs::path(feat_manifest).parent_path() : fs::path(feat_base);
            } else {
                if (feat_audio_dir.empty()) throw InputError("features needs --manifest or --audio-dir");
                base = fs::absolute(feat_audio_dir);
                std::vector<std::string> names;
                for (const auto& e : fs::recursive_directory_iterator(base))
                    if (e.is_regular_file() && e.path().extension() == ".wav")
                        names.push_back(fs::relative(e.path(), base).generic_string());
                std::sort(names.begin(), names.end());
                for (const auto& name : names) {
                    auto sc = parse_dcase_filename(name);
                    manifest.records.push_back({name, std::move(sc.scene), std::move(sc.city)});
                }
                if (manifest.records.empty()) throw InputError("no .wav files under " + base.string());
            }
            const auto features = compute_features(
                manifest, base,
                FeatureOptions{cfg.audio, feat_cache.empty() ? out / "cache" : fs::path(feat_cache), feat_shared.threads});
            write_vatf(out / "features.vatf", features);
            write_file_atomic(out / "manifest.csv", manifest_to_csv(manifest));
            std::cout << "wrote " << features.rows() << " x " << features.dims() << " features to "
                      << (out / "features.vatf").string() << "\n";
        } else if (*vat) {
            const auto cfg = vat_shared.config();
            const fs::path out(vat_shared.out_dir);
            const auto d = euclidean_dissim(read_vatf(vat_features),
                                            DistanceOptions{vat_shared.threads, vat_zscore || cfg.zscore});
            const auto o = vat_order(d);
            write_file_atomic(out / "ordering.json", ordering_to_json(o));
            write_pgm(odi_from(d, o), out / "odi.pgm");
            std::cout << "ordered " << d.size() << " records\n";
        } else if (*spec) {
            auto cfg = spec_shared.config();
            const fs::path out(spec_shared.out_dir);
            const auto d = euclidean_dissim(read_vatf(spec_features),
                                            DistanceOptions{spec_shared.threads, spec_zscore || cfg.zscore});
            if (spec_k) {
                cfg.specvat.k = *spec_k;
            } else {
                const auto sel = a_specvat_select_k(d, cfg.specvat);
                write_file_atomic(out / "kselect.json", k_selection_to_json(sel));
                for (const auto& w : sel.warnings) std::cerr << "warning: " << w << "\n";
                cfg.specvat.k = sel.k_best;
            }
            const auto result = specvat(d, cfg.specvat);
            write_vatf(out / "embedding.vatf", result.embedding.coords);
            write_file_atomic(out / "ordering.json", ordering_to_json(result.ordering));
            write_pgm(result.image, out / "odi.pgm");
            std::cout << "SpecVAT with k = " << cfg.specvat.k << " on " << d.size() << " records\n";
        } else if (*cce) {
            auto cfg = cce_shared.config().cce;
            if (cce_width) cfg.band_width = cce_width;
            if (!cce_mode.empty()) cfg.threshold_mode = threshold_mode_from_string(cce_mode);
            if (cce_b) cfg.explicit_b = cce_b;
            const auto report = cce_count(read_pgm(cce_image), cfg);
            write_file_atomic(fs::path(cce_shared.out_dir) / "cce.json", cce_report_to_json(report));
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << report.cluster_count << "\n";
        } else if (*stack) {
            const auto ordering = ordering_from_json(text_of(stack_ordering));
            const fs::path out(stack_shared.out_dir);
            if (!stack_manifest.empty()) {
                const auto manifest = read_manifest(stack_manifest);
                const auto scenes = manifest.scenes(), cities = manifest.cities();
                const auto s = label_stack(ordering.order, scenes, scene_palette());
                const auto c = label_stack(ordering.order, cities, city_palette());
                const StackPanel panels[] = {{"C", &c}, {"S", &s}};
                write_file_atomic(out / "stack.svg", stacks_to_svg(panels, ordering.link_dist));
                std::string csv = "rank,record,scene,city\n";
                for (std::size_t r = 0; r < ordering.order.size(); ++r)
                    csv += std::to_string(r) + "," + std::to_string(ordering.order[r]) + "," + s.labels[r] + "," +
                           c.labels[r] + "\n";
                write_file_atomic(out / "stack.csv", csv);
                std::cout << "scene runs " << s.run_count() << ", city runs " << c.run_count() << "\n";
            } else if (!stack_labels.empty()) {
                const auto labels = read_label_csv(stack_labels);
                const auto s = label_stack(ordering.order, labels, generic_palette(labels));
                const StackPanel panels[] = {{"L", &s}};
                write_file_atomic(out / "stack.svg", stacks_to_svg(panels, ordering.link_dist));
                std::string csv = "rank,record,label\n";
                for (std::size_t r = 0; r < ordering.order.size(); ++r)
                    csv += std::to_string(r) + "," + std::to_string(ordering.order[r]) + "," + s.labels[r] + "\n";
                write_file_atomic(out / "stack.csv", csv);
                std::cout << "runs " << s.run_count() << "\n";
            } else {
                throw InputError("stack needs --manifest or --labels");
            }
        } else if (*synth) {
            const auto data = gaussian_blobs(blob);
            const fs::path out(synth_shared.out_dir);
            write_vatf(out / "features.vatf", data.features);
            write_file_atomic(out / "labels.csv", labels_to_csv(data.labels));
            std::cout << "wrote " << data.features.rows() << " points in " << blob.clusters << " clusters\n";
        } else if (*rep) {
            ReportOptions opts;
            opts.config = rep_shared.config();
            opts.grouping = grouping_from_string(rep_group);
            opts.method = method_from_string(rep_method);
            opts.subset = rep_subset;
            opts.k = rep_k;
            opts.out_dir = rep_shared.out_dir;
            opts.threads = rep_shared.threads;
            opts.svg_timestamp = rep_svg_time;
            const auto manifest = read_manifest(rep_manifest);
            FeatureMatrix features;
            if (!rep_features.empty()) {
                features = read_vatf(rep_features);
            } else {
                const fs::path base = rep_base.empty() ? fs::path(rep_manifest).parent_path() : fs::path(rep_base);
                features = compute_features(manifest, base,
                                            FeatureOptions{opts.config.audio,
                                                           rep_cache.empty() ? opts.out_dir / "cache" : fs::path(rep_cache),
                                                           opts.threads});
            }
            const auto summary = run_report(manifest, features, opts);
            for (const auto& s : summary.subsets) {
                for (const auto& w : s.warnings) std::cerr << "warning: " << s.name << ": " << w << "\n";
                if (!s.skipped)
                    std::cout << s.name << "\t" << s.n << "\t"
                              << (s.cluster_count ? std::to_string(*s.cluster_count) : "-") << "\n";
            }
            std::cout << summary.emitted() << " subset reports written to " << opts.out_dir.string() << "\n";
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return 0;
}
