#include "vatscope/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "vatscope/audio.hpp"
#include "vatscope/cce.hpp"
#include "vatscope/error.hpp"
#include "vatscope/io.hpp"
#include "vatscope/parallel.hpp"
#include "vatscope/specvat.hpp"
#include "vatscope/vat.hpp"

namespace vatscope {

namespace fs = std::filesystem;

Grouping grouping_from_string(const std::string& s) {
    if (s == "by_scene") return Grouping::by_scene;
    if (s == "by_city") return Grouping::by_city;
    if (s == "all") return Grouping::all;
    if (s == "single_subset" || s == "single") return Grouping::single_subset;
    throw InputError("unknown grouping '" + s + "' (expected by_scene, by_city, all or single_subset)");
}

Method method_from_string(const std::string& s) {
    if (s == "vat") return Method::vat;
    if (s == "specvat") return Method::specvat;
    throw InputError("unknown method '" + s + "' (expected vat or specvat)");
}

std::string to_string(Grouping g) {
    switch (g) {
        case Grouping::by_scene: return "by_scene";
        case Grouping::by_city: return "by_city";
        case Grouping::all: return "all";
        case Grouping::single_subset: return "single_subset";
    }
    return {};
}

std::string to_string(Method m) { return m == Method::vat ? "vat" : "specvat"; }

std::size_t ReportSummary::emitted() const noexcept {
    std::size_t count = 0;
    for (const auto& s : subsets) count += s.skipped ? 0 : 1;
    return count;
}

// -- features -------------------------------------------------------------------

FeatureMatrix compute_features(const LabeledManifest& manifest, const fs::path& base_dir, const FeatureOptions& opts) {
    opts.audio.validate();
    if (manifest.records.empty()) throw InputError("manifest has no records");

    std::vector<fs::path> paths;
    std::vector<std::string> missing;
    for (const auto& r : manifest.records) {
        fs::path p(r.path);
        if (p.is_relative()) p = base_dir / p;
        if (!fs::is_regular_file(p)) missing.push_back(p.string());
        paths.push_back(std::move(p));
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " audio file(s) missing:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw InputError(msg);
    }

    const std::size_t d = opts.audio.n_mels;
    const auto config_key = opts.audio.fingerprint();
    std::vector<double> values(paths.size() * d);
    parallel_for_chunks(paths.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            fs::path cache_file;
            if (!opts.cache_dir.empty()) {
                const auto key = manifest.records[i].path + "\n" + std::to_string(fs::file_size(paths[i])) + "\n" +
                                 config_key;
                char name[32];
                std::snprintf(name, sizeof name, "%016llx.vatf", static_cast<unsigned long long>(fnv1a64(key)));
                cache_file = opts.cache_dir / name;
                if (fs::is_regular_file(cache_file)) {
                    try {
                        const auto cached = read_vatf(cache_file);
                        if (cached.rows() == 1 && cached.dims() == d) {
                            std::copy(cached.values().begin(), cached.values().end(), values.begin() + i * d);
                            continue;
                        }
                    } catch (const InputError&) {
                        // unreadable cache entry; recompute
                    }
                }
            }
            const auto row = extract_features(paths[i], opts.audio);
            std::copy(row.begin(), row.end(), values.begin() + i * d);
            if (!cache_file.empty()) write_vatf(cache_file, FeatureMatrix(1, d, row));
        }
    });
    return FeatureMatrix(paths.size(), d, std::move(values));
}

// -- grouping ---------------------------------------------------------------------

std::vector<std::pair<std::string, std::vector<std::size_t>>> group_records(const LabeledManifest& manifest,
                                                                             Grouping grouping,
                                                                             const std::string& subset) {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    auto select = [&](std::string_view name, auto&& pred) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < manifest.records.size(); ++i)
            if (pred(manifest.records[i])) idx.push_back(i);
        groups.emplace_back(std::string(name), std::move(idx));
    };
    switch (grouping) {
        case Grouping::by_scene:
            for (auto scene : kScenes) select(scene, [&](const ManifestRecord& r) { return r.scene == scene; });
            break;
        case Grouping::by_city:
            for (auto city : kCities) select(city, [&](const ManifestRecord& r) { return r.city == city; });
            break;
        case Grouping::all:
            select("all", [](const ManifestRecord&) { return true; });
            break;
        case Grouping::single_subset:
            if (is_scene(subset))
                select(subset, [&](const ManifestRecord& r) { return r.scene == subset; });
            else if (is_city(subset))
                select(subset, [&](const ManifestRecord& r) { return r.city == subset; });
            else
                throw InputError("single_subset needs a scene or city name, got '" + subset + "'");
            break;
    }
    return groups;
}

// -- per-subset analysis ------------------------------------------------------------

namespace {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SubsetReport analyse_subset(const std::string& name, const std::vector<std::size_t>& idx,
                            const LabeledManifest& manifest, const FeatureMatrix& features,
                            const ReportOptions& opts, const fs::path& dir) {
    SubsetReport rep;
    rep.name = name;
    rep.n = idx.size();
    if (idx.size() < 2) {
        rep.skipped = true;
        rep.warnings.push_back("subset '" + name + "' has " + std::to_string(idx.size()) +
                               " record(s); at least 2 are needed");
        return rep;
    }

    const auto sub = features.select_rows(idx);
    const auto dissim = euclidean_dissim(sub, DistanceOptions{1, opts.config.zscore});

    VatOrdering ordering;
    OdImage image;
    if (opts.method == Method::vat) {
        ordering = vat_order(dissim);
        image = odi_from(dissim, ordering);
    } else {
        SpecVatConfig cfg = opts.config.specvat;
        if (opts.k) {
            cfg.k = *opts.k;
        } else if (idx.size() >= 3) {
            const auto sel = a_specvat_select_k(dissim, cfg);
            cfg.k = sel.k_best;
            rep.warnings.insert(rep.warnings.end(), sel.warnings.begin(), sel.warnings.end());
            write_file_atomic(dir / "kselect.json", k_selection_to_json(sel));
        } else {
            cfg.k = 1;
        }
        if (cfg.k > idx.size() - 1) {
            rep.warnings.push_back("k reduced from " + std::to_string(cfg.k) + " to " + std::to_string(idx.size() - 1));
            cfg.k = idx.size() - 1;
        }
        rep.k = cfg.k;
        auto result = specvat(dissim, cfg);
        if (!result.embedding.zero_rows.empty())
            rep.warnings.push_back(std::to_string(result.embedding.zero_rows.size()) +
                                   " embedding row(s) were all zero and left unnormalized");
        ordering = std::move(result.ordering);
        image = std::move(result.image);
    }

    write_pgm(image, dir / "odi.pgm");
    write_file_atomic(dir / "ordering.json", ordering_to_json(ordering));

    std::vector<std::string> scenes, cities;
    for (auto i : idx) {
        scenes.push_back(manifest.records[i].scene);
        cities.push_back(manifest.records[i].city);
    }
    const auto scene_stack = label_stack(ordering.order, scenes, scene_palette());
    const auto city_stack = label_stack(ordering.order, cities, city_palette());
    rep.scene_runs = scene_stack.run_count();
    rep.city_runs = city_stack.run_count();
    const StackPanel panels[] = {{"C", &city_stack}, {"S", &scene_stack}};
    write_file_atomic(dir / "stack.svg",
                      stacks_to_svg(panels, ordering.link_dist, SvgOptions{800.0, 40.0, opts.svg_timestamp}));

    std::string csv = "rank,record,path,scene,city,link_dist\n";
    for (std::size_t r = 0; r < ordering.order.size(); ++r) {
        const auto rec = idx[ordering.order[r]];
        const auto& m = manifest.records[rec];
        csv += std::to_string(r) + "," + std::to_string(rec) + "," + m.path + "," + m.scene + "," + m.city + "," +
               fmt_g17(ordering.link_dist[r]) + "\n";
    }
    write_file_atomic(dir / "stack.csv", csv);

    try {
        const auto cce = cce_count(image, opts.config.cce);
        rep.cluster_count = cce.cluster_count;
        rep.warnings.insert(rep.warnings.end(), cce.warnings.begin(), cce.warnings.end());
        write_file_atomic(dir / "cce.json", cce_report_to_json(cce));
    } catch (const NumericError& e) {
        rep.warnings.push_back(std::string("cluster count unavailable: ") + e.what());
    } catch (const InputError& e) {
        rep.warnings.push_back(std::string("cluster count unavailable: ") + e.what());
    }
    return rep;
}

}  // namespace

ReportSummary run_report(const LabeledManifest& manifest, const FeatureMatrix& features, const ReportOptions& opts) {
    if (features.rows() != manifest.size())
        throw InputError("feature store has " + std::to_string(features.rows()) + " rows, manifest has " +
                         std::to_string(manifest.size()) + " records");
    const auto groups = group_records(manifest, opts.grouping, opts.subset);
    const fs::path root = opts.out_dir / to_string(opts.grouping);

    ReportSummary summary{opts.grouping, opts.method, std::vector<SubsetReport>(groups.size())};
    parallel_for_chunks(groups.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t g = begin; g < end; ++g)
            summary.subsets[g] =
                analyse_subset(groups[g].first, groups[g].second, manifest, features, opts, root / groups[g].first);
    });

    write_file_atomic(opts.out_dir / ("summary_" + to_string(opts.grouping) + ".json"), summary_to_json(summary));
    write_file_atomic(opts.out_dir / ("summary_" + to_string(opts.grouping) + ".csv"), summary_to_csv(summary));
    return summary;
}

std::string summary_to_json(const ReportSummary& summary) {
    nlohmann::json j;
    j["title"] = "Estimated cluster count by city and scene";
    j["grouping"] = to_string(summary.grouping);
    j["method"] = to_string(summary.method);
    j["subset_reports"] = summary.emitted();
    auto rows = nlohmann::json::array();
    for (const auto& s : summary.subsets) {
        nlohmann::json r;
        r["subset"] = s.name;
        r["n"] = s.n;
        r["skipped"] = s.skipped;
        r["cluster_count"] = s.cluster_count ? nlohmann::json(*s.cluster_count) : nlohmann::json(nullptr);
        if (s.k) r["k"] = *s.k;
        r["scene_runs"] = s.scene_runs;
        r["city_runs"] = s.city_runs;
        r["warnings"] = s.warnings;
        rows.push_back(std::move(r));
    }
    j["subsets"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string summary_to_csv(const ReportSummary& summary) {
    std::string csv = "subset,n,cluster_count,scene_runs,city_runs\n";
    for (const auto& s : summary.subsets) {
        if (s.skipped) continue;
        csv += s.name + "," + std::to_string(s.n) + "," + (s.cluster_count ? std::to_string(*s.cluster_count) : "") +
               "," + std::to_string(s.scene_runs) + "," + std::to_string(s.city_runs) + "\n";
    }
    return csv;
}

}  // namespace vatscope
