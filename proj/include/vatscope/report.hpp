#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vatscope/config.hpp"
#include "vatscope/core.hpp"
#include "vatscope/labels.hpp"

namespace vatscope {

enum class Grouping { by_scene, by_city, all, single_subset };
enum class Method { vat, specvat };

Grouping grouping_from_string(const std::string& s);
Method method_from_string(const std::string& s);
std::string to_string(Grouping g);
std::string to_string(Method m);

struct FeatureOptions {
    AudioConfig audio;
    std::filesystem::path cache_dir;  // empty disables caching
    unsigned threads = 1;
};

/// One log-mel row per manifest record, in manifest order. Relative paths are
/// resolved against `base_dir`. Cached vectors are keyed by
/// (path, byte size, audio config). Missing files are all listed in one InputError.
FeatureMatrix compute_features(const LabeledManifest& manifest, const std::filesystem::path& base_dir,
                               const FeatureOptions& opts);

struct ReportOptions {
    Grouping grouping = Grouping::by_scene;
    std::string subset;           // scene or city name for single_subset
    Method method = Method::vat;
    std::optional<std::size_t> k; // SpecVAT eigenvector count; automatic when unset
    PipelineConfig config;
    std::filesystem::path out_dir;
    unsigned threads = 1;
    bool svg_timestamp = false;
};

struct SubsetReport {
    std::string name;
    std::size_t n = 0;
    bool skipped = false;
    std::optional<std::size_t> cluster_count;
    std::optional<std::size_t> k;          // SpecVAT only
    std::size_t scene_runs = 0;
    std::size_t city_runs = 0;
    std::vector<std::string> warnings;
};

struct ReportSummary {
    Grouping grouping = Grouping::by_scene;
    Method method = Method::vat;
    std::vector<SubsetReport> subsets;

    std::size_t emitted() const noexcept;
};

/// Subsets of record indices for a grouping, named by scene/city (or "all").
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_records(const LabeledManifest& manifest,
                                                                             Grouping grouping,
                                                                             const std::string& subset = {});

/// Per subset: odi.pgm, ordering.json, stack.svg, stack.csv, cce.json (and
/// kselect.json for automatic SpecVAT) under out_dir/<grouping>/<subset>/,
/// plus summary_<grouping>.json and summary_<grouping>.csv in out_dir.
ReportSummary run_report(const LabeledManifest& manifest, const FeatureMatrix& features, const ReportOptions& opts);

std::string summary_to_json(const ReportSummary& summary);
std::string summary_to_csv(const ReportSummary& summary);

}  // namespace vatscope
