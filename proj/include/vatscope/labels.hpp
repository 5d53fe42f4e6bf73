#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vatscope/core.hpp"

namespace vatscope {

inline constexpr std::array<std::string_view, 10> kScenes = {
    "airport",       "bus",       "metro",       "metro_station", "park", "public_square",
    "shopping_mall", "street_pedestrian", "street_traffic", "tram"};
inline constexpr std::array<std::string_view, 6> kCities = {"barcelona", "helsinki", "london",
                                                            "paris",     "stockholm", "vienna"};

bool is_scene(std::string_view s) noexcept;
bool is_city(std::string_view s) noexcept;

struct ManifestRecord {
    std::string path;
    std::string scene;
    std::string city;
};

struct LabeledManifest {
    std::vector<ManifestRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    std::vector<std::string> scenes() const;
    std::vector<std::string> cities() const;
};

/// CSV with header `path,scene,city`. Errors carry the 1-based line number.
LabeledManifest parse_manifest(std::string_view csv);
LabeledManifest read_manifest(const std::filesystem::path& path);
std::string manifest_to_csv(const LabeledManifest& manifest);

struct SceneCity {
    std::string scene;
    std::string city;
};

/// Base names of the form scene-city-location-segment-device.wav.
SceneCity parse_dcase_filename(std::string_view name);

struct Rgb {
    unsigned char r = 0, g = 0, b = 0;
    std::string hex() const;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

using Palette = std::map<std::string, Rgb, std::less<>>;

/// Fixed qualitative palettes, keyed by vocabulary entry.
const Palette& scene_palette();
const Palette& city_palette();
/// Cycles the 10-colour scene palette over the sorted distinct labels.
Palette generic_palette(std::span<const std::string> labels);

struct LabelStack {
    std::vector<std::string> labels;                   // in VAT order
    std::vector<std::pair<std::string, std::size_t>> runs;
    Palette colours;

    std::size_t run_count() const noexcept { return runs.size(); }
    double mean_run_length() const noexcept;
    std::size_t distinct_labels() const;
};

/// Labels permuted by `order`, then run-length encoded.
LabelStack label_stack(const Permutation& order, std::span<const std::string> labels, const Palette& palette);

struct StackPanel {
    std::string title;  // e.g. "C" or "S"
    const LabelStack* stack = nullptr;
};

struct SvgOptions {
    double height = 800.0;
    double bar_width = 40.0;
    bool timestamp_comment = false;
};

/// Side-by-side stacked bars (one per panel) with a legend; when link_dist
/// is non-empty a path profile is drawn to the right of the bars.
std::string stacks_to_svg(std::span<const StackPanel> panels, std::span<const double> link_dist,
                          const SvgOptions& opts = {});

}  // namespace vatscope
