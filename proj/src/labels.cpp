#include "vatscope/labels.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "vatscope/error.hpp"
#include "vatscope/io.hpp"

namespace vatscope {

bool is_scene(std::string_view s) noexcept { return std::find(kScenes.begin(), kScenes.end(), s) != kScenes.end(); }
bool is_city(std::string_view s) noexcept { return std::find(kCities.begin(), kCities.end(), s) != kCities.end(); }

std::vector<std::string> LabeledManifest::scenes() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.scene);
    return out;
}

std::vector<std::string> LabeledManifest::cities() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.city);
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// One CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"' && trim(cur).empty()) {
            cur.clear();
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw InputError("manifest line " + std::to_string(line_no) + ": unterminated quote");
    fields.emplace_back(trim(cur));
    return fields;
}

}  // namespace

LabeledManifest parse_manifest(std::string_view csv) {
    if (csv.starts_with("\xEF\xBB\xBF")) csv.remove_prefix(3);
    LabeledManifest manifest;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    bool header = false;
    while (!csv.empty()) {
        const auto nl = csv.find('\n');
        const auto line = trim(csv.substr(0, nl));
        csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line, line_no);
        if (!header) {
            if (fields != std::vector<std::string>{"path", "scene", "city"})
                throw InputError("manifest line " + std::to_string(line_no) + ": expected header 'path,scene,city'");
            header = true;
            continue;
        }
        if (fields.size() != 3)
            throw InputError("manifest line " + std::to_string(line_no) + ": expected 3 columns, found " +
                             std::to_string(fields.size()));
        if (fields[0].empty()) throw InputError("manifest line " + std::to_string(line_no) + ": empty path");
        if (!is_scene(fields[1]))
            throw InputError("manifest line " + std::to_string(line_no) + ": unknown scene '" + fields[1] + "'");
        if (!is_city(fields[2]))
            throw InputError("manifest line " + std::to_string(line_no) + ": unknown city '" + fields[2] + "'");
        if (!seen.insert(fields[0]).second)
            throw InputError("manifest line " + std::to_string(line_no) + ": duplicate path '" + fields[0] + "'");
        manifest.records.push_back({fields[0], fields[1], fields[2]});
    }
    if (!header) throw InputError("manifest line 1: missing header 'path,scene,city'");
    return manifest;
}

LabeledManifest read_manifest(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string manifest_to_csv(const LabeledManifest& manifest) {
    std::string out = "path,scene,city\n";
    for (const auto& r : manifest.records) {
        if (r.path.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : r.path) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            out += q + "\"";
        } else {
            out += r.path;
        }
        out += "," + r.scene + "," + r.city + "\n";
    }
    return out;
}

SceneCity parse_dcase_filename(std::string_view name) {
    const std::string original(name);
    if (const auto slash = name.find_last_of("/\\"); slash != std::string_view::npos) name.remove_prefix(slash + 1);
    auto fail = [&](const std::string& why) {
        return InputError("file name '" + original + "': " + why +
                          " (expected scene-city-location-segment-device.wav)");
    };
    if (!name.ends_with(".wav")) throw fail("missing .wav extension");
    name.remove_suffix(4);

    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= name.size(); ++i) {
        if (i == name.size() || name[i] == '-') {
            parts.push_back(name.substr(start, i - start));
            start = i + 1;
        }
    }
    if (parts.size() != 5) throw fail("expected 5 hyphen-separated fields");
    auto digits = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!digits(parts[2]) || !digits(parts[3])) throw fail("location and segment must be numeric");
    if (parts[4].empty()) throw fail("empty device id");
    if (!is_scene(parts[0])) throw fail("unknown scene '" + std::string(parts[0]) + "'");
    if (!is_city(parts[1])) throw fail("unknown city '" + std::string(parts[1]) + "'");
    return {std::string(parts[0]), std::string(parts[1])};
}

std::string Rgb::hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

namespace {

constexpr std::array<Rgb, 10> kQualitative10 = {{{0x1f, 0x77, 0xb4}, {0xff, 0x7f, 0x0e}, {0x2c, 0xa0, 0x2c},
                                                 {0xd6, 0x27, 0x28}, {0x94, 0x67, 0xbd}, {0x8c, 0x56, 0x4b},
                                                 {0xe3, 0x77, 0xc2}, {0x7f, 0x7f, 0x7f}, {0xbc, 0xbd, 0x22},
                                                 {0x17, 0xbe, 0xcf}}};
constexpr std::array<Rgb, 6> kQualitative6 = {{{0x1b, 0x9e, 0x77}, {0xd9, 0x5f, 0x02}, {0x75, 0x70, 0xb3},
                                               {0xe7, 0x29, 0x8a}, {0x66, 0xa6, 0x1e}, {0xe6, 0xab, 0x02}}};

}  // namespace

const Palette& scene_palette() {
    static const Palette p = [] {
        Palette out;
        for (std::size_t i = 0; i < kScenes.size(); ++i) out.emplace(std::string(kScenes[i]), kQualitative10[i]);
        return out;
    }();
    return p;
}

const Palette& city_palette() {
    static const Palette p = [] {
        Palette out;
        for (std::size_t i = 0; i < kCities.size(); ++i) out.emplace(std::string(kCities[i]), kQualitative6[i]);
        return out;
    }();
    return p;
}

Palette generic_palette(std::span<const std::string> labels) {
    const std::set<std::string> distinct(labels.begin(), labels.end());
    Palette out;
    std::size_t i = 0;
    for (const auto& l : distinct) out.emplace(l, kQualitative10[i++ % kQualitative10.size()]);
    return out;
}

double LabelStack::mean_run_length() const noexcept {
    return runs.empty() ? 0.0 : static_cast<double>(labels.size()) / static_cast<double>(runs.size());
}

std::size_t LabelStack::distinct_labels() const {
    return std::set<std::string>(labels.begin(), labels.end()).size();
}

LabelStack label_stack(const Permutation& order, std::span<const std::string> labels, const Palette& palette) {
    if (order.size() != labels.size())
        throw InputError("label_stack: " + std::to_string(labels.size()) + " labels for an ordering of " +
                         std::to_string(order.size()));
    LabelStack s;
    s.labels.reserve(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& l = labels[order[i]];
        s.labels.push_back(l);
        if (!s.runs.empty() && s.runs.back().first == l)
            ++s.runs.back().second;
        else
            s.runs.emplace_back(l, 1);
        if (!s.colours.contains(l)) {
            const auto it = palette.find(l);
            s.colours.emplace(l, it != palette.end() ? it->second : Rgb{0x80, 0x80, 0x80});
        }
    }
    return s;
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string stacks_to_svg(std::span<const StackPanel> panels, std::span<const double> link_dist,
                          const SvgOptions& opts) {
    constexpr double margin = 20.0, title_h = 20.0, gap = 10.0, profile_w = 120.0, legend_row = 16.0;
    std::size_t n = 0;
    for (const auto& p : panels) n = std::max(n, p.stack ? p.stack->labels.size() : 0);

    // Legend entries: union of colours, panel by panel.
    std::vector<std::pair<std::string, Rgb>> legend;
    for (const auto& p : panels) {
        if (!p.stack) continue;
        for (const auto& [label, rgb] : p.stack->colours)
            if (std::none_of(legend.begin(), legend.end(), [&](const auto& e) { return e.first == label; }))
                legend.emplace_back(label, rgb);
    }

    const double bars_w = static_cast<double>(panels.size()) * (opts.bar_width + gap);
    const double plot_x = margin + bars_w + (link_dist.empty() ? 0.0 : profile_w + gap);
    const double width = plot_x + 200.0;
    const double height = std::max(margin * 2 + title_h + opts.height,
                                   margin * 2 + title_h + legend_row * static_cast<double>(legend.size()));
    const double row_h = n > 0 ? opts.height / static_cast<double>(n) : 0.0;
    const double top = margin + title_h;

    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt3(width) + "\" height=\"" + fmt3(height) +
           "\" viewBox=\"0 0 " + fmt3(width) + " " + fmt3(height) + "\">\n";
    if (opts.timestamp_comment) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        svg += "<!-- generated " + std::to_string(static_cast<long long>(now)) + " -->\n";
    }
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt3(width) + "\" height=\"" + fmt3(height) + "\" fill=\"#ffffff\"/>\n";

    double x = margin;
    for (const auto& p : panels) {
        svg += "<text x=\"" + fmt3(x + opts.bar_width / 2) + "\" y=\"" + fmt3(margin + 12) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" + xml_escape(p.title) +
               "</text>\n";
        if (p.stack) {
            std::size_t pos = 0;
            for (const auto& [label, len] : p.stack->runs) {
                svg += "<rect x=\"" + fmt3(x) + "\" y=\"" + fmt3(top + row_h * static_cast<double>(pos)) +
                       "\" width=\"" + fmt3(opts.bar_width) + "\" height=\"" +
                       fmt3(row_h * static_cast<double>(len)) + "\" fill=\"" + p.stack->colours.at(label).hex() +
                       "\"><title>" + xml_escape(label) + " (" + std::to_string(len) + ")</title></rect>\n";
                pos += len;
            }
        }
        x += opts.bar_width + gap;
    }

    if (!link_dist.empty()) {
        const double peak = *std::max_element(link_dist.begin(), link_dist.end());
        std::string points;
        for (std::size_t i = 0; i < link_dist.size(); ++i) {
            const double px = x + (peak > 0 ? link_dist[i] / peak : 0.0) * profile_w;
            const double py = top + row_h * (static_cast<double>(i) + 0.5);
            points += (i ? " " : "") + fmt3(px) + "," + fmt3(py);
        }
        svg += "<polyline fill=\"none\" stroke=\"#000000\" stroke-width=\"1\" points=\"" + points + "\"/>\n";
    }

    double ly = top;
    for (const auto& [label, rgb] : legend) {
        svg += "<rect x=\"" + fmt3(plot_x) + "\" y=\"" + fmt3(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
               rgb.hex() + "\"/>\n";
        svg += "<text x=\"" + fmt3(plot_x + 16) + "\" y=\"" + fmt3(ly + 10) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(label) + "</text>\n";
        ly += legend_row;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace vatscope
