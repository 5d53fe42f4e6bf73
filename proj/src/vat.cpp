#include "vatscope/vat.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "vatscope/error.hpp"
#include "vatscope/io.hpp"

namespace vatscope {

OdImage::OdImage(std::size_t n, std::vector<std::uint8_t> pixels) : n_(n), pixels_(std::move(pixels)) {
    if (n_ == 0) throw InputError("image must be at least 1x1");
    if (pixels_.size() != n_ * n_)
        throw InputError("image holds " + std::to_string(pixels_.size()) + " pixels, expected " +
                         std::to_string(n_ * n_));
}

VatOrdering vat_order(const DissimilarityMatrix& m) {
    const std::size_t n = m.size();
    if (n == 0) throw InputError("vat_order: empty matrix");

    // Strict comparison keeps the lexicographically first maximizing pair.
    std::size_t start = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (m(i, j) > best) {
                best = m(i, j);
                start = i;
            }

    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<double> link(n, 0.0);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<bool> placed(n, false);

    std::size_t current = start;
    for (std::size_t step = 0; step < n; ++step) {
        placed[current] = true;
        order.push_back(current);
        const auto row = m.row(current);
        std::size_t next = n;
        double next_dist = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v) {
            if (placed[v]) continue;
            if (row[v] < nearest[v]) nearest[v] = row[v];
            if (next == n || nearest[v] < next_dist) {
                next = v;
                next_dist = nearest[v];
            }
        }
        if (next == n) break;
        link[step + 1] = next_dist;
        current = next;
    }
    return VatOrdering{Permutation(std::move(order)), std::move(link)};
}

OdImage odi_from(const DissimilarityMatrix& m, const VatOrdering& o) {
    const std::size_t n = m.size();
    if (o.order.size() != n)
        throw InputError("ordering has " + std::to_string(o.order.size()) + " entries, matrix is " +
                         std::to_string(n) + "x" + std::to_string(n));
    const double dmax = m.max_value();
    std::vector<std::uint8_t> pixels(n * n, 0);
    if (dmax > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto src = m.row(o.order[i]);
            for (std::size_t j = 0; j < n; ++j) {
                // std::round rounds halves away from zero.
                const double q = std::round(255.0 * src[o.order[j]] / dmax);
                pixels[i * n + j] = static_cast<std::uint8_t>(std::min(255.0, q));
            }
        }
    }
    return OdImage(n, std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const OdImage& img) {
    const auto header = "P5\n" + std::to_string(img.size()) + " " + std::to_string(img.size()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

OdImage decode_pgm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&](const char* what) {
        skip_space();
        std::size_t v = 0;
        const std::size_t begin = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
        if (pos == begin) throw InputError(std::string("PGM: missing ") + what);
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw InputError("PGM: expected P5 magic");
    pos = 2;
    const auto width = read_uint("width");
    const auto height = read_uint("height");
    const auto maxval = read_uint("maxval");
    if (maxval != 255) throw InputError("PGM: only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw InputError("PGM: malformed header");
    ++pos;
    if (width != height) throw InputError("PGM: ordered dissimilarity images must be square");
    if (bytes.size() - pos != width * height)
        throw InputError("PGM: payload is " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                         std::to_string(width * height));
    return OdImage(width, std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end()));
}

void write_pgm(const OdImage& img, const std::filesystem::path& path) { write_file_atomic(path, encode_pgm(img)); }

OdImage read_pgm(const std::filesystem::path& path) {
    try {
        return decode_pgm(read_file_bytes(path));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string ordering_to_json(const VatOrdering& o) {
    nlohmann::json j;
    j["order"] = std::vector<std::size_t>(o.order.indices().begin(), o.order.indices().end());
    j["link_dist"] = o.link_dist;
    return j.dump() + "\n";
}

VatOrdering ordering_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        VatOrdering o{Permutation(j.at("order").get<std::vector<std::size_t>>()),
                      j.at("link_dist").get<std::vector<double>>()};
        if (o.link_dist.size() != o.order.size()) throw InputError("ordering: link_dist length differs from order");
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("ordering JSON: ") + e.what());
    }
}

}  // namespace vatscope
