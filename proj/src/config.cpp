#include "vatscope/config.hpp"

#include <set>

#include <json.hpp>

#include "vatscope/error.hpp"
#include "vatscope/io.hpp"

namespace vatscope {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const std::string& name, std::initializer_list<const char*> allowed) {
    if (!section.is_object()) throw InputError("config: section '" + name + "' must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : section.items())
        if (!keys.contains(key)) throw InputError("config: unknown key '" + name + "." + key + "'");
}

template <typename T>
void read(const json& section, const char* key, T& out) {
    if (section.contains(key)) out = section.at(key).get<T>();
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    try {
        const auto root = json::parse(text);
        reject_unknown(root, "<root>", {"audio", "specvat", "cce", "distance"});
        if (root.contains("audio")) {
            const auto& a = root["audio"];
            reject_unknown(a, "audio", {"target_rate", "n_fft", "hop", "n_mels", "fmin", "fmax", "log_floor",
                                        "centered", "mel_scale", "log_mode"});
            read(a, "target_rate", cfg.audio.target_rate);
            read(a, "n_fft", cfg.audio.n_fft);
            read(a, "hop", cfg.audio.hop);
            read(a, "n_mels", cfg.audio.n_mels);
            read(a, "fmin", cfg.audio.fmin);
            if (a.contains("fmax") && !a["fmax"].is_null()) cfg.audio.fmax = a["fmax"].get<double>();
            read(a, "log_floor", cfg.audio.log_floor);
            read(a, "centered", cfg.audio.centered);
            if (a.contains("mel_scale")) {
                const auto s = a["mel_scale"].get<std::string>();
                if (s == "slaney") cfg.audio.mel_scale = MelScale::slaney;
                else if (s == "htk") cfg.audio.mel_scale = MelScale::htk;
                else throw InputError("config: audio.mel_scale must be 'slaney' or 'htk'");
            }
            if (a.contains("log_mode")) {
                const auto s = a["log_mode"].get<std::string>();
                if (s == "natural") cfg.audio.log_mode = LogMode::natural;
                else if (s == "decibel") cfg.audio.log_mode = LogMode::decibel;
                else throw InputError("config: audio.log_mode must be 'natural' or 'decibel'");
            }
            cfg.audio.validate();
        }
        if (root.contains("specvat")) {
            const auto& s = root["specvat"];
            reject_unknown(s, "specvat", {"k", "k_max", "knn_scale", "sigma_floor"});
            read(s, "k", cfg.specvat.k);
            read(s, "k_max", cfg.specvat.k_max);
            read(s, "knn_scale", cfg.specvat.knn_scale);
            read(s, "sigma_floor", cfg.specvat.sigma_floor);
            if (cfg.specvat.k < 1 || cfg.specvat.k_max < 2 || cfg.specvat.knn_scale < 1 || !(cfg.specvat.sigma_floor > 0))
                throw InputError("config: specvat needs k >= 1, k_max >= 2, knn_scale >= 1, sigma_floor > 0");
        }
        if (root.contains("cce")) {
            const auto& c = root["cce"];
            reject_unknown(c, "cce", {"band_width", "threshold_mode", "explicit_b"});
            if (c.contains("band_width") && !c["band_width"].is_null()) {
                cfg.cce.band_width = c["band_width"].get<std::size_t>();
                if (*cfg.cce.band_width < 1) throw InputError("config: cce.band_width must be >= 1");
            }
            if (c.contains("threshold_mode"))
                cfg.cce.threshold_mode = threshold_mode_from_string(c["threshold_mode"].get<std::string>());
            if (c.contains("explicit_b") && !c["explicit_b"].is_null())
                cfg.cce.explicit_b = c["explicit_b"].get<std::size_t>();
        }
        if (root.contains("distance")) {
            const auto& d = root["distance"];
            reject_unknown(d, "distance", {"zscore"});
            read(d, "zscore", cfg.zscore);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string config_to_json(const PipelineConfig& cfg) {
    json j;
    j["audio"] = {{"target_rate", cfg.audio.target_rate},
                  {"n_fft", cfg.audio.n_fft},
                  {"hop", cfg.audio.hop},
                  {"n_mels", cfg.audio.n_mels},
                  {"fmin", cfg.audio.fmin},
                  {"fmax", cfg.audio.resolved_fmax()},
                  {"log_floor", cfg.audio.log_floor},
                  {"centered", cfg.audio.centered},
                  {"mel_scale", cfg.audio.mel_scale == MelScale::slaney ? "slaney" : "htk"},
                  {"log_mode", cfg.audio.log_mode == LogMode::natural ? "natural" : "decibel"}};
    j["specvat"] = {{"k", cfg.specvat.k},
                    {"k_max", cfg.specvat.k_max},
                    {"knn_scale", cfg.specvat.knn_scale},
                    {"sigma_floor", cfg.specvat.sigma_floor}};
    j["cce"] = {{"band_width", cfg.cce.band_width ? json(*cfg.cce.band_width) : json(nullptr)},
                {"threshold_mode", to_string(cfg.cce.threshold_mode)},
                {"explicit_b", cfg.cce.explicit_b ? json(*cfg.cce.explicit_b) : json(nullptr)}};
    j["distance"] = {{"zscore", cfg.zscore}};
    return j.dump(2) + "\n";
}

}  // namespace vatscope
