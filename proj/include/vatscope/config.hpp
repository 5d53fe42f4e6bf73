#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vatscope/audio.hpp"
#include "vatscope/cce.hpp"
#include "vatscope/specvat.hpp"

namespace vatscope {

/// Everything a run can tune. JSON form:
///   {"audio": {...AudioConfig}, "specvat": {...}, "cce": {...}, "distance": {"zscore": false}}
/// Every section and key is optional; unknown keys are rejected.
struct PipelineConfig {
    AudioConfig audio;
    SpecVatConfig specvat;
    CceConfig cce;
    bool zscore = false;
};

PipelineConfig parse_config(std::string_view json);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& cfg);

}  // namespace vatscope
