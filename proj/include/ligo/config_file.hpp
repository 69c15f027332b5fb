#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "ligo/model.hpp"
#include "ligo/trainer.hpp"

namespace ligo {

/// Parsed flat config file: `key = value` lines under [model], [train] and
/// [grow] sections, '#' comments.
struct FileConfig {
    bool has_model = false;
    bool has_train = false;
    ModelConfig model;
    TrainConfig train;
    std::map<std::string, std::string> grow;
};

FileConfig parse_config_file(const std::filesystem::path& path);
FileConfig parse_config_text(const std::string& text, const std::string& origin);

} // namespace ligo
