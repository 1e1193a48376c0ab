// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ltdm/core.hpp"

namespace ltdm {

nlohmann::json dataset_to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

nlohmann::json dictionary_to_json(const Dictionary& d, const std::vector<std::string>& alphabet);
Dictionary dictionary_from_json(const nlohmann::json& j, const std::vector<std::string>& alphabet);

nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Pretty-printed with a trailing newline; output is a pure function of j.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace ltdm
