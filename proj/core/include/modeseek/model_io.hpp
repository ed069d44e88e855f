#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"
#include "modeseek/model.hpp"

namespace modeseek {

/// Canonical JSON form {"kind", "vocab", "params"}. Serialization is
/// deterministic and round-trips bit-exactly: save(load(save(m))) ==
/// save(m) byte for byte.
nlohmann::ordered_json model_to_json(const AutoregressiveModel& model);
std::string model_to_string(const AutoregressiveModel& model);

std::shared_ptr<const AutoregressiveModel> model_from_json(const nlohmann::ordered_json& j);

/// Loads a model file: JSON objects per model_to_json, or an explicit
/// distribution in TSV form (compiled to its trie model). Throws ParseError.
std::shared_ptr<const AutoregressiveModel> load_model_file(const std::filesystem::path& path);

void save_model_file(const AutoregressiveModel& model, const std::filesystem::path& path);

}  // namespace modeseek
