#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace semcom::eval {

std::string sha1_hex(std::string_view data);
// Git blob id: sha1("blob <size>\0" + content).
std::string git_blob_hash(std::string_view content);
std::string git_blob_hash_file(const std::filesystem::path& path);

// Combined hash over (name, blob hash) pairs sorted by name.
std::string content_hash(const std::vector<std::pair<std::string, std::string>>& named_hashes);

struct Manifest {
    std::string command;
    nlohmann::json config;
    nlohmann::json seeds = nlohmann::json::array();
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;  // relative to the output directory
    nlohmann::json extra = nlohmann::json::object();
};

// Writes <dir>/manifest.json with input and output blob hashes and the combined
// content hash of the inputs.
nlohmann::json write_manifest(const std::filesystem::path& dir, const Manifest& m);
nlohmann::json read_manifest(const std::filesystem::path& dir);

}  // namespace semcom::eval
