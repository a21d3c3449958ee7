#include "semcom/eval/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "semcom/errors.hpp"

namespace semcom::eval {

namespace {

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string sha1_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw Error("sha1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string git_blob_hash(std::string_view content) {
    std::string buf = "blob " + std::to_string(content.size());
    buf.push_back('\0');
    buf.append(content);
    return sha1_hex(buf);
}

std::string git_blob_hash_file(const std::filesystem::path& path) { return git_blob_hash(read_all(path)); }

std::string content_hash(const std::vector<std::pair<std::string, std::string>>& named_hashes) {
    auto sorted = named_hashes;
    std::sort(sorted.begin(), sorted.end());
    std::string buf;
    for (const auto& [name, h] : sorted) buf += h + "  " + name + "\n";
    return sha1_hex(buf);
}

nlohmann::json write_manifest(const std::filesystem::path& dir, const Manifest& m) {
    nlohmann::json inputs = nlohmann::json::array();
    std::vector<std::pair<std::string, std::string>> named;
    for (const auto& p : m.inputs) {
        const auto h = git_blob_hash_file(p);
        inputs.push_back({{"path", p.string()}, {"blob", h}});
        named.emplace_back(p.filename().string(), h);
    }
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& p : m.outputs) {
        const auto full = dir / p;
        if (std::filesystem::is_regular_file(full))
            outputs.push_back({{"path", p.string()}, {"blob", git_blob_hash_file(full)}});
    }
    nlohmann::json j{
        {"format", 1},
        {"command", m.command},
        {"config", m.config},
        {"seeds", m.seeds},
        {"inputs", inputs},
        {"input_content_hash", content_hash(named)},
        {"outputs", outputs},
    };
    for (const auto& [k, v] : m.extra.items()) j[k] = v;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << j.dump(2) << '\n';
    return j;
}

nlohmann::json read_manifest(const std::filesystem::path& dir) {
    try {
        return nlohmann::json::parse(read_all(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad manifest in " + dir.string() + ": " + e.what());
    }
}

}  // namespace semcom::eval
