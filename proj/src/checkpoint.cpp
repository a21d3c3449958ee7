#include "semcom/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include <torch/torch.h>

#include "semcom/errors.hpp"

namespace semcom {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'C', 'K', 'P', 'T', '\x01'};

std::string dtype_name(at::ScalarType t) {
    switch (t) {
        case at::kFloat: return "float32";
        case at::kDouble: return "float64";
        case at::kLong: return "int64";
        default: throw FormatError("checkpoint: unsupported dtype " + std::string(c10::toString(t)));
    }
}

at::ScalarType dtype_from(const std::string& s) {
    if (s == "float32") return at::kFloat;
    if (s == "float64") return at::kDouble;
    if (s == "int64") return at::kLong;
    throw FormatError("checkpoint: unknown dtype '" + s + "'");
}

}  // namespace

const at::Tensor& NamedTensors::at(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw FormatError("checkpoint: missing tensor '" + name + "'");
}

void save_named_tensors(const std::filesystem::path& path, const NamedTensors& data) {
    nlohmann::json header = data.header;
    header["format"] = kCheckpointFormat;
    auto table = nlohmann::json::array();
    std::vector<at::Tensor> blobs;
    std::uint64_t offset = 0;
    for (const auto& [name, t] : data.tensors) {
        auto c = t.detach().to(at::kCPU).contiguous();
        const auto nbytes = static_cast<std::uint64_t>(c.nbytes());
        table.push_back({{"name", name},
                         {"dtype", dtype_name(c.scalar_type())},
                         {"shape", c.sizes().vec()},
                         {"offset", offset},
                         {"nbytes", nbytes}});
        offset += nbytes;
        blobs.push_back(std::move(c));
    }
    header["tensors"] = std::move(table);
    const std::string text = header.dump();

    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(kMagic, sizeof kMagic);
        const std::uint64_t n = text.size();
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& b : blobs)
            out.write(static_cast<const char*>(b.data_ptr()), static_cast<std::streamsize>(b.nbytes()));
        if (!out) throw IoError("error while writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

NamedTensors load_named_tensors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint " + path.string());
    char magic[8];
    std::uint64_t n = 0;
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw FormatError(path.string() + ": not a checkpoint file");
    if (!in.read(reinterpret_cast<char*>(&n), sizeof n) || n > (std::uint64_t{1} << 32))
        throw FormatError(path.string() + ": corrupt header length");
    std::string text(n, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(n)))
        throw FormatError(path.string() + ": truncated header");

    NamedTensors out;
    try {
        out.header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (out.header.value("format", 0) != kCheckpointFormat)
        throw FormatError(path.string() + ": unsupported checkpoint format");
    const auto data_start = static_cast<std::streamoff>(sizeof kMagic + sizeof n + n);
    for (const auto& e : out.header.at("tensors")) {
        auto shape = e.at("shape").get<std::vector<std::int64_t>>();
        auto t = at::empty(shape, at::TensorOptions().dtype(dtype_from(e.at("dtype").get<std::string>())));
        const auto nbytes = e.at("nbytes").get<std::uint64_t>();
        if (nbytes != t.nbytes()) throw FormatError(path.string() + ": tensor size mismatch");
        in.seekg(data_start + static_cast<std::streamoff>(e.at("offset").get<std::uint64_t>()));
        if (!in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(nbytes)))
            throw FormatError(path.string() + ": truncated tensor data");
        out.tensors.emplace_back(e.at("name").get<std::string>(), std::move(t));
    }
    out.header.erase("tensors");
    return out;
}

void append_module_state(NamedTensors& out, const std::string& prefix,
                         const torch::nn::Module& module) {
    for (const auto& p : module.named_parameters(true)) out.tensors.emplace_back(prefix + "." + p.key(), p.value());
    for (const auto& b : module.named_buffers(true)) out.tensors.emplace_back(prefix + "." + b.key(), b.value());
}

void load_module_state(torch::nn::Module& module, const std::string& prefix,
                       const NamedTensors& data) {
    std::unordered_map<std::string, const at::Tensor*> index;
    for (const auto& [n, t] : data.tensors) index.emplace(n, &t);
    torch::NoGradGuard no_grad;
    auto copy = [&](const std::string& key, at::Tensor& dst) {
        auto it = index.find(prefix + "." + key);
        if (it == index.end()) throw FormatError("checkpoint: missing tensor '" + prefix + "." + key + "'");
        if (!it->second->sizes().equals(dst.sizes()))
            throw FormatError("checkpoint: shape mismatch for '" + prefix + "." + key + "'");
        dst.copy_(*it->second);
    };
    std::size_t expected = 0;
    for (auto& p : module.named_parameters(true)) {
        copy(p.key(), p.value());
        ++expected;
    }
    for (auto& b : module.named_buffers(true)) {
        copy(b.key(), b.value());
        ++expected;
    }
    std::size_t stored = 0;
    for (const auto& [n, t] : data.tensors) stored += n.rfind(prefix + ".", 0) == 0;
    if (stored != expected)
        throw FormatError("checkpoint: '" + prefix + "' holds " + std::to_string(stored) + " tensors, module has " +
                          std::to_string(expected));
}

}  // namespace semcom
