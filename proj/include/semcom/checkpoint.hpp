#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <ATen/Tensor.h>
#include <json.hpp>
#include <torch/nn/module.h>

namespace semcom {

// Named-tensor container.
//
//   bytes 0..7   magic "SEMCKPT\x01"
//   bytes 8..15  header length N, little-endian u64
//   next N bytes UTF-8 JSON header: {"format": 1, ..., "tensors": [
//                  {"name", "dtype", "shape", "offset", "nbytes"}, ...]}
//   remainder    raw little-endian tensor data; offsets are relative to the
//                first byte after the header
//
// Reload is bit-exact.
struct NamedTensors {
    nlohmann::json header;  // without the "tensors" table
    std::vector<std::pair<std::string, at::Tensor>> tensors;

    const at::Tensor& at(const std::string& name) const;
};

inline constexpr int kCheckpointFormat = 1;

void save_named_tensors(const std::filesystem::path& path, const NamedTensors& data);
NamedTensors load_named_tensors(const std::filesystem::path& path);

// Parameters and buffers of a module, names prefixed with "<prefix>.".
void append_module_state(NamedTensors& out, const std::string& prefix,
                         const torch::nn::Module& module);
// Copies tensors back into the module; every parameter/buffer must be present
// with a matching shape.
void load_module_state(torch::nn::Module& module, const std::string& prefix,
                       const NamedTensors& data);

}  // namespace semcom
