#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "semcom/framework.hpp"
#include "semcom/seed.hpp"
#include "semcom/textcorpus.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("semcom_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline semcom::ModelConfig tiny_model(int vocab_size) {
    semcom::ModelConfig c;
    c.aedm.num_layers = 1;
    c.aedm.num_heads = 2;
    c.aedm.d_model = 16;
    c.aedm.d_ff = 32;
    c.aedm.d_sym = 4;
    c.aedm.dropout = 0.0;
    c.aedm.vocab_size = vocab_size;
    c.unet_base_channels = 2;
    c.critic_base_channels = 2;
    return c;
}

// Random content rows with ids drawn from [4, vocab).
inline std::vector<std::vector<int>> random_rows(int n, int min_len, int max_len, int vocab, std::uint64_t seed) {
    semcom::SplitMix rng(seed);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < n; ++i) {
        int len = min_len + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - min_len + 1)));
        std::vector<int> r;
        for (int k = 0; k < len; ++k) r.push_back(4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab - 4))));
        rows.push_back(r);
    }
    return rows;
}

// Concatenated copy of every parameter.
inline at::Tensor snapshot(const torch::nn::Module& m) {
    std::vector<at::Tensor> parts;
    for (const auto& p : m.parameters()) parts.push_back(p.detach().reshape({-1}).clone());
    return parts.empty() ? at::zeros({0}) : torch::cat(parts);
}

inline bool bit_identical(const at::Tensor& a, const at::Tensor& b) {
    return a.sizes() == b.sizes() && torch::equal(a, b);
}

}  // namespace testutil
