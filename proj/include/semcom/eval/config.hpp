#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcom/channel.hpp"
#include "semcom/framework.hpp"
#include "semcom/textcorpus.hpp"
#include "semcom/training.hpp"

namespace semcom::eval {

struct EvalConfig {
    int n_sentences = 500;
    std::vector<double> snr_grid = {0, 3, 6, 9, 12, 15, 18, 21, 24};
    std::vector<Framework> frameworks = all_frameworks();
    std::vector<channel::ChannelKind> channels = {channel::ChannelKind::awgn, channel::ChannelKind::rician,
                                                  channel::ChannelKind::rayleigh};
    std::vector<std::uint64_t> seeds = {0};
    int workers = 1;
    std::vector<double> csi_error_vars = {0.002, 0.02, 0.2};
    int max_len = 0;  // greedy decoding cap; 0 = corpus.max_len + 1
    int batch_size = 64;
    int top_n = 11;
    int max_points = 1500;  // t-SNE points per signal kind

    void validate() const;
};

// Everything a CLI run can be configured with.
struct RunConfig {
    std::uint64_t seed = 0;
    text::CorpusConfig corpus;
    ModelConfig model;
    training::TrainConfig train;
    EvalConfig eval;

    // Propagates the master seed into the per-module configs.
    void set_seed(std::uint64_t s);
    int decode_len() const { return eval.max_len > 0 ? eval.max_len : corpus.max_len + 1; }
    void validate() const;
};

// Flat "key = value" lines; '#' starts a comment; lists are comma separated.
// Unknown keys and malformed values throw ConfigError naming the line.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace semcom::eval
