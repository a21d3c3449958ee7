#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semcom/aedm.hpp"
#include "semcom/channel.hpp"
#include "semcom/gsdsm.hpp"
#include "semcom/textcorpus.hpp"

namespace semcom {

enum class Framework {
    ti_gsc,
    sc_vanilla,
    sc_perfect_csi,
    sc_imperfect_csi,
    conv_fixed_csi,
    conv_fixed_nocsi,
    conv_huffman_csi,
    conv_huffman_nocsi,
};

Framework parse_framework(std::string_view id);
std::string to_string(Framework f);
std::vector<Framework> all_frameworks();

bool is_neural(Framework f);
bool uses_csi(Framework f);
bool has_suppressor(Framework f);

enum class CsiMode { none, perfect, imperfect };
CsiMode parse_csi_mode(std::string_view s);
std::string to_string(CsiMode m);
CsiMode csi_mode_of(Framework f);

// Physical link as seen by a neural framework: fading, SNR and what the receiver
// knows about h.
struct LinkConfig {
    channel::FadingSpec fading;
    double snr_db = 12.0;
    CsiMode csi = CsiMode::none;
    double csi_error_var = 0.0;
};

struct LinkOutput {
    SymbolBlock received;       // Y
    SymbolBlock decoder_input;  // Y, or Y equalized with the (estimated) CSI
    channel::ChannelRealization realization;
};

// transmit, then zero-force with perfect or estimated CSI as configured. A
// degenerate CSI estimate resamples the channel from a derived seed.
LinkOutput pass_link(const SymbolBlock& x, const LinkConfig& link, std::uint64_t seed);

struct ModelConfig {
    aedm::AedmConfig aedm;
    int unet_base_channels = 16;
    int critic_base_channels = 16;

    void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// AEDM plus the suppressor and its critic. Neural baselines without a suppressor
// still carry (unused) generator/critic weights so every checkpoint has one layout.
struct SemComModel {
    ModelConfig config;
    aedm::Aedm aedm{nullptr};
    gsdsm::Generator generator{nullptr};
    gsdsm::Critic critic{nullptr};

    // Weights initialized from torch's global RNG after seeding it with `seed`.
    static SemComModel create(const ModelConfig& cfg, std::uint64_t seed);
    void train(bool on = true);
    void to(at::ScalarType dtype);
};

struct LoadedModel {
    SemComModel model;
    text::Vocabulary vocab;
    nlohmann::json header;
};

void save_model(const std::filesystem::path& path, const SemComModel& model,
                const text::Vocabulary& vocab, const nlohmann::json& extra_header);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace semcom
