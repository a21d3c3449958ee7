#include "semcom/framework.hpp"

#include <json.hpp>
#include <torch/torch.h>

#include "semcom/checkpoint.hpp"
#include "semcom/errors.hpp"
#include "semcom/seed.hpp"

namespace semcom {

namespace {

constexpr std::pair<Framework, std::string_view> kFrameworkIds[] = {
    {Framework::ti_gsc, "ti-gsc"},
    {Framework::sc_vanilla, "sc-vanilla"},
    {Framework::sc_perfect_csi, "sc-perfect-csi"},
    {Framework::sc_imperfect_csi, "sc-imperfect-csi"},
    {Framework::conv_fixed_csi, "conv-fixed-csi"},
    {Framework::conv_fixed_nocsi, "conv-fixed-nocsi"},
    {Framework::conv_huffman_csi, "conv-huffman-csi"},
    {Framework::conv_huffman_nocsi, "conv-huffman-nocsi"},
};

}  // namespace

Framework parse_framework(std::string_view id) {
    for (const auto& [f, s] : kFrameworkIds)
        if (s == id) return f;
    throw ConfigError("unknown framework '" + std::string(id) + "'");
}

std::string to_string(Framework f) {
    for (const auto& [g, s] : kFrameworkIds)
        if (g == f) return std::string(s);
    throw ConfigError("unknown framework");
}

std::vector<Framework> all_frameworks() {
    std::vector<Framework> out;
    for (const auto& [f, s] : kFrameworkIds) out.push_back(f);
    return out;
}

bool is_neural(Framework f) {
    return f == Framework::ti_gsc || f == Framework::sc_vanilla || f == Framework::sc_perfect_csi ||
           f == Framework::sc_imperfect_csi;
}

bool uses_csi(Framework f) {
    return f == Framework::sc_perfect_csi || f == Framework::sc_imperfect_csi ||
           f == Framework::conv_fixed_csi || f == Framework::conv_huffman_csi;
}

bool has_suppressor(Framework f) { return f == Framework::ti_gsc; }

CsiMode parse_csi_mode(std::string_view s) {
    if (s == "none") return CsiMode::none;
    if (s == "perfect") return CsiMode::perfect;
    if (s == "imperfect") return CsiMode::imperfect;
    throw ConfigError("channel.csi must be none, perfect or imperfect, got '" + std::string(s) + "'");
}

std::string to_string(CsiMode m) {
    switch (m) {
        case CsiMode::none: return "none";
        case CsiMode::perfect: return "perfect";
        case CsiMode::imperfect: return "imperfect";
    }
    return "none";
}

CsiMode csi_mode_of(Framework f) {
    if (f == Framework::sc_imperfect_csi) return CsiMode::imperfect;
    return uses_csi(f) ? CsiMode::perfect : CsiMode::none;
}

LinkOutput pass_link(const SymbolBlock& x, const LinkConfig& link, std::uint64_t seed) {
    constexpr int kMaxRedraws = 16;
    for (int attempt = 0;; ++attempt) {
        const auto s = attempt == 0 ? seed : derive_seed(seed, 0xD1CE + attempt);
        LinkOutput out;
        out.realization =
            channel::make_realization(link.fading, x.batch_size(), link.snr_db, s, x.values.scalar_type());
        out.received = channel::transmit(x, out.realization);
        out.decoder_input = out.received;
        if (link.csi == CsiMode::none) return out;
        const auto csi = channel::estimate_csi(
            out.realization.h, link.csi == CsiMode::imperfect ? link.csi_error_var : 0.0,
            derive_seed(s, 3));
        try {
            out.decoder_input = channel::equalize(out.received, csi.h_est);
            return out;
        } catch (const DegenerateChannelError&) {
            if (attempt + 1 >= kMaxRedraws) throw;
        }
    }
}

void ModelConfig::validate() const {
    aedm.validate();
    if (unet_base_channels < 1) throw ConfigError("model.unet_base_channels must be >= 1");
    if (critic_base_channels < 1) throw ConfigError("model.critic_base_channels must be >= 1");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = {{"aedm", c.aedm},
         {"unet_base_channels", c.unet_base_channels},
         {"critic_base_channels", c.critic_base_channels}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
    j.at("aedm").get_to(c.aedm);
    j.at("unet_base_channels").get_to(c.unet_base_channels);
    j.at("critic_base_channels").get_to(c.critic_base_channels);
}

SemComModel SemComModel::create(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    torch::manual_seed(seed);
    SemComModel m;
    m.config = cfg;
    m.aedm = aedm::Aedm(cfg.aedm);
    m.generator = gsdsm::Generator(cfg.unet_base_channels);
    m.critic = gsdsm::Critic(cfg.critic_base_channels);
    return m;
}

void SemComModel::train(bool on) {
    aedm->train(on);
    generator->train(on);
    critic->train(on);
}

void SemComModel::to(at::ScalarType dtype) {
    aedm->to(dtype);
    generator->to(dtype);
    critic->to(dtype);
}

void save_model(const std::filesystem::path& path, const SemComModel& model,
                const text::Vocabulary& vocab, const nlohmann::json& extra_header) {
    NamedTensors data;
    data.header = extra_header.is_object() ? extra_header : nlohmann::json::object();
    data.header["model"] = model.config;
    data.header["vocab"] = vocab.to_json();
    append_module_state(data, "aedm", *model.aedm);
    append_module_state(data, "generator", *model.generator);
    append_module_state(data, "critic", *model.critic);
    save_named_tensors(path, data);
}

LoadedModel load_model(const std::filesystem::path& path) {
    auto data = load_named_tensors(path);
    LoadedModel out;
    ModelConfig cfg;
    try {
        cfg = data.header.at("model").get<ModelConfig>();
        out.vocab = text::Vocabulary::from_json(data.header.at("vocab"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    out.model = SemComModel::create(cfg, 0);
    load_module_state(*out.model.aedm, "aedm", data);
    load_module_state(*out.model.generator, "generator", data);
    load_module_state(*out.model.critic, "critic", data);
    out.model.train(false);
    data.header.erase("vocab");
    out.header = std::move(data.header);
    return out;
}

}  // namespace semcom
