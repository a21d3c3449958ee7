#include "semcom/eval/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "semcom/errors.hpp"
#include "semcom/eval/records.hpp"

namespace semcom::eval {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, ',')) {
        auto t = trim(cur);
        if (!t.empty()) out.push_back(t);
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

double to_double(const std::string& v) {
    std::size_t pos = 0;
    double d = 0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != v.size() || v.empty() || !std::isfinite(d)) throw ConfigError("not a number: '" + v + "'");
    return d;
}

long long to_int(const std::string& v) {
    std::size_t pos = 0;
    long long i = 0;
    try {
        i = std::stoll(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != v.size() || v.empty()) throw ConfigError("not an integer: '" + v + "'");
    return i;
}

int to_int32(const std::string& v) {
    auto i = to_int(v);
    if (i < INT32_MIN || i > INT32_MAX) throw ConfigError("integer out of range: '" + v + "'");
    return static_cast<int>(i);
}

std::uint64_t to_u64(const std::string& v) {
    if (v.empty() || v[0] == '-') throw ConfigError("not an unsigned integer: '" + v + "'");
    std::size_t pos = 0;
    std::uint64_t u = 0;
    try {
        u = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != v.size()) throw ConfigError("not an unsigned integer: '" + v + "'");
    return u;
}

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(to_u64(v)); }

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed", [](RunConfig& c, const std::string& v) { c.set_seed(to_u64(v)); }},

        {"corpus.min_len", [](RunConfig& c, const std::string& v) { c.corpus.min_len = to_int32(v); }},
        {"corpus.max_len", [](RunConfig& c, const std::string& v) { c.corpus.max_len = to_int32(v); }},
        {"corpus.train_fraction", [](RunConfig& c, const std::string& v) { c.corpus.train_fraction = to_double(v); }},
        {"corpus.vocab_cap", [](RunConfig& c, const std::string& v) { c.corpus.vocab_cap = to_size(v); }},
        {"corpus.max_sentences", [](RunConfig& c, const std::string& v) { c.corpus.max_sentences = to_size(v); }},

        {"model.num_layers", [](RunConfig& c, const std::string& v) { c.model.aedm.num_layers = to_int32(v); }},
        {"model.num_heads", [](RunConfig& c, const std::string& v) { c.model.aedm.num_heads = to_int32(v); }},
        {"model.d_model", [](RunConfig& c, const std::string& v) { c.model.aedm.d_model = to_int32(v); }},
        {"model.d_ff", [](RunConfig& c, const std::string& v) { c.model.aedm.d_ff = to_int32(v); }},
        {"model.d_sym", [](RunConfig& c, const std::string& v) { c.model.aedm.d_sym = to_int32(v); }},
        {"model.dropout", [](RunConfig& c, const std::string& v) { c.model.aedm.dropout = to_double(v); }},
        {"model.unet_base_channels", [](RunConfig& c, const std::string& v) { c.model.unet_base_channels = to_int32(v); }},
        {"model.critic_base_channels", [](RunConfig& c, const std::string& v) { c.model.critic_base_channels = to_int32(v); }},

        {"channel.kind", [](RunConfig& c, const std::string& v) { c.train.link.fading.kind = channel::parse_kind(v); }},
        {"channel.rician_k", [](RunConfig& c, const std::string& v) { c.train.link.fading.rician_k = to_double(v); }},
        {"channel.snr_db", [](RunConfig& c, const std::string& v) { c.train.link.snr_db = to_double(v); }},
        {"channel.csi", [](RunConfig& c, const std::string& v) { c.train.link.csi = parse_csi_mode(v); }},
        {"channel.csi_error_var", [](RunConfig& c, const std::string& v) { c.train.link.csi_error_var = to_double(v); }},

        {"gan.gp_coeff", [](RunConfig& c, const std::string& v) { c.train.gan.gp_coeff = to_double(v); }},
        {"gan.adv_mode", [](RunConfig& c, const std::string& v) { c.train.gan.adv_mode = gsdsm::parse_adv_mode(v); }},

        {"loss.w1", [](RunConfig& c, const std::string& v) { c.train.w1 = to_double(v); }},
        {"loss.w2", [](RunConfig& c, const std::string& v) { c.train.w2 = to_double(v); }},
        {"loss.w3", [](RunConfig& c, const std::string& v) { c.train.w3 = to_double(v); }},
        {"loss.sytc_weight", [](RunConfig& c, const std::string& v) { c.train.gan.sytc_weight = to_double(v); }},
        {"loss.smtc_weight", [](RunConfig& c, const std::string& v) { c.train.gan.smtc_weight = to_double(v); }},

        {"train.framework", [](RunConfig& c, const std::string& v) { c.train.framework = parse_framework(v); }},
        {"train.scheme", [](RunConfig& c, const std::string& v) { c.train.scheme = training::parse_scheme(v); }},
        {"train.epochs", [](RunConfig& c, const std::string& v) { c.train.epochs = to_int32(v); }},
        {"train.batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = to_int32(v); }},
        {"train.lr_aedm", [](RunConfig& c, const std::string& v) { c.train.lr_aedm = to_double(v); }},
        {"train.weight_decay_aedm", [](RunConfig& c, const std::string& v) { c.train.weight_decay_aedm = to_double(v); }},
        {"train.lr_gen", [](RunConfig& c, const std::string& v) { c.train.lr_gen = to_double(v); }},
        {"train.lr_critic", [](RunConfig& c, const std::string& v) { c.train.lr_critic = to_double(v); }},
        {"train.n_altv", [](RunConfig& c, const std::string& v) { c.train.n_altv = to_int32(v); }},
        {"train.val_sentences", [](RunConfig& c, const std::string& v) { c.train.val_sentences = to_int32(v); }},
        {"train.max_steps", [](RunConfig& c, const std::string& v) { c.train.max_steps = to_int(v); }},

        {"eval.n_sentences", [](RunConfig& c, const std::string& v) { c.eval.n_sentences = to_int32(v); }},
        {"eval.snr_grid",
         [](RunConfig& c, const std::string& v) {
             c.eval.snr_grid.clear();
             for (const auto& s : split_list(v)) c.eval.snr_grid.push_back(to_double(s));
         }},
        {"eval.frameworks",
         [](RunConfig& c, const std::string& v) {
             c.eval.frameworks.clear();
             for (const auto& s : split_list(v)) c.eval.frameworks.push_back(parse_framework(s));
         }},
        {"eval.channels",
         [](RunConfig& c, const std::string& v) {
             c.eval.channels.clear();
             for (const auto& s : split_list(v)) c.eval.channels.push_back(channel::parse_kind(s));
         }},
        {"eval.seeds",
         [](RunConfig& c, const std::string& v) {
             c.eval.seeds.clear();
             for (const auto& s : split_list(v)) c.eval.seeds.push_back(to_u64(s));
         }},
        {"eval.workers", [](RunConfig& c, const std::string& v) { c.eval.workers = to_int32(v); }},
        {"eval.csi_error_vars",
         [](RunConfig& c, const std::string& v) {
             c.eval.csi_error_vars.clear();
             for (const auto& s : split_list(v)) c.eval.csi_error_vars.push_back(to_double(s));
         }},
        {"eval.max_len", [](RunConfig& c, const std::string& v) { c.eval.max_len = to_int32(v); }},
        {"eval.batch_size", [](RunConfig& c, const std::string& v) { c.eval.batch_size = to_int32(v); }},
        {"eval.top_n", [](RunConfig& c, const std::string& v) { c.eval.top_n = to_int32(v); }},
        {"eval.max_points", [](RunConfig& c, const std::string& v) { c.eval.max_points = to_int32(v); }},
    };
    return table;
}

}  // namespace

void EvalConfig::validate() const {
    if (n_sentences < 1) throw ConfigError("eval.n_sentences must be >= 1");
    if (snr_grid.empty() || frameworks.empty() || channels.empty() || seeds.empty())
        throw ConfigError("eval lists must be nonempty");
    for (double s : snr_grid)
        if (!is_grid_snr(s)) throw ConfigError("eval.snr_grid: " + std::to_string(s) + " dB is not on the 0..24 dB grid");
    if (workers < 1) throw ConfigError("eval.workers must be >= 1");
    if (max_len < 0) throw ConfigError("eval.max_len must be >= 0");
    if (batch_size < 1) throw ConfigError("eval.batch_size must be >= 1");
    if (top_n < 1) throw ConfigError("eval.top_n must be >= 1");
    if (max_points < 2 || max_points > 5000) throw ConfigError("eval.max_points must lie in [2, 5000]");
    for (double v : csi_error_vars)
        if (v < 0.0) throw ConfigError("eval.csi_error_vars must be >= 0");
}

void RunConfig::set_seed(std::uint64_t s) {
    seed = s;
    corpus.seed = s;
    train.seed = s;
    eval.seeds = {s};
}

void RunConfig::validate() const {
    corpus.validate();
    train.validate();
    eval.validate();
    if (train.link.fading.rician_k < 0.0) throw ConfigError("channel.rician_k must be >= 0");
    if (train.link.csi_error_var < 0.0) throw ConfigError("channel.csi_error_var must be >= 0");
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = setters();
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
        it->second(cfg, value);
    } catch (const Error& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        try {
            apply_setting(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, v] : setters()) out.push_back(k);
    return out;
}

nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json fw = nlohmann::json::array(), ch = nlohmann::json::array();
    for (auto f : cfg.eval.frameworks) fw.push_back(to_string(f));
    for (auto k : cfg.eval.channels) ch.push_back(channel::to_string(k));
    return {
        {"seed", cfg.seed},
        {"corpus",
         {{"min_len", cfg.corpus.min_len},
          {"max_len", cfg.corpus.max_len},
          {"train_fraction", cfg.corpus.train_fraction},
          {"vocab_cap", cfg.corpus.vocab_cap},
          {"max_sentences", cfg.corpus.max_sentences},
          {"seed", cfg.corpus.seed}}},
        {"model", cfg.model},
        {"train", cfg.train},
        {"eval",
         {{"n_sentences", cfg.eval.n_sentences},
          {"snr_grid", cfg.eval.snr_grid},
          {"frameworks", fw},
          {"channels", ch},
          {"seeds", cfg.eval.seeds},
          {"workers", cfg.eval.workers},
          {"csi_error_vars", cfg.eval.csi_error_vars},
          {"max_len", cfg.eval.max_len},
          {"batch_size", cfg.eval.batch_size},
          {"top_n", cfg.eval.top_n},
          {"max_points", cfg.eval.max_points}}},
    };
}

}  // namespace semcom::eval
