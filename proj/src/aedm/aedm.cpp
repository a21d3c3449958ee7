#include "semcom/aedm.hpp"

#include <cmath>

#include <json.hpp>
#include <torch/torch.h>

#include "semcom/errors.hpp"

namespace semcom::aedm {

namespace nn = torch::nn;
using text::Vocabulary;

void AedmConfig::validate() const {
    if (num_layers < 1) throw ConfigError("model.num_layers must be >= 1");
    if (num_heads < 1 || d_model % num_heads != 0)
        throw ConfigError("model.d_model must be divisible by model.num_heads");
    if (d_ff < 1) throw ConfigError("model.d_ff must be >= 1");
    if (d_sym < 1) throw ConfigError("model.d_sym must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model.dropout must lie in [0, 1)");
    if (vocab_size <= Vocabulary::kNumSpecials)
        throw ConfigError("vocab_size must exceed the number of special tokens");
}

void to_json(nlohmann::json& j, const AedmConfig& c) {
    j = {{"num_layers", c.num_layers}, {"num_heads", c.num_heads}, {"d_model", c.d_model},
         {"d_ff", c.d_ff},             {"d_sym", c.d_sym},         {"dropout", c.dropout},
         {"vocab_size", c.vocab_size}};
}

void from_json(const nlohmann::json& j, AedmConfig& c) {
    j.at("num_layers").get_to(c.num_layers);
    j.at("num_heads").get_to(c.num_heads);
    j.at("d_model").get_to(c.d_model);
    j.at("d_ff").get_to(c.d_ff);
    j.at("d_sym").get_to(c.d_sym);
    j.at("dropout").get_to(c.dropout);
    j.at("vocab_size").get_to(c.vocab_size);
}

at::Tensor positional_encoding(std::int64_t length, std::int64_t d_model, at::ScalarType dtype) {
    auto pos = torch::arange(length, torch::kDouble).unsqueeze(1);
    auto i = torch::arange(0, d_model, 2, torch::kDouble);
    auto freq = torch::exp(i * (-std::log(10000.0) / static_cast<double>(d_model)));
    auto pe = torch::zeros({length, d_model}, torch::kDouble);
    auto angles = pos * freq;
    pe.index_put_({torch::indexing::Slice(), torch::indexing::Slice(0, torch::indexing::None, 2)},
                  torch::sin(angles));
    pe.index_put_({torch::indexing::Slice(), torch::indexing::Slice(1, torch::indexing::None, 2)},
                  torch::cos(angles).narrow(1, 0, d_model / 2));
    return pe.to(dtype);
}

// ---------------------------------------------------------------------------

AttentionImpl::AttentionImpl(int d_model, int num_heads) : heads_(num_heads) {
    q_ = register_module("q", nn::Linear(d_model, d_model));
    k_ = register_module("k", nn::Linear(d_model, d_model));
    v_ = register_module("v", nn::Linear(d_model, d_model));
    out_ = register_module("out", nn::Linear(d_model, d_model));
}

at::Tensor AttentionImpl::forward(const at::Tensor& query, const at::Tensor& memory,
                                  const at::Tensor& key_pad, bool causal, double dropout,
                                  bool dropout_on) {
    const auto b = query.size(0);
    const auto lq = query.size(1);
    const auto lk = memory.size(1);
    const auto d = query.size(2);
    const auto dh = d / heads_;
    auto split = [&](const at::Tensor& t, std::int64_t len) {
        return t.view({b, len, heads_, dh}).transpose(1, 2);
    };
    auto q = split(q_(query), lq);
    auto k = split(k_(memory), lk);
    auto v = split(v_(memory), lk);

    auto scores = torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(static_cast<double>(dh));
    // Finite fill keeps fully masked rows (never produced by our callers) from going NaN.
    constexpr double kMasked = -1e9;
    if (key_pad.defined()) scores = scores.masked_fill(key_pad.view({b, 1, 1, lk}), kMasked);
    if (causal) {
        auto future = torch::ones({lq, lk}, torch::kBool).triu(1);
        scores = scores.masked_fill(future, kMasked);
    }
    auto attn = torch::dropout(torch::softmax(scores, -1), dropout, dropout_on);
    auto ctx = torch::matmul(attn, v).transpose(1, 2).reshape({b, lq, d});
    return out_(ctx);
}

EncoderLayerImpl::EncoderLayerImpl(const AedmConfig& c) : dropout_(c.dropout) {
    self_attn_ = register_module("self_attn", Attention(c.d_model, c.num_heads));
    ff1_ = register_module("ff1", nn::Linear(c.d_model, c.d_ff));
    ff2_ = register_module("ff2", nn::Linear(c.d_ff, c.d_model));
    norm1_ = register_module("norm1", nn::LayerNorm(nn::LayerNormOptions({c.d_model})));
    norm2_ = register_module("norm2", nn::LayerNorm(nn::LayerNormOptions({c.d_model})));
}

at::Tensor EncoderLayerImpl::forward(const at::Tensor& x, const at::Tensor& key_pad,
                                     bool dropout_on) {
    auto a = self_attn_(x, x, key_pad, false, dropout_, dropout_on);
    auto h = norm1_(x + torch::dropout(a, dropout_, dropout_on));
    auto f = ff2_(torch::dropout(torch::relu(ff1_(h)), dropout_, dropout_on));
    return norm2_(h + torch::dropout(f, dropout_, dropout_on));
}

DecoderLayerImpl::DecoderLayerImpl(const AedmConfig& c) : dropout_(c.dropout) {
    self_attn_ = register_module("self_attn", Attention(c.d_model, c.num_heads));
    cross_attn_ = register_module("cross_attn", Attention(c.d_model, c.num_heads));
    ff1_ = register_module("ff1", nn::Linear(c.d_model, c.d_ff));
    ff2_ = register_module("ff2", nn::Linear(c.d_ff, c.d_model));
    norm1_ = register_module("norm1", nn::LayerNorm(nn::LayerNormOptions({c.d_model})));
    norm2_ = register_module("norm2", nn::LayerNorm(nn::LayerNormOptions({c.d_model})));
    norm3_ = register_module("norm3", nn::LayerNorm(nn::LayerNormOptions({c.d_model})));
}

at::Tensor DecoderLayerImpl::forward(const at::Tensor& x, const at::Tensor& memory,
                                     const at::Tensor& memory_pad, bool dropout_on) {
    auto a = self_attn_(x, x, at::Tensor(), true, dropout_, dropout_on);
    auto h = norm1_(x + torch::dropout(a, dropout_, dropout_on));
    auto c = cross_attn_(h, memory, memory_pad, false, dropout_, dropout_on);
    h = norm2_(h + torch::dropout(c, dropout_, dropout_on));
    auto f = ff2_(torch::dropout(torch::relu(ff1_(h)), dropout_, dropout_on));
    return norm3_(h + torch::dropout(f, dropout_, dropout_on));
}

// ---------------------------------------------------------------------------

AedmImpl::AedmImpl(const AedmConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    src_embed_ = register_module("src_embed", nn::Embedding(cfg.vocab_size, cfg.d_model));
    tgt_embed_ = register_module("tgt_embed", nn::Embedding(cfg.vocab_size, cfg.d_model));
    encoder_layers_ = register_module("encoder", nn::ModuleList());
    decoder_layers_ = register_module("decoder", nn::ModuleList());
    for (int i = 0; i < cfg.num_layers; ++i) {
        encoder_layers_->push_back(EncoderLayer(cfg));
        decoder_layers_->push_back(DecoderLayer(cfg));
    }
    const int hidden = 2 * cfg.d_model;
    channel_encoder_ = register_module(
        "channel_encoder", nn::Sequential(nn::Linear(cfg.d_model, hidden), nn::ReLU(),
                                          nn::Linear(hidden, 2 * cfg.d_sym)));
    channel_decoder_ = register_module(
        "channel_decoder", nn::Sequential(nn::Linear(2 * cfg.d_sym, cfg.d_model),
                                          nn::ReLU(), nn::Linear(cfg.d_model, cfg.d_model)));
    output_ = register_module("output", nn::Linear(cfg.d_model, cfg.vocab_size));
}

SymbolBlock AedmImpl::encode(const text::SentenceBatch& batch) {
    const auto& ids = batch.ids;
    if (ids.dim() != 2) throw ShapeError("encode: ids must be B x L");
    if (ids.numel() > 0 &&
        (ids.min().item<std::int64_t>() < 0 || ids.max().item<std::int64_t>() >= cfg_.vocab_size))
        throw RangeError("encode: token id outside the vocabulary");
    const bool drop = is_training();
    const auto b = ids.size(0);
    const auto l = ids.size(1);
    auto pad = ids.eq(Vocabulary::kPad);
    auto dtype = src_embed_->weight.scalar_type();

    auto h = src_embed_(ids) * std::sqrt(static_cast<double>(cfg_.d_model)) +
             positional_encoding(l, cfg_.d_model, dtype);
    h = torch::dropout(h, cfg_.dropout, drop);
    for (auto& layer : *encoder_layers_) h = layer->as<EncoderLayer>()->forward(h, pad, drop);

    auto x = channel_encoder_->forward(h).view({b, l, cfg_.d_sym, 2});
    auto real = pad.logical_not();
    auto m = real.to(dtype).view({b, l, 1, 1});
    x = x * m;
    // Per-sentence power normalization over non-pad slots.
    auto energy = x.pow(2).sum({1, 2, 3});
    auto count = real.to(dtype).sum(1) * cfg_.d_sym;
    auto scale = torch::rsqrt(energy / count + 1e-12).view({b, 1, 1, 1});
    return SymbolBlock{x * scale, real};
}

at::Tensor AedmImpl::memory_from(const SymbolBlock& y, bool dropout_on, at::Tensor& memory_pad) {
    y.check();
    if (y.symbols_per_token() != cfg_.d_sym) throw ShapeError("decode: symbol width != d_sym");
    const auto b = y.batch_size();
    const auto l = y.tokens();
    auto dtype = output_->weight.scalar_type();
    auto mem = channel_decoder_->forward(y.values.to(dtype).reshape({b, l, 2 * cfg_.d_sym})) +
               positional_encoding(l, cfg_.d_model, dtype);
    memory_pad = y.mask.defined() ? y.mask.logical_not() : at::Tensor();
    return torch::dropout(mem, cfg_.dropout, dropout_on);
}

at::Tensor AedmImpl::embed_target(const at::Tensor& ids, bool dropout_on) {
    auto dtype = output_->weight.scalar_type();
    auto h = tgt_embed_(ids) * std::sqrt(static_cast<double>(cfg_.d_model)) +
             positional_encoding(ids.size(1), cfg_.d_model, dtype);
    return torch::dropout(h, cfg_.dropout, dropout_on);
}

at::Tensor AedmImpl::decode_ids(const SymbolBlock& y, const at::Tensor& prefix_ids) {
    if (prefix_ids.dim() != 2 || prefix_ids.size(0) != y.batch_size())
        throw ShapeError("decode: prefix must be B x T with B matching the symbols");
    const bool drop = is_training();
    at::Tensor memory_pad;
    auto memory = memory_from(y, drop, memory_pad);
    auto h = embed_target(prefix_ids, drop);
    for (auto& layer : *decoder_layers_)
        h = layer->as<DecoderLayer>()->forward(h, memory, memory_pad, drop);
    return output_(h);
}

LogitsBlock AedmImpl::decode(const SymbolBlock& y, const text::SentenceBatch& target_prefix) {
    if (target_prefix.row_length() < 2) throw ShapeError("decode: target rows need >= 2 tokens");
    auto prefix = target_prefix.ids.narrow(1, 0, target_prefix.row_length() - 1);
    return {decode_ids(y, prefix)};
}

text::SentenceBatch AedmImpl::greedy_decode(const SymbolBlock& y, int max_len) {
    if (max_len < 1) throw ConfigError("greedy_decode: max_len must be >= 1");
    torch::NoGradGuard no_grad;
    const auto b = y.batch_size();
    auto prefix = torch::full({b, 1}, Vocabulary::kStart, torch::kLong);
    auto done = torch::zeros({b}, torch::kBool);
    for (int step = 0; step < max_len; ++step) {
        auto logits = decode_ids(y, prefix);
        auto next = logits.select(1, logits.size(1) - 1).argmax(-1);
        next = next.masked_fill(done, Vocabulary::kPad);
        prefix = torch::cat({prefix, next.unsqueeze(1)}, 1);
        done = done.logical_or(next.eq(Vocabulary::kEnd));
        if (done.all().item<bool>()) break;
    }
    text::SentenceBatch raw{prefix, prefix.ne(Vocabulary::kPad), {}};
    return text::SentenceBatch::from_content(raw.content());
}

at::Tensor AedmImpl::feature_map(const SymbolBlock& y) {
    at::Tensor memory_pad;
    auto memory = memory_from(y, false, memory_pad);
    auto start = torch::full({y.batch_size(), 1}, Vocabulary::kStart, torch::kLong);
    auto h = embed_target(start, false);
    return decoder_layers_[0]->as<DecoderLayer>()->forward(h, memory, memory_pad, false);
}

at::Tensor cross_entropy_loss(const LogitsBlock& logits, const text::SentenceBatch& targets) {
    const auto& v = logits.values;
    auto tgt = targets.ids.narrow(1, 1, targets.row_length() - 1);
    if (v.dim() != 3 || v.size(0) != tgt.size(0) || v.size(1) != tgt.size(1))
        throw ShapeError("cross_entropy_loss: logits must be B x (L-1) x V");
    auto logp = torch::log_softmax(v, -1);
    return torch::nll_loss(logp.reshape({-1, v.size(2)}), tgt.reshape({-1}), {},
                           at::Reduction::Mean, Vocabulary::kPad);
}

}  // namespace semcom::aedm
