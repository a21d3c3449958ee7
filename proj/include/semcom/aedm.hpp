#pragma once

#include <torch/nn/module.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/container/sequential.h>
#include <torch/nn/modules/embedding.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/modules/normalization.h>
#include <torch/nn/pimpl.h>

#include <json.hpp>

#include "semcom/symbols.hpp"
#include "semcom/textcorpus.hpp"

namespace semcom::aedm {

struct AedmConfig {
    int num_layers = 4;  // per side
    int num_heads = 8;
    int d_model = 128;
    int d_ff = 512;
    int d_sym = 16;  // complex channel symbols per token
    double dropout = 0.1;
    int vocab_size = 0;

    void validate() const;
};

void to_json(nlohmann::json& j, const AedmConfig& c);
void from_json(const nlohmann::json& j, AedmConfig& c);

// Teacher-forced next-token logits, B x T x vocab.
struct LogitsBlock {
    at::Tensor values;
};

// Multi-head scaled dot-product attention. key_pad marks keys to ignore (true).
class AttentionImpl : public torch::nn::Module {
public:
    AttentionImpl(int d_model, int num_heads);
    at::Tensor forward(const at::Tensor& query, const at::Tensor& memory, const at::Tensor& key_pad,
                       bool causal, double dropout, bool dropout_on);

private:
    int heads_;
    torch::nn::Linear q_{nullptr}, k_{nullptr}, v_{nullptr}, out_{nullptr};
};
TORCH_MODULE(Attention);

// Post-norm transformer layers (ReLU feed-forward).
class EncoderLayerImpl : public torch::nn::Module {
public:
    explicit EncoderLayerImpl(const AedmConfig& c);
    at::Tensor forward(const at::Tensor& x, const at::Tensor& key_pad, bool dropout_on);

private:
    double dropout_;
    Attention self_attn_{nullptr};
    torch::nn::Linear ff1_{nullptr}, ff2_{nullptr};
    torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
};
TORCH_MODULE(EncoderLayer);

class DecoderLayerImpl : public torch::nn::Module {
public:
    explicit DecoderLayerImpl(const AedmConfig& c);
    at::Tensor forward(const at::Tensor& x, const at::Tensor& memory, const at::Tensor& memory_pad,
                       bool dropout_on);

private:
    double dropout_;
    Attention self_attn_{nullptr}, cross_attn_{nullptr};
    torch::nn::Linear ff1_{nullptr}, ff2_{nullptr};
    torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr}, norm3_{nullptr};
};
TORCH_MODULE(DecoderLayer);

// Transformer semantic encoder/decoder. The encoder maps token ids to unit-power
// channel symbols; the decoder attends to received symbols as cross-attention
// memory and predicts the next token under a causal mask.
class AedmImpl : public torch::nn::Module {
public:
    explicit AedmImpl(const AedmConfig& cfg);

    const AedmConfig& config() const { return cfg_; }

    // B x L x d_sym x 2, pad slots zeroed, each sentence normalized to mean |x|^2 = 1
    // over its non-pad slots. The returned block carries the batch pad mask.
    SymbolBlock encode(const text::SentenceBatch& batch);

    // Decoder input is target_prefix.ids[:, :-1]; logits predict ids[:, 1:].
    LogitsBlock decode(const SymbolBlock& y, const text::SentenceBatch& target_prefix);
    at::Tensor decode_ids(const SymbolBlock& y, const at::Tensor& prefix_ids);

    // Autoregressive argmax from START; at most max_len generated tokens (END included).
    text::SentenceBatch greedy_decode(const SymbolBlock& y, int max_len);

    // Output of the first decoder layer for a START-only query with y as memory;
    // B x 1 x d_model. Never applies dropout.
    at::Tensor feature_map(const SymbolBlock& y);

private:
    at::Tensor memory_from(const SymbolBlock& y, bool dropout_on, at::Tensor& memory_pad);
    at::Tensor embed_target(const at::Tensor& ids, bool dropout_on);

    AedmConfig cfg_;
    torch::nn::Embedding src_embed_{nullptr}, tgt_embed_{nullptr};
    torch::nn::ModuleList encoder_layers_, decoder_layers_;
    torch::nn::Sequential channel_encoder_{nullptr}, channel_decoder_{nullptr};
    torch::nn::Linear output_{nullptr};
};
TORCH_MODULE(Aedm);

// Sinusoidal positional encoding, length x d_model.
at::Tensor positional_encoding(std::int64_t length, std::int64_t d_model, at::ScalarType dtype);

// Mean over non-pad target positions of -log q(w); targets are ids[:, 1:].
at::Tensor cross_entropy_loss(const LogitsBlock& logits, const text::SentenceBatch& targets);

}  // namespace semcom::aedm
