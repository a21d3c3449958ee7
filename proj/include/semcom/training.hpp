#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <torch/optim/adam.h>
#include <json.hpp>

#include "semcom/framework.hpp"
#include "semcom/gsdsm.hpp"
#include "semcom/textcorpus.hpp"

namespace semcom::training {

enum class Scheme { jot, aot };
Scheme parse_scheme(std::string_view s);
std::string to_string(Scheme s);

struct TrainConfig {
    Framework framework = Framework::ti_gsc;
    Scheme scheme = Scheme::jot;
    int epochs = 60;
    int batch_size = 64;
    double lr_aedm = 1e-4;
    double weight_decay_aedm = 5e-4;
    double lr_gen = 2e-4;
    double lr_critic = 2e-4;
    double w1 = 1.0;   // cross entropy
    double w2 = 0.01;  // generator adversarial term in the total loss
    double w3 = 0.01;  // generator adversarial term in the suppressor-only update
    gsdsm::GanLossConfig gan;
    int n_altv = 2;
    LinkConfig link;
    std::uint64_t seed = 0;
    int val_sentences = 64;    // held out from the training split for best-checkpoint selection
    long max_steps = 0;        // 0: no cap
    bool save_epoch_checkpoints = true;

    void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);

struct LossBundle {
    double l_ce = 0.0;
    double l_adv_g = 0.0;
    double l_adv_d = 0.0;
    double l_sytc = 0.0;
    double l_smtc = 0.0;
    double l_dstr = 0.0;
    double l_total = 0.0;

    LossBundle& operator+=(const LossBundle& o);
    LossBundle scaled(double s) const;
};

struct TotalLossTerms {
    double w1, w2, sytc_weight, smtc_weight;
};

// w1 L_CE + w2 L_adv_g + lambda L_sytc + gamma L_smtc.
double total_loss(double l_ce, double l_adv_g, double l_sytc, double l_smtc, const TotalLossTerms& w);
at::Tensor total_loss(const at::Tensor& l_ce, const at::Tensor& l_adv_g, const at::Tensor& l_sytc,
                      const at::Tensor& l_smtc, const TotalLossTerms& w);
TotalLossTerms weights_of(const TrainConfig& cfg);

// Owns the three optimizers; single writer of the model parameters.
class Trainer {
public:
    Trainer(SemComModel& model, TrainConfig cfg);

    // Algorithm 1: critic update on detached signals, then one joint AEDM +
    // generator step on the total loss with the critic frozen.
    LossBundle jot_step(const text::SentenceBatch& batch, std::uint64_t seed);
    // Algorithm 2: critic update, then generator update on w3 L_adv_g + L_dstr.
    // AEDM parameters are not stepped.
    LossBundle gsdsm_step(const SymbolBlock& x, const SymbolBlock& y, std::uint64_t seed);
    // Algorithm 3: AEDM and generator updated together on L_CE; y must carry the
    // encoder graph for gradients to reach W_e.
    LossBundle aedm_with_gsdsm_step(const SymbolBlock& y, const text::SentenceBatch& batch);
    // Algorithm 4 for batch index j (1-based within the epoch).
    LossBundle aot_step(const text::SentenceBatch& batch, long j, std::uint64_t seed);
    // Neural baselines without a suppressor: CE only, equalizing per the link's CSI mode.
    LossBundle sc_step(const text::SentenceBatch& batch, std::uint64_t seed);

    // Dispatches on framework and scheme.
    LossBundle step(const text::SentenceBatch& batch, long j, std::uint64_t seed);

    // X and the decoder input of the most recent step (for nMSE tracking).
    const SymbolBlock& last_x() const { return last_x_; }
    const SymbolBlock& last_decoder_input() const { return last_decoder_input_; }

    long steps_taken() const { return steps_; }
    long joint_branches() const { return joint_branches_; }
    long alternating_branches() const { return alternating_branches_; }
    const TrainConfig& config() const { return cfg_; }

private:
    double critic_update(const SymbolBlock& x, const SymbolBlock& y_bar, std::uint64_t seed);
    void check_finite(const LossBundle& b) const;

    SemComModel& model_;
    TrainConfig cfg_;
    std::unique_ptr<torch::optim::Adam> opt_aedm_, opt_gen_, opt_critic_;
    SymbolBlock last_x_, last_decoder_input_;
    long steps_ = 0;
    long joint_branches_ = 0;
    long alternating_branches_ = 0;
};

struct EpochLog {
    int epoch = 0;
    LossBundle mean;
    double nmse = 0.0;
    double val_bleu1 = -1.0;  // -1: no validation split
    double wall_seconds = 0.0;
    long steps = 0;
};

nlohmann::json to_json(const EpochLog& e);

struct TrainResult {
    std::vector<EpochLog> log;
    std::filesystem::path best_checkpoint;
    std::filesystem::path last_checkpoint;
    long joint_branches = 0;
    long alternating_branches = 0;
};

struct TrainData {
    text::Vocabulary vocab;
    std::vector<std::vector<int>> train;  // content ids
    std::vector<std::vector<int>> validation;
};

// Splits val_sentences off the (shuffled) training sentences.
TrainData prepare_train_data(const std::vector<std::vector<std::string>>& sentences,
                             const text::Vocabulary& vocab, const TrainConfig& cfg);

// Runs cfg.epochs epochs. When out_dir is set, writes train_log.jsonl, one
// checkpoint per epoch (epoch-NNN.ckpt) and best.ckpt; otherwise nothing is written.
TrainResult train(SemComModel& model, const TrainData& data, const TrainConfig& cfg,
                  const std::optional<std::filesystem::path>& out_dir,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Greedy-decoding BLEU-1 of a sentence set through the configured link.
double validation_bleu1(SemComModel& model, const text::Vocabulary& vocab,
                        const std::vector<std::vector<int>>& sentences, const TrainConfig& cfg,
                        std::uint64_t seed);

}  // namespace semcom::training
