#include "semcom/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <torch/torch.h>

#include "semcom/errors.hpp"
#include "semcom/inference.hpp"
#include "semcom/seed.hpp"

namespace semcom::training {

namespace {

// Turns off requires_grad on a module's parameters for the guard's lifetime.
class FreezeGuard {
public:
    explicit FreezeGuard(torch::nn::Module& m) {
        for (auto& p : m.parameters()) {
            if (p.requires_grad()) {
                p.set_requires_grad(false);
                frozen_.push_back(p);
            }
        }
    }
    ~FreezeGuard() {
        for (auto& p : frozen_) p.set_requires_grad(true);
    }
    FreezeGuard(const FreezeGuard&) = delete;
    FreezeGuard& operator=(const FreezeGuard&) = delete;

private:
    std::vector<at::Tensor> frozen_;
};

double item(const at::Tensor& t) { return t.item<double>(); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void check_weights_and_rates(const TrainConfig& c, bool allow_zero_lr) {
    require(c.epochs >= 1, "train.epochs must be >= 1");
    require(c.batch_size >= 1, "train.batch_size must be >= 1");
    require(c.n_altv >= 1, "train.n_altv must be >= 1");
    require(c.val_sentences >= 0, "train.val_sentences must be >= 0");
    require(c.max_steps >= 0, "train.max_steps must be >= 0");
    for (double lr : {c.lr_aedm, c.lr_gen, c.lr_critic}) {
        require(std::isfinite(lr), "learning rates must be finite");
        require(allow_zero_lr ? lr >= 0.0 : lr > 0.0, "learning rates must be > 0");
    }
    require(std::isfinite(c.weight_decay_aedm) && c.weight_decay_aedm >= 0.0,
            "train.weight_decay_aedm must be >= 0");
    for (double w : {c.w1, c.w2, c.w3})
        require(std::isfinite(w) && w >= 0.0, "loss weights must be finite and >= 0");
    c.gan.validate();
    require(is_neural(c.framework), "train: " + to_string(c.framework) + " has nothing to train");
}

}  // namespace

Scheme parse_scheme(std::string_view s) {
    if (s == "jot") return Scheme::jot;
    if (s == "aot") return Scheme::aot;
    throw ConfigError("unknown training scheme '" + std::string(s) + "' (expected jot or aot)");
}

std::string to_string(Scheme s) { return s == Scheme::jot ? "jot" : "aot"; }

void TrainConfig::validate() const { check_weights_and_rates(*this, false); }

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{
        {"framework", to_string(c.framework)},
        {"scheme", to_string(c.scheme)},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"lr_aedm", c.lr_aedm},
        {"weight_decay_aedm", c.weight_decay_aedm},
        {"lr_gen", c.lr_gen},
        {"lr_critic", c.lr_critic},
        {"w1", c.w1},
        {"w2", c.w2},
        {"w3", c.w3},
        {"gan", c.gan},
        {"n_altv", c.n_altv},
        {"channel",
         {{"kind", channel::to_string(c.link.fading.kind)},
          {"rician_k", c.link.fading.rician_k},
          {"snr_db", c.link.snr_db},
          {"csi", to_string(c.link.csi)},
          {"csi_error_var", c.link.csi_error_var}}},
        {"seed", c.seed},
        {"val_sentences", c.val_sentences},
        {"max_steps", c.max_steps},
    };
}

LossBundle& LossBundle::operator+=(const LossBundle& o) {
    l_ce += o.l_ce;
    l_adv_g += o.l_adv_g;
    l_adv_d += o.l_adv_d;
    l_sytc += o.l_sytc;
    l_smtc += o.l_smtc;
    l_dstr += o.l_dstr;
    l_total += o.l_total;
    return *this;
}

LossBundle LossBundle::scaled(double s) const {
    return {l_ce * s, l_adv_g * s, l_adv_d * s, l_sytc * s, l_smtc * s, l_dstr * s, l_total * s};
}

double total_loss(double l_ce, double l_adv_g, double l_sytc, double l_smtc, const TotalLossTerms& w) {
    for (double v : {l_ce, l_adv_g, l_sytc, l_smtc})
        if (!std::isfinite(v)) throw DomainError("total_loss: non-finite component");
    return w.w1 * l_ce + w.w2 * l_adv_g + w.sytc_weight * l_sytc + w.smtc_weight * l_smtc;
}

at::Tensor total_loss(const at::Tensor& l_ce, const at::Tensor& l_adv_g, const at::Tensor& l_sytc,
                      const at::Tensor& l_smtc, const TotalLossTerms& w) {
    return l_ce * w.w1 + l_adv_g * w.w2 + l_sytc * w.sytc_weight + l_smtc * w.smtc_weight;
}

TotalLossTerms weights_of(const TrainConfig& cfg) {
    return {cfg.w1, cfg.w2, cfg.gan.sytc_weight, cfg.gan.smtc_weight};
}

Trainer::Trainer(SemComModel& model, TrainConfig cfg) : model_(model), cfg_(std::move(cfg)) {
    check_weights_and_rates(cfg_, true);
    cfg_.link.csi = csi_mode_of(cfg_.framework);
    opt_aedm_ = std::make_unique<torch::optim::Adam>(
        model_.aedm->parameters(),
        torch::optim::AdamOptions(cfg_.lr_aedm).weight_decay(cfg_.weight_decay_aedm));
    opt_gen_ = std::make_unique<torch::optim::Adam>(model_.generator->parameters(),
                                                    torch::optim::AdamOptions(cfg_.lr_gen));
    opt_critic_ = std::make_unique<torch::optim::Adam>(model_.critic->parameters(),
                                                       torch::optim::AdamOptions(cfg_.lr_critic));
}

void Trainer::check_finite(const LossBundle& b) const {
    const std::pair<const char*, double> parts[] = {
        {"l_ce", b.l_ce},     {"l_adv_g", b.l_adv_g}, {"l_adv_d", b.l_adv_d}, {"l_sytc", b.l_sytc},
        {"l_smtc", b.l_smtc}, {"l_dstr", b.l_dstr},   {"l_total", b.l_total}};
    for (const auto& [name, v] : parts)
        if (!std::isfinite(v)) throw NonFiniteLossError(name, v, steps_);
}

double Trainer::critic_update(const SymbolBlock& x, const SymbolBlock& y_bar, std::uint64_t seed) {
    const auto xd = x.detached();
    const auto yd = y_bar.detached();
    opt_critic_->zero_grad();
    auto gp = gsdsm::gradient_penalty(xd, yd, model_.critic, seed);
    auto real = gsdsm::critic_score(xd, model_.critic);
    auto fake = gsdsm::critic_score(yd, model_.critic);
    auto loss = gsdsm::critic_loss(real, fake, gp, cfg_.gan.gp_coeff, cfg_.gan.adv_mode);
    const double v = item(loss);
    if (!std::isfinite(v)) throw NonFiniteLossError("l_adv_d", v, steps_);
    loss.backward();
    opt_critic_->step();
    return v;
}

LossBundle Trainer::jot_step(const text::SentenceBatch& batch, std::uint64_t seed) {
    model_.train(true);
    opt_aedm_->zero_grad();
    opt_gen_->zero_grad();

    auto x = model_.aedm->encode(batch);
    auto link = pass_link(x, cfg_.link, derive_seed(seed, 1));
    auto y_bar = gsdsm::suppress(link.decoder_input, model_.generator);

    LossBundle b;
    b.l_adv_d = critic_update(x, y_bar, derive_seed(seed, 2));

    FreezeGuard frozen(*model_.critic);
    auto adv_g = gsdsm::generator_adv_loss(gsdsm::critic_score(y_bar, model_.critic), cfg_.gan.adv_mode);
    auto ce = aedm::cross_entropy_loss(model_.aedm->decode(y_bar, batch), batch);
    const auto x_ref = x.detached();
    auto sytc = gsdsm::syntactic_loss(x_ref, y_bar);
    auto smtc = gsdsm::semantic_loss(x_ref, y_bar, model_.aedm);
    auto total = total_loss(ce, adv_g, sytc, smtc, weights_of(cfg_));

    b.l_ce = item(ce);
    b.l_adv_g = item(adv_g);
    b.l_sytc = item(sytc);
    b.l_smtc = item(smtc);
    b.l_dstr = cfg_.gan.sytc_weight * b.l_sytc + cfg_.gan.smtc_weight * b.l_smtc;
    b.l_total = item(total);
    check_finite(b);

    total.backward();
    opt_aedm_->step();
    opt_gen_->step();

    last_x_ = x.detached();
    last_decoder_input_ = y_bar.detached();
    ++steps_;
    return b;
}

LossBundle Trainer::gsdsm_step(const SymbolBlock& x, const SymbolBlock& y, std::uint64_t seed) {
    model_.train(true);
    const auto xd = x.detached();
    const auto yd = y.detached();
    opt_gen_->zero_grad();

    auto y_bar = gsdsm::suppress(yd, model_.generator);
    LossBundle b;
    b.l_adv_d = critic_update(xd, y_bar, seed);

    FreezeGuard frozen_critic(*model_.critic);
    FreezeGuard frozen_aedm(*model_.aedm);
    auto adv_g = gsdsm::generator_adv_loss(gsdsm::critic_score(y_bar, model_.critic), cfg_.gan.adv_mode);
    auto sytc = gsdsm::syntactic_loss(xd, y_bar);
    auto smtc = gsdsm::semantic_loss(xd, y_bar, model_.aedm);
    auto dstr = sytc * cfg_.gan.sytc_weight + smtc * cfg_.gan.smtc_weight;
    auto l_g = adv_g * cfg_.w3 + dstr;

    b.l_adv_g = item(adv_g);
    b.l_sytc = item(sytc);
    b.l_smtc = item(smtc);
    b.l_dstr = item(dstr);
    b.l_total = item(l_g);
    check_finite(b);

    l_g.backward();
    opt_gen_->step();

    last_x_ = xd;
    last_decoder_input_ = y_bar.detached();
    ++steps_;
    return b;
}

LossBundle Trainer::aedm_with_gsdsm_step(const SymbolBlock& y, const text::SentenceBatch& batch) {
    model_.train(true);
    opt_aedm_->zero_grad();
    opt_gen_->zero_grad();

    auto y_bar = gsdsm::suppress(y, model_.generator);
    auto ce = aedm::cross_entropy_loss(model_.aedm->decode(y_bar, batch), batch);

    LossBundle b;
    b.l_ce = item(ce);
    b.l_total = b.l_ce;
    check_finite(b);

    ce.backward();
    opt_aedm_->step();
    opt_gen_->step();

    last_decoder_input_ = y_bar.detached();
    ++steps_;
    return b;
}

LossBundle Trainer::aot_step(const text::SentenceBatch& batch, long j, std::uint64_t seed) {
    if (j % cfg_.n_altv != 0) {
        ++joint_branches_;
        return jot_step(batch, seed);
    }
    ++alternating_branches_;
    model_.train(true);
    auto x = model_.aedm->encode(batch);
    auto link = pass_link(x, cfg_.link, derive_seed(seed, 1));
    const auto g = gsdsm_step(x, link.decoder_input, derive_seed(seed, 2));
    const auto a = aedm_with_gsdsm_step(link.decoder_input, batch);
    last_x_ = x.detached();

    LossBundle b = g;
    b.l_ce = a.l_ce;
    b.l_total = total_loss(b.l_ce, b.l_adv_g, b.l_sytc, b.l_smtc, weights_of(cfg_));
    return b;
}

LossBundle Trainer::sc_step(const text::SentenceBatch& batch, std::uint64_t seed) {
    model_.train(true);
    opt_aedm_->zero_grad();

    auto x = model_.aedm->encode(batch);
    auto link = pass_link(x, cfg_.link, derive_seed(seed, 1));
    auto ce = aedm::cross_entropy_loss(model_.aedm->decode(link.decoder_input, batch), batch);

    LossBundle b;
    b.l_ce = item(ce);
    b.l_total = cfg_.w1 * b.l_ce;
    check_finite(b);

    (ce * cfg_.w1).backward();
    opt_aedm_->step();

    last_x_ = x.detached();
    last_decoder_input_ = link.decoder_input.detached();
    ++steps_;
    return b;
}

LossBundle Trainer::step(const text::SentenceBatch& batch, long j, std::uint64_t seed) {
    if (!has_suppressor(cfg_.framework)) return sc_step(batch, seed);
    if (cfg_.scheme == Scheme::aot) return aot_step(batch, j, seed);
    ++joint_branches_;
    return jot_step(batch, seed);
}

nlohmann::json to_json(const EpochLog& e) {
    nlohmann::json j{
        {"epoch", e.epoch},
        {"l_ce", e.mean.l_ce},
        {"l_adv_g", e.mean.l_adv_g},
        {"l_adv_d", e.mean.l_adv_d},
        {"l_sytc", e.mean.l_sytc},
        {"l_smtc", e.mean.l_smtc},
        {"l_dstr", e.mean.l_dstr},
        {"l_total", e.mean.l_total},
        {"nmse", e.nmse},
        {"steps", e.steps},
        {"wall_seconds", e.wall_seconds},
    };
    if (e.val_bleu1 >= 0.0) j["val_bleu1"] = e.val_bleu1;
    return j;
}

TrainData prepare_train_data(const std::vector<std::vector<std::string>>& sentences,
                             const text::Vocabulary& vocab, const TrainConfig& cfg) {
    std::vector<std::vector<int>> ids;
    ids.reserve(sentences.size());
    for (const auto& s : sentences) ids.push_back(vocab.encode(s));
    if (ids.empty()) throw EmptyCorpusError("no training sentences");

    SplitMix rng(derive_seed(cfg.seed, 0x7661));
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);

    TrainData out{vocab, {}, {}};
    auto n_val = std::min<std::size_t>(static_cast<std::size_t>(cfg.val_sentences), ids.size() / 10);
    out.validation.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
    out.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val), ids.end());
    return out;
}

double validation_bleu1(SemComModel& model, const text::Vocabulary& vocab,
                        const std::vector<std::vector<int>>& sentences, const TrainConfig& cfg,
                        std::uint64_t seed) {
    if (sentences.empty()) return -1.0;
    LinkConfig link = cfg.link;
    link.csi = csi_mode_of(cfg.framework);
    int max_len = 0;
    std::vector<std::string> refs;
    for (const auto& s : sentences) {
        max_len = std::max(max_len, static_cast<int>(s.size()));
        refs.push_back(text::detokenize(s, vocab));
    }
    auto run = run_neural(model, cfg.framework, vocab, sentences, link, seed, cfg.batch_size, max_len + 1);
    return metrics::bleu(refs, run.hypotheses, 1).score;
}

TrainResult train(SemComModel& model, const TrainData& data, const TrainConfig& cfg,
                  const std::optional<std::filesystem::path>& out_dir,
                  const std::function<void(const EpochLog&)>& on_epoch) {
    cfg.validate();
    if (data.train.empty()) throw EmptyCorpusError("no training sentences");

    std::ofstream log_file;
    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        log_file.open(*out_dir / "train_log.jsonl", std::ios::trunc);
        if (!log_file) throw IoError("cannot write " + (*out_dir / "train_log.jsonl").string());
    }

    torch::manual_seed(cfg.seed);
    Trainer trainer(model, cfg);
    text::BatchStream stream(data.train, cfg.batch_size, derive_seed(cfg.seed, 0x6261));

    TrainResult result;
    double best_bleu = -2.0;
    long global_step = 0;
    const auto header_for = [&](int epoch) {
        nlohmann::json h;
        h["framework"] = to_string(cfg.framework);
        h["train"] = cfg;
        h["epoch"] = epoch;
        h["steps"] = global_step;
        return h;
    };

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        stream.reset(derive_seed(cfg.seed, 0x10000 + static_cast<std::uint64_t>(epoch)));
        LossBundle sum;
        metrics::NmseAccumulator nmse;
        long steps = 0;
        for (long j = 1; j <= static_cast<long>(stream.num_batches()); ++j) {
            if (cfg.max_steps > 0 && global_step >= cfg.max_steps) break;
            auto batch = stream.next();
            if (!batch) break;
            const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(global_step));
            sum += trainer.step(*batch, j, seed);
            nmse.add(trainer.last_x().values, trainer.last_decoder_input().values);
            ++steps;
            ++global_step;
        }
        if (steps == 0) break;

        EpochLog e;
        e.epoch = epoch;
        e.mean = sum.scaled(1.0 / static_cast<double>(steps));
        e.nmse = nmse.empty() ? 0.0 : nmse.value();
        e.steps = steps;
        if (!data.validation.empty()) {
            e.val_bleu1 = validation_bleu1(model, data.vocab, data.validation, cfg,
                                           derive_seed(cfg.seed, 0x76616c));
            model.train(true);
        }
        e.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(e);

        if (out_dir) {
            log_file << to_json(e).dump() << '\n';
            log_file.flush();
            const auto header = header_for(epoch);
            if (cfg.save_epoch_checkpoints) {
                char name[32];
                std::snprintf(name, sizeof name, "epoch-%03d.ckpt", epoch);
                result.last_checkpoint = *out_dir / name;
                save_model(result.last_checkpoint, model, data.vocab, header);
            }
            // Without a validation split the latest epoch is the best one.
            if (e.val_bleu1 >= best_bleu) {
                best_bleu = e.val_bleu1;
                result.best_checkpoint = *out_dir / "best.ckpt";
                save_model(result.best_checkpoint, model, data.vocab, header);
            }
        }
        if (on_epoch) on_epoch(e);
        if (cfg.max_steps > 0 && global_step >= cfg.max_steps) break;
    }
    if (out_dir) {
        const auto last = *out_dir / "last.ckpt";
        save_model(last, model, data.vocab, header_for(static_cast<int>(result.log.size())));
        if (!cfg.save_epoch_checkpoints) result.last_checkpoint = last;
        if (result.best_checkpoint.empty()) result.best_checkpoint = last;
    }
    result.joint_branches = trainer.joint_branches();
    result.alternating_branches = trainer.alternating_branches();
    model.train(false);
    return result;
}

}  // namespace semcom::training
