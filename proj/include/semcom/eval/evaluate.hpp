#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semcom/baselines/bits.hpp"
#include "semcom/eval/config.hpp"
#include "semcom/eval/data.hpp"
#include "semcom/eval/records.hpp"
#include "semcom/framework.hpp"
#include "semcom/training.hpp"

namespace semcom::eval {

struct CellMetrics {
    std::array<double, 4> bleu{};  // BLEU-1..4
    std::optional<double> nmse;    // neural frameworks
    std::optional<double> ber;     // conventional frameworks
    std::size_t n_sentences = 0;
};

std::vector<EvalRecord> to_records(const std::string& framework_id, channel::ChannelKind kind, double snr_db,
                                   std::uint64_t seed, const CellMetrics& m);

CellMetrics evaluate_neural(SemComModel& model, const text::Vocabulary& vocab, Framework framework,
                            const Sentences& test, const LinkConfig& link, std::uint64_t seed,
                            int batch_size, int max_len);

CellMetrics evaluate_conventional(Framework framework, const baselines::SourceCodec& codec,
                                  const Sentences& test, const channel::FadingSpec& fading,
                                  double snr_db, std::uint64_t seed);

// Seed shared by every framework of one (channel, snr, seed) cell, so frameworks
// are compared on the same channel draws.
std::uint64_t cell_seed(std::uint64_t seed, channel::ChannelKind kind, double snr_db);

struct SweepPlan {
    std::vector<Framework> frameworks;
    std::vector<channel::ChannelKind> channels;
    std::vector<double> snr_grid;
    std::vector<std::uint64_t> seeds;
    // Keys: "<framework>" or "<framework>@<channel>"; the channel-specific entry wins.
    std::map<std::string, std::filesystem::path> checkpoints;
    std::optional<std::filesystem::path> out_dir;
    int n_sentences = 500;
    int workers = 1;
    std::vector<double> csi_error_vars = {0.002, 0.02, 0.2};
    double rician_k = 1.0;
    int batch_size = 64;
    int max_len = 31;
    bool plots = true;

    void validate() const;
};

SweepPlan plan_from(const RunConfig& cfg);

struct SweepResult {
    std::vector<EvalRecord> records;
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> outputs;  // relative to out_dir
};

// Evaluates every (framework, channel, snr, seed) cell on the first n_sentences
// test sentences. Huffman codebooks are built from `train`. Records are ordered by
// cell and identical for any worker count.
SweepResult run_sweep(const SweepPlan& plan, const Sentences& test, const Sentences& train);

std::optional<std::filesystem::path> checkpoint_for(const SweepPlan& plan, Framework f,
                                                    channel::ChannelKind kind);

// BLEU-1 against SNR per channel, averaged over seeds; one file pair per channel.
std::vector<std::filesystem::path> write_bleu_plots(const std::filesystem::path& dir,
                                                    const std::vector<EvalRecord>& records,
                                                    const std::string& prefix = "bleu1");

struct AblationVariant {
    std::string name;  // full, no-adv, no-sytc, no-smtc
    training::TrainConfig train;
};

// full plus one variant per zeroed term (w2, lambda, gamma).
std::vector<AblationVariant> ablation_variants(const training::TrainConfig& base);

struct AblationResult {
    std::vector<EvalRecord> records;  // framework ids "ti-gsc-<variant>"
    std::map<std::string, std::vector<training::EpochLog>> logs;  // "<variant>/seed<k>"
};

// Trains and evaluates each variant for every seed in cfg.eval.seeds on `kind`, at
// every SNR of cfg.eval.snr_grid.
AblationResult run_ablation(const RunConfig& cfg, const PreparedData& data, channel::ChannelKind kind,
                            const std::optional<std::filesystem::path>& out_dir);

struct EmbeddingRow {
    std::string kind;  // X, Y or Ybar
    std::string word;
    std::vector<double> values;
};

struct EmbeddingExport {
    std::vector<std::string> words;
    std::vector<EmbeddingRow> rows;
    std::map<std::string, std::vector<std::array<double, 2>>> projection;  // per kind, row order
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> outputs;
};

// Per-token X, Y (and Ybar when with_suppressor) for occurrences of the top_n most
// frequent test words, at most max_points occurrences, projected with t-SNE.
EmbeddingExport export_embeddings(SemComModel& model, const text::Vocabulary& vocab, const Sentences& test,
                                  const LinkConfig& link, bool with_suppressor, std::uint64_t seed,
                                  int top_n, int max_points, const std::optional<std::filesystem::path>& out_dir);

}  // namespace semcom::eval
