#include "semcom/eval/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

#include <torch/torch.h>

#include "semcom/baselines/conventional.hpp"
#include "semcom/baselines/fixed5.hpp"
#include "semcom/baselines/huffman.hpp"
#include "semcom/errors.hpp"
#include "semcom/eval/plot.hpp"
#include "semcom/eval/tsne.hpp"
#include "semcom/inference.hpp"
#include "semcom/metrics.hpp"
#include "semcom/seed.hpp"

namespace semcom::eval {

namespace {

Sentences head(const Sentences& s, int n) {
    const auto k = std::min(s.size(), static_cast<std::size_t>(std::max(n, 0)));
    return Sentences(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
}

std::array<double, 4> bleu_1_to_4(const std::vector<std::string>& refs, const std::vector<std::string>& hyps) {
    std::array<double, 4> out{};
    for (int k = 1; k <= 4; ++k) out[static_cast<std::size_t>(k - 1)] = metrics::bleu(refs, hyps, k).score;
    return out;
}

// Restores torch's intra-op thread count on scope exit.
class TorchThreads {
public:
    explicit TorchThreads(int n) : saved_(torch::get_num_threads()) { torch::set_num_threads(n); }
    ~TorchThreads() { torch::set_num_threads(saved_); }

private:
    int saved_;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

std::vector<EvalRecord> to_records(const std::string& framework_id, channel::ChannelKind kind, double snr_db,
                                   std::uint64_t seed, const CellMetrics& m) {
    std::vector<EvalRecord> out;
    for (int k = 0; k < 4; ++k)
        out.push_back({framework_id, kind, snr_db, seed, kMetricNames[static_cast<std::size_t>(k)],
                       m.bleu[static_cast<std::size_t>(k)], m.n_sentences, false});
    if (m.nmse) out.push_back({framework_id, kind, snr_db, seed, "nmse", *m.nmse, m.n_sentences, false});
    if (m.ber) out.push_back({framework_id, kind, snr_db, seed, "ber", *m.ber, m.n_sentences, false});
    return out;
}

CellMetrics evaluate_neural(SemComModel& model, const text::Vocabulary& vocab, Framework framework,
                            const Sentences& test, const LinkConfig& link, std::uint64_t seed, int batch_size,
                            int max_len) {
    if (test.empty()) throw EmptyCorpusError("no test sentences");
    std::vector<std::vector<int>> ids;
    ids.reserve(test.size());
    for (const auto& s : test) ids.push_back(vocab.encode(s));
    auto run = run_neural(model, framework, vocab, ids, link, seed, batch_size, max_len);
    CellMetrics m;
    m.bleu = bleu_1_to_4(joined(test), run.hypotheses);
    m.nmse = run.nmse.value();
    m.n_sentences = test.size();
    return m;
}

CellMetrics evaluate_conventional(Framework framework, const baselines::SourceCodec& codec, const Sentences& test,
                                  const channel::FadingSpec& fading, double snr_db, std::uint64_t seed) {
    if (is_neural(framework)) throw ConfigError(to_string(framework) + " is not a conventional framework");
    if (test.empty()) throw EmptyCorpusError("no test sentences");
    baselines::ConventionalLink link;
    link.use_csi = uses_csi(framework);
    link.fading = fading;
    link.snr_db = snr_db;
    const auto refs = joined(test);
    const auto out = baselines::run_conventional(refs, codec, link, seed);
    std::vector<std::string> hyps;
    std::size_t bits = 0, errors = 0;
    for (const auto& s : out) {
        hyps.push_back(s.text);
        bits += s.n_bits;
        errors += s.bit_errors;
    }
    CellMetrics m;
    m.bleu = bleu_1_to_4(refs, hyps);
    m.ber = bits == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(bits);
    m.n_sentences = test.size();
    return m;
}

std::uint64_t cell_seed(std::uint64_t seed, channel::ChannelKind kind, double snr_db) {
    const auto snr_key = static_cast<std::uint64_t>(std::llround(snr_db * 1000.0) + (1LL << 40));
    return derive_seed(derive_seed(derive_seed(seed, 0x63656c6c), static_cast<std::uint64_t>(kind)), snr_key);
}

void SweepPlan::validate() const {
    if (frameworks.empty() || channels.empty() || snr_grid.empty() || seeds.empty())
        throw ConfigError("sweep: frameworks, channels, snr grid and seeds must be nonempty");
    for (double s : snr_grid)
        if (!is_grid_snr(s)) throw RangeError("sweep: snr " + fmt("%g", s) + " dB is not on the 0..24 dB grid");
    if (n_sentences < 1 || workers < 1 || batch_size < 1 || max_len < 1)
        throw ConfigError("sweep: n_sentences, workers, batch_size and max_len must be >= 1");
    if (std::find(frameworks.begin(), frameworks.end(), Framework::sc_imperfect_csi) != frameworks.end() &&
        csi_error_vars.empty())
        throw ConfigError("sweep: sc-imperfect-csi needs at least one CSI error variance");
}

SweepPlan plan_from(const RunConfig& cfg) {
    SweepPlan p;
    p.frameworks = cfg.eval.frameworks;
    p.channels = cfg.eval.channels;
    p.snr_grid = cfg.eval.snr_grid;
    p.seeds = cfg.eval.seeds;
    p.n_sentences = cfg.eval.n_sentences;
    p.workers = cfg.eval.workers;
    p.csi_error_vars = cfg.eval.csi_error_vars;
    p.rician_k = cfg.train.link.fading.rician_k;
    p.batch_size = cfg.eval.batch_size;
    p.max_len = cfg.decode_len();
    return p;
}

std::optional<std::filesystem::path> checkpoint_for(const SweepPlan& plan, Framework f, channel::ChannelKind kind) {
    if (auto it = plan.checkpoints.find(to_string(f) + "@" + channel::to_string(kind)); it != plan.checkpoints.end())
        return it->second;
    if (auto it = plan.checkpoints.find(to_string(f)); it != plan.checkpoints.end()) return it->second;
    return std::nullopt;
}

SweepResult run_sweep(const SweepPlan& plan, const Sentences& test_all, const Sentences& train) {
    plan.validate();
    const auto test = head(test_all, plan.n_sentences);
    if (test.empty()) throw EmptyCorpusError("sweep: no test sentences");
    SweepResult result;

    struct Task {
        std::string id;
        Framework framework;
        channel::ChannelKind kind;
        double snr;
        std::uint64_t seed;
        double csi_error_var = 0.0;
        LoadedModel* model = nullptr;
    };

    std::map<std::string, std::unique_ptr<LoadedModel>> models;
    std::unique_ptr<baselines::HuffmanCodebook> huffman;
    const baselines::Fixed5Codec fixed5;
    std::vector<Task> tasks;

    for (auto kind : plan.channels) {
        // Resolve checkpoints for this channel once; skipped frameworks warn once per channel.
        std::map<Framework, LoadedModel*> resolved;
        std::vector<Framework> active;
        for (auto f : plan.frameworks) {
            if (!is_neural(f)) {
                active.push_back(f);
                continue;
            }
            auto path = checkpoint_for(plan, f, kind);
            if (!path || !std::filesystem::exists(*path)) {
                result.warnings.push_back("skipping " + to_string(f) + " on " + channel::to_string(kind) +
                                          ": no checkpoint" + (path ? " at " + path->string() : std::string()));
                continue;
            }
            auto key = std::filesystem::weakly_canonical(*path).string();
            auto& slot = models[key];
            if (!slot) slot = std::make_unique<LoadedModel>(load_model(*path));
            resolved[f] = slot.get();
            active.push_back(f);
        }
        for (double snr : plan.snr_grid)
            for (auto seed : plan.seeds)
                for (auto f : active) {
                    if (f == Framework::conv_huffman_csi || f == Framework::conv_huffman_nocsi) {
                        if (!huffman) {
                            if (train.empty()) throw EmptyCorpusError("sweep: Huffman baseline needs training text");
                            huffman = std::make_unique<baselines::HuffmanCodebook>(
                                baselines::HuffmanCodebook::from_text(joined(train)));
                        }
                    }
                    if (f == Framework::sc_imperfect_csi) {
                        for (double v : plan.csi_error_vars)
                            tasks.push_back({imperfect_csi_id(v), f, kind, snr, seed, v, resolved[f]});
                    } else {
                        tasks.push_back({to_string(f), f, kind, snr, seed, 0.0, is_neural(f) ? resolved[f] : nullptr});
                    }
                }
    }

    std::vector<std::vector<EvalRecord>> slots(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto run_task = [&](const Task& t) {
        const auto seed = cell_seed(t.seed, t.kind, t.snr);
        const channel::FadingSpec fading{t.kind, plan.rician_k};
        CellMetrics m;
        if (is_neural(t.framework)) {
            LinkConfig link{fading, t.snr, csi_mode_of(t.framework), t.csi_error_var};
            m = evaluate_neural(t.model->model, t.model->vocab, t.framework, test, link, seed, plan.batch_size,
                                plan.max_len);
        } else {
            const baselines::SourceCodec& codec =
                (t.framework == Framework::conv_fixed_csi || t.framework == Framework::conv_fixed_nocsi)
                    ? static_cast<const baselines::SourceCodec&>(fixed5)
                    : static_cast<const baselines::SourceCodec&>(*huffman);
            m = evaluate_conventional(t.framework, codec, test, fading, t.snr, seed);
        }
        return to_records(t.id, t.kind, t.snr, t.seed, m);
    };
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                slots[i] = run_task(tasks[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        TorchThreads single(1);
        const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(plan.workers), std::max<std::size_t>(tasks.size(), 1));
        std::vector<std::thread> pool;
        for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto& s : slots)
        for (auto& r : s) result.records.push_back(std::move(r));

    if (plan.out_dir) {
        std::filesystem::create_directories(*plan.out_dir);
        write_csv(*plan.out_dir / "records.csv", result.records);
        result.outputs.push_back("records.csv");
        if (!result.warnings.empty()) {
            std::ofstream w(*plan.out_dir / "warnings.txt", std::ios::trunc);
            for (const auto& s : result.warnings) w << s << '\n';
            result.outputs.push_back("warnings.txt");
        }
        if (plan.plots)
            for (auto& p : write_bleu_plots(*plan.out_dir, result.records)) result.outputs.push_back(p);
    }
    return result;
}

std::vector<std::filesystem::path> write_bleu_plots(const std::filesystem::path& dir,
                                                    const std::vector<EvalRecord>& records,
                                                    const std::string& prefix) {
    std::vector<std::filesystem::path> out;
    std::vector<channel::ChannelKind> kinds;
    for (const auto& r : records)
        if (std::find(kinds.begin(), kinds.end(), r.channel) == kinds.end()) kinds.push_back(r.channel);
    for (auto kind : kinds) {
        std::vector<std::string> ids;
        std::map<std::string, std::map<double, std::pair<double, int>>> acc;
        for (const auto& r : records) {
            if (r.channel != kind || r.metric != "bleu1") continue;
            if (std::find(ids.begin(), ids.end(), r.framework) == ids.end()) ids.push_back(r.framework);
            auto& cell = acc[r.framework][r.snr_db];
            cell.first += r.value;
            cell.second += 1;
        }
        if (ids.empty()) continue;
        LinePlot plot{"BLEU-1 vs SNR, " + channel::to_string(kind) + " channel", "SNR (dB)", "BLEU-1", {}};
        for (const auto& id : ids) {
            Series s{id, {}};
            for (const auto& [snr, c] : acc[id]) s.points.emplace_back(snr, c.first / c.second);
            plot.series.push_back(std::move(s));
        }
        const auto stem = prefix + "_" + channel::to_string(kind);
        write_svg(dir / (stem + ".svg"), render_svg(plot));
        write_png(dir / (stem + ".png"), plot);
        out.emplace_back(stem + ".svg");
        out.emplace_back(stem + ".png");
    }
    return out;
}

std::vector<AblationVariant> ablation_variants(const training::TrainConfig& base) {
    std::vector<AblationVariant> v;
    v.push_back({"full", base});
    auto no_adv = base;
    no_adv.w2 = 0.0;
    v.push_back({"no-adv", no_adv});
    auto no_sytc = base;
    no_sytc.gan.sytc_weight = 0.0;
    v.push_back({"no-sytc", no_sytc});
    auto no_smtc = base;
    no_smtc.gan.smtc_weight = 0.0;
    v.push_back({"no-smtc", no_smtc});
    return v;
}

AblationResult run_ablation(const RunConfig& cfg, const PreparedData& data, channel::ChannelKind kind,
                            const std::optional<std::filesystem::path>& out_dir) {
    cfg.validate();
    for (double s : cfg.eval.snr_grid)
        if (!is_grid_snr(s)) throw RangeError("ablation: snr " + fmt("%g", s) + " dB is not on the 0..24 dB grid");
    const auto test = head(data.test, cfg.eval.n_sentences);
    if (test.empty()) throw EmptyCorpusError("ablation: no test sentences");

    auto base = cfg.train;
    base.framework = Framework::ti_gsc;
    base.link.fading.kind = kind;
    base.link.csi = CsiMode::none;

    ModelConfig mc = cfg.model;
    mc.aedm.vocab_size = static_cast<int>(data.vocab.size());

    AblationResult result;
    for (const auto& variant : ablation_variants(base)) {
        for (auto seed : cfg.eval.seeds) {
            auto tc = variant.train;
            tc.seed = seed;
            auto model = SemComModel::create(mc, seed);
            auto td = training::prepare_train_data(data.train, data.vocab, tc);
            std::optional<std::filesystem::path> dir;
            if (out_dir) dir = *out_dir / (variant.name + "-seed" + std::to_string(seed));
            auto tr = training::train(model, td, tc, dir);
            result.logs[variant.name + "/seed" + std::to_string(seed)] = tr.log;
            for (double snr : cfg.eval.snr_grid) {
                LinkConfig link{base.link.fading, snr, CsiMode::none, 0.0};
                auto m = evaluate_neural(model, data.vocab, Framework::ti_gsc, test, link, cell_seed(seed, kind, snr),
                                         cfg.eval.batch_size, cfg.decode_len());
                for (auto& r : to_records("ti-gsc-" + variant.name, kind, snr, seed, m))
                    result.records.push_back(std::move(r));
            }
        }
    }
    if (out_dir) {
        write_csv(*out_dir / "records.csv", result.records);
        write_bleu_plots(*out_dir, result.records, "ablation_bleu1");
    }
    return result;
}

EmbeddingExport export_embeddings(SemComModel& model, const text::Vocabulary& vocab, const Sentences& test,
                                  const LinkConfig& link, bool with_suppressor, std::uint64_t seed, int top_n,
                                  int max_points, const std::optional<std::filesystem::path>& out_dir) {
    if (top_n < 1) throw ConfigError("top_n must be >= 1");
    if (max_points < 2 || static_cast<std::size_t>(max_points) > kTsneMaxPoints)
        throw ConfigError("max_points must lie in [2, 5000]");
    EmbeddingExport ex;

    std::map<int, std::size_t> freq;
    for (const auto& s : test)
        for (const auto& w : s)
            if (vocab.contains(w)) ++freq[vocab.id(w)];
    std::vector<std::pair<std::size_t, std::string>> ranked;
    for (const auto& [id, n] : freq) ranked.emplace_back(n, vocab.token(id));
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (ranked.size() < static_cast<std::size_t>(top_n)) {
        ex.warnings.push_back("only " + std::to_string(ranked.size()) + " distinct in-vocabulary words; top_n reduced from " +
                              std::to_string(top_n));
        top_n = static_cast<int>(ranked.size());
    }
    if (top_n == 0) throw EmptyCorpusError("no in-vocabulary words to export");
    std::map<int, int> label_of;
    for (int i = 0; i < top_n; ++i) {
        ex.words.push_back(ranked[static_cast<std::size_t>(i)].second);
        label_of[vocab.id(ex.words.back())] = i;
    }

    std::vector<std::string> kinds = {"X", "Y"};
    if (with_suppressor) kinds.push_back("Ybar");
    std::map<std::string, std::vector<std::vector<double>>> vectors;
    std::vector<int> labels;

    torch::NoGradGuard no_grad;
    model.train(false);
    constexpr std::size_t kBatch = 32;
    for (std::size_t start = 0, k = 0; start < test.size() && labels.size() < static_cast<std::size_t>(max_points);
         start += kBatch, ++k) {
        std::vector<std::vector<int>> rows;
        for (std::size_t i = start; i < std::min(test.size(), start + kBatch); ++i) rows.push_back(vocab.encode(test[i]));
        auto batch = text::SentenceBatch::from_content(rows);
        auto x = model.aedm->encode(batch);
        auto y = pass_link(x, link, derive_seed(seed, k)).decoder_input;
        std::map<std::string, at::Tensor> sig{{"X", x.values.to(at::kDouble)}, {"Y", y.values.to(at::kDouble)}};
        if (with_suppressor) sig["Ybar"] = gsdsm::suppress(y, model.generator).values.to(at::kDouble);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t t = 0; t < rows[r].size(); ++t) {
                auto it = label_of.find(rows[r][t]);
                if (it == label_of.end()) continue;
                if (labels.size() >= static_cast<std::size_t>(max_points)) break;
                labels.push_back(it->second);
                for (const auto& kind : kinds) {
                    auto v = sig[kind][static_cast<std::int64_t>(r)][static_cast<std::int64_t>(t + 1)].reshape({-1}).contiguous();
                    const double* p = v.data_ptr<double>();
                    vectors[kind].emplace_back(p, p + v.numel());
                }
            }
    }
    if (labels.empty()) throw EmptyCorpusError("no occurrences collected");
    for (const auto& kind : kinds)
        for (std::size_t i = 0; i < labels.size(); ++i)
            ex.rows.push_back({kind, ex.words[static_cast<std::size_t>(labels[i])], vectors[kind][i]});

    for (const auto& kind : kinds) ex.projection[kind] = tsne(vectors[kind], TsneConfig{.seed = seed});

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        {
            std::ofstream out(*out_dir / "embeddings.tsv", std::ios::trunc);
            if (!out) throw IoError("cannot write embeddings.tsv");
            for (const auto& r : ex.rows) {
                out << r.kind << '\t' << r.word;
                for (double v : r.values) out << '\t' << fmt("%.9g", v);
                out << '\n';
            }
            ex.outputs.emplace_back("embeddings.tsv");
        }
        for (const auto& kind : kinds) {
            const auto& proj = ex.projection[kind];
            std::ofstream out(*out_dir / ("tsne_" + kind + ".csv"), std::ios::trunc);
            out << "word,x,y\n";
            ScatterPlot plot{"t-SNE of " + kind, ex.words, {}, {}, {}};
            for (std::size_t i = 0; i < proj.size(); ++i) {
                out << ex.words[static_cast<std::size_t>(labels[i])] << ',' << fmt("%.9g", proj[i][0]) << ','
                    << fmt("%.9g", proj[i][1]) << '\n';
                plot.x.push_back(proj[i][0]);
                plot.y.push_back(proj[i][1]);
                plot.label.push_back(labels[i]);
            }
            write_svg(*out_dir / ("tsne_" + kind + ".svg"), render_svg(plot));
            write_png(*out_dir / ("tsne_" + kind + ".png"), plot);
            for (const char* ext : {".csv", ".svg", ".png"}) ex.outputs.emplace_back("tsne_" + kind + ext);
        }
    }
    return ex;
}

}  // namespace semcom::eval
