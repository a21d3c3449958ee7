// Command-line front end: prepare-data, train, evaluate, sweep, ablate, discount, visualize.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semcom/errors.hpp"
#include "semcom/eval/config.hpp"
#include "semcom/eval/data.hpp"
#include "semcom/eval/evaluate.hpp"
#include "semcom/eval/manifest.hpp"
#include "semcom/eval/records.hpp"
#include "semcom/textcorpus.hpp"
#include "semcom/training.hpp"

namespace fs = std::filesystem;
using namespace semcom;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    std::string out;
};

void add_common(CLI::App* app, Common& c, bool out_required = true) {
    app->add_option("--config", c.config, "flat key = value config file")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--set", c.sets, "override one config entry (key=value); repeatable");
    auto* out = app->add_option("--out", c.out, "output directory");
    if (out_required) out->required();
}

eval::RunConfig load_config(const Common& c) {
    eval::RunConfig cfg;
    if (!c.config.empty()) eval::apply_config_file(cfg, c.config);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        eval::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (c.seed) cfg.set_seed(*c.seed);
    return cfg;
}

json seeds_json(const eval::RunConfig& cfg) { return json{{"seed", cfg.seed}, {"eval_seeds", cfg.eval.seeds}}; }

std::vector<fs::path> data_inputs(const fs::path& data) {
    return {data / "train.txt", data / "test.txt", data / "vocab.json"};
}

int cmd_prepare(const Common& c, const std::string& input, std::size_t synthetic) {
    auto cfg = load_config(c);
    cfg.corpus.validate();
    const fs::path out = c.out;
    fs::create_directories(out);
    std::vector<std::string> lines;
    std::vector<fs::path> inputs;
    if (!input.empty()) {
        lines = text::read_lines(input);
        inputs.push_back(input);
    } else if (synthetic > 0) {
        lines = text::synthesize_corpus(synthetic, cfg.seed);
    } else {
        throw ConfigError("prepare-data needs --input or --synthetic");
    }
    auto data = eval::prepare_data(lines, cfg.corpus);
    eval::save_prepared(out, data);
    std::cout << "kept " << data.train.size() + data.test.size() << " sentences (" << data.train.size() << " train, "
              << data.test.size() << " test), vocabulary " << data.vocab.size() << "\n";
    eval::Manifest m{"prepare-data", eval::to_json(cfg), seeds_json(cfg), inputs, {"train.txt", "test.txt", "vocab.json"}, {}};
    if (synthetic > 0) m.extra["synthetic_sentences"] = synthetic;
    eval::write_manifest(out, m);
    return 0;
}

int cmd_train(const Common& c, const std::string& data_dir) {
    auto cfg = load_config(c);
    cfg.validate();
    const fs::path out = c.out;
    auto data = eval::load_prepared(data_dir);
    ModelConfig mc = cfg.model;
    mc.aedm.vocab_size = static_cast<int>(data.vocab.size());
    auto model = SemComModel::create(mc, cfg.seed);
    auto td = training::prepare_train_data(data.train, data.vocab, cfg.train);
    std::cout << "training " << to_string(cfg.train.framework) << " (" << training::to_string(cfg.train.scheme)
              << ") on " << td.train.size() << " sentences, " << td.validation.size() << " held out\n";
    auto res = training::train(model, td, cfg.train, out, [](const training::EpochLog& e) {
        std::cout << training::to_json(e).dump() << std::endl;
    });
    std::vector<fs::path> outputs = {"train_log.jsonl", "best.ckpt", "last.ckpt"};
    eval::Manifest m{"train", eval::to_json(cfg), seeds_json(cfg), data_inputs(data_dir), outputs, {}};
    m.extra["best_checkpoint"] = res.best_checkpoint.string();
    eval::write_manifest(out, m);
    std::cout << "best checkpoint: " << res.best_checkpoint.string() << "\n";
    return 0;
}

void finish_records(const fs::path& out, const std::string& command, const eval::RunConfig& cfg,
                    const std::vector<fs::path>& inputs, const eval::SweepResult& r, json extra = json::object()) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    eval::Manifest m{command, eval::to_json(cfg), seeds_json(cfg), inputs, r.outputs, std::move(extra)};
    m.extra["warnings"] = r.warnings;
    m.extra["n_records"] = r.records.size();
    eval::write_manifest(out, m);
    std::cout << "wrote " << r.records.size() << " records to " << (out / "records.csv").string() << "\n";
}

int cmd_evaluate(const Common& c, const std::string& data_dir, const std::string& checkpoint,
                 const std::string& framework) {
    auto cfg = load_config(c);
    cfg.validate();
    auto data = eval::load_prepared(data_dir);
    auto plan = eval::plan_from(cfg);
    plan.channels = {cfg.train.link.fading.kind};
    plan.out_dir = fs::path(c.out);
    plan.plots = false;
    Framework f = cfg.train.framework;
    if (!framework.empty()) {
        f = parse_framework(framework);
    } else if (!checkpoint.empty()) {
        f = parse_framework(load_model(checkpoint).header.at("framework").get<std::string>());
    }
    plan.frameworks = {f};
    std::vector<fs::path> inputs = data_inputs(data_dir);
    if (!checkpoint.empty()) {
        plan.checkpoints[to_string(f)] = checkpoint;
        inputs.push_back(checkpoint);
    } else if (is_neural(f)) {
        throw ConfigError("evaluate: " + to_string(f) + " needs --checkpoint");
    }
    auto r = eval::run_sweep(plan, data.test, data.train);
    finish_records(c.out, "evaluate", cfg, inputs, r, {{"framework", to_string(f)}});
    return 0;
}

int cmd_sweep(const Common& c, const std::string& data_dir, const std::vector<std::string>& checkpoints) {
    auto cfg = load_config(c);
    cfg.validate();
    auto data = eval::load_prepared(data_dir);
    auto plan = eval::plan_from(cfg);
    plan.out_dir = fs::path(c.out);
    std::vector<fs::path> inputs = data_inputs(data_dir);
    for (const auto& spec : checkpoints) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--checkpoint expects framework[@channel]=path");
        const auto key = spec.substr(0, eq);
        const auto at = key.find('@');
        parse_framework(key.substr(0, at));
        if (at != std::string::npos) channel::parse_kind(key.substr(at + 1));
        plan.checkpoints[key] = spec.substr(eq + 1);
        if (fs::exists(spec.substr(eq + 1))) inputs.emplace_back(spec.substr(eq + 1));
    }
    auto r = eval::run_sweep(plan, data.test, data.train);
    finish_records(c.out, "sweep", cfg, inputs, r);
    return 0;
}

int cmd_ablate(const Common& c, const std::string& data_dir, const std::string& channel_name) {
    auto cfg = load_config(c);
    cfg.validate();
    auto data = eval::load_prepared(data_dir);
    auto kind = channel_name.empty() ? cfg.train.link.fading.kind : channel::parse_kind(channel_name);
    const fs::path out = c.out;
    auto r = eval::run_ablation(cfg, data, kind, out);
    eval::Manifest m{"ablate", eval::to_json(cfg), seeds_json(cfg), data_inputs(data_dir), {"records.csv"}, {}};
    m.extra["channel"] = channel::to_string(kind);
    json variants = json::array();
    for (const auto& v : eval::ablation_variants(cfg.train)) variants.push_back({{"name", v.name}, {"train", v.train}});
    m.extra["variants"] = variants;
    eval::write_manifest(out, m);
    std::cout << "wrote " << r.records.size() << " records to " << (out / "records.csv").string() << "\n";
    return 0;
}

int cmd_discount(const Common& c, const std::string& records_path, double rho) {
    auto cfg = load_config(c);
    fs::path in = records_path;
    fs::path in_dir = in.parent_path();
    if (fs::is_directory(in)) {
        in_dir = in;
        in /= "records.csv";
    }
    auto records = eval::read_csv(in);
    if (fs::exists(in_dir / "manifest.json")) {
        auto prev = eval::read_manifest(in_dir);
        if (prev.contains("discount_rho") && prev["discount_rho"].get<double>() > 0.0)
            for (auto& r : records) r.discounted = true;
    }
    auto out_records = eval::time_discount(records, rho);
    const fs::path out = c.out;
    fs::create_directories(out);
    eval::write_csv(out / "records.csv", out_records);
    eval::SweepResult r{out_records, {}, {"records.csv"}};
    for (auto& p : eval::write_bleu_plots(out, out_records, "bleu1_discounted")) r.outputs.push_back(p);
    finish_records(out, "discount", cfg, {in}, r, {{"discount_rho", rho}});
    return 0;
}

int cmd_visualize(const Common& c, const std::string& data_dir, const std::string& checkpoint,
                  std::optional<double> snr) {
    auto cfg = load_config(c);
    cfg.validate();
    auto data = eval::load_prepared(data_dir);
    auto loaded = load_model(checkpoint);
    const auto f = parse_framework(loaded.header.at("framework").get<std::string>());
    LinkConfig link = cfg.train.link;
    if (snr) link.snr_db = *snr;
    link.csi = csi_mode_of(f);
    const fs::path out = c.out;
    auto ex = eval::export_embeddings(loaded.model, loaded.vocab, data.test, link, has_suppressor(f), cfg.seed,
                                      cfg.eval.top_n, cfg.eval.max_points, out);
    for (const auto& w : ex.warnings) std::cerr << "warning: " << w << "\n";
    auto inputs = data_inputs(data_dir);
    inputs.emplace_back(checkpoint);
    eval::Manifest m{"visualize", eval::to_json(cfg), seeds_json(cfg), inputs, ex.outputs, {}};
    m.extra["words"] = ex.words;
    m.extra["rows"] = ex.rows.size();
    m.extra["snr_db"] = link.snr_db;
    m.extra["warnings"] = ex.warnings;
    eval::write_manifest(out, m);
    std::cout << "wrote " << ex.rows.size() << " embedding rows for " << ex.words.size() << " words\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic communication toolkit"};
    app.require_subcommand(1);

    Common prep_c, train_c, eval_c, sweep_c, abl_c, disc_c, vis_c;
    std::string input, data_dir, checkpoint, framework, channel_name, records_path;
    std::size_t synthetic = 0;
    std::vector<std::string> checkpoints;
    double rho = 0.0;
    std::optional<double> snr;

    auto* prep = app.add_subcommand("prepare-data", "filter, split and index a corpus");
    add_common(prep, prep_c);
    auto* in_opt = prep->add_option("--input", input, "raw corpus, one sentence per line")->check(CLI::ExistingFile);
    prep->add_option("--synthetic", synthetic, "generate N synthetic sentences instead")->excludes(in_opt);

    auto* train = app.add_subcommand("train", "train a neural framework");
    add_common(train, train_c);
    train->add_option("--data", data_dir, "prepare-data output")->required()->check(CLI::ExistingDirectory);

    auto* evaluate = app.add_subcommand("evaluate", "evaluate one framework over the SNR grid");
    add_common(evaluate, eval_c);
    evaluate->add_option("--data", data_dir)->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--checkpoint", checkpoint)->check(CLI::ExistingFile);
    evaluate->add_option("--framework", framework, "defaults to the checkpoint's framework");

    auto* sweep = app.add_subcommand("sweep", "evaluate frameworks x channels x SNR x seeds");
    add_common(sweep, sweep_c);
    sweep->add_option("--data", data_dir)->required()->check(CLI::ExistingDirectory);
    sweep->add_option("--checkpoint", checkpoints, "framework[@channel]=path; repeatable");

    auto* ablate = app.add_subcommand("ablate", "train and evaluate the loss ablation variants");
    add_common(ablate, abl_c);
    ablate->add_option("--data", data_dir)->required()->check(CLI::ExistingDirectory);
    ablate->add_option("--channel", channel_name, "awgn, rician or rayleigh");

    auto* discount = app.add_subcommand("discount", "time-proportion discount of CSI frameworks");
    add_common(discount, disc_c);
    discount->add_option("--records", records_path, "records.csv or a directory holding one")->required();
    discount->add_option("--rho", rho, "preprocessing time fraction in [0, 1)")->required();

    auto* visualize = app.add_subcommand("visualize", "export per-token embeddings and t-SNE plots");
    add_common(visualize, vis_c);
    visualize->add_option("--data", data_dir)->required()->check(CLI::ExistingDirectory);
    visualize->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
    visualize->add_option("--snr", snr, "SNR in dB (default channel.snr_db)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*prep) return cmd_prepare(prep_c, input, synthetic);
        if (*train) return cmd_train(train_c, data_dir);
        if (*evaluate) return cmd_evaluate(eval_c, data_dir, checkpoint, framework);
        if (*sweep) return cmd_sweep(sweep_c, data_dir, checkpoints);
        if (*ablate) return cmd_ablate(abl_c, data_dir, channel_name);
        if (*discount) return cmd_discount(disc_c, records_path, rho);
        if (*visualize) return cmd_visualize(vis_c, data_dir, checkpoint, snr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
