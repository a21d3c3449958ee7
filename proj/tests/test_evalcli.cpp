#include "doctest_torch.hpp"

#include <cmath>
#include <fstream>

#include "semcom/errors.hpp"
#include "semcom/eval/config.hpp"
#include "semcom/eval/data.hpp"
#include "semcom/eval/evaluate.hpp"
#include "semcom/eval/manifest.hpp"
#include "semcom/eval/records.hpp"
#include "semcom/eval/tsne.hpp"
#include "test_util.hpp"

using namespace semcom;
using namespace semcom::eval;

namespace {

std::vector<EvalRecord> sample_records() {
    std::vector<EvalRecord> r;
    r.push_back({"ti-gsc", channel::ChannelKind::rician, 12, 0, "bleu1", 0.8, 500, false});
    r.push_back({"sc-perfect-csi", channel::ChannelKind::rician, 12, 0, "bleu1", 0.7, 500, false});
    r.push_back({"sc-imperfect-csi-v0.02", channel::ChannelKind::rayleigh, 3, 1, "bleu4", 0.3, 500, false});
    r.push_back({"sc-vanilla", channel::ChannelKind::awgn, 24, 0, "bleu2", 0.6, 500, false});
    r.push_back({"conv-fixed-csi", channel::ChannelKind::awgn, 0, 0, "bleu1", 0.25, 500, false});
    r.push_back({"conv-huffman-nocsi", channel::ChannelKind::awgn, 0, 0, "bleu1", 0.2, 500, false});
    r.push_back({"conv-fixed-csi", channel::ChannelKind::awgn, 0, 0, "ber", 0.01, 500, false});
    r.push_back({"sc-perfect-csi", channel::ChannelKind::rician, 12, 0, "nmse", 0.1234567890123, 500, false});
    return r;
}

PreparedData small_data() {
    text::CorpusConfig cc;
    cc.seed = 3;
    return prepare_data(text::synthesize_corpus(300, 4), cc);
}

std::filesystem::path save_tiny(const PreparedData& d, const std::string& name) {
    auto dir = testutil::temp_dir(name);
    auto m = SemComModel::create(testutil::tiny_model(static_cast<int>(d.vocab.size())), 5);
    save_model(dir / "m.ckpt", m, d.vocab, {{"framework", "ti-gsc"}});
    return dir / "m.ckpt";
}

}  // namespace

TEST_SUITE("evalcli") {

TEST_CASE("config text parsing") {
    RunConfig c;
    apply_config_text(c, "# comment\nseed = 7\neval.snr_grid = 9, 12\ntrain.framework = sc-vanilla\n"
                         "channel.kind = rician\nloss.w2 = 0\n\n");
    CHECK(c.seed == 7);
    CHECK((c.eval.snr_grid == std::vector<double>{9, 12}));
    CHECK(c.train.framework == Framework::sc_vanilla);
    CHECK(c.train.link.fading.kind == channel::ChannelKind::rician);
    CHECK(c.train.w2 == 0.0);
    CHECK_THROWS_AS(apply_config_text(c, "no.such.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "train.epochs = many\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "just text\n"), ConfigError);
    c.set_seed(11);
    CHECK(c.train.seed == 11);
    CHECK(c.corpus.seed == 11);
    CHECK(c.eval.seeds == std::vector<std::uint64_t>{11});
    CHECK(config_keys().size() > 40);
    CHECK(to_json(c).at("seed") == 11);
}

TEST_CASE("eval config defaults") {
    EvalConfig e;
    CHECK(e.snr_grid == kSnrGrid);
    CHECK(e.top_n == 11);
    CHECK(e.frameworks.size() == 8);
    CHECK_NOTHROW(e.validate());
    e.snr_grid = {5};
    CHECK_THROWS(e.validate());
}

TEST_CASE("snr grid") {
    for (double s : kSnrGrid) CHECK(is_grid_snr(s));
    CHECK(kSnrGrid.size() == 9);
    CHECK_FALSE(is_grid_snr(4));
    CHECK_FALSE(is_grid_snr(27));
    EvalRecord r{"ti-gsc", channel::ChannelKind::awgn, 4, 0, "bleu1", 0.5, 10, false};
    CHECK_THROWS(r.validate());
    r.snr_db = 3;
    CHECK_NOTHROW(r.validate());
    r.value = NAN;
    CHECK_THROWS(r.validate());
}

TEST_CASE("record framework ids") {
    CHECK(record_framework("sc-imperfect-csi-v0.02") == Framework::sc_imperfect_csi);
    CHECK(record_framework("ti-gsc") == Framework::ti_gsc);
    CHECK(record_framework("ti-gsc-no-adv") == Framework::ti_gsc);
    CHECK_THROWS_AS(record_framework("foo"), ConfigError);
    CHECK(imperfect_csi_id(0.02) == "sc-imperfect-csi-v0.02");
}

TEST_CASE("csv roundtrip") {
    auto recs = sample_records();
    auto text = to_csv(recs);
    CHECK(text.rfind(kCsvHeader + "\n", 0) == 0);
    CHECK((parse_csv(text) == recs));
    auto dir = testutil::temp_dir("csv");
    write_csv(dir / "r.csv", recs);
    CHECK((read_csv(dir / "r.csv") == recs));
    CHECK_THROWS_AS(parse_csv("bad,header\n"), FormatError);
    CHECK_THROWS_AS(parse_csv(kCsvHeader + "\nti-gsc,awgn,3,0,bleu1\n"), FormatError);
}

TEST_CASE("time discount") {
    auto recs = sample_records();
    auto d = time_discount(recs, 0.1);
    REQUIRE(d.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto f = record_framework(recs[i].framework);
        const bool scaled = uses_csi(f) && recs[i].metric.rfind("bleu", 0) == 0;
        CHECK(d[i].value == (scaled ? recs[i].value * 0.9 : recs[i].value));
        CHECK(d[i].discounted);
    }
    CHECK(d[0].value == 0.8);                    // ti-gsc
    CHECK(d[1].value == doctest::Approx(0.63));  // sc-perfect-csi
    CHECK(d[5].value == 0.2);                    // conv-huffman-nocsi
    CHECK((time_discount(recs, 0.0) == recs));
    for (double rho : {0.3, 0.5, 0.99}) CHECK(time_discount(recs, rho)[0].value == 0.8);
    CHECK_THROWS_AS(time_discount(d, 0.1), ConfigError);
    CHECK_THROWS_AS(time_discount(recs, 1.0), ConfigError);
    CHECK_THROWS_AS(time_discount(recs, -0.1), ConfigError);
}

TEST_CASE("ablation variants zero exactly one weight") {
    training::TrainConfig base;
    auto v = ablation_variants(base);
    REQUIRE(v.size() == 4);
    CHECK(v[0].name == "full");
    auto w = [](const training::TrainConfig& c) {
        return std::array<double, 3>{c.w2, c.gan.sytc_weight, c.gan.smtc_weight};
    };
    CHECK(w(v[0].train) == w(base));
    for (std::size_t i = 1; i < 4; ++i) {
        int diff = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            if (w(v[i].train)[k] != w(base)[k]) {
                ++diff;
                CHECK(w(v[i].train)[k] == 0.0);
            }
        }
        CHECK(diff == 1);
        CHECK(v[i].train.seed == base.seed);
    }
    CHECK(v[1].name == "no-adv");
    CHECK(v[1].train.w2 == 0.0);
}

TEST_CASE("tsne keeps duplicates together and separates clusters") {
    SplitMix rng(1);
    std::vector<std::vector<double>> pts;
    // Three clusters with unit-scale spread, far apart.
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 40; ++i) {
            std::vector<double> p(8);
            for (int k = 0; k < 8; ++k) p[k] = 20.0 * (k == c) + 2.0 * (rng.uniform() - 0.5);
            pts.push_back(p);
        }
    pts.push_back(pts[5]);
    pts.push_back(pts[5]);
    TsneConfig cfg;
    cfg.seed = 2;
    auto y = tsne(pts, cfg);
    REQUIRE(y.size() == pts.size());
    double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
    for (auto& p : y)
        for (int k = 0; k < 2; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    const double span = std::hypot(hi[0] - lo[0], hi[1] - lo[1]);
    auto dist = [&](std::size_t a, std::size_t b) { return std::hypot(y[a][0] - y[b][0], y[a][1] - y[b][1]); };
    CHECK(dist(120, 121) < 0.01 * span);
    CHECK(dist(120, 5) < 0.01 * span);
    CHECK(dist(0, 45) > 0.2 * span);
    CHECK(dist(0, 85) > 0.2 * span);
    CHECK((tsne(pts, cfg) == y));
    std::vector<std::vector<double>> big(kTsneMaxPoints + 1, std::vector<double>(2, 0.0));
    CHECK_THROWS_AS(tsne(big, cfg), RangeError);
}

TEST_CASE("manifest hashes") {
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    auto dir = testutil::temp_dir("manifest");
    testutil::write_file(dir / "in.txt", "hello\n");
    testutil::write_file(dir / "out.csv", "x\n");
    Manifest m;
    m.command = "sweep";
    m.inputs = {dir / "in.txt"};
    m.outputs = {"out.csv"};
    auto j = write_manifest(dir, m);
    auto r = read_manifest(dir);
    CHECK(j == r);
    CHECK(r.dump().find("ce013625030ba8dba906f756967f9e9ca394464a") != std::string::npos);
    CHECK((r.at("input_content_hash") == content_hash({{"in.txt", "ce013625030ba8dba906f756967f9e9ca394464a"}})));
}

TEST_CASE("prepared data roundtrip") {
    auto d = small_data();
    CHECK_FALSE(d.train.empty());
    CHECK_FALSE(d.test.empty());
    auto dir = testutil::temp_dir("prepared");
    save_prepared(dir, d);
    auto l = load_prepared(dir);
    CHECK(l.vocab == d.vocab);
    CHECK((l.train == d.train));
    CHECK((l.test == d.test));
}

TEST_CASE("sweep determinism, paired awgn equalization, missing checkpoints") {
    auto d = small_data();
    auto ckpt = save_tiny(d, "sweep_ckpt");
    SweepPlan p;
    p.frameworks = {Framework::ti_gsc, Framework::sc_vanilla, Framework::sc_perfect_csi,
                    Framework::sc_imperfect_csi, Framework::conv_fixed_csi, Framework::conv_huffman_nocsi};
    p.channels = {channel::ChannelKind::awgn, channel::ChannelKind::rayleigh};
    p.snr_grid = {6, 18};
    p.seeds = {0, 1};
    p.n_sentences = 12;
    p.batch_size = 5;
    p.max_len = 12;
    p.csi_error_vars = {0.02};
    p.checkpoints = {{"ti-gsc", ckpt}, {"sc-vanilla", ckpt}, {"sc-perfect-csi", ckpt}};

    p.workers = 1;
    p.out_dir = testutil::temp_dir("sweep1");
    auto a = run_sweep(p, d.test, d.train);
    p.workers = 3;
    p.out_dir = testutil::temp_dir("sweep3");
    auto b = run_sweep(p, d.test, d.train);
    CHECK((a.records == b.records));
    CHECK(to_csv(a.records) == to_csv(b.records));

    // 5 frameworks x 2 channels x 2 snr x 2 seeds; neural: 4 bleu + nmse, conventional: 4 bleu + ber.
    CHECK(a.records.size() == 5 * 2 * 2 * 2 * 5);
    CHECK_FALSE(a.warnings.empty());
    for (const auto& r : a.records) CHECK(r.framework.rfind("sc-imperfect-csi", 0) != 0);
    CHECK(std::filesystem::exists(*p.out_dir / "records.csv"));
    CHECK(std::filesystem::exists(*p.out_dir / "warnings.txt"));
    CHECK(std::filesystem::exists(*p.out_dir / "bleu1_awgn.svg"));
    CHECK(std::filesystem::exists(*p.out_dir / "bleu1_rayleigh.png"));

    auto value = [&](const std::string& fw, channel::ChannelKind k, double snr, std::uint64_t s,
                     const std::string& m) {
        for (const auto& r : a.records)
            if (r.framework == fw && r.channel == k && r.snr_db == snr && r.seed == s && r.metric == m)
                return r.value;
        FAIL("record not found");
        return 0.0;
    };
    for (double snr : p.snr_grid)
        for (std::uint64_t s : p.seeds)
            for (const char* m : {"bleu1", "bleu2", "bleu3", "bleu4", "nmse"})
                CHECK(value("sc-perfect-csi", channel::ChannelKind::awgn, snr, s, m) ==
                      doctest::Approx(value("sc-vanilla", channel::ChannelKind::awgn, snr, s, m)).epsilon(1e-9));
}

TEST_CASE("embedding export") {
    auto d = small_data();
    auto m = SemComModel::create(testutil::tiny_model(static_cast<int>(d.vocab.size())), 6);
    LinkConfig link{{channel::ChannelKind::rician, 1.0}, 9.0, CsiMode::none, 0.0};
    auto dir = testutil::temp_dir("embed");
    Sentences test(d.test.begin(), d.test.begin() + std::min<std::size_t>(d.test.size(), 20));
    auto ex = export_embeddings(m, d.vocab, test, link, true, 3, 5, 40, dir);
    CHECK(ex.words.size() <= 5);
    std::map<std::string, std::size_t> per_kind;
    for (const auto& r : ex.rows) {
        ++per_kind[r.kind];
        CHECK(r.values.size() == 2 * 4);
        CHECK(std::find(ex.words.begin(), ex.words.end(), r.word) != ex.words.end());
    }
    CHECK(per_kind.size() == 3);
    CHECK(per_kind["X"] == per_kind["Y"]);
    CHECK(per_kind["X"] == per_kind["Ybar"]);
    CHECK(per_kind["X"] <= 40);
    CHECK(per_kind["X"] > 0);
    CHECK(ex.projection.at("X").size() == per_kind["X"]);
    CHECK(std::filesystem::exists(dir / "embeddings.tsv"));
    auto noybar = export_embeddings(m, d.vocab, test, link, false, 3, 5, 40, std::nullopt);
    for (const auto& r : noybar.rows) CHECK(r.kind != "Ybar");
}

}
