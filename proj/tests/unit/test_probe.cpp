#include "probeforge/core/codec.hpp"
#include "probeforge/probe/adamw.hpp"
#include "probeforge/probe/model.hpp"
#include "probeforge/probe/train.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace probeforge;
using namespace probeforge::probe;
using pftest::error_of;

TEST_CASE("train config defaults and validation") {
    const TrainConfig cfg;
    CHECK(cfg.learning_rate == 1e-3);
    CHECK(cfg.batch_size == 128);
    CHECK(cfg.epochs == 2);
    CHECK(cfg.weight_decay == 0.01);
    CHECK(cfg.beta1 == 0.9);
    CHECK(cfg.beta2 == 0.999);
    CHECK(cfg.epsilon == 1e-8);
    CHECK(cfg.shuffle);
    nlohmann::json j = cfg;
    CHECK(j.get<TrainConfig>() == cfg);
    auto bad = cfg;
    bad.beta1 = 1.0;
    CHECK(error_of([&] { bad.validate(); }) == ErrorCode::Parameter);
    bad = cfg;
    bad.learning_rate = 0.0;
    CHECK(error_of([&] { bad.validate(); }) == ErrorCode::Parameter);
    bad = cfg;
    bad.batch_size = 0;
    CHECK(error_of([&] { bad.validate(); }) == ErrorCode::Parameter);
    bad = cfg;
    bad.epsilon = 0.0;
    CHECK(error_of([&] { bad.validate(); }) == ErrorCode::Parameter);
}

TEST_CASE("adamw single analytic step") {
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    std::vector<double> p{0.0};
    const std::vector<double> g{1.0};
    OptimizerState st;
    adamw_step(p, g, st, cfg, 1);
    CHECK(st.step == 1);
    CHECK(std::abs(p[0] - (-1e-3 / (1.0 + 1e-8))) <= 1e-12);
}

TEST_CASE("adamw matches the reference on theta squared") {
    for (double wd : {0.0, 0.01, 0.5}) {
        TrainConfig cfg;
        cfg.weight_decay = wd;
        const auto trace = pftest::reference_adamw_square(1.0, 10, cfg.learning_rate, cfg.beta1, cfg.beta2,
                                                          cfg.epsilon, wd);
        std::vector<double> p{1.0};
        OptimizerState st;
        for (double expected : trace) {
            const std::vector<double> g{2.0 * p[0]};
            adamw_step(p, g, st, cfg, 1);
            CHECK(std::abs(p[0] - expected) <= 1e-9);
        }
    }
}

TEST_CASE("adamw zero gradient and decoupled decay") {
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    std::vector<double> p{0.7, -1.2, 0.3};
    const std::vector<double> zero(3, 0.0);
    OptimizerState st;
    for (int t = 0; t < 5; ++t) {
        adamw_step(p, zero, st, cfg, 2);
    }
    CHECK(p == std::vector<double>{0.7, -1.2, 0.3});

    cfg.weight_decay = 0.1;
    OptimizerState st2;
    std::vector<double> q{0.7, -1.2, 0.3};
    for (int t = 1; t <= 4; ++t) {
        adamw_step(q, zero, st2, cfg, 2);
        const double factor = std::pow(1.0 - cfg.learning_rate * cfg.weight_decay, t);
        CHECK(q[0] == doctest::Approx(0.7 * factor).epsilon(1e-14));
        CHECK(q[1] == doctest::Approx(-1.2 * factor).epsilon(1e-14));
        CHECK(q[2] == 0.3);
    }
    for (double v : st2.v) {
        CHECK(v >= 0.0);
    }
}

TEST_CASE("adamw errors") {
    const TrainConfig cfg;
    std::vector<double> p{0.0, 0.0};
    OptimizerState st;
    const std::vector<double> short_g{1.0};
    CHECK(error_of([&] { adamw_step(p, short_g, st, cfg, 1); }) == ErrorCode::Dimension);
    const std::vector<double> nan_g{1.0, std::numeric_limits<double>::quiet_NaN()};
    try {
        adamw_step(p, nan_g, st, cfg, 1);
        FAIL("expected a numeric error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Numeric);
        CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }
}

TEST_CASE("bce gradient matches finite differences") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> dim_dist(1, 64);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = dim_dist(rng);
        const std::size_t n = 1 + trial % 7;
        std::vector<float> data(n * dim);
        std::vector<int> labels(n);
        std::vector<std::size_t> rows(n);
        for (auto& v : data) {
            v = static_cast<float>(n01(rng));
        }
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng() & 1U);
            rows[i] = i;
        }
        std::vector<double> params(dim + 1);
        for (auto& v : params) {
            v = 0.3 * n01(rng);
        }
        const FeatureView view{data, dim, {}};
        std::vector<double> grad(dim + 1);
        const double loss = bce_loss(params, view, labels, rows, grad);

        std::vector<std::vector<double>> xs(n, std::vector<double>(dim));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                xs[i][d] = data[i * dim + d];
            }
        }
        const auto ref = [&](const std::vector<double>& p) {
            return pftest::reference_bce(std::vector<double>(p.begin(), p.end() - 1), p.back(), xs, labels);
        };
        CHECK(loss == doctest::Approx(ref(params)).epsilon(1e-12));
        const double h = 1e-4;
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto plus = params;
            auto minus = params;
            plus[k] += h;
            minus[k] -= h;
            const double fd = (ref(plus) - ref(minus)) / (2 * h);
            const double rel = std::abs(grad[k] - fd) / std::max({std::abs(grad[k]), std::abs(fd), 1e-8});
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("bce is finite for extreme logits") {
    const std::vector<float> data{1.0F};
    const std::vector<int> labels{0};
    const std::vector<std::size_t> rows{0};
    const std::vector<double> params{800.0, 0.0};
    std::vector<double> grad(2);
    const double loss = bce_loss(params, FeatureView{data, 1, {}}, labels, rows, grad);
    CHECK(loss == doctest::Approx(800.0));
    CHECK(std::isfinite(grad[0]));
}

TEST_CASE("uniform index and shuffle") {
    std::mt19937_64 rng(1);
    std::vector<int> hist(3, 0);
    for (int i = 0; i < 30000; ++i) {
        const auto k = uniform_index(rng, 3);
        REQUIRE(k < 3);
        ++hist[k];
    }
    for (int c : hist) {
        CHECK(c > 9500);
        CHECK(c < 10500);
    }
    CHECK(error_of([&] { uniform_index(rng, 0); }) == ErrorCode::Parameter);
    std::vector<std::size_t> idx(50);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    std::mt19937_64 a(7);
    std::mt19937_64 b(7);
    auto idx2 = idx;
    shuffle_indices(idx, a);
    shuffle_indices(idx2, b);
    CHECK(idx == idx2);
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 50);
}

TEST_CASE("separable training") {
    const auto archive = pftest::two_clusters(1000, 2, 3.0, 1.0, 42);
    TrainOptions opt;
    opt.config.seed = 7;
    const auto a = train(archive, opt);
    const auto b = train(archive, opt);
    CHECK(a.log.train_accuracy >= 0.99);
    REQUIRE(a.log.epoch_loss.size() == 2);
    CHECK(a.log.epoch_loss[1] < a.log.epoch_loss[0]);
    CHECK(a.log.steps == 2 * 16);
    CHECK(a.log.n_real == 1000);
    CHECK(a.log.n_fake == 1000);
    CHECK(a.model == b.model);
    CHECK(encode_f32_base64(a.model.weights) == encode_f32_base64(b.model.weights));
    CHECK(a.model.train_log_digest == a.log.digest());
    CHECK(a.model.weights[0] > 0.0F);

    opt.config.seed = 8;
    CHECK_FALSE(train(archive, opt).model.weights == a.model.weights);
    opt.config.shuffle = false;
    opt.config.seed = 1;
    const auto c = train(archive, opt);
    opt.config.seed = 2;
    CHECK(train(archive, opt).model.weights == c.model.weights);
}

TEST_CASE("training on information-free input") {
    std::vector<store::ArchiveRecord> records;
    for (int i = 0; i < 200; ++i) {
        records.push_back({"r" + std::to_string(i), i % 2, "g", {0.5F, -0.25F, 1.0F}});
    }
    store::ArchiveMeta meta;
    meta.backbone_id = "flat";
    const auto res = train(store::build_archive(records, meta), TrainOptions{});
    CHECK(std::abs(res.log.train_accuracy - 0.5) <= 0.05);
    for (double l : res.log.epoch_loss) {
        CHECK(std::isfinite(l));
    }
    for (float w : res.model.weights) {
        CHECK(std::isfinite(w));
    }
}

TEST_CASE("training rejects bad label sets") {
    std::vector<store::ArchiveRecord> records{{"a", 0, "", {1.0F}}, {"b", 0, "", {2.0F}}};
    store::ArchiveMeta meta;
    meta.backbone_id = "s";
    CHECK(error_of([&] { train(store::build_archive(records, meta), TrainOptions{}); }) == ErrorCode::Degeneracy);
    records.push_back({"c", -1, "", {3.0F}});
    CHECK(error_of([&] { train(store::build_archive(records, meta), TrainOptions{}); }) == ErrorCode::Input);
}

TEST_CASE("training on a manifest split") {
    const auto archive = pftest::two_clusters(20, 2, 3.0, 0.5, 3);
    std::string csv = "id,relative_path,label,generator,split\n";
    for (int i = 0; i < 20; ++i) {
        const std::string split = i < 15 ? "train" : "test";
        csv += "real-" + std::to_string(i) + ",r" + std::to_string(i) + ".png,real,," + split + "\n";
        csv += "fake-" + std::to_string(i) + ",f" + std::to_string(i) + ".png,fake,gen," + split + "\n";
    }
    const auto res = train(archive, store::parse_manifest(csv), TrainOptions{});
    CHECK(res.log.n_real == 15);
    CHECK(res.log.n_fake == 15);
}

TEST_CASE("normalize_input follows the archive by default") {
    std::vector<store::ArchiveRecord> records{{"a", 0, "", {0.6F, 0.8F}}, {"b", 1, "", {0.8F, -0.6F}}};
    store::ArchiveMeta meta;
    meta.backbone_id = "s";
    meta.normalized = true;
    const auto archive = store::build_archive(records, meta);
    CHECK(train(archive, TrainOptions{}).model.normalize_input);
    TrainOptions opt;
    opt.normalize_input = false;
    CHECK_FALSE(train(archive, opt).model.normalize_input);
}

TEST_CASE("predict") {
    ProbeModel m;
    m.backbone_id = "s";
    m.feature_dim = 2;
    m.weights = {0.0F, 0.0F};
    const std::vector<float> x{3.0F, -1.0F};
    auto p = predict(m, x);
    CHECK(p.score == 0.5);
    CHECK(p.label == store::Label::Real);
    m.weights = {1.0F, 0.0F};
    const std::vector<float> x9{2.1972246F, 0.0F};
    p = predict(m, x9);
    CHECK(std::abs(p.score - 0.9) <= 1e-6);
    CHECK(p.label == store::Label::Fake);
    CHECK(sigmoid(-30.0) > 0.0);
    CHECK(sigmoid(-30.0) < 1e-12);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    double prev = 0.0;
    for (double z = -36.0; z <= 36.0; z += 0.5) {
        const double s = sigmoid(z);
        CHECK(s > prev);
        prev = s;
    }
    CHECK(decide(0.5, 0.5) == store::Label::Real);
    CHECK(decide(0.5000001, 0.5) == store::Label::Fake);
    const std::vector<float> bad{1.0F};
    CHECK(error_of([&] { predict(m, bad); }) == ErrorCode::Dimension);

    m.normalize_input = true;
    m.weights = {2.0F, 1.0F};
    const std::vector<float> big{30.0F, 40.0F};
    CHECK(logit(m, big) == doctest::Approx(2.0 * 0.6 + 0.8));
    const std::vector<float> zero{0.0F, 0.0F};
    CHECK(logit(m, zero) == 0.0);
}

TEST_CASE("model save and load") {
    pftest::TempDir dir;
    const auto archive = pftest::two_clusters(50, 8, 1.0, 1.0, 5, "probe-bb");
    TrainOptions opt;
    opt.threshold = 0.4;
    const auto model = train(archive, opt).model;
    save_model(dir / "m.json", model);
    const auto loaded = load_model(dir / "m.json");
    CHECK(loaded == model);
    std::mt19937_64 rng(0);
    std::normal_distribution<float> n01(0.0F, 1.0F);
    for (int i = 0; i < 100; ++i) {
        std::vector<float> x(8);
        for (auto& v : x) {
            v = n01(rng);
        }
        CHECK(predict(loaded, x).logit == predict(model, x).logit);
    }
    const auto parsed = nlohmann::json::parse(serialize_model(model));
    for (const char* key : {"format_version", "backbone_id", "feature_dim", "normalize_input", "threshold", "bias",
                            "weights_b64_f32le", "train_log_digest"}) {
        CHECK(parsed.contains(key));
    }

    const std::string text = serialize_model(model);
    CHECK(error_of([&] { parse_model(text.substr(0, text.size() / 2)); }) == ErrorCode::Parse);
    auto future = parsed;
    future["format_version"] = 2;
    CHECK(error_of([&] { parse_model(future.dump()); }) == ErrorCode::Compatibility);
    auto mangled = parsed;
    mangled["weights_b64_f32le"] = "AAAA";
    CHECK(error_of([&] { parse_model(mangled.dump()); }).has_value());

    CHECK_FALSE(error_of([&] { check_compatible(model, archive); }));
    const auto other = pftest::two_clusters(5, 8, 1.0, 1.0, 5, "other-bb");
    CHECK(error_of([&] { check_compatible(model, other); }) == ErrorCode::Compatibility);
    const auto narrow = pftest::two_clusters(5, 4, 1.0, 1.0, 5, "probe-bb");
    CHECK(error_of([&] { check_compatible(model, narrow); }) == ErrorCode::Dimension);
    CHECK(score_archive(model, archive, 4) == score_archive(model, archive, 1));
}
