// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tsd/model.hpp"

using tsd::Tensor;
using tsd::TSDConfig;
using tsd::TSDModel;

namespace {

TSDConfig tiny_config() {
    TSDConfig cfg;
    cfg.lookback = 16;
    cfg.horizon = 4;
    cfg.n_channels = 1;
    cfg.n_targets = 1;
    cfg.d_model = 4;
    cfg.n_heads = 2;
    cfg.n_blocks = 3;
    cfg.dropout = 0.0;
    cfg.ffn_dim = 6;
    cfg.base_channels = 2;
    return cfg;
}

Tensor random_tensor(tsd::Shape shape, tsd::Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = rng.normal();
    return t;
}

const std::vector<double>& param_data(const TSDModel& m, const std::string& name) {
    for (const auto& p : m.parameters())
        if (p.name == name) return p.tensor.data();
    throw std::runtime_error("missing parameter " + name);
}

// Explicit-loop layer norm over rows of [n, d], same eps as the library op.
std::vector<double> ln_rows(const std::vector<double>& x, std::size_t n,
                            std::size_t d, const std::vector<double>& gain,
                            const std::vector<double>& shift) {
    std::vector<double> out(x.size());
    for (std::size_t r = 0; r < n; ++r) {
        double mu = 0;
        for (std::size_t i = 0; i < d; ++i) mu += x[r * d + i];
        mu /= static_cast<double>(d);
        double var = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dv = x[r * d + i] - mu;
            var += dv * dv;
        }
        var /= static_cast<double>(d);
        const double isd = 1.0 / std::sqrt(var + 1e-5);
        for (std::size_t i = 0; i < d; ++i)
            out[r * d + i] = gain[i] * (x[r * d + i] - mu) * isd + shift[i];
    }
    return out;
}

}  // namespace

TEST_CASE("config validation rejects inconsistent settings") {
    TSDConfig cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());

    TSDConfig bad = cfg;
    bad.d_model = 5;
    CHECK_THROWS_AS(bad.validate(), tsd::ConfigError);

    bad = cfg;
    bad.n_heads = 3;
    CHECK_THROWS_AS(bad.validate(), tsd::ConfigError);

    bad = cfg;
    bad.lookback = 7;  // < 2^3
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("reduce n_blocks"),
                         tsd::ConfigError);

    bad = cfg;
    bad.dropout = 1.0;
    CHECK_THROWS_AS(bad.validate(), tsd::ConfigError);
}

TEST_CASE("config hash is stable and field-sensitive") {
    TSDConfig a = tiny_config(), b = tiny_config();
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.dropout = 0.1;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("parameter count matches the closed form and grows with depth") {
    for (std::size_t L : {1u, 2u, 3u}) {
        TSDConfig cfg = tiny_config();
        cfg.n_blocks = L;
        TSDModel m(cfg, 1);
        CHECK(m.parameter_count() == tsd::parameter_count(cfg));
    }
    TSDConfig c3 = tiny_config(), c4 = tiny_config();
    c3.lookback = c4.lookback = 64;
    c4.n_blocks = 4;
    CHECK(tsd::parameter_count(c4) > tsd::parameter_count(c3));
}

TEST_CASE("positional encoding matches the sinusoid formula") {
    auto pe = tsd::positional_encoding(8, 4);
    REQUIRE(pe.shape() == tsd::Shape{4, 8});
    CHECK(pe.at(0, 0) == doctest::Approx(0.0));
    CHECK(pe.at(1, 0) == doctest::Approx(1.0));
    CHECK(pe.at(0, 3) == doctest::Approx(std::sin(3.0)).epsilon(1e-12));
    CHECK(pe.at(1, 3) == doctest::Approx(std::cos(3.0)).epsilon(1e-12));
    CHECK(pe.at(2, 3) == doctest::Approx(std::sin(3.0 / 100.0)).epsilon(1e-12));
    CHECK(pe.at(3, 3) == doctest::Approx(std::cos(3.0 / 100.0)).epsilon(1e-12));
    CHECK_THROWS_AS(tsd::positional_encoding(4, 3), tsd::ParameterError);
}

TEST_CASE("tokenizer emits one token per input step") {
    TSDModel m(tiny_config(), 3);
    tsd::Rng rng(1);
    auto window = random_tensor({1, 16}, rng);
    auto z = m.tokenize(window);
    CHECK(z.shape() == tsd::Shape{4, 16});
    CHECK_THROWS_AS(m.tokenize(random_tensor({2, 16}, rng)), tsd::DimensionError);
}

TEST_CASE("TSA block matches an explicit-loop oracle to 1e-12") {
    TSDConfig cfg = tiny_config();  // d_model=4, heads=2
    TSDModel m(cfg, 5);
    const std::size_t n = 3, d = 4;

    tsd::Rng rng(2);
    auto tokens = random_tensor({d, n}, rng);  // channel-major, like tokenize()

    tsd::Rng unused(0);
    auto got = m.tsa_block(tokens, false, unused);
    REQUIRE(got.shape() == (tsd::Shape{d, n}));

    // oracle works token-major
    std::vector<double> tok(n * d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) tok[r * d + c] = tokens.at(c, r);

    auto attn = oracle::attention(
        tok, n, d, cfg.n_heads, param_data(m, "tsa.attn.w_q"),
        param_data(m, "tsa.attn.b_q"), param_data(m, "tsa.attn.w_k"),
        param_data(m, "tsa.attn.b_k"), param_data(m, "tsa.attn.w_v"),
        param_data(m, "tsa.attn.b_v"), param_data(m, "tsa.attn.w_o"),
        param_data(m, "tsa.attn.b_o"));

    auto u = ln_rows(attn, n, d, param_data(m, "tsa.ln1.gain"),
                     param_data(m, "tsa.ln1.shift"));

    const auto& w1 = param_data(m, "tsa.ffn.w1");
    const auto& b1 = param_data(m, "tsa.ffn.b1");
    const auto& w2 = param_data(m, "tsa.ffn.w2");
    const auto& b2 = param_data(m, "tsa.ffn.b2");
    const std::size_t f = cfg.ffn_dim;
    std::vector<double> ffn(n * d);
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> hid(f);
        for (std::size_t o = 0; o < f; ++o) {
            double acc = b1[o];
            for (std::size_t i = 0; i < d; ++i) acc += w1[o * d + i] * u[r * d + i];
            hid[o] = acc > 0 ? acc : 0;
        }
        for (std::size_t o = 0; o < d; ++o) {
            double acc = b2[o];
            for (std::size_t i = 0; i < f; ++i) acc += w2[o * f + i] * hid[i];
            ffn[r * d + o] = acc;
        }
    }
    auto want = ln_rows(ffn, n, d, param_data(m, "tsa.ln2.gain"),
                        param_data(m, "tsa.ln2.shift"));

    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c)
            CHECK(std::abs(got.at(c, r) - want[r * d + c]) < 1e-12);
}

TEST_CASE("single-token attention degenerates to a fixed point of softmax") {
    TSDModel m(tiny_config(), 6);
    tsd::Rng rng(3), unused(0);
    auto one = random_tensor({4, 1}, rng);
    auto out = m.tsa_block(one, false, unused);
    REQUIRE(out.shape() == (tsd::Shape{4, 1}));
    for (double v : out.data()) CHECK(std::isfinite(v));
}

TEST_CASE("TSD stack restores token count and emits base channels") {
    for (std::size_t L : {1u, 2u, 3u}) {
        TSDConfig cfg = tiny_config();
        cfg.n_blocks = L;
        TSDModel m(cfg, 7);
        tsd::Rng rng(4), unused(0);
        auto tsa = random_tensor({cfg.d_model, cfg.lookback}, rng);
        auto out = m.tsd_stack(tsa, false, unused);
        CHECK(out.shape() == (tsd::Shape{cfg.base_channels, cfg.lookback}));
    }
}

TEST_CASE("down/up blocks halve and restore odd lengths too") {
    TSDConfig cfg = tiny_config();
    cfg.lookback = 21;  // odd lengths force output_padding = 1 on the way up
    cfg.n_blocks = 2;
    TSDModel m(cfg, 8);
    tsd::Rng rng(5), unused(0);
    auto tsa = random_tensor({cfg.d_model, cfg.lookback}, rng);
    auto out = m.tsd_stack(tsa, false, unused);
    CHECK(out.shape() == (tsd::Shape{cfg.base_channels, 21}));
}

TEST_CASE("forward produces [n_targets, horizon] and is eval-deterministic") {
    TSDConfig cfg = tiny_config();
    cfg.n_channels = 3;
    cfg.n_targets = 3;
    TSDModel m(cfg, 9);
    tsd::Rng rng(6);
    auto window = random_tensor({3, 16}, rng);
    auto a = m.forward(window);
    auto b = m.forward(window);
    REQUIRE(a.shape() == (tsd::Shape{3, 4}));
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);

    CHECK_THROWS_AS(m.forward(random_tensor({3, 15}, rng)), tsd::DimensionError);
}

TEST_CASE("identical seeds give identical models, different seeds differ") {
    TSDModel a(tiny_config(), 11), b(tiny_config(), 11), c(tiny_config(), 12);
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        const auto& pa = a.parameters()[i].tensor.data();
        const auto& pb = b.parameters()[i].tensor.data();
        for (std::size_t j = 0; j < pa.size(); ++j) CHECK(pa[j] == pb[j]);
    }
    bool any_diff = false;
    for (std::size_t i = 0; i < a.parameters().size() && !any_diff; ++i)
        any_diff = a.parameters()[i].tensor.data() != c.parameters()[i].tensor.data();
    CHECK(any_diff);
}

TEST_CASE("saliency maps: two per level, expected strides, nonnegative") {
    TSDConfig cfg = tiny_config();
    cfg.lookback = 32;
    cfg.n_blocks = 4;
    cfg.base_channels = 2;
    TSDModel m(cfg, 13);
    tsd::Rng rng(7);
    auto window = random_tensor({1, 32}, rng);
    auto maps = m.extract_saliency(window);
    REQUIRE(maps.size() == 8);

    const std::vector<std::size_t> want_strides{2, 4, 8, 16, 8, 4, 2, 1};
    std::size_t expect_len = 32;
    for (std::size_t i = 0; i < 4; ++i) {
        expect_len = (expect_len + 1) / 2;
        CHECK(maps[i].down_path);
        CHECK(maps[i].level == i + 1);
        CHECK(maps[i].token_stride == want_strides[i]);
        CHECK(maps[i].tokens == expect_len);
    }
    for (std::size_t i = 4; i < 8; ++i) {
        CHECK_FALSE(maps[i].down_path);
        CHECK(maps[i].level == 8 - i);
        CHECK(maps[i].token_stride == want_strides[i]);
    }
    CHECK(maps.back().tokens == 32);
    for (const auto& mp : maps) {
        for (double v : mp.values) CHECK(v >= 0.0);
        CHECK(mp.channel_mean().size() == mp.tokens);
    }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    namespace fs = std::filesystem;
    const auto path = (fs::temp_directory_path() / "tsd_test_ckpt.bin").string();

    TSDConfig cfg = tiny_config();
    cfg.pooling = tsd::Pooling::kAverage;
    cfg.dropout = 0.125;
    TSDModel m(cfg, 21);
    m.save(path);
    auto loaded = TSDModel::load(path);

    CHECK(loaded.config() == cfg);
    tsd::Rng rng(8);
    auto window = random_tensor({1, 16}, rng);
    auto a = m.forward(window);
    auto b = loaded.forward(window);
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);

    // corrupted magic is rejected
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_WITH_AS(TSDModel::load(path), doctest::Contains("magic"),
                         tsd::SchemaError);
    fs::remove(path);
}

TEST_CASE("copy_parameters_from requires matching configs") {
    TSDModel a(tiny_config(), 31), b(tiny_config(), 32);
    b.copy_parameters_from(a);
    tsd::Rng rng(9);
    auto window = random_tensor({1, 16}, rng);
    auto ya = a.forward(window);
    auto yb = b.forward(window);
    for (std::size_t i = 0; i < ya.numel(); ++i) CHECK(ya.data()[i] == yb.data()[i]);

    TSDConfig other = tiny_config();
    other.base_channels = 4;
    TSDModel c(other, 33);
    CHECK_THROWS_AS(c.copy_parameters_from(a), tsd::UsageError);
}
