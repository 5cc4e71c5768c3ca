// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "tsd/model.hpp"
#include "tsd/ops.hpp"
#include "tsd/rng.hpp"

namespace {

tsd::Tensor random_tensor(tsd::Shape shape, tsd::Rng& rng) {
    tsd::Tensor t(std::move(shape));
    for (auto& v : t.data()) v = rng.normal();
    return t;
}

void BM_Conv1dForward(benchmark::State& state) {
    const auto C = static_cast<std::size_t>(state.range(0));
    tsd::Rng rng(1);
    const auto x = random_tensor({C, 96}, rng);
    const auto w = random_tensor({C, C, 3}, rng);
    const auto b = random_tensor({C}, rng);
    for (auto _ : state) {
        auto y = tsd::conv1d(x, w, b, 1, 1);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_Conv1dForward)->Arg(16)->Arg(64)->Arg(128);

void BM_Conv1dBackward(benchmark::State& state) {
    const auto C = static_cast<std::size_t>(state.range(0));
    tsd::Rng rng(2);
    for (auto _ : state) {
        auto x = random_tensor({C, 96}, rng);
        auto w = random_tensor({C, C, 3}, rng);
        auto b = random_tensor({C}, rng);
        x.set_requires_grad(true);
        w.set_requires_grad(true);
        b.set_requires_grad(true);
        auto loss = tsd::sum(tsd::conv1d(x, w, b, 1, 1));
        loss.backward();
        benchmark::DoNotOptimize(w.grad().data());
    }
}
BENCHMARK(BM_Conv1dBackward)->Arg(16)->Arg(64);

void BM_MatmulForward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    tsd::Rng rng(3);
    const auto a = random_tensor({n, n}, rng);
    const auto b = random_tensor({n, n}, rng);
    for (auto _ : state) {
        auto y = tsd::matmul(a, b);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_MatmulForward)->Arg(64)->Arg(128)->Arg(256);

void BM_ModelForward(benchmark::State& state) {
    tsd::TSDConfig cfg;
    cfg.lookback = 48;
    cfg.horizon = 24;
    cfg.n_channels = 7;
    cfg.n_targets = 7;
    cfg.d_model = static_cast<std::size_t>(state.range(0));
    cfg.n_heads = 4;
    cfg.n_blocks = 3;
    cfg.ffn_dim = cfg.d_model * 2;
    cfg.base_channels = 16;
    tsd::TSDModel model(cfg, 7);
    tsd::Rng rng(4);
    const auto window = random_tensor({cfg.n_channels, cfg.lookback}, rng);
    for (auto _ : state) {
        auto y = model.forward(window);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_ModelForward)->Arg(32)->Arg(64)->Arg(128);

void BM_ModelTrainStep(benchmark::State& state) {
    tsd::TSDConfig cfg;
    cfg.lookback = 48;
    cfg.horizon = 24;
    cfg.n_channels = 1;
    cfg.n_targets = 1;
    cfg.d_model = static_cast<std::size_t>(state.range(0));
    cfg.n_heads = 4;
    cfg.n_blocks = 3;
    cfg.ffn_dim = cfg.d_model * 2;
    cfg.base_channels = 16;
    tsd::TSDModel model(cfg, 7);
    tsd::Rng rng(5);
    const auto window = random_tensor({cfg.n_channels, cfg.lookback}, rng);
    const auto target = random_tensor({cfg.n_targets, cfg.horizon}, rng);
    for (auto _ : state) {
        model.zero_grads();
        auto pred = model.forward(window, true, rng);
        auto diff = tsd::sub(pred, target);
        auto loss = tsd::mean(tsd::mul(diff, diff));
        loss.backward();
        benchmark::DoNotOptimize(loss.item());
    }
}
BENCHMARK(BM_ModelTrainStep)->Arg(32)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
