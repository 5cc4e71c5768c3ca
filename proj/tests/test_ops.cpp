// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tsd/ops.hpp"

using tsd::Tensor;

namespace {

Tensor random_tensor(tsd::Shape shape, tsd::Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = rng.normal();
    return t;
}

}  // namespace

TEST_CASE("conv1d matches hand-worked example") {
    // [[1,2,3,4]] * kernel [1,0,-1], stride 1, no padding -> [[-2,-2]]
    Tensor x({1, 4}, {1, 2, 3, 4});
    Tensor w({1, 1, 3}, {1, 0, -1});
    Tensor b({1}, {0});
    auto y = tsd::conv1d(x, w, b, 1, 0);
    REQUIRE(y.shape() == tsd::Shape{1, 2});
    CHECK(y.data()[0] == doctest::Approx(-2).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(-2).epsilon(1e-12));
}

TEST_CASE("conv1d same padding preserves length") {
    Tensor x({1, 5}, {1, 1, 1, 1, 1});
    Tensor w({1, 1, 3}, {1, 1, 1});
    Tensor b({1}, {0});
    auto y = tsd::conv1d(x, w, b, 1, 1);
    REQUIRE(y.shape() == tsd::Shape{1, 5});
    // border positions see one padded zero
    CHECK(y.data()[0] == doctest::Approx(2));
    CHECK(y.data()[2] == doctest::Approx(3));
    CHECK(y.data()[4] == doctest::Approx(2));
}

TEST_CASE("conv1d matches direct-sum oracle on random shapes") {
    tsd::Rng rng(11);
    for (int iter = 0; iter < 20; ++iter) {
        const std::size_t cin = 1 + rng.next_below(4);
        const std::size_t cout = 1 + rng.next_below(4);
        const std::size_t k = 1 + rng.next_below(4);
        const std::size_t stride = 1 + rng.next_below(3);
        const std::size_t padding = rng.next_below(k);
        const std::size_t L = k + rng.next_below(12);
        auto x = random_tensor({cin, L}, rng);
        auto w = random_tensor({cout, cin, k}, rng);
        auto b = random_tensor({cout}, rng);
        auto y = tsd::conv1d(x, w, b, stride, padding);
        std::size_t lout = 0;
        auto ref = oracle::conv1d(x.data(), cin, L, w.data(), cout, k, b.data(),
                                  stride, padding, lout);
        REQUIRE(y.shape() == (tsd::Shape{cout, lout}));
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(y.data()[i] - ref[i]) < 1e-10);
    }
}

TEST_CASE("conv_transpose1d matches hand-worked example") {
    // [[1,2]] through kernel [1,1], stride 2 -> [[1,1,2,2]]
    Tensor x({1, 2}, {1, 2});
    Tensor w({1, 1, 2}, {1, 1});
    Tensor b({1}, {0});
    auto y = tsd::conv_transpose1d(x, w, b, 2, 0, 0);
    REQUIRE(y.shape() == tsd::Shape{1, 4});
    const std::vector<double> want{1, 1, 2, 2};
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(y.data()[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("conv_transpose1d matches scatter oracle on random shapes") {
    tsd::Rng rng(12);
    for (int iter = 0; iter < 20; ++iter) {
        const std::size_t cin = 1 + rng.next_below(4);
        const std::size_t cout = 1 + rng.next_below(4);
        const std::size_t k = 2 + rng.next_below(3);
        const std::size_t stride = 1 + rng.next_below(3);
        const std::size_t padding = rng.next_below(std::min(k, stride));
        const std::size_t op = rng.next_below(stride);
        const std::size_t L = 2 + rng.next_below(10);
        auto x = random_tensor({cin, L}, rng);
        auto w = random_tensor({cin, cout, k}, rng);
        auto b = random_tensor({cout}, rng);
        auto y = tsd::conv_transpose1d(x, w, b, stride, padding, op);
        std::size_t lout = 0;
        auto ref = oracle::conv_transpose1d(x.data(), cin, L, w.data(), cout, k,
                                            b.data(), stride, padding, op, lout);
        REQUIRE(y.shape() == (tsd::Shape{cout, lout}));
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(y.data()[i] - ref[i]) < 1e-10);
    }
}

TEST_CASE("conv_transpose1d rejects output_padding >= stride") {
    Tensor x({1, 2}, {1, 2});
    Tensor w({1, 1, 2}, {1, 1});
    Tensor b({1}, {0});
    CHECK_THROWS_AS(tsd::conv_transpose1d(x, w, b, 2, 0, 2), tsd::ParameterError);
}

TEST_CASE("max_pool1d matches hand-worked example and oracle") {
    // [[1,3,2,5]] kernel 3 stride 2 padding 1 -> [[3,5]]
    Tensor x({1, 4}, {1, 3, 2, 5});
    auto y = tsd::max_pool1d(x, 3, 2, 1);
    REQUIRE(y.shape() == tsd::Shape{1, 2});
    CHECK(y.data()[0] == 3);
    CHECK(y.data()[1] == 5);

    tsd::Rng rng(13);
    for (int iter = 0; iter < 20; ++iter) {
        const std::size_t C = 1 + rng.next_below(3);
        const std::size_t k = 2 + rng.next_below(3);
        const std::size_t stride = 1 + rng.next_below(3);
        const std::size_t padding = rng.next_below(k);
        const std::size_t L = k + rng.next_below(12);
        auto t = random_tensor({C, L}, rng);
        auto got = tsd::max_pool1d(t, k, stride, padding);
        std::size_t lout = 0;
        auto ref = oracle::max_pool1d(t.data(), C, L, k, stride, padding, lout);
        REQUIRE(got.shape() == (tsd::Shape{C, lout}));
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(got.data()[i] == ref[i]);
    }
}

TEST_CASE("avg_pool1d divides by kernel even across padding") {
    Tensor x({1, 4}, {1, 3, 2, 5});
    auto y = tsd::avg_pool1d(x, 3, 2, 1);
    REQUIRE(y.shape() == tsd::Shape{1, 2});
    CHECK(y.data()[0] == doctest::Approx((0.0 + 1 + 3) / 3));
    CHECK(y.data()[1] == doctest::Approx((3.0 + 2 + 5) / 3));

    tsd::Rng rng(14);
    for (int iter = 0; iter < 20; ++iter) {
        const std::size_t C = 1 + rng.next_below(3);
        const std::size_t k = 2 + rng.next_below(3);
        const std::size_t stride = 1 + rng.next_below(3);
        const std::size_t padding = rng.next_below(k);
        const std::size_t L = k + rng.next_below(12);
        auto t = random_tensor({C, L}, rng);
        auto got = tsd::avg_pool1d(t, k, stride, padding);
        std::size_t lout = 0;
        auto ref = oracle::avg_pool1d(t.data(), C, L, k, stride, padding, lout);
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(got.data()[i] - ref[i]) < 1e-12);
    }
}

TEST_CASE("pooling rejects windows that can be all padding") {
    Tensor x({1, 4}, {1, 2, 3, 4});
    CHECK_THROWS_AS(tsd::max_pool1d(x, 2, 1, 2), tsd::ParameterError);
    CHECK_THROWS_AS(tsd::avg_pool1d(x, 2, 1, 2), tsd::ParameterError);
}

TEST_CASE("layer_norm normalizes rows") {
    Tensor x({1, 3}, {1, 2, 3});
    Tensor g({3}, {1, 1, 1});
    Tensor s({3}, {0, 0, 0});
    auto y = tsd::layer_norm(x, g, s);
    CHECK(y.data()[0] == doctest::Approx(-1.22474).epsilon(1e-4));
    CHECK(y.data()[1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(y.data()[2] == doctest::Approx(1.22474).epsilon(1e-4));

    // gain/shift are affine on the normalized values
    Tensor g2({3}, {2, 2, 2});
    Tensor s2({3}, {1, 1, 1});
    auto y2 = tsd::layer_norm(x, g2, s2);
    for (int i = 0; i < 3; ++i)
        CHECK(y2.data()[i] == doctest::Approx(2 * y.data()[i] + 1).epsilon(1e-10));
}

TEST_CASE("softmax matches frozen values and sums to one") {
    Tensor x({1, 3}, {1, 2, 3});
    auto y = tsd::softmax(x);
    CHECK(y.data()[0] == doctest::Approx(0.09003057).epsilon(1e-6));
    CHECK(y.data()[1] == doctest::Approx(0.24472847).epsilon(1e-6));
    CHECK(y.data()[2] == doctest::Approx(0.66524096).epsilon(1e-6));

    // invariance under shift (max subtraction) and row-stochastic output
    tsd::Rng rng(15);
    auto big = random_tensor({4, 6}, rng);
    for (auto& v : big.data()) v = v * 50;  // stress the exp range
    auto sm = tsd::softmax(big);
    for (std::size_t r = 0; r < 4; ++r) {
        double total = 0;
        for (std::size_t c = 0; c < 6; ++c) {
            CHECK(sm.at(r, c) >= 0);
            total += sm.at(r, c);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("linear applies affine map on trailing axis") {
    Tensor x({2}, {2, 1});
    Tensor w({2, 2}, {1, 1, 0, -1});
    Tensor b({2}, {0, 0});
    auto y = tsd::linear(x, w, b);
    CHECK(y.data()[0] == doctest::Approx(3));
    CHECK(y.data()[1] == doctest::Approx(-1));

    // 2-D batches apply the same map per row
    Tensor xb({2, 2}, {2, 1, 2, 1});
    auto yb = tsd::linear(xb, w, b);
    CHECK(yb.at(0, 0) == doctest::Approx(3));
    CHECK(yb.at(1, 1) == doctest::Approx(-1));
}

TEST_CASE("dropout is identity in eval mode, unbiased in train mode") {
    tsd::Rng rng(16);
    auto x = Tensor::full({100, 100}, 1.0);

    auto eval_out = tsd::dropout(x, 0.3, false, rng);
    CHECK(eval_out.node() == x.node());  // bitwise identity, same node

    auto train_out = tsd::dropout(x, 0.3, true, rng);
    double total = 0;
    std::size_t zeros = 0;
    for (double v : train_out.data()) {
        total += v;
        if (v == 0.0) ++zeros;
    }
    const double m = total / static_cast<double>(train_out.numel());
    CHECK(std::abs(m - 1.0) < 0.05);  // inverted scaling keeps the mean
    const double zfrac = static_cast<double>(zeros) / train_out.numel();
    CHECK(std::abs(zfrac - 0.3) < 0.05);

    CHECK_THROWS_AS(tsd::dropout(x, 1.0, true, rng), tsd::ParameterError);
    CHECK_THROWS_AS(tsd::dropout(x, -0.1, true, rng), tsd::ParameterError);
}

TEST_CASE("concat joins channels and validates lengths") {
    Tensor a({1, 3}, {1, 2, 3});
    Tensor b({2, 3}, {4, 5, 6, 7, 8, 9});
    auto y = tsd::concat(a, b);
    REQUIRE(y.shape() == tsd::Shape{3, 3});
    CHECK(y.at(0, 0) == 1);
    CHECK(y.at(1, 0) == 4);
    CHECK(y.at(2, 2) == 9);

    Tensor c({1, 4}, {0, 0, 0, 0});
    CHECK_THROWS_WITH_AS(tsd::concat(a, c),
                         doctest::Contains("length mismatch"),
                         tsd::DimensionError);
}

TEST_CASE("transpose, reshape and slice round-trip") {
    Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
    auto xt = tsd::transpose(x);
    REQUIRE(xt.shape() == tsd::Shape{3, 2});
    CHECK(xt.at(0, 1) == 4);
    auto back = tsd::transpose(xt);
    for (std::size_t i = 0; i < 6; ++i) CHECK(back.data()[i] == x.data()[i]);

    auto flat = tsd::reshape(x, {6});
    CHECK(flat.shape() == tsd::Shape{6});
    CHECK_THROWS_AS(tsd::reshape(x, {4}), tsd::DimensionError);

    auto cols = tsd::slice_cols(x, 1, 3);
    REQUIRE(cols.shape() == tsd::Shape{2, 2});
    CHECK(cols.at(0, 0) == 2);
    CHECK(cols.at(1, 1) == 6);
}

TEST_CASE("matmul matches explicit loops") {
    tsd::Rng rng(17);
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({4, 5}, rng);
    auto y = tsd::matmul(a, b);
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t n = 0; n < 5; ++n) {
            double acc = 0;
            for (std::size_t k = 0; k < 4; ++k) acc += a.at(m, k) * b.at(k, n);
            CHECK(y.at(m, n) == doctest::Approx(acc).epsilon(1e-12));
        }
    CHECK_THROWS_AS(tsd::matmul(a, a), tsd::DimensionError);
}

TEST_CASE("float tensors work through the same templates") {
    tsd::Tensor32 x({1, 3}, {1.f, 2.f, 3.f});
    tsd::Tensor32 g({3}, {1.f, 1.f, 1.f});
    tsd::Tensor32 s({3}, {0.f, 0.f, 0.f});
    auto y = tsd::layer_norm(x, g, s);
    CHECK(y.data()[0] == doctest::Approx(-1.22474f).epsilon(1e-3));
    auto total = tsd::sum(y);
    CHECK(std::abs(total.item()) < 1e-5f);
}

TEST_CASE("rng is counter-based and reproducible") {
    tsd::Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    tsd::Rng c(43);
    CHECK(a.next_u64() != c.next_u64());

    // forked streams are independent of draws on the parent
    tsd::Rng p(7);
    auto f1 = p.fork(1);
    p.next_u64();
    auto f2 = p.fork(1);
    CHECK(f1.next_u64() == f2.next_u64());
    CHECK(p.fork(1).next_u64() != p.fork(2).next_u64());

    tsd::Rng u(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}
