#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsvd/math.hpp"
#include "fsvd/tensor.hpp"
#include "oracles.hpp"

using namespace fsvd;

TEST_CASE("splitmix64 published test vector") {
    Rng64 rng(0);
    CHECK(rng.next_u64() == 0xE220A8397B1DCDAFull);
}

TEST_CASE("rng unit interval stays in [0,1)") {
    Rng64 rng(99);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("matmul identity") {
    Tensor2Dd m(3, 3);
    Rng64 rng(1);
    oracle::fill_uniform(m, rng);
    Tensor2Dd eye(3, 3);
    for (size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    const Tensor2Dd out = matmul(eye, m);
    for (size_t i = 0; i < m.data.size(); ++i) CHECK(out.data[i] == m.data[i]);
}

TEST_CASE("matmul hand example") {
    Tensor2Dd a(2, 2, {1, 2, 3, 4});
    Tensor2Dd b(2, 1, {0, 1});
    const Tensor2Dd c = matmul(a, b);
    CHECK(c.at(0, 0) == 2.0);
    CHECK(c.at(1, 0) == 4.0);
}

TEST_CASE("matmul equals triple-loop oracle exactly in f64") {
    Rng64 rng(42);
    Tensor2Dd a(5, 7), b(7, 3);
    oracle::fill_uniform(a, rng);
    oracle::fill_uniform(b, rng);
    const Tensor2Dd got = matmul(a, b);
    const Tensor2Dd want = oracle::triple_loop_matmul(a, b);
    for (size_t i = 0; i < got.data.size(); ++i) {
        CHECK(got.data[i] == want.data[i]);
    }
}

TEST_CASE("matmul shape mismatch throws") {
    Tensor2Dd a(2, 3), b(2, 2);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("matmul associativity on well-conditioned factors") {
    Rng64 rng(7);
    Tensor2Dd x(4, 6), a(6, 5), b(5, 3);
    oracle::fill_uniform(x, rng);
    oracle::fill_uniform(a, rng);
    oracle::fill_uniform(b, rng);
    const Tensor2Dd left = matmul(matmul(x, a), b);
    const Tensor2Dd right = matmul(x, matmul(a, b));
    for (size_t i = 0; i < left.data.size(); ++i) {
        const double denom = std::max(1.0, std::abs(right.data[i]));
        CHECK(std::abs(left.data[i] - right.data[i]) / denom < 1e-10);
    }
}

TEST_CASE("rmsnorm zero input stays zero") {
    std::vector<double> x(8, 0.0), gamma(8, 1.0);
    const auto y = rmsnorm<double>(x, gamma, 1e-5);
    for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("rmsnorm constant vector normalizes to unit rms") {
    std::vector<double> x(4, 2.0), gamma(4, 1.0);
    const auto y = rmsnorm<double>(x, gamma, 0.0);
    for (double v : y) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rmsnorm matches direct formula") {
    Rng64 rng(3);
    std::vector<double> x(33), gamma(33);
    for (auto& v : x) v = rng.next_symmetric(2.0);
    for (auto& v : gamma) v = rng.next_symmetric(1.0);
    const auto y = rmsnorm<double>(x, gamma, 1e-5);
    double ss = 0.0;
    for (double v : x) ss += v * v;
    const double inv = 1.0 / std::sqrt(ss / 33.0 + 1e-5);
    for (size_t i = 0; i < x.size(); ++i) {
        CHECK(y[i] == doctest::Approx(x[i] * inv * gamma[i]).epsilon(1e-6));
    }
}

TEST_CASE("rmsnorm length mismatch throws") {
    std::vector<double> x(4), gamma(5);
    CHECK_THROWS_AS(rmsnorm<double>(x, gamma, 1e-5), ShapeError);
}

TEST_CASE("rope at position zero is identity") {
    Rng64 rng(5);
    std::vector<double> v(16);
    for (auto& x : v) x = rng.next_symmetric(1.0);
    const auto out = rope_apply<double>(v, 0.0, 10000.0);
    for (size_t i = 0; i < v.size(); ++i) CHECK(out[i] == v[i]);
}

TEST_CASE("rope quarter rotation") {
    std::vector<double> v = {1.0, 0.0};
    const auto out = rope_apply<double>(v, std::acos(-1.0) / 2.0, 10000.0);
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("rope preserves norm") {
    Rng64 rng(17);
    for (int it = 0; it < 20; ++it) {
        std::vector<double> v(8);
        for (auto& x : v) x = rng.next_symmetric(3.0);
        double before = 0.0;
        for (double x : v) before += x * x;
        const auto out = rope_apply<double>(v, 12.0 + it, 10000.0);
        double after = 0.0;
        for (double x : out) after += x * x;
        CHECK(std::sqrt(after) == doctest::Approx(std::sqrt(before)).epsilon(1e-6));
    }
}

TEST_CASE("rope odd dimension throws") {
    std::vector<double> v(3);
    CHECK_THROWS_AS(rope_apply<double>(v, 1.0, 10000.0), ShapeError);
}

TEST_CASE("argmax basics and tie-break") {
    std::vector<double> a = {0.1, 0.9, 0.3};
    CHECK(argmax_greedy<double>(a) == 1);
    std::vector<double> b = {1.0, 1.0, 0.0};
    CHECK(argmax_greedy<double>(b) == 0);
    std::vector<double> c = {-5.0};
    CHECK(argmax_greedy<double>(c) == 0);
    std::vector<double> empty;
    CHECK_THROWS_AS(argmax_greedy<double>(empty), ShapeError);
}

namespace {

using BlockList = std::vector<std::pair<Tensor2Dd, Tensor2Dd>>;

BlockList partition(const Tensor2Dd& k, const Tensor2Dd& v,
                    const std::vector<size_t>& sizes) {
    BlockList blocks;
    size_t row = 0;
    for (size_t sz : sizes) {
        Tensor2Dd kb(sz, k.cols), vb(sz, v.cols);
        for (size_t i = 0; i < sz; ++i) {
            std::copy(k.row(row + i).begin(), k.row(row + i).end(), kb.row(i).begin());
            std::copy(v.row(row + i).begin(), v.row(row + i).end(), vb.row(i).begin());
        }
        row += sz;
        blocks.emplace_back(std::move(kb), std::move(vb));
    }
    return blocks;
}

}  // namespace

TEST_CASE("online softmax: single key returns its value") {
    Rng64 rng(11);
    std::vector<double> q(4);
    for (auto& x : q) x = rng.next_symmetric(5.0);
    Tensor2Dd k(1, 4), v(1, 4);
    oracle::fill_uniform(k, rng);
    oracle::fill_uniform(v, rng);
    const BlockList blocks = partition(k, v, {1});
    const auto out = online_softmax_attend<double>(q, blocks, 0.5);
    for (size_t i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(v.at(0, i)));
}

TEST_CASE("online softmax: two identical keys average the values") {
    Rng64 rng(12);
    std::vector<double> q(4);
    for (auto& x : q) x = rng.next_symmetric(1.0);
    Tensor2Dd k(2, 4), v(2, 4);
    for (size_t j = 0; j < 4; ++j) {
        k.at(0, j) = k.at(1, j) = rng.next_symmetric(1.0);
    }
    oracle::fill_uniform(v, rng);
    const BlockList blocks = partition(k, v, {2});
    const auto out = online_softmax_attend<double>(q, blocks, 1.0);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(out[i] == doctest::Approx(0.5 * (v.at(0, i) + v.at(1, i))).epsilon(1e-12));
    }
}

TEST_CASE("online softmax matches naive oracle over 4 blocks of 16") {
    Rng64 rng(11);
    std::vector<double> q(8);
    for (auto& x : q) x = rng.next_symmetric(1.0);
    Tensor2Dd k(64, 8), v(64, 8);
    oracle::fill_uniform(k, rng);
    oracle::fill_uniform(v, rng);
    const auto want = oracle::naive_attention(q, k, v, 0.35);
    const BlockList blocks = partition(k, v, {16, 16, 16, 16});
    const auto got = online_softmax_attend<double>(q, blocks, 0.35);
    for (size_t i = 0; i < 8; ++i) {
        CHECK(std::abs(got[i] - want[i]) < 1e-12);
    }
}

TEST_CASE("online softmax is partition invariant") {
    Rng64 rng(23);
    std::vector<double> q(6);
    for (auto& x : q) x = rng.next_symmetric(1.0);
    Tensor2Dd k(21, 6), v(21, 6);
    oracle::fill_uniform(k, rng);
    oracle::fill_uniform(v, rng);
    const auto whole = online_softmax_attend<double>(q, partition(k, v, {21}), 0.4);
    const std::vector<std::vector<size_t>> partitions = {
        {1, 20}, {20, 1}, {7, 7, 7}, {5, 4, 3, 2, 1, 6},
        std::vector<size_t>(21, 1)};
    for (const auto& sizes : partitions) {
        const auto got = online_softmax_attend<double>(q, partition(k, v, sizes), 0.4);
        for (size_t i = 0; i < 6; ++i) {
            CHECK(std::abs(got[i] - whole[i]) < 1e-12);
        }
    }
}

TEST_CASE("online softmax rejects empty history") {
    std::vector<double> q(4, 0.0);
    const BlockList blocks;
    CHECK_THROWS_AS(online_softmax_attend<double>(q, blocks, 1.0), ShapeError);
}

TEST_CASE("finite outputs on finite inputs") {
    Rng64 rng(31);
    Tensor2Dd a(9, 13), b(13, 5);
    oracle::fill_uniform(a, rng, 10.0);
    oracle::fill_uniform(b, rng, 10.0);
    for (double v : matmul(a, b).data) CHECK(std::isfinite(v));
}
