#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsvd/svd.hpp"
#include "oracles.hpp"

using namespace fsvd;

TEST_CASE("diagonal matrix, rank 1 keeps the dominant entry") {
    Tensor2Dd w(2, 2, {3.0, 0.0, 0.0, 1.0});
    const SvdResult svd = truncated_svd(w, 1);
    REQUIRE(svd.singular_values.size() == 1);
    CHECK(svd.singular_values[0] == doctest::Approx(3.0).epsilon(1e-12));
    const Tensor2Dd recon = matmul(svd.a, svd.b);
    CHECK(recon.at(0, 0) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(std::abs(recon.at(0, 1)) < 1e-10);
    CHECK(std::abs(recon.at(1, 0)) < 1e-10);
    CHECK(std::abs(recon.at(1, 1)) < 1e-10);
}

TEST_CASE("full-rank reconstruction is lossless") {
    Rng64 rng(5);
    for (auto [m, n] : {std::pair<size_t, size_t>{6, 6}, {9, 4}, {4, 9}}) {
        Tensor2Dd w(m, n);
        oracle::fill_uniform(w, rng);
        const SvdResult svd = truncated_svd(w, std::min(m, n));
        CHECK(frobenius_diff(matmul(svd.a, svd.b), w) <= 1e-6 * frobenius_norm(w));
    }
}

TEST_CASE("8x6 seed 7 rank 3 matches the Jacobi eigen-oracle tail") {
    Rng64 rng(7);
    Tensor2Dd w(8, 6);
    oracle::fill_uniform(w, rng);
    const SvdResult svd = truncated_svd(w, 3);
    const double err = frobenius_diff(matmul(svd.a, svd.b), w);
    const double tail = oracle::eckart_young_tail(w, 3);
    CHECK(std::abs(err - tail) <= 1e-6 * frobenius_norm(w));
}

TEST_CASE("singular values are nonincreasing and match the oracle") {
    Rng64 rng(19);
    Tensor2Dd w(12, 17);
    oracle::fill_uniform(w, rng);
    const SvdResult svd = truncated_svd(w, 12);
    const std::vector<double> eig = oracle::gram_eigenvalues(w);
    for (size_t i = 0; i < svd.singular_values.size(); ++i) {
        if (i > 0) CHECK(svd.singular_values[i] <= svd.singular_values[i - 1]);
        CHECK(svd.singular_values[i] ==
              doctest::Approx(std::sqrt(std::max(eig[i], 0.0))).epsilon(1e-8));
    }
}

TEST_CASE("eckart-young holds across ranks (sampled)") {
    Rng64 rng(101);
    for (int it = 0; it < 5; ++it) {
        const size_t m = 5 + static_cast<size_t>(rng.next_below(20));
        const size_t n = 5 + static_cast<size_t>(rng.next_below(20));
        Tensor2Dd w(m, n);
        oracle::fill_uniform(w, rng);
        const double norm = frobenius_norm(w);
        for (size_t r = 1; r <= std::min(m, n); r += 3) {
            const SvdResult svd = truncated_svd(w, r);
            const double err = frobenius_diff(matmul(svd.a, svd.b), w);
            const double tail = oracle::eckart_young_tail(w, r);
            CHECK(std::abs(err - tail) <= 1e-6 * norm);
        }
    }
}

TEST_CASE("rank out of range throws") {
    Tensor2Dd w(4, 3);
    CHECK_THROWS_AS(truncated_svd(w, 0), RankError);
    CHECK_THROWS_AS(truncated_svd(w, 4), RankError);
}

TEST_CASE("non-finite input throws") {
    Tensor2Dd w(2, 2, {1.0, 2.0, std::nan(""), 4.0});
    CHECK_THROWS_AS(truncated_svd(w, 1), NumericError);
}

TEST_CASE("rank-deficient input reconstructs exactly at its true rank") {
    // Two identical columns -> rank 2 at most for a 3x3 with one repeat.
    Rng64 rng(55);
    Tensor2Dd base(3, 2);
    oracle::fill_uniform(base, rng);
    Tensor2Dd w(3, 3);
    for (size_t i = 0; i < 3; ++i) {
        w.at(i, 0) = base.at(i, 0);
        w.at(i, 1) = base.at(i, 1);
        w.at(i, 2) = base.at(i, 0);  // duplicate of column 0
    }
    const SvdResult svd = truncated_svd(w, 2);
    CHECK(frobenius_diff(matmul(svd.a, svd.b), w) <= 1e-9 * frobenius_norm(w));
}
