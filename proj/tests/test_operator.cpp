#include <doctest.h>

#include <random>

#include "haarfact/operator.hpp"

using namespace haarfact;

namespace {

// Dense coefficient matrix of T, assembled column by column through
// apply_coeffs; independent of the storage kind.
Eigen::MatrixXd materialize(const HaarOperator& T) {
    long d = long(T.dim());
    Eigen::MatrixXd M(d, d);
    for (long c = 0; c < d; ++c)
        M.col(c) = T.apply_coeffs(Eigen::VectorXd::Unit(d, c));
    return M;
}

// Oracle for the weighted (L2) operator norm: largest singular value of
// W^{1/2} M W^{-1/2}.
double spectral_oracle(const HaarOperator& T) {
    Eigen::VectorXd w = haar_weights(T.N()).cwiseSqrt();
    Eigen::MatrixXd M = materialize(T);
    M = w.asDiagonal() * M * w.cwiseInverse().asDiagonal();
    return M.jacobiSvd().singularValues()(0);
}

StepFunction random_mean_zero(std::mt19937_64& rng, int resolution) {
    std::normal_distribution<double> gauss;
    std::vector<double> vals(std::size_t(1) << resolution);
    for (double& v : vals) v = gauss(rng);
    StepFunction f(resolution, std::move(vals));
    f -= StepFunction::constant(f.mean());
    return f;
}

}  // namespace

TEST_CASE("identity and zero actions") {
    HaarOperator id = HaarOperator::identity(5);
    std::mt19937_64 rng(2);
    StepFunction f = random_mean_zero(rng, 6);
    CHECK(lp_norm(id.apply(f) - f, INFINITY) <= 1e-12);
    CHECK(lp_norm(HaarOperator::zero(5).apply(f), INFINITY) <= 1e-15);
}

TEST_CASE("apply is linear") {
    std::mt19937_64 rng(5);
    HaarOperator T = generate("random", 5, 40);
    for (int trial = 0; trial < 10; ++trial) {
        StepFunction f = random_mean_zero(rng, 6), g = random_mean_zero(rng, 6);
        StepFunction lhs = T.apply(f + 2.0 * g);
        StepFunction rhs = T.apply(f) + 2.0 * T.apply(g);
        CHECK(lp_norm(lhs - rhs, INFINITY) <= 1e-12);
    }
}

TEST_CASE("adjoint: involution and pairing identity") {
    HaarOperator id = HaarOperator::identity(4);
    CHECK(id.adjoint().entrywise_distance(id) <= 1e-15);
    HaarOperator T = generate("random", 5, 8);
    CHECK(T.adjoint().adjoint().entrywise_distance(T) <= 1e-14);
    HaarOperator Ts = T.adjoint();
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        StepFunction f = random_mean_zero(rng, 6), g = random_mean_zero(rng, 6);
        CHECK(inner(T.apply(f), g) == doctest::Approx(inner(f, Ts.apply(g))).epsilon(1e-10));
    }
}

TEST_CASE("bilinear forms on haar functions") {
    HaarOperator id = HaarOperator::identity(4);
    DyadicInterval I(2, 3), J(3, 1);
    CHECK(bilinear(id, haar_function(I), haar_function(I)) ==
          doctest::Approx(I.measure().to_double()).epsilon(1e-14));
    CHECK(bilinear(id, haar_function(I), haar_function(J)) == doctest::Approx(0.0));
}

TEST_CASE("opnorm at p = 2: exact cases and SVD oracle") {
    CHECK(opnorm(HaarOperator::identity(5), 2.0).lower == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(opnorm(HaarOperator::identity(5), 2.0).upper >= 1.0 - 1e-12);
    HaarOperator twice = HaarOperator::identity(5).scaled(2.0);
    auto n2 = opnorm(twice, 2.0);
    CHECK(n2.lower == doctest::Approx(2.0).epsilon(1e-9));
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        HaarOperator T = generate("random", 4, seed);  // d = 31 <= 511
        double oracle = spectral_oracle(T);
        auto est = opnorm(T, 2.0);
        CHECK(est.lower <= oracle + 1e-8);
        CHECK(est.upper >= oracle - 1e-8);
        CHECK(est.upper - est.lower <= 1e-6 * oracle);
    }
}

TEST_CASE("opnorm general p brackets the true value") {
    for (double p : {1.5, 3.0}) {
        CHECK(opnorm(HaarOperator::identity(4), p).lower >= 1.0 - 1e-9);
        CHECK(opnorm(HaarOperator::identity(4), p).upper >= 1.0 - 1e-12);
        HaarOperator M = generate("multiplier:uniform", 5, 77);
        double lam = M.diagonal().cwiseAbs().maxCoeff();
        auto est = opnorm(M, p);
        CHECK(est.lower <= lam + 1e-9);
        CHECK(est.upper >= lam - 1e-9);
        CHECK(est.lower <= est.upper + 1e-12);
    }
}

TEST_CASE("generators") {
    HaarOperator half = generate("multiplier:const(0.5)", 4, 1);
    CHECK(half.entrywise_distance(HaarOperator::identity(4).scaled(0.5)) <= 1e-15);
    // Determinism in the seed, including the ":seed=" override.
    HaarOperator a = generate("random", 5, 7);
    HaarOperator b = generate("random:seed=7", 5, 99);
    CHECK(a.entrywise_distance(b) == 0.0);
    // Contractions are certified below 1 at the requested p.
    for (double p : {1.5, 2.0, 3.0}) {
        HaarOperator C = generate("random_contraction", 6, 11, p);
        CHECK(opnorm(C, p).upper <= 1.0 + 1e-9);
    }
    HaarOperator C2 = generate("random_contraction", 6, 7, 2.0);
    auto est = opnorm(C2, 2.0);
    CHECK(est.lower >= 0.999);
    CHECK(est.upper <= 1.0 + 1e-9);
    // Permutations preserve levels and have norm 1 at p = 2.
    HaarOperator P = generate("permutation", 5, 13);
    CHECK(opnorm(P, 2.0).upper <= 1.0 + 1e-6);
}

TEST_CASE("multipliers commute with coefficient restrictions") {
    HaarOperator M = generate("multiplier:uniform", 5, 21);
    long d = long(M.dim());
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd c(d);
    for (long i = 0; i < d; ++i) c(i) = gauss(rng);
    // Restriction to the first 2^4 - 1 slots (levels <= 3).
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(d);
    mask.head(15).setOnes();
    Eigen::VectorXd lhs = M.apply_coeffs(mask.cwiseProduct(c));
    Eigen::VectorXd rhs = mask.cwiseProduct(M.apply_coeffs(c));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
}
