#include <doctest.h>

#include <cmath>
#include <random>

#include "haarfact/haar.hpp"

using namespace haarfact;

namespace {
StepFunction random_mean_zero(std::mt19937_64& rng, int resolution) {
    std::normal_distribution<double> gauss;
    std::vector<double> vals(std::size_t(1) << resolution);
    for (double& v : vals) v = gauss(rng);
    StepFunction f(resolution, std::move(vals));
    f -= StepFunction::constant(f.mean());
    return f;
}
}  // namespace

TEST_CASE("haar function basics") {
    StepFunction h = haar_function(DyadicInterval(0, 1));
    CHECK(h.values()[0] == 1.0);
    CHECK(h.values()[1] == -1.0);
    CHECK(h.mean() == 0.0);
    for (int lev = 0; lev <= 6; ++lev) {
        DyadicInterval I(lev, (1LL << lev));
        StepFunction hi = haar_function(I);
        CHECK(hi.mean() == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(inner(hi, hi) == doctest::Approx(I.measure().to_double()).epsilon(1e-15));
    }
}

TEST_CASE("analyze and synthesize") {
    // f = h_{[0,1/2)}: a single unit coefficient.
    HaarExpansion e = analyze(haar_function(DyadicInterval(1, 1)), 4);
    for (std::size_t i = 0; i < e.coeffs.size(); ++i)
        CHECK(e.coeffs[i] == doctest::Approx(i + 1 == 2 ? 1.0 : 0.0).epsilon(1e-14));
    // Constants have no Haar content.
    HaarExpansion c = analyze(StepFunction::constant(3.5, 5), 4);
    for (double v : c.coeffs) CHECK(v == 0.0);
    // Random round-trip at N = 8.
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        StepFunction f = random_mean_zero(rng, 9);
        StepFunction back = synthesize(analyze(f, 8)) - f;
        CHECK(lp_norm(back, INFINITY) <= 1e-12);
    }
}

TEST_CASE("square function: frozen example") {
    CHECK(lp_norm(square_function(haar_function(DyadicInterval(2, 3)), 4) -
                      StepFunction::indicator(DyadicInterval(2, 3)),
                  INFINITY) <= 1e-14);
    StepFunction f = haar_function(DyadicInterval(0, 1)) + haar_function(DyadicInterval(1, 1));
    StepFunction s = square_function(f, 3);
    StepFunction expected =
        std::sqrt(2.0) * StepFunction::indicator(DyadicInterval(1, 1)) +
        StepFunction::indicator(DyadicInterval(1, 2));
    CHECK(lp_norm(s - expected, INFINITY) <= 1e-14);
    // Homogeneity.
    CHECK(lp_norm(square_function(-2.5 * f, 3) - 2.5 * s, INFINITY) <= 1e-13);
    // ||f||_H1 = (sqrt(2) + 1) / 2.
    CHECK(h1_norm(f, 3) == doctest::Approx((std::sqrt(2.0) + 1.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("lp norms of haar functions") {
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        DyadicInterval I(3, 5);
        CHECK(lp_norm(haar_function(I), p) ==
              doctest::Approx(std::pow(I.measure().to_double(), 1.0 / p)).epsilon(1e-14));
    }
    CHECK(lp_norm(haar_function(DyadicInterval(3, 5)), INFINITY) == doctest::Approx(1.0));
    CHECK(h1_norm(haar_function(DyadicInterval(2, 1)), 4) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("norm constants") {
    NormConstants nc2(2.0);
    CHECK(nc2.C_p == doctest::Approx(4.0));
    CHECK(nc2.q == doctest::Approx(2.0));
    NormConstants nc3(3.0);
    CHECK(nc3.C_p == doctest::Approx(4.5));
    CHECK(nc3.q == doctest::Approx(1.5));
    CHECK(nc3.c_p == doctest::Approx(2.0 / 9.0));
}

TEST_CASE("parseval and square equivalence") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        StepFunction f = random_mean_zero(rng, 7);
        CHECK(std::abs(lp_norm(square_function(f, 6), 2.0) - lp_norm(f, 2.0)) <= 1e-12);
        for (double p : {1.5, 3.0}) {
            auto rep = check_square_equivalence(f, p, 6);
            CHECK(rep.within_bounds);
        }
    }
}

TEST_CASE("lower l2 estimate with constant 4") {
    // Single block: LHS = |I| <= 4 |I|.
    std::vector<StepFunction> ys{haar_function(DyadicInterval(2, 1))};
    auto rep = check_lower_l2(ys, {1.0}, 6);
    CHECK(rep.holds);
    CHECK(rep.lhs == doctest::Approx(0.25).epsilon(1e-12));
    // Disjoint haar functions.
    std::vector<StepFunction> y2{haar_function(DyadicInterval(2, 1)),
                                 haar_function(DyadicInterval(2, 3)),
                                 haar_function(DyadicInterval(3, 5))};
    auto rep2 = check_lower_l2(y2, {1.0, 1.0, 1.0}, 6);
    CHECK(rep2.holds);
    double lhs = std::sqrt(0.25 * 0.25 + 0.25 * 0.25 + 0.125 * 0.125);
    CHECK(rep2.lhs == doctest::Approx(lhs).epsilon(1e-12));
    // Random disjoint families.
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<StepFunction> fam;
        std::vector<double> coeff;
        // Level-5 intervals are pairwise disjoint; sprinkle a few, each carrying
        // a random multiple of its own Haar function (disjoint Haar supports).
        std::uniform_int_distribution<long long> pick(1, 32);
        std::vector<long long> used;
        for (int i = 0; i < 5; ++i) {
            long long k = pick(rng);
            bool dup = false;
            for (long long u : used) dup = dup || u == k;
            if (dup) continue;
            used.push_back(k);
            fam.push_back(gauss(rng) * haar_function(DyadicInterval(5, k)));
            coeff.push_back(gauss(rng));
        }
        if (fam.empty()) continue;
        CHECK(check_lower_l2(fam, coeff, 6).holds);
    }
}
