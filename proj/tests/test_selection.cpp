#include <doctest.h>

#include <cmath>
#include <random>

#include "haarfact/selection.hpp"

using namespace haarfact;

namespace {

// Admissible pair with level-decaying Haar coefficients, scaled strictly
// inside the unit balls of L^p and L^q.
std::pair<StepFunction, StepFunction> admissible_pair(int depth, double p,
                                                      std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    auto draw = [&](double exponent) {
        HaarExpansion e(depth);
        for (int n = 0; n <= depth; ++n) {
            double scale = std::pow(2.0, -0.6 * n);
            for (long long k = 1; k <= (1LL << n); ++k)
                e.at(DyadicInterval(n, k)) = scale * gauss(rng);
        }
        StepFunction f = synthesize(e);
        double norm = lp_norm(f, exponent);
        if (norm > 0) f *= 0.9 / norm;
        return f;
    };
    double q = p / (p - 1.0);
    return {draw(p), draw(q)};
}

}  // namespace

TEST_CASE("thin lemma: A_p formula") {
    ThinningParams params{2, 3, 2.0};
    CHECK(params.a_p() == doctest::Approx(289.0).epsilon(1e-12));
}

TEST_CASE("thin lemma: zero functions select level 1") {
    ThinningParams params{2, 3, 2.0};
    auto r = select_sparse_level(StepFunction::constant(0.0, 4), StepFunction::constant(0.0, 4),
                                 DyadicInterval::unit(), params, 6);
    CHECK(r.found);
    CHECK(r.level == 1);
    CHECK(r.bad_set.empty());
}

TEST_CASE("thin lemma: precondition is enforced") {
    ThinningParams params{2, 3, 2.0};
    StepFunction big = StepFunction::constant(5.0, 3);
    CHECK_THROWS_AS(select_sparse_level(big, big, DyadicInterval::unit(), params, 4),
                    DomainError);
}

TEST_CASE("thin lemma: scan oracle equivalence") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> kd(1, 3), ld(2, 4), pd(0, 2);
    const double ps[3] = {1.5, 2.0, 3.0};
    for (int trial = 0; trial < 40; ++trial) {
        ThinningParams params{kd(rng), ld(rng), ps[pd(rng)]};
        auto [x, y] = admissible_pair(8, params.p, rng);
        auto fast = select_sparse_level(x, y, DyadicInterval::unit(), params, 8);
        auto slow = select_sparse_level_scan(x, y, DyadicInterval::unit(), params, 8);
        CHECK(fast.found == slow.found);
        if (fast.found) {
            CHECK(fast.level == slow.level);
            CHECK(fast.bad_set.members() == slow.bad_set.members());
        }
    }
}

TEST_CASE("good intervals: zero operator accepts everything") {
    auto part = good_intervals(HaarOperator::zero(6), {}, enumerate_dn(4), 0.25);
    CHECK(part.bad.empty());
    CHECK(part.good.size() == enumerate_dn(4).size());
}

TEST_CASE("good intervals: identity sees only overlapping supports") {
    HaarOperator id = HaarOperator::identity(6);
    // One built function supported on {[0,1/2)} only.
    Eigen::VectorXd b = Eigen::VectorXd::Zero(long(id.dim()));
    b(1) = 1.0;  // canonical index 2 = [0,1/2)
    IntervalFamily candidates({DyadicInterval(1, 1), DyadicInterval(1, 2), DyadicInterval(2, 3)});
    auto part = good_intervals(id, {b}, candidates, 1e-9);
    CHECK(part.bad.members() == std::vector<DyadicInterval>{DyadicInterval(1, 1)});
    CHECK(part.good.size() == 2);
}

TEST_CASE("block basis: identity and zero operators") {
    for (const char* spec : {"identity", "zero"}) {
        HaarOperator H = generate(spec, 10, 1);
        auto result = build_block_basis(H, 2, 10, 2.0);
        REQUIRE(result.ok());
        auto ver = verify_block_basis(result.basis, H);
        CHECK(ver.disjoint_ok);
        CHECK(ver.tree_ok);
        CHECK(ver.sign_ok);
        CHECK(ver.norm_ok);
        CHECK(ver.offdiag_ok);
        for (const auto& row : ver.rows) CHECK(row.offdiag_sum == 0.0);
    }
}

TEST_CASE("block basis: deeper tree against a multiplier stays exactly diagonal") {
    HaarOperator M = generate("multiplier:bernoulli(0.5)", 12, 5);
    auto result = build_block_basis(M, 3, 12, 2.0);
    REQUIRE(result.ok());
    auto ver = verify_block_basis(result.basis, M);
    CHECK(ver.all_ok());
    for (const auto& row : ver.rows) CHECK(row.offdiag_sum == 0.0);
}

TEST_CASE("block basis: random contraction with post-hoc verification") {
    HaarOperator T = generate("random_contraction", 14, 3, 2.0);
    auto result = build_block_basis(T, 2, 14, 2.0);
    REQUIRE(result.ok());
    auto ver = verify_block_basis(result.basis, T);
    CHECK(ver.all_ok());
    CHECK(result.reports.size() == 7);
    for (const auto& rep : result.reports) {
        CHECK(rep.retained_ratio >= 1.0 - std::pow(8.0, -rep.stage) - 1e-9);
        CHECK(rep.effective_threshold <= rep.spec_threshold + 1e-15);
    }
}

TEST_CASE("block basis: insufficient depth is reported, not fatal") {
    HaarOperator T = generate("random_contraction", 4, 9, 2.0);
    auto result = build_block_basis(T, 3, 4, 2.0);
    if (!result.ok()) {
        CHECK(result.failing_stage >= 1);
        // Families at and beyond the failing stage stay empty.
        CHECK(result.basis.families[std::size_t(result.failing_stage) - 1].empty());
    }
}

TEST_CASE("net thinning: sparse subspace is annihilated") {
    HaarExpansion e1(12), e2(12);
    e1.at(DyadicInterval(5, 3)) = 1.0;
    e1.at(DyadicInterval(6, 33)) = -0.4;
    e2.at(DyadicInterval(5, 20)) = 0.8;
    e2.at(DyadicInterval(7, 100)) = 0.3;
    std::vector<StepFunction> E = {synthesize(e1), synthesize(e2)};
    for (auto& f : E) f *= 1.0 / h1_norm(f, 12);
    NetThinningConfig cfg;
    cfg.N = 12;
    cfg.seed = 2;
    auto res = net_thinning(E, 2, 0.5, cfg);
    REQUIRE(res.ok());
    CHECK(!check_dyadic_tree(res.tree, true).has_value());
    std::mt19937_64 rng(6);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        StepFunction x = gauss(rng) * E[0] + gauss(rng) * E[1];
        CHECK(h1_norm(res.apply_Q(x), 12) <= 0.5 * h1_norm(x, 12) + 1e-12);
    }
    // Chain of Carleson constants shrinks by at most the recorded block count.
    for (const auto& s : res.stages)
        if (s.block_count > 0)
            CHECK(s.carleson_after * double(s.block_count) >= s.carleson_before - 1e-9);
    CHECK(res.coeff_bound_ratio <= 1.0 + 1e-9);
}

TEST_CASE("net thinning: Q is an orthogonal projection") {
    HaarExpansion e1(10), e2(10);
    e1.at(DyadicInterval(4, 2)) = 1.0;
    e2.at(DyadicInterval(4, 9)) = 1.0;
    std::vector<StepFunction> E = {synthesize(e1), synthesize(e2)};
    for (auto& f : E) f *= 1.0 / h1_norm(f, 10);
    NetThinningConfig cfg;
    cfg.N = 10;
    cfg.seed = 3;
    auto res = net_thinning(E, 2, 0.5, cfg);
    REQUIRE(res.ok());
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> vals(2048);
        for (double& v : vals) v = gauss(rng);
        StepFunction f(11, vals);
        StepFunction qf = res.apply_Q(f);
        CHECK(lp_norm(res.apply_Q(qf) - qf, 2.0) <= 1e-10);
        std::vector<double> wals(2048);
        for (double& v : wals) v = gauss(rng);
        StepFunction g(11, wals);
        CHECK(inner(res.apply_Q(f), g) == doctest::Approx(inner(f, res.apply_Q(g))).epsilon(1e-9));
    }
}
