#include "haarfact/selftest.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "haarfact/io.hpp"

namespace haarfact {
namespace {

IntervalFamily random_family(std::mt19937_64& rng, int max_level, double keep) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<DyadicInterval> members;
    for (int n = 0; n <= max_level; ++n)
        for (long long k = 1; k <= (1LL << n); ++k)
            if (coin(rng) < keep) members.emplace_back(n, k);
    return IntervalFamily(std::move(members));
}

bool suite_dyadic(std::uint64_t seed, std::string& detail) {
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < 16; ++trial) {
        IntervalFamily F = random_family(rng, 5, 0.4);
        if (F.empty()) continue;
        if (carleson_constant(F) != carleson_brute_force(F)) {
            detail = "carleson fast/brute mismatch";
            return false;
        }
    }
    for (long long j = 1; j < 128; ++j) {
        if (canonical_index(interval_from_canonical_index(j)) != j) {
            detail = "canonical index not a bijection";
            return false;
        }
    }
    if (carleson_constant(enumerate_dn(4)) != Rational(5)) {
        detail = "[[D_4]] != 5";
        return false;
    }
    return true;
}

bool suite_haar(std::uint64_t seed, std::string& detail) {
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> gauss;
    const int N = 6;
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<double> vals(std::size_t(1) << (N + 1));
        for (double& v : vals) v = gauss(rng);
        StepFunction f(N + 1, vals);
        StepFunction back = synthesize(analyze(f, N));
        back += StepFunction::constant(f.mean());
        back -= f;
        if (lp_norm(back, INFINITY) > 1e-10) {
            detail = "analyze/synthesize roundtrip failed";
            return false;
        }
        double l2 = lp_norm(f - StepFunction::constant(f.mean()), 2.0);
        double s2 = lp_norm(square_function(f, N), 2.0);
        if (std::abs(l2 - s2) > 1e-9 * (1.0 + l2)) {
            detail = "Parseval ||f - mean|| != ||S(f)|| in L2";
            return false;
        }
        auto eq = check_square_equivalence(f, 3.0, N);
        if (!eq.within_bounds) {
            detail = "square-function equivalence out of bounds at p=3";
            return false;
        }
    }
    return true;
}

bool suite_operator(std::uint64_t seed, std::string& detail) {
    const int N = 5;
    HaarOperator T = generate("random", N, seed + 2);
    if (T.adjoint().adjoint().entrywise_distance(T) > 1e-12) {
        detail = "adjoint not an involution";
        return false;
    }
    auto id_norm = opnorm(HaarOperator::identity(N), 2.0);
    if (std::abs(id_norm.lower - 1.0) > 1e-9 || id_norm.upper < 1.0 - 1e-12) {
        detail = "||Id||_2 != 1";
        return false;
    }
    HaarOperator M = generate("multiplier:uniform", N, seed + 3);
    double lam = M.diagonal().cwiseAbs().maxCoeff();
    auto m_norm = opnorm(M, 2.5);
    if (m_norm.lower > lam + 1e-9 || m_norm.upper < lam - 1e-9) {
        detail = "multiplier p-norm bracket misses max|lambda|";
        return false;
    }
    HaarOperator C = generate("random_contraction", N, seed + 4, 3.0);
    if (opnorm(C, 3.0).upper > 1.0 + 1e-9) {
        detail = "contraction rescaling missed the certified bound";
        return false;
    }
    return true;
}

bool suite_selection(std::uint64_t seed, std::string& detail) {
    std::mt19937_64 rng(seed + 5);
    std::normal_distribution<double> gauss;
    ThinningParams params;  // k=2, l=3, p=2
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<double> xv(64), yv(64);
        for (double& v : xv) v = 0.2 * gauss(rng);
        for (double& v : yv) v = 0.2 * gauss(rng);
        StepFunction x(6, xv), y(6, yv);
        double sx = lp_norm(x, 2.0), sy = lp_norm(y, 2.0);
        if (sx > 1.0) x *= 1.0 / sx;
        if (sy > 1.0) y *= 1.0 / sy;
        auto fast = select_sparse_level(x, y, DyadicInterval::unit(), params, 6);
        auto slow = select_sparse_level_scan(x, y, DyadicInterval::unit(), params, 6);
        if (fast.found != slow.found || (fast.found && fast.level != slow.level)) {
            detail = "sparse-level fast/scan disagreement";
            return false;
        }
    }
    auto bb = build_block_basis(HaarOperator::identity(8), 1, 8, 2.0);
    if (!bb.ok()) {
        detail = "block basis failed for the identity";
        return false;
    }
    auto ver = verify_block_basis(bb.basis, HaarOperator::identity(8));
    if (!ver.all_ok()) {
        detail = "block-basis verification: " + ver.detail;
        return false;
    }
    return true;
}

bool suite_factorize(std::uint64_t seed, std::string& detail) {
    HaarOperator M = generate("multiplier:bernoulli(0.5)", 6, seed + 6);
    auto cert = factor_identity(M, 1, 6, 2.0);
    if (!cert.ok() || cert.residual2 > 1e-10) {
        detail = "multiplier factorization residual " + std::to_string(cert.residual2);
        return false;
    }
    if (cert.error_term > 1e-12) {
        detail = "multiplier error term nonzero";
        return false;
    }
    auto ri = restricted_invertibility(generate_matrix("random", 24, seed + 7), 2.0, 0.5);
    if (ri.residual > 1e-9 || ri.inverse_norm > 2.0 + 1e-9) {
        detail = "restricted invertibility chain residual " + std::to_string(ri.residual);
        return false;
    }
    return true;
}

bool suite_io(std::uint64_t seed, std::string& detail) {
    HaarOperator T = generate("random", 4, seed + 8);
    HaarOperator back = operator_from_json(to_json(T));
    if (back.entrywise_distance(T) > 1e-12) {
        detail = "operator JSON roundtrip drift";
        return false;
    }
    IntervalFamily F = enumerate_dn(3);
    if (!(family_from_json(to_json(F)).members() == F.members())) {
        detail = "family JSON roundtrip drift";
        return false;
    }
    std::string d1 = fnv1a_digest(to_json(T).dump());
    std::string d2 = fnv1a_digest(to_json(T).dump());
    if (d1 != d2 || d1.rfind("fnv1a:", 0) != 0) {
        detail = "digest instability";
        return false;
    }
    return true;
}

bool suite_net(std::uint64_t seed, std::string& detail) {
    // Small sparse pair with disjoint deep Haar supports: Q must vanish on it.
    HaarExpansion e1(10), e2(10);
    e1.at(DyadicInterval(5, 3)) = 1.0;
    e1.at(DyadicInterval(7, 40)) = 0.5;
    e2.at(DyadicInterval(5, 9)) = 1.0;
    e2.at(DyadicInterval(6, 50)) = -0.7;
    std::vector<StepFunction> E = {synthesize(e1), synthesize(e2)};
    for (auto& f : E) f *= 1.0 / h1_norm(f, 10);
    NetThinningConfig cfg;
    cfg.N = 10;
    cfg.seed = seed + 9;
    auto res = net_thinning(E, 2, 0.5, cfg);
    if (!res.ok()) {
        detail = "net thinning failed: " + res.failure;
        return false;
    }
    for (const auto& f : E) {
        if (lp_norm(res.apply_Q(f), INFINITY) > 1e-10) {
            detail = "Q does not vanish on the removed span";
            return false;
        }
    }
    if (res.coeff_bound_ratio > 1.0 + 1e-9) {
        detail = "coefficient bound violated on the net";
        return false;
    }
    return true;
}

}  // namespace

std::vector<SelftestEntry> run_selftests(bool quick, std::uint64_t seed) {
    (void)quick;  // the quick profile is the only one wired up at desk scale
    std::vector<SelftestEntry> out;
    auto run = [&](const char* name, bool (*fn)(std::uint64_t, std::string&)) {
        SelftestEntry e;
        e.name = name;
        try {
            e.passed = fn(seed, e.detail);
        } catch (const std::exception& ex) {
            e.passed = false;
            e.detail = ex.what();
        }
        out.push_back(std::move(e));
    };
    run("dyadic", suite_dyadic);
    run("haar", suite_haar);
    run("operator", suite_operator);
    run("selection", suite_selection);
    run("factorize", suite_factorize);
    run("io", suite_io);
    run("net-thinning", suite_net);
    return out;
}

}  // namespace haarfact
