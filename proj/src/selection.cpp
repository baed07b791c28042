#include "haarfact/selection.hpp"

#include <cmath>

namespace haarfact {

namespace {

double rat_to_double(const Rational& r) {
    return double(r.numerator()) / double(r.denominator());
}

void check_thin_preconditions(const StepFunction& x, const StepFunction& y,
                              const DyadicInterval& I, double p) {
    NormConstants nc(p);
    double mI = I.measure().to_double();
    if (lp_norm(x, p) > std::pow(mI, 1.0 / p) * (1.0 + 1e-9))
        throw DomainError("select_sparse_level: ||x||_p exceeds |I|^{1/p}");
    if (lp_norm(y, nc.q) > std::pow(mI, 1.0 / nc.q) * (1.0 + 1e-9))
        throw DomainError("select_sparse_level: ||y||_q exceeds |I|^{1/q}");
}

}  // namespace

SparseLevelResult select_sparse_level(const StepFunction& x, const StepFunction& y,
                                      const DyadicInterval& I, const ThinningParams& params,
                                      int depth) {
    if (depth < 1) throw DomainError("select_sparse_level: depth must be >= 1");
    if (params.k < 1 || params.ell < 1) throw DomainError("select_sparse_level: bad k or ell");
    check_thin_preconditions(x, y, I, params.p);
    int N = I.level + depth;
    if (N > max_level()) throw ResourceLimitError("select_sparse_level: depth exceeds MAX_LEVEL");
    HaarExpansion cx = analyze(x, N), cy = analyze(y, N);

    SparseLevelResult res;
    res.a_p = params.a_p();
    int jmax = int(std::min(double(depth), res.a_p));
    res.deepest_examined = jmax;
    for (int j = 1; j <= jmax; ++j) {
        int level = I.level + j;
        long long first = ((I.k - 1) << j) + 1, last = I.k << j;
        std::vector<DyadicInterval> bad;
        for (long long k = first; k <= last; ++k) {
            DyadicInterval J(level, k);
            std::size_t idx = std::size_t(canonical_index(J) - 1);
            // |<x,h_J>| + |<y,h_J>| > |J|/k  <=>  |c_x| + |c_y| > 1/k.
            if (std::fabs(cx.coeffs[idx]) + std::fabs(cy.coeffs[idx]) > 1.0 / params.k)
                bad.push_back(J);
        }
        // sum of |J| <= |I|/ell  <=>  count * ell <= 2^j, exactly in integers.
        if ((long long)(bad.size()) * params.ell <= (1LL << j)) {
            res.found = true;
            res.level = j;
            res.bad_set = IntervalFamily(std::move(bad));
            return res;
        }
    }
    return res;
}

SparseLevelResult select_sparse_level_scan(const StepFunction& x, const StepFunction& y,
                                           const DyadicInterval& I, const ThinningParams& params,
                                           int depth) {
    if (depth < 1) throw DomainError("select_sparse_level_scan: depth must be >= 1");
    check_thin_preconditions(x, y, I, params.p);
    SparseLevelResult res;
    res.a_p = params.a_p();
    int jmax = int(std::min(double(depth), res.a_p));
    res.deepest_examined = jmax;
    for (int j = 1; j <= jmax; ++j) {
        int level = I.level + j;
        long long first = ((I.k - 1) << j) + 1, last = I.k << j;
        std::vector<DyadicInterval> bad;
        DyadicRational bad_measure{0, 0};
        for (long long k = first; k <= last; ++k) {
            DyadicInterval J(level, k);
            StepFunction h = haar_function(J);
            double raw = std::fabs(inner(x, h)) + std::fabs(inner(y, h));
            if (raw > J.measure().to_double() / params.k) {
                bad.push_back(J);
                bad_measure = bad_measure + J.measure();
            }
        }
        Rational limit = I.measure().to_rational() / params.ell;
        if (bad_measure.to_rational() <= limit) {
            res.found = true;
            res.level = j;
            res.bad_set = IntervalFamily(std::move(bad));
            return res;
        }
    }
    return res;
}

// ---------------------------------------------------------------- gg theorem

GoodIntervalPartition good_intervals(const HaarOperator& H,
                                     const std::vector<Eigen::VectorXd>& built_coeffs,
                                     const IntervalFamily& candidates,
                                     double threshold_per_measure) {
    HaarOperator Hadj = H.adjoint();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(H.dim());
    for (const auto& b : built_coeffs)
        g += H.apply_coeffs(b).cwiseAbs() + Hadj.apply_coeffs(b).cwiseAbs();
    GoodIntervalPartition part;
    std::vector<DyadicInterval> good, bad;
    for (const auto& J : candidates.members()) {
        std::size_t idx = std::size_t(canonical_index(J) - 1);
        double per_measure = idx < std::size_t(g.size()) ? g[long(idx)] : 0.0;
        part.g_values.emplace_back(J, per_measure * J.measure().to_double());
        (per_measure <= threshold_per_measure ? good : bad).push_back(J);
    }
    part.good = IntervalFamily(std::move(good));
    part.bad = IntervalFamily(std::move(bad));
    return part;
}

Eigen::VectorXd BlockBasis::coeffs(std::size_t node) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero((2LL << N) - 1);
    for (const auto& J : families.at(node).members())
        c[long(canonical_index(J) - 1)] = 1.0;
    return c;
}

StepFunction BlockBasis::b(std::size_t node) const {
    return synthesize(coeff_expansion(N, coeffs(node)));
}

double BlockBasis::norm2_sq(std::size_t node) const {
    return families.at(node).total_measure().to_double();
}

DyadicTreeOfSets BlockBasis::tree() const { return DyadicTreeOfSets{m, families}; }

BlockBasisResult build_block_basis(const HaarOperator& H, int m, int N, double p,
                                   double op_tol) {
    if (m < 0 || N < m) throw DomainError("build_block_basis: need 0 <= m <= N");
    if (H.N() != N) throw DomainError("build_block_basis: operator level mismatch");
    if (opnorm(H, p).upper > 1.0 + op_tol)
        throw DomainError("build_block_basis: operator is not a contraction at the requested p");

    HaarOperator Hadj = H.adjoint();
    const long long d = H.dim();
    const std::size_t nodes = std::size_t((2LL << m) - 1);

    BlockBasisResult res;
    res.basis.m = m;
    res.basis.N = N;
    res.basis.families.assign(nodes, IntervalFamily{});

    Eigen::VectorXd gcum = Eigen::VectorXd::Zero(d);
    double min_norm_sq = 1.0;

    for (std::size_t t = 1; t <= nodes; ++t) {
        // Sign region of the parent: the whole unit interval for the root,
        // otherwise the left/right halves of the parent's members.
        std::vector<DyadicInterval> pieces;
        if (t == 1) {
            pieces.push_back(DyadicInterval::unit());
        } else {
            const auto& parent = res.basis.families[t / 2 - 1];
            for (const auto& K : parent.members())
                pieces.push_back(t % 2 == 0 ? K.left_half() : K.right_half());
        }
        double region_measure = 0;
        int min_piece_level = N;
        for (const auto& P : pieces) {
            region_measure += P.measure().to_double();
            min_piece_level = std::min(min_piece_level, P.level);
        }

        GoodIntervalReport rep;
        rep.stage = int(t);
        rep.spec_threshold = std::pow(4.0, -double(t) - 1.0);
        // Safety scaling by min_j ||b_j||_2^2 makes the full off-diagonal sum
        // bound sum_{J != I} |<H b_J, b_I>| <= ||b_I||^2 4^{-index} provable.
        rep.effective_threshold = rep.spec_threshold * std::min(1.0, min_norm_sq);
        double need = (1.0 - std::pow(8.0, -double(t))) * region_measure - 1e-12;

        bool placed = false;
        for (int mu = min_piece_level; mu <= N && !placed; ++mu) {
            std::vector<DyadicInterval> selected;
            std::size_t cand_count = 0;
            for (const auto& P : pieces) {
                if (P.level > mu) continue;
                long long first = ((P.k - 1) << (mu - P.level)) + 1;
                long long last = P.k << (mu - P.level);
                for (long long k = first; k <= last; ++k) {
                    ++cand_count;
                    long long idx = (1LL << mu) + k - 2;  // canonical_index - 1
                    if (gcum[idx] <= rep.effective_threshold)
                        selected.emplace_back(mu, k);
                }
            }
            double got = double(selected.size()) * std::pow(2.0, -mu);
            if (got >= need && !selected.empty()) {
                rep.selected_level = mu;
                rep.retained_ratio = got / region_measure;
                rep.candidate_count = cand_count;
                rep.good_count = selected.size();
                for (const auto& J : selected)
                    rep.max_g_selected =
                        std::max(rep.max_g_selected, gcum[canonical_index(J) - 1]);
                if (cand_count <= 1024) {
                    for (const auto& P : pieces) {
                        if (P.level > mu) continue;
                        long long first = ((P.k - 1) << (mu - P.level)) + 1;
                        long long last = P.k << (mu - P.level);
                        for (long long k = first; k <= last; ++k) {
                            DyadicInterval J(mu, k);
                            rep.g_values.emplace_back(
                                J, gcum[canonical_index(J) - 1] * J.measure().to_double());
                        }
                    }
                }
                res.basis.families[t - 1] = IntervalFamily(std::move(selected));
                placed = true;
            }
        }
        res.reports.push_back(rep);
        if (!placed) {
            res.status = BlockBasisResult::Status::InsufficientDepth;
            res.failing_stage = int(t);
            return res;
        }
        Eigen::VectorXd bt = res.basis.coeffs(t - 1);
        gcum += H.apply_coeffs(bt).cwiseAbs() + Hadj.apply_coeffs(bt).cwiseAbs();
        min_norm_sq = std::min(min_norm_sq, res.basis.norm2_sq(t - 1));
    }
    return res;
}

BlockBasisVerification verify_block_basis(const BlockBasis& B, const HaarOperator& H) {
    BlockBasisVerification v;
    const std::size_t nodes = B.families.size();

    // (22okt11) pairwise disjoint collections of pairwise disjoint intervals.
    v.disjoint_ok = true;
    for (std::size_t a = 0; a < nodes && v.disjoint_ok; ++a) {
        if (!B.families[a].pairwise_disjoint()) {
            v.disjoint_ok = false;
            v.detail = "node collection not pairwise disjoint";
        }
        for (std::size_t c = a + 1; c < nodes && v.disjoint_ok; ++c)
            for (const auto& J : B.families[a].members())
                if (B.families[c].contains(J)) {
                    v.disjoint_ok = false;
                    v.detail = "interval shared between two collections";
                    break;
                }
    }

    // (22okt12) dyadic tree of sets with the normalized measure bounds.
    auto violation = check_dyadic_tree(B.tree(), /*check_gg_measure_bounds=*/true);
    v.tree_ok = !violation;
    if (violation && v.detail.empty())
        v.detail = "tree violation at " + violation->parent.literal() + ": " + violation->reason;

    // (22okt13) sign nesting through the canonical child relation.
    v.sign_ok = true;
    for (std::size_t j = 1; 2 * j <= nodes && v.sign_ok; ++j) {
        const auto& parent = B.families[j - 1];
        auto inside_halves = [&](const IntervalFamily& child, bool left) {
            for (const auto& J : child.members()) {
                bool ok = false;
                for (const auto& K : parent.members())
                    if (J.contained_in(left ? K.left_half() : K.right_half())) {
                        ok = true;
                        break;
                    }
                if (!ok) return false;
            }
            return true;
        };
        if (!inside_halves(B.families[2 * j - 1], true) ||
            (2 * j + 1 <= nodes && !inside_halves(B.families[2 * j], false))) {
            v.sign_ok = false;
            v.detail = "sign nesting violated under node " +
                       interval_from_canonical_index((long long)(j)).literal();
        }
    }

    // ||b_I||_2^2 = |E_I| by direct quadrature.
    v.norm_ok = true;
    for (std::size_t t = 0; t < nodes; ++t) {
        StepFunction bt = B.b(t);
        if (std::fabs(inner(bt, bt) - B.norm2_sq(t)) > 1e-12) {
            v.norm_ok = false;
            v.detail = "||b||^2 != |E| at node " + std::to_string(t + 1);
        }
    }

    // Off-diagonal sums against both the 4^{-index} and the literal |I|^4 bound.
    Eigen::VectorXd w = haar_weights(B.N);
    std::vector<Eigen::VectorXd> chi(nodes), Hchi(nodes);
    for (std::size_t t = 0; t < nodes; ++t) {
        chi[t] = B.coeffs(t);
        Hchi[t] = H.apply_coeffs(chi[t]);
    }
    v.offdiag_ok = v.offdiag_measure4_ok = true;
    for (std::size_t i = 0; i < nodes; ++i) {
        OffDiagRow row;
        row.node = i + 1;
        row.diag = Hchi[i].cwiseProduct(w).dot(chi[i]);
        for (std::size_t j = 0; j < nodes; ++j)
            if (j != i) row.offdiag_sum += std::fabs(Hchi[j].cwiseProduct(w).dot(chi[i]));
        row.bound = B.norm2_sq(i) * std::pow(4.0, -double(i) - 1.0);
        DyadicInterval I = interval_from_canonical_index((long long)(i) + 1);
        row.measure4 = std::pow(I.measure().to_double(), 4.0);
        if (row.offdiag_sum > row.bound + 1e-12) v.offdiag_ok = false;
        if (row.offdiag_sum > row.measure4 + 1e-12) v.offdiag_measure4_ok = false;
        v.rows.push_back(row);
    }
    return v;
}

// ---------------------------------------------------------------- 27okt3

namespace {

// Greedy-maximal stopping-time blocks: grow the current block while its
// square-function integral stays within the budget; a single interval that
// exceeds the budget alone forms its own (boundary-flagged) block.
struct StoppingBlocks {
    std::vector<std::vector<DyadicInterval>> blocks;
    bool boundary_flagged = false;
};

StoppingBlocks stopping_time_blocks(const std::vector<DyadicInterval>& members,
                                    const HaarExpansion& c, int N, double budget) {
    StoppingBlocks out;
    const std::size_t cells = std::size_t(2) << N;
    const double h = 1.0 / double(cells);
    std::vector<double> acc(cells, 0.0);
    std::vector<std::uint32_t> stamp(cells, 0);
    std::uint32_t cur = 1;
    double integral = 0.0;
    std::vector<DyadicInterval> block;

    auto delta = [&](const DyadicInterval& J, double coeff) {
        double c2 = coeff * coeff;
        std::size_t span = cells >> J.level;
        std::size_t first = std::size_t(J.k - 1) * span;
        double dsum = 0;
        for (std::size_t i = first; i < first + span; ++i) {
            double s = stamp[i] == cur ? acc[i] : 0.0;
            dsum += std::sqrt(s + c2) - std::sqrt(s);
        }
        return dsum * h;
    };
    auto commit = [&](const DyadicInterval& J, double coeff) {
        double c2 = coeff * coeff;
        std::size_t span = cells >> J.level;
        std::size_t first = std::size_t(J.k - 1) * span;
        for (std::size_t i = first; i < first + span; ++i) {
            acc[i] = (stamp[i] == cur ? acc[i] : 0.0) + c2;
            stamp[i] = cur;
        }
    };

    for (const auto& J : members) {
        double coeff = c.coeffs[std::size_t(canonical_index(J) - 1)];
        double d = coeff == 0.0 ? 0.0 : delta(J, coeff);
        if (!block.empty() && integral + d > budget + 1e-12) {
            out.blocks.push_back(std::move(block));
            block.clear();
            ++cur;
            integral = 0.0;
            d = coeff == 0.0 ? 0.0 : delta(J, coeff);
        }
        if (coeff != 0.0) commit(J, coeff);
        integral += d;
        block.push_back(J);
        if (block.size() == 1 && integral > budget + 1e-12) out.boundary_flagged = true;
    }
    if (!block.empty()) out.blocks.push_back(std::move(block));
    return out;
}

}  // namespace

Eigen::VectorXd NetThinningResult::apply_Q_coeffs(const Eigen::VectorXd& c) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(c.size());
    Eigen::VectorXd w = haar_weights(N);
    for (const auto& u : u_coeffs) {
        double num = u.cwiseProduct(w).dot(c);
        double den = u.cwiseProduct(w).dot(u);  // ||u_K||_2^2
        if (den > 0) out += (num / den) * u;
    }
    return out;
}

StepFunction NetThinningResult::apply_Q(const StepFunction& f) const {
    return synthesize(coeff_expansion(N, apply_Q_coeffs(coeff_vector(analyze(f, N)))));
}

NetThinningResult net_thinning(const std::vector<StepFunction>& E, int n, double eps,
                               const NetThinningConfig& cfg) {
    if (n < 2) throw DomainError("net_thinning: n must be >= 2");
    if (int(E.size()) != n) throw DomainError("net_thinning: expected n spanning vectors");
    if (!(eps > 0)) throw DomainError("net_thinning: eps must be positive");
    const int N = cfg.N;
    if (N > max_level()) throw ResourceLimitError("net_thinning: N exceeds MAX_LEVEL");

    NetThinningResult res;
    res.n = n;
    res.N = N;
    res.epsilon = eps;
    res.tau = res.eta = cfg.tau_scale * 0.499 * eps * std::pow(2.0, -n) / std::log(double(n));

    // Net: the given basis first (H1-normalized), then seeded sphere samples.
    std::vector<Eigen::VectorXd> basis_coeffs;
    for (const auto& f : E) {
        double nf = h1_norm(f, N);
        if (nf <= 0) throw DomainError("net_thinning: zero vector in E");
        StepFunction g = (1.0 / nf) * f;
        res.net.push_back(g);
        basis_coeffs.push_back(coeff_vector(analyze(g, N)));
    }
    {
        Eigen::MatrixXd G(basis_coeffs[0].size(), n);
        for (int i = 0; i < n; ++i) G.col(i) = basis_coeffs[std::size_t(i)];
        if (G.jacobiSvd().rank() < n) throw DomainError("net_thinning: E does not span dim n");
    }
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int s = 0; s < cfg.random_net_points; ++s) {
        StepFunction g = StepFunction::constant(0.0);
        for (int i = 0; i < n; ++i) g += gauss(rng) * res.net[std::size_t(i)];
        double ng = h1_norm(g, N);
        if (ng <= 1e-12) {
            --s;
            continue;
        }
        res.net.push_back((1.0 / ng) * g);
    }
    res.net_size = res.net.size();

    // Chain G_0 >= G_1 >= ... >= G_M of stopping-time refinements.
    std::vector<DyadicInterval> pool = enumerate_dn(N).members();
    for (std::size_t i = 0; i < res.net.size(); ++i) {
        HaarExpansion c = analyze(res.net[i], N);
        StoppingStageSummary st;
        st.net_index = i;
        st.sq_bound = res.tau;  // tau * ||x_i||_H1, net members are normalized

        std::vector<DyadicInterval> kept;
        for (const auto& J : pool) {
            if (std::fabs(c.coeffs[std::size_t(canonical_index(J) - 1)]) >= res.tau)
                ++st.large_removed;
            else
                kept.push_back(J);
        }
        if (kept.empty()) {
            res.status = NetThinningResult::Status::InsufficientCarleson;
            res.failure = "large-coefficient removal exhausted the family at net index " +
                          std::to_string(i);
            res.stages.push_back(st);
            return res;
        }
        auto sb = stopping_time_blocks(kept, c, N, st.sq_bound);
        st.block_count = sb.blocks.size();
        st.boundary_flagged = sb.boundary_flagged;

        IntervalFamily whole(kept);
        st.carleson_before = rat_to_double(carleson_constant(whole));
        std::vector<IntervalFamily> parts;
        parts.reserve(sb.blocks.size());
        for (auto& blk : sb.blocks) parts.emplace_back(std::move(blk));
        st.chosen_block = partition_pigeonhole(whole, parts);
        pool = parts[st.chosen_block].members();
        st.carleson_after = rat_to_double(carleson_constant(parts[st.chosen_block]));
        res.stages.push_back(st);
    }
    res.final_family = IntervalFamily(pool);
    Rational fc = carleson_constant(res.final_family);
    res.final_carleson = rat_to_double(fc);
    res.carleson_conformant = fc >= Rational(1LL << (2 * n));

    // Condensation to a depth-n tree of sets.
    const std::size_t nodes = std::size_t((2LL << n) - 1);
    std::vector<std::vector<DyadicInterval>> pools(nodes);
    std::vector<IntervalFamily> assigned(nodes);
    pools[0] = res.final_family.members();
    for (std::size_t t = 1; t <= nodes; ++t) {
        IntervalFamily pf(pools[t - 1]);
        IntervalFamily maximal = pf.maximal_members();
        if (maximal.empty()) {
            res.status = NetThinningResult::Status::InsufficientCarleson;
            res.failure = "condensation pool empty at node " +
                          interval_from_canonical_index((long long)(t)).literal();
            return res;
        }
        assigned[t - 1] = maximal;
        if (2 * t <= nodes) {
            for (const auto& J : pf.members()) {
                if (maximal.contains(J)) continue;
                for (const auto& K : maximal.members()) {
                    if (J.contained_in(K.left_half()))
                        pools[2 * t - 1].push_back(J);
                    else if (J.contained_in(K.right_half()))
                        pools[2 * t].push_back(J);
                }
            }
        }
    }
    res.tree = DyadicTreeOfSets{n, assigned};
    Rational root_measure = assigned[0].total_measure().to_rational();
    for (std::size_t t = 1; t <= nodes; ++t) {
        DyadicInterval K = interval_from_canonical_index((long long)(t));
        Rational ratio = assigned[t - 1].total_measure().to_rational() / root_measure;
        Rational mK = K.measure().to_rational();
        if (ratio < mK / 2 || ratio > mK) {
            res.status = NetThinningResult::Status::InsufficientCarleson;
            res.failure = "condensed set measure outside [|K|/2, |K|] at node " + K.literal();
            return res;
        }
    }
    if (auto viol = check_dyadic_tree(res.tree)) {
        res.status = NetThinningResult::Status::InsufficientCarleson;
        res.failure = "condensed assignment is not a tree of sets: " + viol->reason;
        return res;
    }

    const long long d = (2LL << N) - 1;
    for (std::size_t t = 0; t < nodes; ++t) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
        for (const auto& J : assigned[t].members()) u[canonical_index(J) - 1] = 1.0;
        res.u_coeffs.push_back(std::move(u));
    }

    // Paper's per-coefficient estimate |<x, u_K>| <= (tau+eta) ||x||_H1,
    // measured over the net.
    Eigen::VectorXd w = haar_weights(N);
    for (const auto& x : res.net) {
        Eigen::VectorXd cx = coeff_vector(analyze(x, N));
        for (const auto& u : res.u_coeffs)
            res.coeff_bound_ratio = std::max(
                res.coeff_bound_ratio, std::fabs(u.cwiseProduct(w).dot(cx)) / (res.tau + res.eta));
    }
    return res;
}

}  // namespace haarfact
