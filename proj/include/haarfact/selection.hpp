#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "haarfact/operator.hpp"

namespace haarfact {

// ---------------------------------------------------------------- thin lemma

struct ThinningParams {
    int k = 2;    // coefficient threshold scale: bad when |<x,h_J>| + |<y,h_J>| > |J|/k
    int ell = 3;  // measure target: level j is good when the bad set has measure <= |I|/ell
    double p = 2.0;

    // A_p = (k^2 l^2)(C_p + C_q) + 1, recomputed from the working constants.
    double a_p() const {
        NormConstants nc(p);
        double c_q = nc.q * nc.q / (nc.q - 1.0);
        return double(k) * k * double(ell) * ell * (nc.C_p + c_q) + 1.0;
    }
};

struct SparseLevelResult {
    bool found = false;
    int level = 0;            // relative level j below I (|J| = 2^-j |I|)
    IntervalFamily bad_set;   // bad intervals at the selected level
    int deepest_examined = 0; // for InsufficientDepth diagnostics
    double a_p = 0.0;
};

// Minimal relative level j <= min(A_p, depth) below I whose bad set
// B_j = { J in Q(I), |J| = 2^-j |I| : |<x,h_J>| + |<y,h_J>| > |J|/k }
// has measure at most |I|/ell.  Preconditions ||x||_p <= |I|^{1/p},
// ||y||_q <= |I|^{1/q} are checked; violation raises a domain error.
// found == false means InsufficientDepth (no good level within reach).
SparseLevelResult select_sparse_level(const StepFunction& x, const StepFunction& y,
                                      const DyadicInterval& I, const ThinningParams& params,
                                      int depth);

// Independent exhaustive-scan oracle: recomputes each level's bad set from raw
// inner products against haar_function; used only in tests.
SparseLevelResult select_sparse_level_scan(const StepFunction& x, const StepFunction& y,
                                           const DyadicInterval& I, const ThinningParams& params,
                                           int depth);

// ---------------------------------------------------------------- gg theorem

struct GoodIntervalReport {
    int stage = 0;                 // canonical node index i being built
    double spec_threshold = 0.0;   // 4^{-i-1} (per unit measure)
    double effective_threshold = 0.0;  // actually enforced (includes safety scaling)
    int selected_level = -1;       // absolute level mu of the accepted selection
    double retained_ratio = 0.0;   // measure(selected) / measure(sign region)
    std::size_t candidate_count = 0;
    std::size_t good_count = 0;
    double max_g_selected = 0.0;   // max g(J)/|J| over the accepted intervals
    // g-values at the accepted level, kept only when the candidate count is small.
    std::vector<std::pair<DyadicInterval, double>> g_values;
};

struct GoodIntervalPartition {
    IntervalFamily good;
    IntervalFamily bad;
    std::vector<std::pair<DyadicInterval, double>> g_values;  // g(J) per candidate
};

// Direct recomputation of g(J) = sum_j (|<H b_j, h_J>| + |<H* b_j, h_J>|) and
// the good/bad split at threshold g(J) <= |J| * threshold_per_measure
// (default: the paper's 4^{-i-1} for stage i = built.size() + 1).
GoodIntervalPartition good_intervals(const HaarOperator& H,
                                     const std::vector<Eigen::VectorXd>& built_coeffs,
                                     const IntervalFamily& candidates,
                                     double threshold_per_measure);

struct BlockBasis {
    int m = 0;  // tree depth
    int N = 0;  // ambient Haar level
    // E_I by canonical index - 1, size 2^{m+1}-1; empty beyond a failed stage.
    std::vector<IntervalFamily> families;

    std::size_t node_count() const { return families.size(); }
    const IntervalFamily& family(const DyadicInterval& I) const {
        return families.at(std::size_t(canonical_index(I) - 1));
    }
    // Haar coefficients of b_I = sum_{J in E_I} h_J (coefficient 1 per member).
    Eigen::VectorXd coeffs(std::size_t node) const;
    StepFunction b(std::size_t node) const;
    double norm2_sq(std::size_t node) const;  // = |E_I| exactly
    DyadicTreeOfSets tree() const;
};

struct BlockBasisResult {
    enum class Status { Ok, InsufficientDepth };
    Status status = Status::Ok;
    BlockBasis basis;
    int failing_stage = -1;
    std::vector<GoodIntervalReport> reports;
    bool ok() const { return status == Status::Ok; }
};

// Gamlen-Gaudet construction against H (pre: opnorm(H,p).upper <= 1 + tol).
// Stage t = 1 .. 2^{m+1}-1 selects E_t at the smallest level mu whose good
// intervals retain measure >= (1 - 8^{-t}) of the sign region of the parent
// node (left child 2j inside {b_j = +1}, right child 2j+1 inside {b_j = -1}).
BlockBasisResult build_block_basis(const HaarOperator& H, int m, int N, double p,
                                   double op_tol = 1e-6);

struct OffDiagRow {
    std::size_t node = 0;          // canonical index
    double diag = 0.0;             // <H b_I, b_I>
    double offdiag_sum = 0.0;      // sum_{J != I} |<H b_J, b_I>|
    double bound = 0.0;            // ||b_I||_2^2 * 4^{-index}
    double measure4 = 0.0;         // |I|^4, the paper's literal alternative
};

struct BlockBasisVerification {
    bool disjoint_ok = false;   // (22okt11) collections pairwise disjoint
    bool tree_ok = false;       // (22okt12) tree of sets + measure bounds
    bool sign_ok = false;       // (22okt13) sign nesting
    bool norm_ok = false;       // ||b_I||_2^2 = |E_I|
    bool offdiag_ok = false;    // off-diagonal sums within the 4^{-index} bound
    bool offdiag_measure4_ok = false;  // the literal |I|^4 form, reported
    std::vector<OffDiagRow> rows;
    std::string detail;
    bool all_ok() const { return disjoint_ok && tree_ok && sign_ok && norm_ok && offdiag_ok; }
};

// Post-hoc verifier: recomputes every invariant from scratch.
BlockBasisVerification verify_block_basis(const BlockBasis& B, const HaarOperator& H);

// ---------------------------------------------------------------- 27okt3

struct NetThinningConfig {
    int N = 14;                    // ambient level
    int random_net_points = 32;    // net = given basis first, then this many sphere samples
    std::uint64_t seed = 1;
    double tau_scale = 1.0;        // shrink factor on the default tau = eta choice
};

struct StoppingStageSummary {
    std::size_t net_index = 0;
    std::size_t large_removed = 0;   // |L_i|
    std::size_t block_count = 0;     // L
    std::size_t chosen_block = 0;
    bool boundary_flagged = false;   // some block alone exceeds the square bound
    double sq_bound = 0.0;           // tau * ||x_i||_H1
    double carleson_before = 0.0;    // [[G_{i-1} \ L_i]]
    double carleson_after = 0.0;     // [[G_i]]
};

struct NetThinningResult {
    enum class Status { Ok, InsufficientCarleson };
    Status status = Status::Ok;
    int n = 0;
    int N = 0;
    double epsilon = 0.0;
    double tau = 0.0, eta = 0.0;
    std::size_t net_size = 0;
    std::vector<StepFunction> net;  // H1-normalized
    std::vector<StoppingStageSummary> stages;
    IntervalFamily final_family;    // G_M
    double final_carleson = 0.0;
    bool carleson_conformant = false;  // [[G_M]] >= 4^n (paper's gate, reported)
    DyadicTreeOfSets tree;             // B_K assignment, depth n
    std::vector<Eigen::VectorXd> u_coeffs;  // u_K = sum_{J in B_K} h_J, canonical order
    // Max over net members and nodes of |<x, u_K>| / ((tau+eta) ||x||_H1);
    // the paper's coefficient estimate holds when this is <= 1.
    double coeff_bound_ratio = 0.0;
    std::string failure;

    bool ok() const { return status == Status::Ok; }
    Eigen::VectorXd apply_Q_coeffs(const Eigen::VectorXd& c) const;
    StepFunction apply_Q(const StepFunction& f) const;
};

// Proposition (27okt3) at desk scale: net sampling, large-coefficient removal
// L_i = {J : |<x_i, h_J>|/|J| >= tau}, greedy-maximal stopping-time blocks with
// square-function budget tau ||x_i||_H1, Carleson pigeonhole per stage, and
// condensation of G_M to a depth-n tree carrying the orthogonal projection Q.
NetThinningResult net_thinning(const std::vector<StepFunction>& E, int n, double eps,
                               const NetThinningConfig& cfg);

}  // namespace haarfact
