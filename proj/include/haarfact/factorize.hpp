#pragma once

#include "haarfact/selection.hpp"

namespace haarfact {

// ---------------------------------------------------------------- Lp theorem

struct DiagonalSplit {
    IntervalFamily L;  // {I in D_m : |<T b_I, b_I>| >= ||b_I||_2^2 / 2}, ties in
    IntervalFamily R;  // complement
    std::string branch;  // "T" or "Id-T"
    Rational carleson_L{0}, carleson_R{0};
    std::vector<double> diag;  // <T b_I, b_I> by canonical index
};

DiagonalSplit diagonal_split(const HaarOperator& T, const BlockBasis& B);

struct CondensationSelection {
    enum class Status { Ok, InsufficientCarleson };
    Status status = Status::Ok;
    int n = 0;
    int achieved_depth = -1;  // deepest fully assigned tree level on failure
    // B_K: index intervals of the block basis assigned to K in D_n.
    std::vector<IntervalFamily> assignment;
    Rational source_carleson{0};
    double threshold = 0.0;  // n * 2^n by default
    bool threshold_met = false;
    Eigen::MatrixXd E;  // d_N x d_n: h_K -> s_K u_K with s_K = sqrt(|K|/||u_K||_2^2)
    Eigen::MatrixXd R;  // d_n x d_N: biorthogonal, R * E = Id exactly
    std::vector<double> u_norm_sq;  // ||u_K||_2^2 per node
    std::string failure;
    bool ok() const { return status == Status::Ok; }
};

// Condensation of an index family L within D_m (Eq. 22okt4): each node K takes
// the maximal intervals of its pool, children receive descendants inside the
// +1 / -1 sets of the node's composite function u_K = sum b_I.
// require_threshold: fail (not just record) when [[L]] < threshold.
CondensationSelection condense(const IntervalFamily& L, const BlockBasis& B, int n,
                               double threshold, bool require_threshold);

// P(f) = sum_{J in F} <f, b_J> b_J <H b_J, b_J>^{-1}, composed with R down to
// L^p_n.  Every J in F must satisfy |<H b_J, b_J>| >= ||b_J||_2^2 / 2.
Eigen::MatrixXd build_projection_P(const HaarOperator& H, const BlockBasis& B,
                                   const IntervalFamily& F, const CondensationSelection& sel);

struct FactorConfig {
    int m = -1;                         // default ceil(C_p * n * 2^n), capped at N
    double condensation_threshold = -1; // default n * 2^n
    bool best_effort = true;            // keep going when paper-scale gates fail
    double op_tol = 1e-6;
    std::uint64_t seed = 1;
};

struct FactorizationCertificate {
    enum class Status { Ok, InsufficientDepth, InsufficientCarleson };
    Status status = Status::Ok;
    std::string branch;  // "T" or "Id-T"
    std::string mode;    // "conformant" | "best-effort"
    int n = 0, N = 0, m = 0;
    double p = 2.0;
    Rational carleson_L{0}, carleson_R{0};
    Eigen::MatrixXd E;  // d_N x d_n
    Eigen::MatrixXd P;  // d_n x d_N, after the exact correction solve
    double residual2 = 0.0;      // ||P H E - Id|| in the weighted 2-norm
    double neumann_factor = 0.0; // ||P1 H E - Id||, the paper's Eq. 22okt21 check
    bool neumann_ok = false;
    double error_term = 0.0;     // off-diagonal part of P1 H E; 0 for multipliers
    double norm_E2 = 0.0, norm_P2 = 0.0;  // exact weighted spectral norms
    PNormBounds norm_Ep, norm_Pp;         // certified bounds at the requested p
    std::string failure;
    std::vector<std::string> diagnostics;
    bool ok() const { return status == Status::Ok; }
};

FactorizationCertificate factor_identity(const HaarOperator& T, int n, int N, double p,
                                         const FactorConfig& cfg = {});

// Recompute ||P H E - Id|| from a certificate's stored maps (replay check).
double certificate_residual(const FactorizationCertificate& cert, const HaarOperator& T);

// ---------------------------------------------------------------- appendix

struct RestrictedInvertibilityResult {
    std::string branch;            // "T" or "Id-T"
    std::vector<int> big_diagonal; // N1: indices with |diag| >= 1/2 on the branch
    std::vector<int> sigma;        // selected subset, N2 = |sigma|
    Eigen::MatrixXd S;             // unit-diagonal rescaled branch on N1
    double min_singular = 0.0;     // of R_sigma S R_sigma
    double inverse_norm = 0.0;     // ||(R_sigma S R_sigma)^{-1}||_2 <= 2
    PNormBounds norm_S_sigma_p;    // ||R_sigma S R_sigma||_p, vs the 1+eps target
    bool p_norm_within_eps = false;
    Eigen::MatrixXd E1, E2, P1, P2;
    double residual = 0.0;         // ||P2 P1 H E1 E2 - Id||_2
    bool sigma_maximal = false;    // appending any unused index breaks the bound
};

// Appendix chain Id_{l^p_{N2}} = P2 P1 T E1 E2 with a greedy minimum-singular-
// value selection in place of the cited probabilistic theorem.
RestrictedInvertibilityResult restricted_invertibility(const Eigen::MatrixXd& T, double p,
                                                       double eps);

// Sequence-space matrix generators for the appendix CLI ("identity",
// "random" = spectral-radius-<=1 Gaussian perturbation of Id, "diag-alt").
Eigen::MatrixXd generate_matrix(const std::string& spec, int dim, std::uint64_t seed);

}  // namespace haarfact
