#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "haarfact/haar.hpp"

namespace haarfact {

// Linear operator on span{h_I : I in D_N}, stored in Haar coefficient
// coordinates (canonical index order, dimension 2^(N+1)-1).  Two storage
// kinds: a Haar multiplier (diagonal), or a dense block acting on the
// coefficients of level <= active_level with a scalar "tail" action on all
// deeper coefficients.  A full dense matrix is the special case
// active_level == N, tail irrelevant; the split keeps large-N operators
// within memory (a dense 2^15-1 square matrix would need ~8.6 GB).
class HaarOperator {
  public:
    enum class Kind { Diagonal, DenseBlock };

    static HaarOperator identity(int N);
    static HaarOperator zero(int N);
    static HaarOperator multiplier(int N, Eigen::VectorXd lambda);
    static HaarOperator dense_block(int N, int active_level, Eigen::MatrixXd block,
                                    double tail = 0.0);

    int N() const { return N_; }
    Kind kind() const { return kind_; }
    long long dim() const { return (2LL << N_) - 1; }
    int active_level() const { return active_level_; }
    long long active_dim() const { return (2LL << active_level_) - 1; }
    double tail() const { return tail_; }
    const Eigen::VectorXd& diagonal() const { return diag_; }
    const Eigen::MatrixXd& block() const { return block_; }

    Eigen::VectorXd apply_coeffs(const Eigen::VectorXd& c) const;
    StepFunction apply(const StepFunction& f) const;

    // Adjoint with respect to the L2 pairing <f,g> = int f g; in coefficient
    // coordinates T* = W^-1 T^t W with W = diag(|I|).
    HaarOperator adjoint() const;
    HaarOperator complement() const;  // Id - T
    HaarOperator scaled(double a) const;

    // Entrywise max distance, for involution / serialization tests.
    double entrywise_distance(const HaarOperator& o) const;

  private:
    HaarOperator() = default;
    int N_ = 0;
    Kind kind_ = Kind::Diagonal;
    Eigen::VectorXd diag_;      // Diagonal
    int active_level_ = 0;      // DenseBlock
    Eigen::MatrixXd block_;     // DenseBlock
    double tail_ = 0.0;         // DenseBlock
};

// Weight |I_j| = 2^-level for coefficient slot j (0-based canonical order).
Eigen::VectorXd haar_weights(int N);

inline Eigen::VectorXd coeff_vector(const HaarExpansion& e) {
    return Eigen::Map<const Eigen::VectorXd>(e.coeffs.data(), long(e.coeffs.size()));
}
inline HaarExpansion coeff_expansion(int N, const Eigen::VectorXd& v) {
    HaarExpansion e(N);
    Eigen::Map<Eigen::VectorXd>(e.coeffs.data(), long(e.coeffs.size())) = v;
    return e;
}

double bilinear(const HaarOperator& T, const StepFunction& f, const StepFunction& g);
double bilinear_coeffs(const HaarOperator& T, const Eigen::VectorXd& cf,
                       const Eigen::VectorXd& cg);

struct OperatorNormEstimate {
    double p = 2.0;
    double lower = 0.0;
    double upper = 0.0;
    std::string method;
    bool converged = true;
    StepFunction witness;  // achieves lower up to round-off
};

// p = 2: power iteration on the metric-corrected matrix, certified interval.
// General p: Higham ascent lower bound, Riesz-Thorin interpolation upper bound
// from the exact L1 and Linf cell-basis norms (and the certified L2 norm).
OperatorNormEstimate opnorm(const HaarOperator& T, double p, int budget = 50000);

// Generator spec strings: "identity", "zero", "multiplier:bernoulli(0.5)",
// "multiplier:uniform", "multiplier:const(0.5)", "random" /
// "random_contraction", "permutation", "file:<path>"; an optional
// ":seed=<n>" component overrides the seed argument.  Contractions are
// rescaled so the certified upper norm bound at the requested p is <= 1.
HaarOperator generate(const std::string& spec, int N, std::uint64_t seed, double p = 2.0);

// ---- generic weighted matrix p-norm bounds (shared by E/P certificates and
// the sequence-space appendix; weights = ones gives plain l^p) ----
struct PNormBounds {
    double lower = 0.0;
    double upper = 0.0;
};
PNormBounds weighted_matrix_pnorm(const Eigen::MatrixXd& A, const Eigen::VectorXd& w_domain,
                                  const Eigen::VectorXd& w_codomain, double p,
                                  int restarts = 8, std::uint64_t seed = 1);

// Boyd/Higham p-norm ascent on a plain matrix; returns a lower bound.
double matrix_pnorm_lower(const Eigen::MatrixXd& A, double p, int restarts,
                          std::mt19937_64& rng);

}  // namespace haarfact
