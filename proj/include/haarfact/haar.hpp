#pragma once

#include <cmath>
#include <vector>

#include "haarfact/dyadic.hpp"

namespace haarfact {

// Real step function on the grid of 2^resolution cells of [0,1).
class StepFunction {
  public:
    StepFunction() : resolution_(0), values_(1, 0.0) {}
    StepFunction(int resolution, std::vector<double> values);
    static StepFunction constant(double c, int resolution = 0);
    static StepFunction indicator(const DyadicInterval& I);

    int resolution() const { return resolution_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double mean() const;
    StepFunction at_resolution(int R) const;  // cell replication, exact

    StepFunction& operator+=(const StepFunction& o);
    StepFunction& operator-=(const StepFunction& o);
    StepFunction& operator*=(double a);
    friend StepFunction operator+(StepFunction a, const StepFunction& b) { return a += b; }
    friend StepFunction operator-(StepFunction a, const StepFunction& b) { return a -= b; }
    friend StepFunction operator*(double a, StepFunction f) { return f *= a; }

  private:
    int resolution_;
    std::vector<double> values_;
};

// Haar coefficients c_I = <f, h_I>/|I| relative to the L-infinity normalized
// system, for all I in D_N, stored by canonical index (size 2^(N+1)-1).
struct HaarExpansion {
    int N = 0;
    std::vector<double> coeffs;

    HaarExpansion() : coeffs(1, 0.0) {}
    explicit HaarExpansion(int N_) : N(N_), coeffs(std::size_t((2LL << N_) - 1), 0.0) {}

    double& at(const DyadicInterval& I) { return coeffs[std::size_t(canonical_index(I) - 1)]; }
    double at(const DyadicInterval& I) const { return coeffs[std::size_t(canonical_index(I) - 1)]; }
    std::size_t dim() const { return coeffs.size(); }
};

struct NormConstants {
    double p;
    double q;    // conjugate exponent
    double C_p;  // working constant p^2/(p-1)
    double c_p;  // 1/C_p

    explicit NormConstants(double p_);
};

StepFunction haar_function(const DyadicInterval& I);

HaarExpansion analyze(const StepFunction& f, int N);
StepFunction synthesize(const HaarExpansion& e);

StepFunction square_function(const StepFunction& f, int N);

// Exact cell-sum quadrature; p = infinity accepted as INFINITY.
double lp_norm(const StepFunction& f, double p);
double h1_norm(const StepFunction& f);
double h1_norm(const StepFunction& f, int N);

// L2 pairing of step functions, exact cell quadrature.
double inner(const StepFunction& f, const StepFunction& g);

struct SquareEquivalenceReport {
    double ratio;  // ||S(f)||_p / ||f||_p
    double c_p;
    double C_p;
    bool within_bounds;
};
SquareEquivalenceReport check_square_equivalence(const StepFunction& f, double p, int N);

// Lower l2 estimate for functions with pairwise disjoint Haar coefficient
// supports: (sum a_i^2 ||y_i||_H1^2)^(1/2) <= 4 ||sum a_i y_i||_H1.
struct LowerL2Report {
    double lhs;
    double rhs;
    bool holds;
};
LowerL2Report check_lower_l2(const std::vector<StepFunction>& y, const std::vector<double>& a,
                             int N);

}  // namespace haarfact
