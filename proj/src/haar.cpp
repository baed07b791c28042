#include "haarfact/haar.hpp"

#include <stdexcept>

namespace haarfact {

StepFunction::StepFunction(int resolution, std::vector<double> values)
    : resolution_(resolution), values_(std::move(values)) {
    if (resolution < 0 || resolution > max_level() + 1)
        throw ResourceLimitError("step function resolution out of range");
    if (values_.size() != std::size_t(1) << resolution)
        throw DomainError("step function value count does not match resolution");
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("step function value not finite");
}

StepFunction StepFunction::constant(double c, int resolution) {
    return StepFunction(resolution, std::vector<double>(std::size_t(1) << resolution, c));
}

StepFunction StepFunction::indicator(const DyadicInterval& I) {
    std::vector<double> v(std::size_t(1) << I.level, 0.0);
    v[std::size_t(I.k - 1)] = 1.0;
    return StepFunction(I.level, std::move(v));
}

double StepFunction::mean() const {
    double s = 0;
    for (double v : values_) s += v;
    return s / double(values_.size());
}

StepFunction StepFunction::at_resolution(int R) const {
    if (R < resolution_) throw DomainError("at_resolution: cannot coarsen exactly");
    if (R == resolution_) return *this;
    std::size_t rep = std::size_t(1) << (R - resolution_);
    std::vector<double> v(values_.size() * rep);
    for (std::size_t i = 0; i < values_.size(); ++i)
        for (std::size_t r = 0; r < rep; ++r) v[i * rep + r] = values_[i];
    return StepFunction(R, std::move(v));
}

StepFunction& StepFunction::operator+=(const StepFunction& o) {
    int R = std::max(resolution_, o.resolution());
    *this = at_resolution(R);
    StepFunction rhs = o.at_resolution(R);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values()[i];
    return *this;
}

StepFunction& StepFunction::operator-=(const StepFunction& o) {
    int R = std::max(resolution_, o.resolution());
    *this = at_resolution(R);
    StepFunction rhs = o.at_resolution(R);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values()[i];
    return *this;
}

StepFunction& StepFunction::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

NormConstants::NormConstants(double p_) : p(p_) {
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("NormConstants: p must be in (1, inf)");
    q = p / (p - 1.0);
    C_p = p * p / (p - 1.0);
    c_p = 1.0 / C_p;
}

StepFunction haar_function(const DyadicInterval& I) {
    if (I.level >= max_level() + 1) throw ResourceLimitError("haar_function: resolution overflow");
    int R = I.level + 1;
    std::vector<double> v(std::size_t(1) << R, 0.0);
    v[std::size_t(2 * (I.k - 1))] = 1.0;
    v[std::size_t(2 * (I.k - 1) + 1)] = -1.0;
    return StepFunction(R, std::move(v));
}

namespace {

// Pyramid of cell integrals: sums[l][i] = integral of f over [i 2^-l, (i+1) 2^-l).
std::vector<std::vector<double>> integral_pyramid(const StepFunction& f, int top_level) {
    int R = f.resolution();
    std::vector<std::vector<double>> sums(std::size_t(top_level) + 1);
    const double h = 1.0 / double(std::size_t(1) << R);
    sums[std::size_t(top_level)].resize(std::size_t(1) << top_level);
    {
        auto& fine = sums[std::size_t(top_level)];
        std::size_t rep = std::size_t(1) << (R - top_level);
        for (std::size_t i = 0; i < fine.size(); ++i) {
            double s = 0;
            for (std::size_t r = 0; r < rep; ++r) s += f.values()[i * rep + r];
            fine[i] = s * h;
        }
    }
    for (int l = top_level - 1; l >= 0; --l) {
        sums[std::size_t(l)].resize(std::size_t(1) << l);
        for (std::size_t i = 0; i < sums[std::size_t(l)].size(); ++i)
            sums[std::size_t(l)][i] =
                sums[std::size_t(l) + 1][2 * i] + sums[std::size_t(l) + 1][2 * i + 1];
    }
    return sums;
}

}  // namespace

HaarExpansion analyze(const StepFunction& f, int N) {
    if (N > max_level()) throw ResourceLimitError("analyze: N exceeds MAX_LEVEL");
    StepFunction g = f.at_resolution(std::max(f.resolution(), N + 1));
    auto sums = integral_pyramid(g, N + 1);
    HaarExpansion e(N);
    for (int level = 0; level <= N; ++level) {
        double inv_measure = double(std::size_t(1) << level);
        std::size_t base = (std::size_t(1) << level) - 1;
        for (std::size_t i = 0; i < (std::size_t(1) << level); ++i) {
            double haar_integral =
                sums[std::size_t(level) + 1][2 * i] - sums[std::size_t(level) + 1][2 * i + 1];
            e.coeffs[base + i] = haar_integral * inv_measure;
        }
    }
    return e;
}

StepFunction synthesize(const HaarExpansion& e) {
    int R = e.N + 1;
    std::vector<double> acc(std::size_t(1) << R, 0.0);
    // Top-down: running value per cell; each level splits cells in two.
    std::vector<double> cur(1, 0.0);
    for (int level = 0; level <= e.N; ++level) {
        std::vector<double> next(std::size_t(2) << level);
        std::size_t base = (std::size_t(1) << level) - 1;
        for (std::size_t i = 0; i < (std::size_t(1) << level); ++i) {
            double c = e.coeffs[base + i];
            next[2 * i] = cur[i] + c;
            next[2 * i + 1] = cur[i] - c;
        }
        cur = std::move(next);
    }
    return StepFunction(R, std::move(cur));
}

StepFunction square_function(const StepFunction& f, int N) {
    HaarExpansion e = analyze(f, N);
    int R = std::max(f.resolution(), N + 1);
    std::vector<double> sq(std::size_t(1) << R, 0.0);
    for (int level = 0; level <= N; ++level) {
        std::size_t base = (std::size_t(1) << level) - 1;
        std::size_t rep = std::size_t(1) << (R - level);
        for (std::size_t i = 0; i < (std::size_t(1) << level); ++i) {
            double c = e.coeffs[base + i];
            if (c == 0.0) continue;
            for (std::size_t r = 0; r < rep; ++r) sq[i * rep + r] += c * c;
        }
    }
    for (double& v : sq) v = std::sqrt(v);
    return StepFunction(R, std::move(sq));
}

double lp_norm(const StepFunction& f, double p) {
    if (p < 1.0) throw DomainError("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0;
        for (double v : f.values()) m = std::max(m, std::fabs(v));
        return m;
    }
    double h = 1.0 / double(f.values().size());
    double s = 0;
    for (double v : f.values()) s += std::pow(std::fabs(v), p);
    return std::pow(s * h, 1.0 / p);
}

double h1_norm(const StepFunction& f, int N) { return lp_norm(square_function(f, N), 1.0); }

double h1_norm(const StepFunction& f) {
    int N = std::min(std::max(f.resolution() - 1, 0), max_level());
    return h1_norm(f, N);
}

double inner(const StepFunction& f, const StepFunction& g) {
    int R = std::max(f.resolution(), g.resolution());
    StepFunction a = f.at_resolution(R), b = g.at_resolution(R);
    double h = 1.0 / double(a.values().size());
    double s = 0;
    for (std::size_t i = 0; i < a.values().size(); ++i) s += a.values()[i] * b.values()[i];
    return s * h;
}

SquareEquivalenceReport check_square_equivalence(const StepFunction& f, double p, int N) {
    NormConstants nc(p);
    double fn = lp_norm(f, p);
    if (fn == 0.0) throw DomainError("check_square_equivalence: zero function");
    double ratio = lp_norm(square_function(f, N), p) / fn;
    return {ratio, nc.c_p, nc.C_p, ratio >= nc.c_p && ratio <= nc.C_p};
}

LowerL2Report check_lower_l2(const std::vector<StepFunction>& y, const std::vector<double>& a,
                             int N) {
    if (y.size() != a.size()) throw DomainError("check_lower_l2: size mismatch");
    std::vector<HaarExpansion> exps;
    exps.reserve(y.size());
    for (const auto& f : y) exps.push_back(analyze(f, N));
    for (std::size_t i = 0; i < exps.size(); ++i)
        for (std::size_t j = i + 1; j < exps.size(); ++j)
            for (std::size_t t = 0; t < exps[i].coeffs.size(); ++t)
                if (exps[i].coeffs[t] != 0.0 && exps[j].coeffs[t] != 0.0)
                    throw DomainError("check_lower_l2: overlapping Haar supports");
    double lhs = 0;
    StepFunction comb = StepFunction::constant(0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double ni = h1_norm(y[i], N);
        lhs += a[i] * a[i] * ni * ni;
        comb += a[i] * y[i];
    }
    lhs = std::sqrt(lhs);
    double rhs = 4.0 * h1_norm(comb, N);
    return {lhs, rhs, lhs <= rhs + 1e-12};
}

}  // namespace haarfact
