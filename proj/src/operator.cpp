#include "haarfact/operator.hpp"

#include <algorithm>
#include <cmath>

namespace haarfact {

HaarOperator load_operator_file(const std::string& path);  // io.cpp

Eigen::VectorXd haar_weights(int N) {
    Eigen::VectorXd w((2LL << N) - 1);
    for (int level = 0; level <= N; ++level) {
        double m = 1.0 / double(1LL << level);
        for (long long k = 0; k < (1LL << level); ++k) w[(1LL << level) - 1 + k] = m;
    }
    return w;
}

HaarOperator HaarOperator::identity(int N) {
    HaarOperator T;
    T.N_ = N;
    T.kind_ = Kind::Diagonal;
    T.diag_ = Eigen::VectorXd::Ones((2LL << N) - 1);
    return T;
}

HaarOperator HaarOperator::zero(int N) {
    HaarOperator T = identity(N);
    T.diag_.setZero();
    return T;
}

HaarOperator HaarOperator::multiplier(int N, Eigen::VectorXd lambda) {
    if (lambda.size() != (2LL << N) - 1) throw DomainError("multiplier: wrong diagonal length");
    HaarOperator T;
    T.N_ = N;
    T.kind_ = Kind::Diagonal;
    T.diag_ = std::move(lambda);
    return T;
}

HaarOperator HaarOperator::dense_block(int N, int active_level, Eigen::MatrixXd block,
                                       double tail) {
    if (active_level < 0 || active_level > N) throw DomainError("dense_block: bad active level");
    long long da = (2LL << active_level) - 1;
    if (block.rows() != da || block.cols() != da)
        throw DomainError("dense_block: block dimension mismatch");
    if (!block.allFinite() || !std::isfinite(tail))
        throw DomainError("dense_block: non-finite entries");
    HaarOperator T;
    T.N_ = N;
    T.kind_ = Kind::DenseBlock;
    T.active_level_ = active_level;
    T.block_ = std::move(block);
    T.tail_ = tail;
    return T;
}

Eigen::VectorXd HaarOperator::apply_coeffs(const Eigen::VectorXd& c) const {
    if (c.size() != dim()) throw DomainError("apply_coeffs: dimension mismatch");
    if (kind_ == Kind::Diagonal) return diag_.cwiseProduct(c);
    Eigen::VectorXd out(c.size());
    long long da = active_dim();
    out.head(da) = block_ * c.head(da);
    out.tail(c.size() - da) = tail_ * c.tail(c.size() - da);
    return out;
}

StepFunction HaarOperator::apply(const StepFunction& f) const {
    HaarExpansion e = analyze(f, N_);
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(e.coeffs.data(), long(e.coeffs.size()));
    Eigen::VectorXd v = apply_coeffs(c);
    HaarExpansion out(N_);
    Eigen::Map<Eigen::VectorXd>(out.coeffs.data(), long(out.coeffs.size())) = v;
    return synthesize(out);
}

HaarOperator HaarOperator::adjoint() const {
    if (kind_ == Kind::Diagonal) return *this;
    Eigen::VectorXd wa = haar_weights(active_level_);
    Eigen::MatrixXd adj =
        wa.cwiseInverse().asDiagonal() * block_.transpose() * wa.asDiagonal();
    return dense_block(N_, active_level_, std::move(adj), tail_);
}

HaarOperator HaarOperator::complement() const {
    if (kind_ == Kind::Diagonal) {
        HaarOperator T = *this;
        T.diag_ = Eigen::VectorXd::Ones(diag_.size()) - diag_;
        return T;
    }
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(block_.rows(), block_.cols()) - block_;
    return dense_block(N_, active_level_, std::move(b), 1.0 - tail_);
}

HaarOperator HaarOperator::scaled(double a) const {
    HaarOperator T = *this;
    if (kind_ == Kind::Diagonal)
        T.diag_ *= a;
    else {
        T.block_ *= a;
        T.tail_ *= a;
    }
    return T;
}

double HaarOperator::entrywise_distance(const HaarOperator& o) const {
    if (N_ != o.N_) throw DomainError("entrywise_distance: level mismatch");
    if (kind_ == o.kind_ && kind_ == Kind::Diagonal)
        return (diag_ - o.diag_).cwiseAbs().maxCoeff();
    if (kind_ == o.kind_ && active_level_ == o.active_level_) {
        double d = (block_ - o.block_).cwiseAbs().maxCoeff();
        return std::max(d, std::fabs(tail_ - o.tail_));
    }
    if (dim() > 8192) throw ResourceLimitError("entrywise_distance: dimension too large to probe");
    double worst = 0;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim());
    for (long long j = 0; j < dim(); ++j) {
        e[j] = 1.0;
        worst = std::max(worst, (apply_coeffs(e) - o.apply_coeffs(e)).cwiseAbs().maxCoeff());
        e[j] = 0.0;
    }
    return worst;
}

double bilinear_coeffs(const HaarOperator& T, const Eigen::VectorXd& cf,
                       const Eigen::VectorXd& cg) {
    Eigen::VectorXd w = haar_weights(T.N());
    return T.apply_coeffs(cf).cwiseProduct(w).dot(cg);
}

double bilinear(const HaarOperator& T, const StepFunction& f, const StepFunction& g) {
    HaarExpansion ef = analyze(f, T.N()), eg = analyze(g, T.N());
    Eigen::Map<const Eigen::VectorXd> cf(ef.coeffs.data(), long(ef.coeffs.size()));
    Eigen::Map<const Eigen::VectorXd> cg(eg.coeffs.data(), long(eg.coeffs.size()));
    return bilinear_coeffs(T, cf, cg);
}

// ---------------------------------------------------------------- p-norms

namespace {

Eigen::VectorXd dual_vector(const Eigen::VectorXd& v, double p) {
    // sign(v) |v|^(p-1)
    Eigen::VectorXd out(v.size());
    for (long i = 0; i < v.size(); ++i) {
        double a = std::fabs(v[i]);
        out[i] = (v[i] >= 0 ? 1.0 : -1.0) * std::pow(a, p - 1.0);
    }
    return out;
}

double vec_pnorm(const Eigen::VectorXd& v, double p) {
    double s = 0;
    for (long i = 0; i < v.size(); ++i) s += std::pow(std::fabs(v[i]), p);
    return std::pow(s, 1.0 / p);
}

double interp_upper(double M1, double Minf, double M2, double p) {
    double best = std::pow(M1, 1.0 / p) * std::pow(Minf, 1.0 - 1.0 / p);
    if (M2 > 0) {
        if (p < 2.0) {
            double theta = 2.0 * (1.0 - 1.0 / p);
            best = std::min(best, std::pow(M1, 1.0 - theta) * std::pow(M2, theta));
        } else if (p > 2.0) {
            double theta = 2.0 / p;
            best = std::min(best, std::pow(Minf, 1.0 - theta) * std::pow(M2, theta));
        } else {
            best = std::min(best, M2);
        }
    }
    return best;
}

// Coarse cell-basis matrix of the active block: action on step functions at
// resolution active_level+1, mean part annihilated.
Eigen::MatrixXd coarse_cell_matrix(const Eigen::MatrixXd& block, int a) {
    long long S = 2LL << a;
    Eigen::MatrixXd C(S, S);
    for (long long c = 0; c < S; ++c) {
        std::vector<double> vals(std::size_t(S), 0.0);
        vals[std::size_t(c)] = 1.0;
        StepFunction f(a + 1, std::move(vals));
        HaarExpansion e = analyze(f, a);
        Eigen::Map<const Eigen::VectorXd> ce(e.coeffs.data(), long(e.coeffs.size()));
        Eigen::VectorXd v = block * ce;
        HaarExpansion out(a);
        Eigen::Map<Eigen::VectorXd>(out.coeffs.data(), long(out.coeffs.size())) = v;
        StepFunction g = synthesize(out);
        for (long long i = 0; i < S; ++i) C(i, c) = g.values()[std::size_t(i)];
    }
    return C;
}

// Exact L1->L1 operator norm on L^p_N of (block on levels <= a) + tail on
// deeper levels, without materializing the fine-grid matrix.
double block_tail_l1_norm(const Eigen::MatrixXd& C, double tail, int a, int N) {
    long long S = 2LL << a;
    double F = double(1LL << (N - a));  // fine cells per coarse cell
    double best = 0;
    for (long long c = 0; c < S; ++c) {
        double s = 0;
        for (long long cp = 0; cp < S; ++cp)
            if (cp != c) s += std::fabs(C(cp, c));
        double dcc = C(c, c) - tail;
        s += (F - 1.0) / F * std::fabs(dcc);
        s += std::fabs(dcc / F + tail);
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

double matrix_pnorm_lower(const Eigen::MatrixXd& A, double p, int restarts,
                          std::mt19937_64& rng) {
    double q = p / (p - 1.0);
    double best = 0;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd x(A.cols());
        if (r == 0)
            x.setOnes();
        else
            for (long i = 0; i < x.size(); ++i) x[i] = gauss(rng);
        double nx = vec_pnorm(x, p);
        if (nx == 0) continue;
        x /= nx;
        for (int it = 0; it < 64; ++it) {
            Eigen::VectorXd y = A * x;
            double ny = vec_pnorm(y, p);
            if (ny == 0) break;
            Eigen::VectorXd z = A.transpose() * dual_vector(y / ny, p);
            double nz = vec_pnorm(z, q);
            if (nz <= z.dot(x) * (1.0 + 1e-12)) break;
            x = dual_vector(z, q);
            x /= vec_pnorm(x, p);
        }
        best = std::max(best, vec_pnorm(A * x, p));
    }
    return best;
}

PNormBounds weighted_matrix_pnorm(const Eigen::MatrixXd& A, const Eigen::VectorXd& wd,
                                  const Eigen::VectorXd& wc, double p, int restarts,
                                  std::uint64_t seed) {
    double M1 = 0;
    for (long j = 0; j < A.cols(); ++j)
        M1 = std::max(M1, wc.cwiseProduct(A.col(j).cwiseAbs()).sum() / wd[j]);
    double Minf = A.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::MatrixXd B2 = wc.cwiseSqrt().asDiagonal() * A *
                         wd.cwiseSqrt().cwiseInverse().asDiagonal();
    double M2 = B2.jacobiSvd().singularValues()[0];
    PNormBounds b;
    if (p == 2.0) {
        b.lower = b.upper = M2;
        return b;
    }
    b.upper = interp_upper(M1, Minf, M2, p);
    Eigen::VectorXd sd = wd.array().pow(-1.0 / p);
    Eigen::VectorXd sc = wc.array().pow(1.0 / p);
    Eigen::MatrixXd Bp = sc.asDiagonal() * A * sd.asDiagonal();
    std::mt19937_64 rng(seed);
    b.lower = std::min(matrix_pnorm_lower(Bp, p, restarts, rng), b.upper);
    return b;
}

OperatorNormEstimate opnorm(const HaarOperator& T, double p, int budget) {
    if (!(p > 1.0) || std::isinf(p)) throw DomainError("opnorm: p must be in (1, inf)");
    if (budget < 1) throw DomainError("opnorm: iteration budget must be >= 1");
    OperatorNormEstimate est;
    est.p = p;

    if (T.kind() == HaarOperator::Kind::Diagonal) {
        long argmax = 0;
        double maxabs = T.diagonal().cwiseAbs().maxCoeff(&argmax);
        est.witness = haar_function(interval_from_canonical_index(argmax + 1));
        est.lower = maxabs;
        if (p == 2.0) {
            est.upper = maxabs;
            est.method = "diagonal-exact";
            return est;
        }
        // Per-level triangle bound for the cell-basis L1 (= Linf) norm.
        double M1 = 0;
        for (int level = 0; level <= T.N(); ++level) {
            long long base = (1LL << level) - 1;
            double m = 0;
            for (long long k = 0; k < (1LL << level); ++k)
                m = std::max(m, std::fabs(T.diagonal()[base + k]));
            M1 += m;
        }
        est.upper = std::max(interp_upper(M1, M1, maxabs, p), est.lower);
        est.method = "diagonal-level-interp";
        return est;
    }

    const int a = T.active_level();
    const long long da = T.active_dim();
    Eigen::VectorXd wa = haar_weights(a);
    Eigen::VectorXd sq = wa.cwiseSqrt();
    Eigen::MatrixXd Bt = sq.asDiagonal() * T.block() * sq.cwiseInverse().asDiagonal();

    // Certified largest singular value of the metric-corrected block.
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(da);
    for (long long i = 0; i < da; ++i) v[i] = gauss(rng);
    v.normalize();
    double lo2 = 0, up2 = 0;
    bool converged = false;
    for (int it = 0; it < budget; ++it) {
        Eigen::VectorXd Mv = Bt.transpose() * (Bt * v);
        double rho = v.dot(Mv);
        double resid = (Mv - rho * v).norm();
        lo2 = std::max(lo2, rho);
        up2 = rho + resid;  // symmetric eigenvalue residual bound
        if (up2 - lo2 <= 1e-9 * std::max(lo2, 1e-300) * 2.0) {
            converged = true;
            break;
        }
        double n = Mv.norm();
        if (n == 0) {
            converged = true;
            up2 = lo2 = 0;
            break;
        }
        v = Mv / n;
    }
    double sig_lo = std::sqrt(std::max(lo2, 0.0));
    double sig_up = std::sqrt(std::max({up2, lo2, 0.0}));
    double tail = std::fabs(T.tail());
    bool tail_exists = T.N() > a;

    auto block_witness = [&](const Eigen::VectorXd& weighted_vec) {
        Eigen::VectorXd c = sq.cwiseInverse().cwiseProduct(weighted_vec);
        HaarExpansion e(a);
        Eigen::Map<Eigen::VectorXd>(e.coeffs.data(), da) = c;
        return synthesize(e);
    };

    if (p == 2.0) {
        est.method = "power-iteration";
        est.converged = converged;
        if (tail_exists && tail > sig_up) {
            est.lower = est.upper = tail;
            est.witness = haar_function(DyadicInterval(a + 1, 1));
            est.converged = true;
        } else {
            est.lower = std::max(sig_lo, tail_exists ? tail : 0.0);
            est.upper = std::max(sig_up, tail_exists ? tail : 0.0);
            est.witness = block_witness(v);
        }
        return est;
    }

    Eigen::MatrixXd C = coarse_cell_matrix(T.block(), a);
    double M1 = block_tail_l1_norm(C, tail_exists ? T.tail() : 0.0, a, T.N());
    Eigen::MatrixXd Cadj = coarse_cell_matrix(T.adjoint().block(), a);
    double Minf = block_tail_l1_norm(Cadj, tail_exists ? T.tail() : 0.0, a, T.N());
    double M2 = std::max(sig_up, tail_exists ? tail : 0.0);
    est.upper = interp_upper(M1, Minf, M2, p);
    est.converged = converged;
    est.method = "higham-interp";

    std::mt19937_64 hrng(0x51a7b2c9d4e8f163ULL);
    double block_lower = matrix_pnorm_lower(C, p, 8, hrng);
    if (tail_exists && tail >= block_lower) {
        est.lower = tail;
        est.witness = haar_function(DyadicInterval(a + 1, 1));
    } else {
        // Recompute the achieved ratio through the full operator so the
        // witness certifies the reported lower bound.
        std::mt19937_64 wrng(0x51a7b2c9d4e8f163ULL);
        Eigen::VectorXd x = Eigen::VectorXd::Ones(C.cols());
        double best = 0;
        Eigen::VectorXd bestx = x;
        for (int r = 0; r < 8; ++r) {
            if (r > 0)
                for (long i = 0; i < x.size(); ++i) x[i] = gauss(wrng);
            double nx = vec_pnorm(x, p);
            if (nx == 0) continue;
            x /= nx;
            double q = p / (p - 1.0);
            for (int it = 0; it < 64; ++it) {
                Eigen::VectorXd y = C * x;
                double ny = vec_pnorm(y, p);
                if (ny == 0) break;
                Eigen::VectorXd z = C.transpose() * dual_vector(y / ny, p);
                double nz = vec_pnorm(z, q);
                if (nz <= z.dot(x) * (1.0 + 1e-12)) break;
                x = dual_vector(z, q);
                x /= vec_pnorm(x, p);
            }
            double val = vec_pnorm(C * x, p);
            if (val > best) {
                best = val;
                bestx = x;
            }
        }
        std::vector<double> vals(std::size_t(bestx.size()));
        for (long i = 0; i < bestx.size(); ++i) vals[std::size_t(i)] = bestx[i];
        StepFunction f(a + 1, std::move(vals));
        double fn = lp_norm(f, p);
        est.witness = f;
        est.lower = fn > 0 ? lp_norm(T.apply(f), p) / fn : 0.0;
    }
    est.lower = std::min(est.lower, est.upper);
    return est;
}

// ---------------------------------------------------------------- generate

namespace {

struct SpecParts {
    std::string kind;
    std::vector<std::string> args;
    std::uint64_t seed;
    bool seed_given = false;
};

SpecParts parse_spec(const std::string& spec, std::uint64_t default_seed) {
    SpecParts sp;
    sp.seed = default_seed;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= spec.size()) {
        std::size_t next = spec.find(':', pos);
        std::string tok = spec.substr(pos, next == std::string::npos ? next : next - pos);
        if (first) {
            sp.kind = tok;
            first = false;
        } else if (tok.rfind("seed=", 0) == 0) {
            sp.seed = std::stoull(tok.substr(5));
            sp.seed_given = true;
        } else if (!tok.empty()) {
            sp.args.push_back(tok);
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return sp;
}

double paren_arg(const std::string& s, double fallback) {
    auto l = s.find('('), r = s.find(')');
    if (l == std::string::npos || r == std::string::npos || r < l) return fallback;
    return std::stod(s.substr(l + 1, r - l - 1));
}

}  // namespace

HaarOperator generate(const std::string& spec, int N, std::uint64_t seed, double p) {
    SpecParts sp = parse_spec(spec, seed);
    std::mt19937_64 rng(sp.seed);
    long long d = (2LL << N) - 1;

    if (sp.kind == "identity") return HaarOperator::identity(N);
    if (sp.kind == "zero") return HaarOperator::zero(N);

    if (sp.kind == "multiplier") {
        std::string dist = sp.args.empty() ? "bernoulli(0.5)" : sp.args[0];
        Eigen::VectorXd lambda(d);
        if (dist.rfind("bernoulli", 0) == 0) {
            double q = paren_arg(dist, 0.5);
            std::bernoulli_distribution b(q);
            for (long long i = 0; i < d; ++i) lambda[i] = b(rng) ? 1.0 : 0.0;
        } else if (dist.rfind("uniform", 0) == 0) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (long long i = 0; i < d; ++i) lambda[i] = u(rng);
        } else if (dist.rfind("const", 0) == 0) {
            lambda.setConstant(paren_arg(dist, 0.5));
        } else {
            throw DomainError("generate: unknown multiplier distribution " + dist);
        }
        return HaarOperator::multiplier(N, std::move(lambda));
    }

    int active = std::min(N, 6);
    for (const auto& arg : sp.args)
        if (arg.rfind("active=", 0) == 0) active = std::stoi(arg.substr(7));
    if (active < 0 || active > N) throw DomainError("generate: bad active level");
    long long da = (2LL << active) - 1;

    if (sp.kind == "random" || sp.kind == "random_contraction") {
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd B(da, da);
        for (long long i = 0; i < da; ++i)
            for (long long j = 0; j < da; ++j) B(i, j) = gauss(rng);
        HaarOperator T = HaarOperator::dense_block(N, active, std::move(B), 0.0);
        double u = opnorm(T, p).upper;
        if (u <= 0) throw DomainError("generate: degenerate random operator");
        return T.scaled(1.0 / u);
    }

    if (sp.kind == "permutation" || sp.kind == "permutation_of_haar") {
        // Level-preserving permutation of the Haar functions at levels <= active,
        // identity tail; an L2 isometry.
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(da, da);
        for (int level = 0; level <= active; ++level) {
            long long base = (1LL << level) - 1, cnt = 1LL << level;
            std::vector<long long> perm(static_cast<std::size_t>(cnt));
            for (long long i = 0; i < cnt; ++i) perm[std::size_t(i)] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            for (long long i = 0; i < cnt; ++i) B(base + perm[std::size_t(i)], base + i) = 1.0;
        }
        HaarOperator T = HaarOperator::dense_block(N, active, std::move(B), 1.0);
        double u = opnorm(T, p).upper;
        return T.scaled(1.0 / u);
    }

    if (sp.kind == "file") {
        if (sp.args.empty()) throw DomainError("generate: file spec needs a path");
        return load_operator_file(sp.args[0]);
    }

    throw DomainError("generate: unknown operator kind " + sp.kind);
}

}  // namespace haarfact
