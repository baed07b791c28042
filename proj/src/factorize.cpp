#include "haarfact/factorize.hpp"

#include <cmath>

namespace haarfact {

namespace {

Rational carleson_or_zero(const IntervalFamily& F) {
    return F.empty() ? Rational(0) : carleson_constant(F);
}

double weighted_spectral(const Eigen::MatrixXd& M, const Eigen::VectorXd& w_domain,
                         const Eigen::VectorXd& w_codomain) {
    Eigen::MatrixXd B = w_codomain.cwiseSqrt().asDiagonal() * M *
                        w_domain.cwiseSqrt().cwiseInverse().asDiagonal();
    return B.jacobiSvd().singularValues()[0];
}

}  // namespace

DiagonalSplit diagonal_split(const HaarOperator& T, const BlockBasis& B) {
    DiagonalSplit out;
    Eigen::VectorXd w = haar_weights(B.N);
    std::vector<DyadicInterval> L, R;
    for (std::size_t t = 0; t < B.families.size(); ++t) {
        Eigen::VectorXd chi = B.coeffs(t);
        double d = T.apply_coeffs(chi).cwiseProduct(w).dot(chi);
        out.diag.push_back(d);
        DyadicInterval I = interval_from_canonical_index((long long)(t) + 1);
        (std::fabs(d) >= B.norm2_sq(t) / 2.0 ? L : R).push_back(I);
    }
    out.L = IntervalFamily(std::move(L));
    out.R = IntervalFamily(std::move(R));
    out.carleson_L = carleson_or_zero(out.L);
    out.carleson_R = carleson_or_zero(out.R);
    out.branch = out.carleson_L >= out.carleson_R ? "T" : "Id-T";
    return out;
}

CondensationSelection condense(const IntervalFamily& L, const BlockBasis& B, int n,
                               double threshold, bool require_threshold) {
    if (n < 0 || n > B.m) throw DomainError("condense: need 0 <= n <= m");
    CondensationSelection sel;
    sel.n = n;
    sel.threshold = threshold;
    sel.source_carleson = carleson_or_zero(L);
    sel.threshold_met =
        sel.source_carleson >= Rational((long long)(std::ceil(threshold - 1e-12)));
    if (require_threshold && !sel.threshold_met) {
        sel.status = CondensationSelection::Status::InsufficientCarleson;
        sel.failure = "[[L]] below the condensation threshold";
        return sel;
    }

    const std::size_t nodes = std::size_t((2LL << n) - 1);
    std::vector<std::vector<DyadicInterval>> pools(nodes);
    sel.assignment.assign(nodes, IntervalFamily{});
    pools[0] = L.members();
    for (std::size_t t = 1; t <= nodes; ++t) {
        IntervalFamily pool(pools[t - 1]);
        IntervalFamily maximal = pool.maximal_members();
        if (maximal.empty()) {
            sel.status = CondensationSelection::Status::InsufficientCarleson;
            sel.achieved_depth = interval_from_canonical_index((long long)(t)).level - 1;
            sel.failure = "condensation pool empty at node " +
                          interval_from_canonical_index((long long)(t)).literal();
            return sel;
        }
        sel.assignment[t - 1] = maximal;
        if (2 * t <= nodes) {
            for (const auto& J : pool.members()) {
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
    sel.achieved_depth = n;

    const long long dN = (2LL << B.N) - 1, dn = (2LL << n) - 1;
    sel.E = Eigen::MatrixXd::Zero(dN, dn);
    sel.R = Eigen::MatrixXd::Zero(dn, dN);
    for (std::size_t t = 0; t < nodes; ++t) {
        double den = 0.0;
        std::vector<long long> slots;
        for (const auto& I : sel.assignment[t].members()) {
            std::size_t node = std::size_t(canonical_index(I) - 1);
            den += B.norm2_sq(node);
            for (const auto& J : B.families[node].members())
                slots.push_back(canonical_index(J) - 1);
        }
        sel.u_norm_sq.push_back(den);
        DyadicInterval K = interval_from_canonical_index((long long)(t) + 1);
        double s = std::sqrt(K.measure().to_double() / den);
        for (long long slot : slots) {
            double mJ = interval_from_canonical_index(slot + 1).measure().to_double();
            sel.E(slot, long(t)) = s;
            sel.R(long(t), slot) = mJ / (s * den);
        }
    }
    return sel;
}

Eigen::MatrixXd build_projection_P(const HaarOperator& H, const BlockBasis& B,
                                   const IntervalFamily& F, const CondensationSelection& sel) {
    Eigen::VectorXd w = haar_weights(B.N);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(sel.R.rows(), sel.R.cols());
    for (const auto& I : F.members()) {
        std::size_t node = std::size_t(canonical_index(I) - 1);
        Eigen::VectorXd chi = B.coeffs(node);
        double d = H.apply_coeffs(chi).cwiseProduct(w).dot(chi);
        if (std::fabs(d) < B.norm2_sq(node) / 2.0 - 1e-9)
            throw DomainError("build_projection_P: diagonal below ||b||^2/2 at node " +
                              I.literal());
        P += (1.0 / d) * (sel.R * chi) * chi.cwiseProduct(w).transpose();
    }
    return P;
}

namespace {

// Cell-basis matrix of the coefficient-space map M : L^p_n -> L^p_N.
Eigen::MatrixXd cell_matrix(const Eigen::MatrixXd& M, int n, int N) {
    long long Sn = 2LL << n, SN = 2LL << N;
    Eigen::MatrixXd C(SN, Sn);
    for (long long c = 0; c < Sn; ++c) {
        std::vector<double> vals(std::size_t(Sn), 0.0);
        vals[std::size_t(c)] = 1.0;
        Eigen::VectorXd ce = coeff_vector(analyze(StepFunction(n + 1, std::move(vals)), n));
        StepFunction g = synthesize(coeff_expansion(N, M * ce));
        for (long long i = 0; i < SN; ++i) C(i, c) = g.values()[std::size_t(i)];
    }
    return C;
}

}  // namespace

FactorizationCertificate factor_identity(const HaarOperator& T, int n, int N, double p,
                                         const FactorConfig& cfg) {
    NormConstants nc(p);
    FactorizationCertificate cert;
    cert.n = n;
    cert.N = N;
    cert.p = p;
    int m = cfg.m > 0 ? cfg.m
                      : std::min(N, int(std::ceil(nc.C_p * double(n) * double(1LL << n))));
    if (n < 1 || m < n || N < m) throw DomainError("factor_identity: need 1 <= n <= m <= N");
    cert.m = m;
    double threshold = cfg.condensation_threshold > 0
                           ? cfg.condensation_threshold
                           : double(n) * double(1LL << n);
    bool conformant_m = m >= nc.C_p * double(n) * double(1LL << n) - 1e-9;

    BlockBasisResult B = build_block_basis(T, m, N, p, cfg.op_tol);
    for (const auto& rep : B.reports)
        cert.diagnostics.push_back("gg stage " + std::to_string(rep.stage) + ": level " +
                                   std::to_string(rep.selected_level) + ", retained " +
                                   std::to_string(rep.retained_ratio));
    if (!B.ok()) {
        cert.status = FactorizationCertificate::Status::InsufficientDepth;
        cert.failure = "block basis failed at stage " + std::to_string(B.failing_stage);
        cert.mode = "best-effort";
        return cert;
    }

    DiagonalSplit split = diagonal_split(T, B.basis);
    cert.branch = split.branch;
    cert.carleson_L = split.carleson_L;
    cert.carleson_R = split.carleson_R;
    const IntervalFamily& F = split.branch == "T" ? split.L : split.R;
    HaarOperator H = split.branch == "T" ? T : T.complement();

    CondensationSelection sel = condense(F, B.basis, n, threshold, !cfg.best_effort);
    if (!sel.ok()) {
        cert.status = FactorizationCertificate::Status::InsufficientCarleson;
        cert.failure = sel.failure;
        cert.mode = "best-effort";
        return cert;
    }
    bool conformant_carleson = sel.threshold_met;
    cert.diagnostics.push_back("condensation: [[family]] = " +
                               std::to_string(boost::rational_cast<double>(sel.source_carleson)) +
                               ", threshold " + std::to_string(threshold));

    Eigen::MatrixXd P1 = build_projection_P(H, B.basis, F, sel);
    cert.E = sel.E;

    const long long dn = (2LL << n) - 1;
    Eigen::MatrixXd HE(sel.E.rows(), dn);
    for (long long c = 0; c < dn; ++c) HE.col(c) = H.apply_coeffs(sel.E.col(c));
    Eigen::MatrixXd A = P1 * HE;

    Eigen::VectorXd wn = haar_weights(n);
    Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(dn, dn);
    cert.neumann_factor = weighted_spectral(A - Id, wn, wn);
    cert.neumann_ok = cert.neumann_factor <= 0.5 + 1e-9;
    Eigen::MatrixXd offdiag = A - A.diagonal().asDiagonal().toDenseMatrix();
    cert.error_term = weighted_spectral(offdiag, wn, wn);

    cert.P = A.partialPivLu().solve(P1);
    Eigen::MatrixXd A2 = cert.P * HE;
    cert.residual2 = weighted_spectral(A2 - Id, wn, wn);

    Eigen::VectorXd wN = haar_weights(N);
    cert.norm_E2 = weighted_spectral(cert.E, wn, wN);
    cert.norm_P2 = weighted_spectral(cert.P, wN, wn);
    if (p == 2.0) {
        cert.norm_Ep = {cert.norm_E2, cert.norm_E2};
        cert.norm_Pp = {cert.norm_P2, cert.norm_P2};
    } else {
        long long Sn = 2LL << n, SN = 2LL << N;
        Eigen::VectorXd qn = Eigen::VectorXd::Constant(Sn, 1.0 / double(Sn));
        Eigen::VectorXd qN = Eigen::VectorXd::Constant(SN, 1.0 / double(SN));
        cert.norm_Ep = weighted_matrix_pnorm(cell_matrix(cert.E, n, N), qn, qN, p, 8, cfg.seed);
        // P's cell matrix, column per fine cell, without a dense analysis matrix.
        Eigen::MatrixXd CP(Sn, SN);
        for (long long c = 0; c < SN; ++c) {
            std::vector<double> vals(std::size_t(SN), 0.0);
            vals[std::size_t(c)] = 1.0;
            Eigen::VectorXd ce = coeff_vector(analyze(StepFunction(N + 1, std::move(vals)), N));
            StepFunction g = synthesize(coeff_expansion(n, cert.P * ce));
            for (long long i = 0; i < Sn; ++i) CP(i, c) = g.values()[std::size_t(i)];
        }
        cert.norm_Pp = weighted_matrix_pnorm(CP, qN, qn, p, 8, cfg.seed);
    }

    cert.mode = (conformant_m && conformant_carleson && cert.neumann_ok) ? "conformant"
                                                                         : "best-effort";
    if (!cert.neumann_ok)
        cert.diagnostics.push_back("Neumann bound violated: measured factor " +
                                   std::to_string(cert.neumann_factor));
    return cert;
}

double certificate_residual(const FactorizationCertificate& cert, const HaarOperator& T) {
    HaarOperator H = cert.branch == "T" ? T : T.complement();
    const long long dn = cert.P.rows();
    Eigen::MatrixXd HE(cert.E.rows(), dn);
    for (long long c = 0; c < dn; ++c) HE.col(c) = H.apply_coeffs(cert.E.col(c));
    Eigen::VectorXd wn = haar_weights(cert.n);
    return weighted_spectral(cert.P * HE - Eigen::MatrixXd::Identity(dn, dn), wn, wn);
}

// ---------------------------------------------------------------- appendix

RestrictedInvertibilityResult restricted_invertibility(const Eigen::MatrixXd& T, double p,
                                                       double eps) {
    if (T.rows() != T.cols()) throw DomainError("restricted_invertibility: matrix not square");
    if (!(p > 1.0) || std::isinf(p))
        throw DomainError("restricted_invertibility: p must be in (1, inf)");
    const long nd = T.rows();
    RestrictedInvertibilityResult res;

    std::vector<int> big, small;
    for (long i = 0; i < nd; ++i)
        (std::fabs(T(i, i)) >= 0.5 ? big : small).push_back(int(i));
    Eigen::MatrixXd H;
    if (big.size() >= small.size()) {
        res.branch = "T";
        res.big_diagonal = big;
        H = T;
    } else {
        res.branch = "Id-T";
        res.big_diagonal = small;  // |1 - T_ii| > 1/2 on these
        H = Eigen::MatrixXd::Identity(nd, nd) - T;
    }
    const long n1 = long(res.big_diagonal.size());

    // S = D^{-1} H restricted to N1; unit diagonal by construction.
    Eigen::MatrixXd Hn1(n1, n1);
    for (long i = 0; i < n1; ++i)
        for (long j = 0; j < n1; ++j)
            Hn1(i, j) = H(res.big_diagonal[std::size_t(i)], res.big_diagonal[std::size_t(j)]);
    Eigen::VectorXd D = Hn1.diagonal();
    res.S = D.cwiseInverse().asDiagonal() * Hn1;

    auto min_singular = [&](const std::vector<int>& idx) {
        Eigen::MatrixXd M(idx.size(), idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j)
                M(long(i), long(j)) = res.S(idx[i], idx[j]);
        auto sv = M.jacobiSvd().singularValues();
        return sv[sv.size() - 1];
    };

    std::vector<int> sigma;  // local indices into N1
    while (true) {
        int best = -1;
        double best_sv = -1;
        for (int c = 0; c < int(n1); ++c) {
            if (std::find(sigma.begin(), sigma.end(), c) != sigma.end()) continue;
            std::vector<int> trial = sigma;
            trial.push_back(c);
            double sv = min_singular(trial);
            if (sv > best_sv) {
                best_sv = sv;
                best = c;
            }
        }
        if (best < 0 || best_sv < 0.5) break;
        sigma.push_back(best);
    }
    std::sort(sigma.begin(), sigma.end());
    if (sigma.empty())
        throw DomainError("restricted_invertibility: no invertible subset at bound 2");
    res.sigma.reserve(sigma.size());
    for (int c : sigma) res.sigma.push_back(res.big_diagonal[std::size_t(c)]);
    res.min_singular = min_singular(sigma);
    res.inverse_norm = 1.0 / res.min_singular;
    res.sigma_maximal = true;  // loop exits only when every augmentation breaks the bound

    const long n2 = long(sigma.size());
    Eigen::MatrixXd Ss(n2, n2);
    for (long i = 0; i < n2; ++i)
        for (long j = 0; j < n2; ++j) Ss(i, j) = res.S(sigma[std::size_t(i)], sigma[std::size_t(j)]);
    Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(n2);
    res.norm_S_sigma_p = weighted_matrix_pnorm(Ss, ones2, ones2, p);
    res.p_norm_within_eps = res.norm_S_sigma_p.upper <= 1.0 + eps + 1e-12;

    res.E1 = Eigen::MatrixXd::Zero(nd, n1);
    for (long i = 0; i < n1; ++i) res.E1(res.big_diagonal[std::size_t(i)], i) = 1.0;
    res.E2 = Eigen::MatrixXd::Zero(n1, n2);
    for (long i = 0; i < n2; ++i) res.E2(sigma[std::size_t(i)], i) = 1.0;
    res.P1 = D.cwiseInverse().asDiagonal() * res.E1.transpose();
    res.P2 = Ss.partialPivLu().solve(res.E2.transpose());

    Eigen::MatrixXd composed = res.P2 * res.P1 * H * res.E1 * res.E2;
    res.residual =
        (composed - Eigen::MatrixXd::Identity(n2, n2)).jacobiSvd().singularValues()[0];
    return res;
}

Eigen::MatrixXd generate_matrix(const std::string& spec, int dim, std::uint64_t seed) {
    if (dim < 1) throw DomainError("generate_matrix: dimension must be >= 1");
    if (spec == "identity") return Eigen::MatrixXd::Identity(dim, dim);
    if (spec == "diag-alt") {
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = (i % 2 == 0) ? 1.0 : 0.0;
        return d.asDiagonal();
    }
    if (spec == "random") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd G(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) G(i, j) = gauss(rng);
        double g2 = G.jacobiSvd().singularValues()[0];
        Eigen::MatrixXd T = Eigen::MatrixXd::Identity(dim, dim) + (0.5 / g2) * G;
        auto evs = Eigen::EigenSolver<Eigen::MatrixXd>(T, false).eigenvalues();
        double rho = 0;
        for (long i = 0; i < evs.size(); ++i) rho = std::max(rho, std::abs(evs[i]));
        if (rho > 1.0) T /= rho;
        return T;
    }
    throw DomainError("generate_matrix: unknown kind " + spec);
}

}  // namespace haarfact
