// haarfact: deterministic batch experiment runner over the haarfact library.
//
// Subcommands: block-basis, factor, thin, net-thin, carleson, restricted-inv,
// selftest.  Every run emits a RunReport JSON document (stdout, and --out if
// given) that is byte-identical for identical configuration and seed.  Exit
// codes: 0 ok (including best-effort / non-conformant outcomes), 2 construction
// failure, 3 bad input.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "haarfact/io.hpp"
#include "haarfact/selftest.hpp"

namespace hf = haarfact;
using hf::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

int finish_report(Json& report, const std::string& outcome, const std::string& out_path,
                  int exit_code) {
    report["outcome"] = outcome;
    std::string text = report.dump(2) + "\n";
    std::fputs(text.c_str(), stdout);
    if (!out_path.empty()) {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw hf::DomainError("cannot open output path " + out_path);
        os << text;
    }
    return exit_code;
}

Json base_report(const std::string& command, const Json& config) {
    Json r;
    r["command"] = command;
    r["library_version"] = kVersion;
    r["config"] = config;
    r["input_digests"] = Json::object();
    return r;
}

void digest_operator_spec(Json& report, const std::string& spec) {
    if (spec.rfind("file:", 0) == 0)
        report["input_digests"]["operator"] = hf::fnv1a_digest(hf::read_file(spec.substr(5)));
    else
        report["input_digests"]["operator"] = hf::fnv1a_digest(spec);
}

// Admissible (x, y) pair for the thin lemma: Haar coefficients decaying with
// level, rescaled below the unit L^p / L^q balls.
std::pair<hf::StepFunction, hf::StepFunction> generate_thin_pair(int depth, double p,
                                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    auto draw = [&](double exponent) {
        hf::HaarExpansion e(depth);
        for (int n = 0; n <= depth; ++n) {
            double scale = std::pow(2.0, -n * 0.6);
            for (long long k = 1; k <= (1LL << n); ++k)
                e.at(hf::DyadicInterval(n, k)) = scale * gauss(rng);
        }
        hf::StepFunction f = hf::synthesize(e);
        double norm = hf::lp_norm(f, exponent);
        if (norm > 0) f *= 0.9 / norm;
        return f;
    };
    double q = p / (p - 1.0);
    return {draw(p), draw(q)};
}

// Random element of H^1_N with a sparse set of deep, pairwise disjoint Haar
// supports; suitable input for the net-thinning proposition at desk scale.
hf::StepFunction generate_sparse_h1(int N, std::mt19937_64& rng,
                                    std::vector<hf::DyadicInterval>& used) {
    std::uniform_int_distribution<int> level_dist(4, std::min(8, N));
    std::normal_distribution<double> gauss;
    hf::HaarExpansion e(N);
    int placed = 0;
    std::uniform_int_distribution<int> count_dist(3, 6);
    int want = count_dist(rng);
    for (int attempt = 0; attempt < 256 && placed < want; ++attempt) {
        int lev = level_dist(rng);
        std::uniform_int_distribution<long long> k_dist(1, 1LL << lev);
        hf::DyadicInterval J(lev, k_dist(rng));
        bool clash = false;
        for (const auto& U : used)
            if (!J.disjoint_from(U)) clash = true;
        if (clash) continue;
        used.push_back(J);
        e.at(J) = gauss(rng);
        ++placed;
    }
    hf::StepFunction f = hf::synthesize(e);
    double norm = hf::h1_norm(f, N);
    if (norm > 0) f *= 1.0 / norm;
    return f;
}

hf::IntervalFamily parse_family_spec(const std::string& spec) {
    if (spec.size() > 1 && spec[0] == 'd') {
        bool digits = true;
        for (std::size_t i = 1; i < spec.size(); ++i) digits = digits && std::isdigit(spec[i]);
        if (digits) return hf::enumerate_dn(std::stoi(spec.substr(1)));
    }
    if (spec.rfind("file:", 0) == 0)
        return hf::family_from_json(Json::parse(hf::read_file(spec.substr(5))));
    // Comma-separated interval literals "n:k,n:k,...".
    std::vector<hf::DyadicInterval> members;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        members.push_back(hf::DyadicInterval::from_literal(spec.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return hf::IntervalFamily(std::move(members));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Haar-system factorization toolkit"};
    app.require_subcommand(1);

    std::string op_spec = "identity", out_path, mode = "best-effort";
    std::string family_spec, x_path, y_path, subspace_path, csv_path, matrix_spec = "identity";
    int m = 2, factor_m = -1, N = 10, n = 1, depth = 12, k_param = 2, ell_param = 3, dim = 2,
        points = 32;
    double p = 2.0, eps = 0.5, tau_scale = 1.0;
    std::uint64_t seed = 1;
    bool quick = false;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--seed", seed, "PRNG seed (64-bit)");
        c->add_option("--out", out_path, "write the RunReport JSON here as well");
    };

    CLI::App* cb = app.add_subcommand("block-basis", "Gamlen-Gaudet block basis against an operator");
    cb->add_option("--op", op_spec, "operator generator spec or file:<path>");
    cb->add_option("--m", m, "index-tree depth");
    cb->add_option("--N", N, "ambient Haar level");
    cb->add_option("--p", p, "exponent, 1 < p < inf");
    cb->add_option("--csv", csv_path, "export the off-diagonal table as CSV");
    add_common(cb);

    CLI::App* cf = app.add_subcommand("factor", "factor the identity through T or Id-T");
    cf->add_option("--op", op_spec, "operator generator spec or file:<path>");
    cf->add_option("--n", n, "target L^p_n dimension parameter");
    cf->add_option("--N", N, "ambient Haar level");
    cf->add_option("--m", factor_m, "block-basis depth (default: conformant scale, capped at N)");
    cf->add_option("--p", p, "exponent, 1 < p < inf");
    cf->add_option("--mode", mode, "conformant | best-effort")
        ->check(CLI::IsMember({"conformant", "best-effort"}));
    add_common(cf);

    CLI::App* ct = app.add_subcommand("thin", "minimal sparse-level selection (Lemma thin)");
    ct->add_option("--depth", depth, "deepest relative level examined");
    ct->add_option("--k", k_param, "coefficient threshold scale k");
    ct->add_option("--ell", ell_param, "bad-set measure scale l");
    ct->add_option("--p", p, "exponent, 1 < p < inf");
    ct->add_option("--x", x_path, "StepFunction JSON for x (default: generated)");
    ct->add_option("--y", y_path, "StepFunction JSON for y (default: generated)");
    add_common(ct);

    CLI::App* cn = app.add_subcommand("net-thin", "net/stopping-time thinning with projection Q");
    cn->add_option("--n", n, "condensation tree depth");
    cn->add_option("--N", N, "ambient Haar level");
    cn->add_option("--eps", eps, "target projection bound on the subspace");
    cn->add_option("--dim", dim, "generated subspace dimension");
    cn->add_option("--subspace", subspace_path, "JSON array of StepFunctions (overrides --dim)");
    cn->add_option("--points", points, "random net points beyond the basis");
    cn->add_option("--tau-scale", tau_scale, "shrink factor on the default tau");
    add_common(cn);

    CLI::App* cc = app.add_subcommand("carleson", "Carleson constant of a family");
    cc->add_option("--family", family_spec, "d<n>, file:<path>, or literals n:k,n:k,...")
        ->required();
    add_common(cc);

    CLI::App* cr = app.add_subcommand("restricted-inv", "appendix restricted-invertibility chain");
    cr->add_option("--op", matrix_spec, "identity | random | diag-alt | file:<path>");
    cr->add_option("--N", N, "sequence-space dimension");
    cr->add_option("--p", p, "exponent, 1 < p < inf");
    cr->add_option("--eps", eps, "p-norm certification margin");
    add_common(cr);

    CLI::App* cs = app.add_subcommand("selftest", "run the library property suites");
    cs->add_flag("--quick", quick, "quick profile");
    add_common(cs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (cb->parsed()) {
            Json config{{"op", op_spec}, {"m", m}, {"N", N}, {"p", p}, {"seed", seed}};
            Json report = base_report("block-basis", config);
            digest_operator_spec(report, op_spec);
            hf::HaarOperator H = hf::generate(op_spec, N, seed, p);
            auto result = hf::build_block_basis(H, m, N, p);
            Json payload;
            payload["basis"] = hf::to_json(result.basis);
            Json reports = Json::array();
            for (const auto& r : result.reports) reports.push_back(hf::to_json(r));
            payload["stages"] = reports;
            if (result.ok()) {
                auto ver = hf::verify_block_basis(result.basis, H);
                payload["verification"] = hf::to_json(ver);
                if (!csv_path.empty()) {
                    std::ofstream os(csv_path, std::ios::binary);
                    os << "node,diag,offdiag_sum,bound,measure4\n";
                    char line[160];
                    for (const auto& row : ver.rows) {
                        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n",
                                      row.node, row.diag, row.offdiag_sum, row.bound,
                                      row.measure4);
                        os << line;
                    }
                }
                report["payload"] = payload;
                return finish_report(report, "ok", out_path, 0);
            }
            payload["failing_stage"] = result.failing_stage;
            report["payload"] = payload;
            return finish_report(report, "insufficient-depth", out_path, 2);
        }

        if (cf->parsed()) {
            Json config{{"op", op_spec}, {"n", n},       {"N", N},   {"m", factor_m},
                        {"p", p},        {"mode", mode}, {"seed", seed}};
            Json report = base_report("factor", config);
            digest_operator_spec(report, op_spec);
            hf::HaarOperator T = hf::generate(op_spec, N, seed, p);
            hf::FactorConfig fc;
            fc.m = factor_m;
            fc.best_effort = (mode == "best-effort");
            fc.seed = seed;
            auto cert = hf::factor_identity(T, n, N, p, fc);
            report["payload"] = hf::to_json(cert);
            if (!cert.ok()) {
                std::string outcome =
                    cert.status == hf::FactorizationCertificate::Status::InsufficientDepth
                        ? "insufficient-depth"
                        : "insufficient-carleson";
                return finish_report(report, outcome, out_path, 2);
            }
            return finish_report(report, cert.mode == "conformant" ? "ok" : "non-conformant",
                                 out_path, 0);
        }

        if (ct->parsed()) {
            Json config{{"depth", depth}, {"k", k_param}, {"ell", ell_param},
                        {"p", p},         {"seed", seed}, {"generated", x_path.empty()}};
            Json report = base_report("thin", config);
            hf::ThinningParams params{k_param, ell_param, p};
            hf::StepFunction x, y;
            if (!x_path.empty() || !y_path.empty()) {
                if (x_path.empty() || y_path.empty())
                    throw hf::DomainError("--x and --y must be given together");
                x = hf::step_function_from_json(Json::parse(hf::read_file(x_path)));
                y = hf::step_function_from_json(Json::parse(hf::read_file(y_path)));
                report["input_digests"]["x"] = hf::fnv1a_digest(hf::read_file(x_path));
                report["input_digests"]["y"] = hf::fnv1a_digest(hf::read_file(y_path));
            } else {
                std::tie(x, y) = generate_thin_pair(depth, p, seed);
            }
            auto result = hf::select_sparse_level(x, y, hf::DyadicInterval::unit(), params, depth);
            report["payload"] = hf::to_json(result, params);
            if (!result.found) return finish_report(report, "insufficient-depth", out_path, 2);
            return finish_report(report, "ok", out_path, 0);
        }

        if (cn->parsed()) {
            Json config{{"n", n},          {"N", N},           {"eps", eps},
                        {"dim", dim},      {"points", points}, {"tau_scale", tau_scale},
                        {"seed", seed}};
            Json report = base_report("net-thin", config);
            std::vector<hf::StepFunction> E;
            if (!subspace_path.empty()) {
                Json arr = Json::parse(hf::read_file(subspace_path));
                for (const auto& item : arr) E.push_back(hf::step_function_from_json(item));
                report["input_digests"]["subspace"] =
                    hf::fnv1a_digest(hf::read_file(subspace_path));
            } else {
                std::mt19937_64 rng(seed);
                std::vector<hf::DyadicInterval> used;
                for (int i = 0; i < dim; ++i) E.push_back(generate_sparse_h1(N, rng, used));
            }
            hf::NetThinningConfig cfg;
            cfg.N = N;
            cfg.random_net_points = points;
            cfg.seed = seed;
            cfg.tau_scale = tau_scale;
            auto result = hf::net_thinning(E, n, eps, cfg);
            report["payload"] = hf::to_json(result);
            if (!result.ok()) return finish_report(report, "insufficient-carleson", out_path, 2);
            return finish_report(report, result.carleson_conformant ? "ok" : "non-conformant",
                                 out_path, 0);
        }

        if (cc->parsed()) {
            Json config{{"family", family_spec}};
            Json report = base_report("carleson", config);
            hf::IntervalFamily F = parse_family_spec(family_spec);
            report["input_digests"]["family"] = hf::fnv1a_digest(hf::to_json(F).dump());
            hf::Rational c = hf::carleson_constant(F);
            Json payload;
            payload["family"] = hf::to_json(F);
            payload["carleson"] =
                std::to_string(c.numerator()) + "/" + std::to_string(c.denominator());
            payload["carleson_double"] = boost::rational_cast<double>(c);
            payload["brute_force_agrees"] = (hf::carleson_brute_force(F) == c);
            report["payload"] = payload;
            return finish_report(report, "ok", out_path, 0);
        }

        if (cr->parsed()) {
            Json config{{"op", matrix_spec}, {"N", N}, {"p", p}, {"eps", eps}, {"seed", seed}};
            Json report = base_report("restricted-inv", config);
            Eigen::MatrixXd T;
            if (matrix_spec.rfind("file:", 0) == 0) {
                Json j = Json::parse(hf::read_file(matrix_spec.substr(5)));
                auto rows = j.at("rows");
                T.resize(long(rows.size()), long(rows.size()));
                for (long i = 0; i < T.rows(); ++i)
                    for (long jj = 0; jj < T.cols(); ++jj)
                        T(i, jj) = rows[std::size_t(i)][std::size_t(jj)].get<double>();
                report["input_digests"]["operator"] =
                    hf::fnv1a_digest(hf::read_file(matrix_spec.substr(5)));
            } else {
                T = hf::generate_matrix(matrix_spec, N, seed);
                report["input_digests"]["operator"] = hf::fnv1a_digest(matrix_spec);
            }
            auto result = hf::restricted_invertibility(T, p, eps);
            report["payload"] = hf::to_json(result);
            return finish_report(report, "ok", out_path, 0);
        }

        if (cs->parsed()) {
            Json config{{"quick", quick}, {"seed", seed}};
            Json report = base_report("selftest", config);
            auto entries = hf::run_selftests(quick, seed);
            bool all_ok = true;
            Json suites = Json::array();
            for (const auto& e : entries) {
                all_ok = all_ok && e.passed;
                suites.push_back(
                    Json{{"name", e.name}, {"passed", e.passed}, {"detail", e.detail}});
                std::fprintf(stderr, "[%s] %s%s%s\n", e.passed ? "PASS" : "FAIL",
                             e.name.c_str(), e.detail.empty() ? "" : ": ", e.detail.c_str());
            }
            report["payload"] = Json{{"suites", suites}};
            return finish_report(report, all_ok ? "ok" : "non-conformant", out_path,
                                 all_ok ? 0 : 2);
        }
    } catch (const hf::DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const hf::ResourceLimitError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Json::exception& e) {
        std::fprintf(stderr, "error: malformed JSON input: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 3;
}
