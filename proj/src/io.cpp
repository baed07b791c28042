#include "haarfact/io.hpp"

#include <fstream>
#include <sstream>

namespace haarfact {

Json to_json(const IntervalFamily& F) {
    Json arr = Json::array();
    for (const auto& I : F.members()) arr.push_back(I.literal());
    return arr;
}

IntervalFamily family_from_json(const Json& j) {
    if (!j.is_array()) throw DomainError("family JSON must be an array of literals");
    std::vector<DyadicInterval> members;
    for (const auto& lit : j) members.push_back(DyadicInterval::from_literal(lit.get<std::string>()));
    return IntervalFamily(std::move(members));
}

Json to_json(const StepFunction& f) {
    return Json{{"resolution", f.resolution()}, {"values", f.values()}};
}

StepFunction step_function_from_json(const Json& j) {
    return StepFunction(j.at("resolution").get<int>(),
                        j.at("values").get<std::vector<double>>());
}

Json to_json(const HaarExpansion& e) {
    Json coeffs = Json::object();
    for (std::size_t i = 0; i < e.coeffs.size(); ++i)
        if (e.coeffs[i] != 0.0)
            coeffs[interval_from_canonical_index((long long)(i) + 1).literal()] = e.coeffs[i];
    return Json{{"N", e.N}, {"coeffs", coeffs}};
}

HaarExpansion expansion_from_json(const Json& j) {
    HaarExpansion e(j.at("N").get<int>());
    for (const auto& [lit, c] : j.at("coeffs").items())
        e.at(DyadicInterval::from_literal(lit)) = c.get<double>();
    return e;
}

Json to_json(const HaarOperator& T) {
    Json j{{"N", T.N()}};
    if (T.kind() == HaarOperator::Kind::Diagonal) {
        j["format"] = "diagonal-haar";
        std::vector<double> diag(T.diagonal().data(), T.diagonal().data() + T.diagonal().size());
        j["diag"] = diag;
        return j;
    }
    Json rows = Json::array();
    for (long i = 0; i < T.block().rows(); ++i) {
        Json row = Json::array();
        for (long c = 0; c < T.block().cols(); ++c) row.push_back(T.block()(i, c));
        rows.push_back(row);
    }
    if (T.active_level() == T.N()) {
        j["format"] = "dense-haar";
        j["rows"] = rows;
    } else {
        j["format"] = "block-haar";
        j["active_level"] = T.active_level();
        j["tail"] = T.tail();
        j["rows"] = rows;
    }
    return j;
}

HaarOperator operator_from_json(const Json& j) {
    int N = j.at("N").get<int>();
    std::string format = j.at("format").get<std::string>();
    if (format == "diagonal-haar") {
        auto diag = j.at("diag").get<std::vector<double>>();
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), long(diag.size()));
        return HaarOperator::multiplier(N, std::move(d));
    }
    if (format != "dense-haar" && format != "block-haar")
        throw DomainError("unknown operator format " + format);
    int active = format == "dense-haar" ? N : j.at("active_level").get<int>();
    double tail = format == "dense-haar" ? 0.0 : j.at("tail").get<double>();
    const Json& rows = j.at("rows");
    long long da = (2LL << active) - 1;
    if ((long long)(rows.size()) != da) throw DomainError("operator rows do not match level");
    Eigen::MatrixXd B(da, da);
    for (long long i = 0; i < da; ++i) {
        if ((long long)(rows[std::size_t(i)].size()) != da)
            throw DomainError("operator row length mismatch");
        for (long long c = 0; c < da; ++c) B(i, c) = rows[std::size_t(i)][std::size_t(c)];
    }
    return HaarOperator::dense_block(N, active, std::move(B), tail);
}

HaarOperator load_operator_file(const std::string& path) {
    std::string text = read_file(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        std::vector<std::vector<double>> rows;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
            rows.push_back(std::move(row));
        }
        long long d = (long long)(rows.size());
        int N = 0;
        while ((2LL << N) - 1 < d) ++N;
        if ((2LL << N) - 1 != d) throw DomainError("CSV operator dimension is not 2^{N+1}-1");
        Eigen::MatrixXd B(d, d);
        for (long long i = 0; i < d; ++i) {
            if ((long long)(rows[std::size_t(i)].size()) != d)
                throw DomainError("CSV operator is not square");
            for (long long c = 0; c < d; ++c) B(i, c) = rows[std::size_t(i)][std::size_t(c)];
        }
        return HaarOperator::dense_block(N, N, std::move(B), 0.0);
    }
    Json j = Json::parse(text);
    return operator_from_json(j);
}

// ---- reports ------------------------------------------------------------

Json to_json(const BlockBasis& B) {
    Json nodes = Json::array();
    for (std::size_t t = 0; t < B.families.size(); ++t) {
        nodes.push_back(Json{
            {"node", interval_from_canonical_index((long long)(t) + 1).literal()},
            {"intervals", to_json(B.families[t])},
        });
    }
    return Json{{"m", B.m}, {"N", B.N}, {"nodes", nodes}};
}

Json to_json(const BlockBasisVerification& v) {
    Json rows = Json::array();
    for (const auto& r : v.rows)
        rows.push_back(Json{{"node", r.node},
                            {"diag", r.diag},
                            {"offdiag_sum", r.offdiag_sum},
                            {"bound_4_index", r.bound},
                            {"bound_measure4", r.measure4}});
    return Json{{"pairwise_disjoint", v.disjoint_ok},
                {"tree_with_measure_bounds", v.tree_ok},
                {"sign_nesting", v.sign_ok},
                {"norm_identity", v.norm_ok},
                {"offdiagonal_within_4_index", v.offdiag_ok},
                {"offdiagonal_within_measure4", v.offdiag_measure4_ok},
                {"detail", v.detail},
                {"offdiagonal_table", rows}};
}

Json to_json(const GoodIntervalReport& r) {
    Json g = Json::object();
    for (const auto& [J, val] : r.g_values) g[J.literal()] = val;
    return Json{{"stage", r.stage},
                {"spec_threshold", r.spec_threshold},
                {"effective_threshold", r.effective_threshold},
                {"selected_level", r.selected_level},
                {"retained_ratio", r.retained_ratio},
                {"candidate_count", r.candidate_count},
                {"good_count", r.good_count},
                {"max_g_selected", r.max_g_selected},
                {"g_values", g}};
}

Json to_json(const SparseLevelResult& r, const ThinningParams& params) {
    return Json{{"found", r.found},
                {"level", r.level},
                {"bad_set", to_json(r.bad_set)},
                {"deepest_examined", r.deepest_examined},
                {"k", params.k},
                {"ell", params.ell},
                {"p", params.p},
                {"A_p", r.a_p}};
}

Json to_json(const NetThinningResult& r) {
    Json stages = Json::array();
    for (const auto& s : r.stages)
        stages.push_back(Json{{"net_index", s.net_index},
                              {"large_removed", s.large_removed},
                              {"block_count", s.block_count},
                              {"chosen_block", s.chosen_block},
                              {"boundary_flagged", s.boundary_flagged},
                              {"sq_bound", s.sq_bound},
                              {"carleson_before", s.carleson_before},
                              {"carleson_after", s.carleson_after}});
    Json tree = Json::array();
    for (std::size_t t = 0; t < r.tree.sets.size(); ++t)
        tree.push_back(Json{
            {"node", interval_from_canonical_index((long long)(t) + 1).literal()},
            {"intervals", to_json(r.tree.sets[t])},
        });
    return Json{{"status", r.ok() ? "ok" : "insufficient-carleson"},
                {"n", r.n},
                {"N", r.N},
                {"epsilon", r.epsilon},
                {"tau", r.tau},
                {"eta", r.eta},
                {"net_size", r.net_size},
                {"stages", stages},
                {"final_family_size", r.final_family.size()},
                {"final_carleson", r.final_carleson},
                {"carleson_conformant", r.carleson_conformant},
                {"tree", tree},
                {"coeff_bound_ratio", r.coeff_bound_ratio},
                {"failure", r.failure}};
}

namespace {

Json matrix_to_json(const Eigen::MatrixXd& M) {
    Json rows = Json::array();
    for (long i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (long c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
        rows.push_back(row);
    }
    return rows;
}

std::string rational_string(const Rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace

Json to_json(const FactorizationCertificate& c) {
    std::string status = c.ok() ? "ok"
                         : c.status == FactorizationCertificate::Status::InsufficientDepth
                             ? "insufficient-depth"
                             : "insufficient-carleson";
    return Json{{"status", status},
                {"branch", c.branch},
                {"mode", c.mode},
                {"n", c.n},
                {"N", c.N},
                {"m", c.m},
                {"p", c.p},
                {"carleson_L", rational_string(c.carleson_L)},
                {"carleson_R", rational_string(c.carleson_R)},
                {"residual", c.residual2},
                {"neumann_factor", c.neumann_factor},
                {"neumann_ok", c.neumann_ok},
                {"error_term", c.error_term},
                {"norm_E", Json{{"p2", c.norm_E2},
                                {"p_lower", c.norm_Ep.lower},
                                {"p_upper", c.norm_Ep.upper}}},
                {"norm_P", Json{{"p2", c.norm_P2},
                                {"p_lower", c.norm_Pp.lower},
                                {"p_upper", c.norm_Pp.upper}}},
                {"E", matrix_to_json(c.E)},
                {"P", matrix_to_json(c.P)},
                {"failure", c.failure},
                {"diagnostics", c.diagnostics}};
}

Json to_json(const RestrictedInvertibilityResult& r) {
    return Json{{"branch", r.branch},
                {"big_diagonal", r.big_diagonal},
                {"sigma", r.sigma},
                {"min_singular", r.min_singular},
                {"inverse_norm", r.inverse_norm},
                {"norm_S_sigma_p_lower", r.norm_S_sigma_p.lower},
                {"norm_S_sigma_p_upper", r.norm_S_sigma_p.upper},
                {"p_norm_within_eps", r.p_norm_within_eps},
                {"residual", r.residual},
                {"sigma_maximal", r.sigma_maximal}};
}

// ---- utilities ----------------------------------------------------------

std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string schema_validate(const Json& value, const Json& schema) {
    if (schema.contains("type")) {
        std::string t = schema["type"].get<std::string>();
        bool ok = (t == "object" && value.is_object()) || (t == "array" && value.is_array()) ||
                  (t == "string" && value.is_string()) ||
                  (t == "number" && value.is_number()) ||
                  (t == "integer" && value.is_number_integer()) ||
                  (t == "boolean" && value.is_boolean()) || (t == "null" && value.is_null());
        if (!ok) return "expected type " + t;
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& cand : schema["enum"])
            if (cand == value) ok = true;
        if (!ok) return "value not in enum";
    }
    if (schema.contains("required") && value.is_object())
        for (const auto& key : schema["required"])
            if (!value.contains(key.get<std::string>()))
                return "missing required field " + key.get<std::string>();
    if (schema.contains("properties") && value.is_object())
        for (const auto& [key, sub] : schema["properties"].items())
            if (value.contains(key)) {
                std::string err = schema_validate(value[key], sub);
                if (!err.empty()) return key + ": " + err;
            }
    if (schema.contains("items") && value.is_array())
        for (std::size_t i = 0; i < value.size(); ++i) {
            std::string err = schema_validate(value[i], schema["items"]);
            if (!err.empty()) return "[" + std::to_string(i) + "]: " + err;
        }
    return "";
}

}  // namespace haarfact
