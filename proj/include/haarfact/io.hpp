#pragma once

#include <json.hpp>

#include "haarfact/factorize.hpp"

namespace haarfact {

using Json = nlohmann::ordered_json;

// ---- core value formats -------------------------------------------------
// Interval literal "n:k"; families as sorted arrays of literals.
Json to_json(const IntervalFamily& F);
IntervalFamily family_from_json(const Json& j);

// StepFunction { "resolution": R, "values": [...] }.
Json to_json(const StepFunction& f);
StepFunction step_function_from_json(const Json& j);

// HaarExpansion { "N": n, "coeffs": { "n:k": c } } (zeros omitted).
Json to_json(const HaarExpansion& e);
HaarExpansion expansion_from_json(const Json& j);

// Operator JSON: { "N", "format": "dense-haar", "rows": [[...], ...] } or
// { "N", "format": "diagonal-haar", "diag": [...] } or
// { "N", "format": "block-haar", "active_level", "tail", "rows" }.
Json to_json(const HaarOperator& T);
HaarOperator operator_from_json(const Json& j);
// Dispatch on extension: .json as above, .csv = dense rows of comma-separated
// coefficients (dimension 2^{N+1}-1 determines N).
HaarOperator load_operator_file(const std::string& path);

// ---- reports ------------------------------------------------------------
Json to_json(const BlockBasis& B);                       // per-node {"node","intervals"}
Json to_json(const BlockBasisVerification& v);
Json to_json(const GoodIntervalReport& r);
Json to_json(const SparseLevelResult& r, const ThinningParams& params);
Json to_json(const NetThinningResult& r);
Json to_json(const FactorizationCertificate& c);
Json to_json(const RestrictedInvertibilityResult& r);

// ---- utilities ----------------------------------------------------------
std::string fnv1a_digest(const std::string& bytes);       // "fnv1a:<16 hex>"
std::string read_file(const std::string& path);

// Minimal structural JSON-schema check: type / required / properties / items /
// enum.  Returns the first violation path, or empty when valid.
std::string schema_validate(const Json& value, const Json& schema);

}  // namespace haarfact
