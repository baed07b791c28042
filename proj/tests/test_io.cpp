#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "haarfact/io.hpp"

using namespace haarfact;

TEST_CASE("family and step-function JSON round-trips") {
    IntervalFamily F({DyadicInterval(2, 3), DyadicInterval(0, 1), DyadicInterval(4, 11)});
    Json j = to_json(F);
    CHECK(j.is_array());
    CHECK(j[0].get<std::string>() == "0:1");  // sorted literals
    CHECK(family_from_json(j).members() == F.members());

    StepFunction f(2, {1.0, -0.5, 0.25, 0.0});
    Json js = to_json(f);
    CHECK(js["resolution"] == 2);
    StepFunction back = step_function_from_json(js);
    CHECK(lp_norm(back - f, INFINITY) == 0.0);
    CHECK(schema_validate(js, Json::parse(read_file(std::string(HFL_SCHEMA_DIR) +
                                                    "/step_function.schema.json"))) == "");
}

TEST_CASE("haar expansion JSON omits zeros") {
    HaarExpansion e(3);
    e.at(DyadicInterval(1, 2)) = 2.5;
    Json j = to_json(e);
    CHECK(j["coeffs"].size() == 1);
    CHECK(j["coeffs"]["1:2"] == 2.5);
    HaarExpansion back = expansion_from_json(j);
    CHECK(back.at(DyadicInterval(1, 2)) == 2.5);
    CHECK(back.dim() == e.dim());
}

TEST_CASE("operator JSON round-trips for every storage kind") {
    for (const char* spec : {"identity", "multiplier:uniform", "random", "random_contraction"}) {
        HaarOperator T = generate(spec, 4, 19);
        Json j = to_json(T);
        CHECK(schema_validate(j, Json::parse(read_file(std::string(HFL_SCHEMA_DIR) +
                                                       "/operator.schema.json"))) == "");
        CHECK(operator_from_json(j).entrywise_distance(T) == 0.0);
    }
    // Block storage keeps the tail through serialization.
    HaarOperator B = HaarOperator::dense_block(6, 3, Eigen::MatrixXd::Identity(15, 15), 0.25);
    CHECK(operator_from_json(to_json(B)).entrywise_distance(B) == 0.0);
}

TEST_CASE("CSV operator loading") {
    const char* path = "test_op_tmp.csv";
    {
        std::ofstream os(path);
        // 3x3 = dimension of D_1.
        os << "1,0,0\n0,0.5,0\n0,0,0.25\n";
    }
    HaarOperator T = load_operator_file(path);
    CHECK(T.N() == 1);
    Eigen::VectorXd c(3);
    c << 1, 1, 1;
    Eigen::VectorXd out = T.apply_coeffs(c);
    CHECK(out(0) == 1.0);
    CHECK(out(1) == 0.5);
    CHECK(out(2) == 0.25);
    std::remove(path);
}

TEST_CASE("digest is stable and tagged") {
    std::string d = fnv1a_digest("hello");
    CHECK(d == fnv1a_digest("hello"));
    CHECK(d.rfind("fnv1a:", 0) == 0);
    CHECK(d.size() == 6 + 16);
    CHECK(d != fnv1a_digest("hellp"));
}

TEST_CASE("schema validation reports the first violation") {
    Json schema = Json::parse(R"({
        "type": "object",
        "required": ["a"],
        "properties": { "a": { "type": "integer" },
                        "b": { "type": "array", "items": { "type": "number" } } }
    })");
    CHECK(schema_validate(Json{{"a", 1}}, schema) == "");
    CHECK(schema_validate(Json{{"b", 1}}, schema) != "");
    CHECK(schema_validate(Json{{"a", "x"}}, schema) != "");
    CHECK(schema_validate(Json{{"a", 1}, {"b", Json::array({1.0, "x"})}}, schema) != "");
}

TEST_CASE("certificate JSON validates against the shipped schema") {
    HaarOperator M = generate("multiplier:bernoulli(0.5)", 8, 2);
    auto cert = factor_identity(M, 1, 8, 2.0);
    REQUIRE(cert.ok());
    Json j = to_json(cert);
    std::string err = schema_validate(
        j, Json::parse(read_file(std::string(HFL_SCHEMA_DIR) + "/certificate.schema.json")));
    CHECK(err == "");
}

TEST_CASE("block basis JSON validates against the shipped schema") {
    auto result = build_block_basis(HaarOperator::identity(8), 2, 8, 2.0);
    REQUIRE(result.ok());
    Json j = to_json(result.basis);
    std::string err = schema_validate(
        j, Json::parse(read_file(std::string(HFL_SCHEMA_DIR) + "/block_basis.schema.json")));
    CHECK(err == "");
}
