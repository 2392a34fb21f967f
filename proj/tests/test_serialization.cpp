#include "flagdyn/errors.hpp"
#include "flagdyn/serialization.hpp"

#include <doctest.h>

#include <regex>
#include <sstream>

using namespace flagdyn;

TEST_CASE("matrix round trip") {
    Matrix m(2, 2);
    m << 2, 1, 1, 1;
    const Json j = matrix_to_json(m);
    CHECK(j.dump() == "[[2.0,1.0],[1.0,1.0]]");
    CHECK(matrix_from_json(j) == m);
    CHECK(matrix_from_json(Json::parse(j.dump())) == m);
    CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1,2,3],[4,5,6]]")), std::invalid_argument);
    CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1,2],[3]]")), std::invalid_argument);
    CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1,\"x\"],[3,4]]")), std::invalid_argument);
    CHECK_THROWS_AS(matrix_from_json(Json::parse("{}")), std::invalid_argument);
    CHECK_THROWS_AS(matrix_from_json(Json::parse("[]")), std::invalid_argument);
}

TEST_CASE("matrix text forms") {
    Matrix m(2, 2);
    m << 2, 1, 1, 1;
    CHECK(parse_matrix_text("[[2,1],[1,1]]") == m);
    CHECK(parse_matrix_text("2 1\n1 1\n") == m);
    CHECK(parse_matrix_text("2 1; 1 1") == m);
    CHECK(parse_matrix_text("  2\t1 ;\n 1 1 ") == m);
    CHECK(parse_matrix_text("1e-1 0\n0 10").isApprox((Matrix(2, 2) << 0.1, 0, 0, 10).finished()));
    CHECK_THROWS_AS(parse_matrix_text("2 1\n1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_matrix_text("2 x\n1 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_matrix_text("[[2,1],[1,1]"), std::invalid_argument);
    CHECK_THROWS_AS(parse_matrix_text(""), std::invalid_argument);
}

TEST_CASE("labels are one-based") {
    const SignedPermutation u({1, 0}, {-1, 1});
    const Json j = label_to_json(u);
    CHECK(j["name"] == "(1 2)(-,+)");
    CHECK(j["perm"] == Json::parse("[2,1]"));
    CHECK(j["signs"] == Json::parse("[-1,1]"));
    const Json w = label_to_json(WeylElement({1, 2, 0}));
    CHECK(w["perm"] == Json::parse("[2,3,1]"));
    CHECK_FALSE(w.contains("signs"));
}

TEST_CASE("record fields") {
    ControlSetRecord r;
    r.id = 3;
    r.member_indices = {1, 2, 3, 4};
    r.core_indices = {2, 3};
    r.invariant = true;
    r.u_labels = {SignedPermutation::identity(2)};
    r.order_rank = 1;
    const Json j = record_to_json(r, Space::K);
    CHECK(j.dump() == R"({"id":3,"space":"K","size":4,"core_size":2,"invariant":true,)"
                      R"x("labels":[{"name":"id(+,+)","perm":[1,2],"signs":[1,1]}],"order_rank":1})x");
    CHECK(records_to_json({r, r}, Space::FLAG).size() == 2);
    CHECK(records_to_json({}, Space::K).dump() == "[]");
}

TEST_CASE("graph lines and points") {
    const auto gens = make_preset("slplus2", 2);
    const auto cloud = sample_space(Space::PROJ, 2, 90, 0);
    const auto run = run_control_sets(gens, cloud, default_epsilon(cloud), 4);
    std::ostringstream out;
    write_graph_jsonl(out, run.graph);
    std::istringstream in(out.str());
    std::string line;
    size_t count = 0;
    const std::regex shape(R"(\{"src":\d+,"dst":\d+\})");
    while (std::getline(in, line)) {
        CHECK(std::regex_match(line, shape));
        const Json j = Json::parse(line);
        CHECK(j["src"].get<size_t>() < cloud.size());
        ++count;
    }
    CHECK(count == run.graph.edge_count());

    const Json pts = points_to_json(cloud, run.records);
    CHECK(pts["space"] == "PROJ");
    CHECK(pts["points"].size() == cloud.size());
    const auto member = membership(run.records, cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) {
        const Json& p = pts["points"][i];
        CHECK(p["index"] == i);
        CHECK(p["coords"].size() == 2);
        CHECK(p["record"] == member[i]);
    }
    const Json kp = points_to_json(sample_space(Space::K, 3, 5, 1), {});
    CHECK(kp["points"][0]["coords"].size() == 3);
    CHECK(kp["points"][0]["record"] == -1);
    CHECK(kp["points"][0]["core"] == false);
}

TEST_CASE("reports and metadata") {
    const VerificationReport r{"counting", true, 4, 4, "ok"};
    CHECK(report_to_json(r).dump() == R"({"theorem_tag":"counting","passed":true,"lhs":4.0,"rhs":4.0,"details":"ok"})");
    const Json m = metadata_header();
    CHECK(m["tool"] == "flagdyn");
    CHECK(std::regex_match(m["generated_at"].get<std::string>(),
                           std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
}

TEST_CASE("generator files") {
    const auto a = generators_from_json(Json::parse("[[[2,1],[1,1]],[[1,1],[1,2]]]"));
    CHECK(a.gens.size() == 2);
    CHECK(a.description == "explicit (2 generators)");
    const auto b = generators_from_json(Json::parse(R"({"generators":[[[2,0],[0,0.5]]]})"));
    CHECK(b.gens.size() == 1);
    CHECK(generators_from_json(Json::parse("[]")).gens.empty());
    CHECK_THROWS_AS(generators_from_json(Json::parse("[[[2,1],[1,1]],[[1,0,0],[0,1,0],[0,0,1]]]")),
                    std::invalid_argument);
    CHECK_THROWS_AS(generators_from_json(Json::parse("[[[1,1],[1,1]]]")), InvalidGroupElementError);
    CHECK_THROWS_AS(generators_from_json(Json::parse("5")), std::invalid_argument);
}
