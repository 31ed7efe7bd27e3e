#include "corkit/structext.hpp"

#include <doctest.h>

#include <stdexcept>
#include <string>

using namespace corkit;

TEST_SUITE("structext") {

TEST_CASE("scalar and matrix entries parse") {
    auto blocks = parse_blocks(R"(
# leading comment
material demo {
    density = 1000
    label = "free text"
    m = [ 1 2
          3 4 ]
}
)", "<test>");
    REQUIRE(blocks.size() == 1);
    const auto& b = blocks[0];
    CHECK(b.kind == "material");
    CHECK(b.name == "demo");
    CHECK(b.find("density")->as_number("density") == 1000.0);
    CHECK(b.find("label")->scalar == "free text");
    REQUIRE(b.find("m")->rows.size() == 2);
    CHECK(b.find("m")->rows[1][1] == 4.0);
}

TEST_CASE("single-line matrix") {
    auto blocks = parse_blocks("thing t {\n v = [ 1 2 3 ]\n}\n", "<test>");
    REQUIRE(blocks[0].find("v")->rows.size() == 1);
    CHECK(blocks[0].find("v")->rows[0].size() == 3);
}

TEST_CASE("diagnostics carry source and line") {
    try {
        parse_blocks("material x {\n  a = 1\n  a = 2\n}\n", "demo.mat");
        FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("demo.mat:3") != std::string::npos);
        CHECK(std::string(e.what()).find("duplicate key 'a'") != std::string::npos);
    }
}

TEST_CASE("malformed inputs throw") {
    CHECK_THROWS_AS(parse_blocks("material x {\n a = 1\n", "<t>"), std::invalid_argument);
    CHECK_THROWS_AS(parse_blocks("material x {\n m = [ 1 2\n", "<t>"), std::invalid_argument);
    CHECK_THROWS_AS(parse_blocks("material {\n}\n", "<t>"), std::invalid_argument);
    CHECK_THROWS_AS(parse_blocks("material x {\n a =\n}\n", "<t>"), std::invalid_argument);
    CHECK_THROWS_AS(parse_blocks("material x {\n m = [ ]\n}\n", "<t>"), std::invalid_argument);
}

TEST_CASE("values allow words and negatives") {
    auto blocks = parse_blocks("m x {\n e = -0.48\n cls = hexagonal\n}\n", "<t>");
    CHECK(blocks[0].find("e")->as_number("e") == -0.48);
    CHECK(blocks[0].find("cls")->scalar == "hexagonal");
}

}  // TEST_SUITE
