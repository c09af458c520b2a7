#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "hortonlab/io.hpp"

using namespace hortonlab;

TEST_CASE("newick writer") {
    CHECK(tree_to_newick(Tree::empty()) == ";");
    CHECK(tree_to_newick(Tree::single_edge(1.5)) == "(:1.5);");
    Tree t = testing::nw("((:1,:2):3):0.25;");
    CHECK(tree_to_newick(t) == "((:1,:2):3):0.25;");
    CHECK(tree_to_newick(shape(t)) == "((,));");
}

TEST_CASE("newick parser rejects malformed input") {
    CHECK_THROWS(tree_from_newick("((,)"));
    CHECK_THROWS(tree_from_newick("((,,));"));
    CHECK_THROWS(tree_from_newick("(,);"));
    CHECK_THROWS(tree_from_newick("((:x,:1):1);"));
    CHECK_THROWS(tree_from_newick("((,));junk"));
}

TEST_CASE("newick parser skips labels") {
    Tree t = tree_from_newick("((a:1,b:2)c:3);", true);
    CHECK(plane_equal(t, testing::nw("((:1,:2):3);"), 0.0));
}

TEST_CASE("json layout") {
    CHECK(tree_to_json(Tree::empty()) == R"({"root_stem_length":null,"embedded":false,"tree":null})");
    CHECK(tree_to_json(testing::nw("((,));")) ==
          R"({"root_stem_length":null,"embedded":true,"tree":{"length":null,"children":[{"length":null,"children":[]},{"length":null,"children":[]}]}})");
}

TEST_CASE("json rejects partial lengths and wide vertices") {
    CHECK_THROWS(tree_from_json(R"({"tree":{"length":1,"children":[{"length":null,"children":[]}]}})"));
    CHECK_THROWS(tree_from_json(R"({"tree":{"children":[{},{},{}]}})"));
    CHECK_THROWS(tree_from_json("not json"));
}

TEST_CASE("json and newick round trips preserve shape and lengths") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        Tree t = testing::random_tree(rng, 400);
        if (i % 3 == 0) t.root_stem_length = 0.125 * i;
        Tree j = tree_from_json(tree_to_json(t));
        CHECK(plane_equal(j, t, 0.0));
        CHECK(j.root_stem_length == t.root_stem_length);
        Tree n = tree_from_json(tree_to_json(tree_from_newick(tree_to_newick(j), true)));
        CHECK(plane_equal(n, t, 1e-12));
        CHECK(n.root_stem_length == t.root_stem_length);
    }
}

TEST_CASE("jsonl round trip") {
    std::vector<Tree> trees{Tree::empty(), Tree::single_edge(2.0), testing::nw("((:1,:2):3);")};
    std::stringstream ss;
    write_jsonl(ss, trees);
    auto back = read_jsonl(ss);
    REQUIRE(back.size() == 3);
    CHECK(back[0].is_empty());
    CHECK(plane_equal(back[2], trees[2], 0.0));
}

TEST_CASE("csv round trips") {
    TimeSeries s{{0.0, 1.25, -3.5, 1e-300}};
    std::stringstream ss;
    write_series_csv(ss, s);
    CHECK(read_series_csv(ss).values == s.values);

    Excursion e{{0.0, 0.5, 2.0}, {0.0, 0.5, 0.0}};
    std::stringstream se;
    write_excursion_csv(se, e);
    auto back = read_excursion_csv(se);
    CHECK(back.times == e.times);
    CHECK(back.values == e.values);

    std::stringstream bad("k,value\n0,1\n2,3\n");
    CHECK_THROWS(read_series_csv(bad));
}

TEST_CASE("parameter documents") {
    auto p = ParamMap::parse_text("# comment\np = 0.4\n grid = 0.25, 0.5,1 \nname=x # trailing\n");
    CHECK(p.number("p") == 0.4);
    CHECK(p.numbers("grid") == std::vector<double>{0.25, 0.5, 1.0});
    CHECK(*p.get("name") == "x");
    CHECK(p.number("missing", 3.0) == 3.0);
    CHECK_THROWS(p.number("missing"));
    CHECK_THROWS(p.number("name"));
    CHECK_THROWS(ParamMap::parse_text("no equals sign"));
}

TEST_CASE("format_double is shortest round trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
