#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "envelope/graph.hpp"
#include "oracles.hpp"

using namespace envelope;

TEST_CASE("edge list: three-cycle") {
  const Digraph g = parse_edge_list("0 1\n1 2\n2 0", EdgeListFormat::plain);
  CHECK(g.size() == 3);
  CHECK(g.edges().size() == 3);
  CHECK(g.has_edge(2, 0));
  CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("edge list: duplicate edge rejected") {
  CHECK_THROWS_AS(parse_edge_list("0 1\n0 1", EdgeListFormat::plain), ValidationError);
}

TEST_CASE("edge list: errors carry line numbers") {
  try {
    parse_edge_list("0 1\n# note\n1 x\n", EdgeListFormat::plain);
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_edge_list("0 -1", EdgeListFormat::plain), ValidationError);
  CHECK_THROWS_AS(parse_edge_list("0 5", EdgeListFormat::plain, 3), ValidationError);
}

TEST_CASE("edge list: csv with weights and explicit size") {
  const Digraph g = parse_edge_list("src,dst,weight\n0,1,2.5\n2,0\n", EdgeListFormat::csv, 5);
  CHECK(g.size() == 5);
  CHECK(g.weight(0, 1) == 2.5);
  CHECK(g.weight(2, 0) == 1.0);
  CHECK(g.weight(1, 0) == 0.0);
}

TEST_CASE("edge list: format and json round trip") {
  std::mt19937 rng(7);
  for (int t = 0; t < 20; ++t) {
    const Digraph g = oracle::random_digraph(rng, 1 + rng() % 9, 0.3, true);
    const Digraph back = parse_edge_list(format_edge_list(g), EdgeListFormat::plain, g.size());
    CHECK(back == g);
    CHECK(digraph_from_json(to_json(g)) == g);
  }
}

TEST_CASE("edge list: load from file") {
  const auto path = std::filesystem::temp_directory_path() / "envelope_graph_test.txt";
  {
    std::ofstream out(path);
    out << "# tiny\n0 1\n1 0 3\n";
  }
  const Digraph g = load_edge_list(path, EdgeListFormat::plain);
  std::filesystem::remove(path);
  CHECK(g.size() == 2);
  CHECK(g.weight(1, 0) == 3.0);
  CHECK_THROWS_AS(load_edge_list(path, EdgeListFormat::plain), ValidationError);
}

TEST_CASE("adjacency orientation") {
  Matrix expect(3, 3);
  expect << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK(adjacency(cycle_digraph(3)) == expect);
  CHECK(adjacency(Digraph(2)) == Matrix::Zero(2, 2));

  // line digraph: backward shift, ones on the superdiagonal
  const Matrix s = adjacency(line_digraph(4));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(s(i, j) == (j == i + 1 ? 1.0 : 0.0));
  }
}

TEST_CASE("from_adjacency inverts adjacency") {
  std::mt19937 rng(3);
  for (int t = 0; t < 10; ++t) {
    const Digraph g = oracle::random_digraph(rng, 6, 0.4, true);
    CHECK(Digraph::from_adjacency(adjacency(g)) == g);
  }
}

TEST_CASE("with_edges collision handling") {
  const Digraph g = cycle_digraph(3);
  const std::vector<Edge> extra{{0, 1, 2.0}};
  CHECK_THROWS_AS(g.with_edges(extra, false), ValidationError);
  CHECK(g.with_edges(extra, true).weight(0, 1) == 3.0);
  const std::vector<Edge> fresh{{0, 2, 1.0}};
  CHECK(g.with_edges(fresh, false).edges().size() == 4);
}

TEST_CASE("degrees") {
  const Digraph g(4, {{1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}});
  CHECK(g.in_degrees() == std::vector<std::size_t>{3, 0, 0, 0});
  CHECK(g.out_degrees() == std::vector<std::size_t>{0, 1, 1, 1});
}

TEST_CASE("rank profile") {
  const auto shift = rank_profile(adjacency(line_digraph(5)));
  CHECK(shift.rank == 4);
  CHECK(shift.nullity == 1);
  const auto id = rank_profile(Matrix::Identity(3, 3));
  CHECK(id.rank == 3);
  CHECK(id.nullity == 0);
  CHECK_THROWS_AS(rank_profile(Matrix::Zero(2, 3)), ValidationError);
}

TEST_CASE("rank profile agrees with exact rank on random 0/1 matrices") {
  std::mt19937 rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 9;
    const Matrix a = adjacency(oracle::random_digraph(rng, n, 0.3, true));
    CHECK(rank_profile(a).rank == oracle::rank(oracle::to_int(a)));
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 74.98942093, -2.5e-300, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(1.0) == "1");
}
