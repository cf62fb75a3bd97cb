#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "pronog/graph.hpp"
#include "pronog/graph_io.hpp"

using namespace pronog;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "pronog_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto path = scratch_dir() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("graph file parses into the expected CSR") {
  const auto path = write_file("basic.graph",
                               "# toy fixture\n"
                               "nodes 3 features 2 classes none\n"
                               "node 0 1.0 0.0\n"
                               "node 1 0.0 1.0\n"
                               "node 2 0.5 0.5\n"
                               "edges\n"
                               "0 1\n"
                               "1 2\n");
  const Graph g = load_graph(path);
  REQUIRE(g.num_nodes == 3);
  REQUIRE(g.row_offsets == std::vector<std::size_t>{0, 1, 3, 4});
  REQUIRE(g.features.at(2, 0) == 0.5);
  REQUIRE_FALSE(g.has_labels());
}

TEST_CASE("duplicate edges collapse to one") {
  const auto path = write_file("dup.graph",
                               "nodes 2 features 1 classes none\n"
                               "node 0 0\n"
                               "node 1 0\n"
                               "edges\n"
                               "0 1\n"
                               "1 0\n"
                               "0 1\n");
  const Graph g = load_graph(path);
  REQUIRE(g.num_undirected_edges() == 1);
}

TEST_CASE("labeled graph round-trips through save and load") {
  const Graph g = planted_homophily_graph(25, 3, 0.4, 3.0, 17);
  const auto path = (scratch_dir() / "roundtrip.graph").string();
  save_graph(g, path);
  const Graph back = load_graph(path);
  REQUIRE(back.num_nodes == g.num_nodes);
  REQUIRE(back.row_offsets == g.row_offsets);
  REQUIRE(back.col_indices == g.col_indices);
  REQUIRE(back.labels == g.labels);
  REQUIRE(back.num_classes == g.num_classes);
  REQUIRE(back.features == g.features);  // bit-exact via max_digits10
}

TEST_CASE("parse errors carry the line number") {
  const auto bad_edge = write_file("bad_edge.graph",
                                   "nodes 3 features 1 classes none\n"
                                   "node 0 0\n"
                                   "node 1 0\n"
                                   "node 2 0\n"
                                   "edges\n"
                                   "0 7\n");
  REQUIRE_THROWS_WITH(load_graph(bad_edge),
                      Catch::Matchers::ContainsSubstring("node index out of range") &&
                          Catch::Matchers::ContainsSubstring(":6"));

  const auto bad_feature = write_file("bad_feature.graph",
                                      "nodes 1 features 1 classes none\n"
                                      "node 0 abc\n"
                                      "edges\n");
  REQUIRE_THROWS_WITH(load_graph(bad_feature),
                      Catch::Matchers::ContainsSubstring("non-numeric feature") &&
                          Catch::Matchers::ContainsSubstring(":2"));

  const auto bad_header = write_file("bad_header.graph", "vertices 3\n");
  REQUIRE_THROWS_WITH(load_graph(bad_header),
                      Catch::Matchers::ContainsSubstring("malformed header"));

  const auto dup_node = write_file("dup_node.graph",
                                   "nodes 2 features 1 classes none\n"
                                   "node 0 0\n"
                                   "node 0 1\n"
                                   "edges\n");
  REQUIRE_THROWS_WITH(load_graph(dup_node),
                      Catch::Matchers::ContainsSubstring("duplicate node id"));

  const auto label_no_classes = write_file("label_none.graph",
                                           "nodes 1 features 1 classes none\n"
                                           "node 0 0 label 0\n"
                                           "edges\n");
  REQUIRE_THROWS_AS(load_graph(label_no_classes), data_error);

  const auto label_oob = write_file("label_oob.graph",
                                    "nodes 1 features 1 classes 2\n"
                                    "node 0 0 label 5\n"
                                    "edges\n");
  REQUIRE_THROWS_WITH(load_graph(label_oob),
                      Catch::Matchers::ContainsSubstring("declared class count"));

  const auto partial = write_file("partial_labels.graph",
                                  "nodes 2 features 1 classes 2\n"
                                  "node 0 0 label 1\n"
                                  "node 1 0\n"
                                  "edges\n");
  REQUIRE_THROWS_WITH(load_graph(partial),
                      Catch::Matchers::ContainsSubstring("all-or-none"));
}

TEST_CASE("collection round-trips through a directory") {
  GraphCollection col;
  col.num_classes = 2;
  col.graphs.push_back(Graph::build(2, {{0, 1}}, Matrix(2, 1)));
  col.graphs.push_back(Graph::build(3, {{0, 1}, {1, 2}}, Matrix(3, 1)));
  col.graph_labels = {0, 1};

  const auto dir = (scratch_dir() / "collection").string();
  std::filesystem::remove_all(dir);
  save_collection(col, dir);
  const GraphCollection back = load_collection(dir);
  REQUIRE(back.graphs.size() == 2);
  REQUIRE(back.graph_labels == col.graph_labels);
  REQUIRE(back.num_classes == 2);
  REQUIRE(back.graphs[1].num_undirected_edges() == 2);
}

TEST_CASE("collection index errors") {
  const auto dir = scratch_dir() / "bad_collection";
  std::filesystem::create_directories(dir);
  {
    std::ofstream index(dir / "collection.txt");
    index << "missing.graph 0\n";
  }
  REQUIRE_THROWS_AS(load_collection(dir.string()), data_error);

  const auto empty_dir = scratch_dir() / "empty_collection";
  std::filesystem::create_directories(empty_dir);
  { std::ofstream index(empty_dir / "collection.txt"); }
  REQUIRE_THROWS_WITH(load_collection(empty_dir.string()),
                      Catch::Matchers::ContainsSubstring("empty collection"));
}
