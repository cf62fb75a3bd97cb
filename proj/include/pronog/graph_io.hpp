#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pronog/error.hpp"
#include "pronog/graph.hpp"

namespace pronog {

// Canonical graph file, UTF-8 text:
//   nodes <N> features <d> classes <C|none>
//   node <id> <f_1> ... <f_d> [label <c>]     (N lines)
//   edges
//   <u> <v>                                   (one per line)
// `#` starts a comment; blank lines are skipped.
// Collections are a directory of such files plus collection.txt with
// `<filename> <graph_label|none>` per line.

namespace detail {

inline data_error io_error(const std::string& path, std::size_t line, const std::string& what) {
  return data_error(path + ":" + std::to_string(line) + ": " + what);
}

inline std::string strip_comment(std::string line) {
  const auto pos = line.find('#');
  if (pos != std::string::npos) line.erase(pos);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
  return line;
}

inline bool parse_size(const std::string& tok, std::size_t& out) {
  if (tok.empty()) return false;
  for (char ch : tok)
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  try {
    out = std::stoull(tok);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

inline bool parse_real(const std::string& tok, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("load_graph: cannot open " + path);

  std::size_t lineno = 0;
  std::string line;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      ++lineno;
      out = detail::strip_comment(line);
      if (!out.empty()) return true;
    }
    return false;
  };

  std::string content;
  if (!next_line(content)) throw data_error("load_graph: empty file " + path);

  std::istringstream hdr(content);
  std::string kw_nodes, kw_features, kw_classes, n_tok, d_tok, c_tok;
  hdr >> kw_nodes >> n_tok >> kw_features >> d_tok >> kw_classes >> c_tok;
  std::size_t n = 0, d = 0, declared_classes = 0;
  bool has_class_decl = false;
  if (kw_nodes != "nodes" || kw_features != "features" || kw_classes != "classes" ||
      !detail::parse_size(n_tok, n) || !detail::parse_size(d_tok, d))
    throw detail::io_error(path, lineno, "malformed header, expected 'nodes <N> features <d> classes <C|none>'");
  if (c_tok == "none") {
    has_class_decl = false;
  } else if (detail::parse_size(c_tok, declared_classes)) {
    has_class_decl = true;
  } else {
    throw detail::io_error(path, lineno, "malformed class count '" + c_tok + "'");
  }

  Matrix feats(n, d);
  std::vector<int> labels;
  std::vector<bool> seen(n, false);
  std::size_t labeled = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (!next_line(content)) throw detail::io_error(path, lineno, "expected " + std::to_string(n) + " node lines");
    std::istringstream ls(content);
    std::string kw, id_tok;
    ls >> kw >> id_tok;
    std::size_t id = 0;
    if (kw != "node" || !detail::parse_size(id_tok, id))
      throw detail::io_error(path, lineno, "malformed node line");
    if (id >= n) throw detail::io_error(path, lineno, "node index out of range");
    if (seen[id]) throw detail::io_error(path, lineno, "duplicate node id " + id_tok);
    seen[id] = true;
    for (std::size_t j = 0; j < d; ++j) {
      std::string tok;
      if (!(ls >> tok)) throw detail::io_error(path, lineno, "expected " + std::to_string(d) + " feature values");
      double val = 0.0;
      if (!detail::parse_real(tok, val))
        throw detail::io_error(path, lineno, "non-numeric feature token '" + tok + "'");
      feats.at(id, j) = val;
    }
    std::string trailer;
    if (ls >> trailer) {
      if (trailer != "label") throw detail::io_error(path, lineno, "unexpected token '" + trailer + "'");
      std::string c_str;
      std::size_t cls = 0;
      if (!(ls >> c_str) || !detail::parse_size(c_str, cls))
        throw detail::io_error(path, lineno, "malformed label");
      if (!has_class_decl)
        throw detail::io_error(path, lineno, "label given but header declares 'classes none'");
      if (cls >= declared_classes)
        throw detail::io_error(path, lineno, "label index " + c_str + " >= declared class count " +
                                                 std::to_string(declared_classes));
      if (labels.empty()) labels.assign(n, -1);
      labels[id] = static_cast<int>(cls);
      ++labeled;
      if (ls >> trailer) throw detail::io_error(path, lineno, "unexpected token '" + trailer + "'");
    }
  }

  if (!labels.empty() && labeled != n)
    throw data_error(path + ": labels are all-or-none, " + std::to_string(labeled) + " of " +
                     std::to_string(n) + " nodes labeled");

  if (!next_line(content) || content != "edges")
    throw detail::io_error(path, lineno, "expected 'edges' marker");

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  while (next_line(content)) {
    std::istringstream es(content);
    std::string u_tok, v_tok, extra;
    es >> u_tok >> v_tok;
    std::size_t u = 0, v = 0;
    if (!detail::parse_size(u_tok, u) || !detail::parse_size(v_tok, v) || (es >> extra))
      throw detail::io_error(path, lineno, "malformed edge line");
    if (u >= n || v >= n) throw detail::io_error(path, lineno, "node index out of range");
    edges.emplace_back(u, v);  // self-loops dropped by Graph::build
  }

  return Graph::build(n, edges, std::move(feats), std::move(labels),
                      has_class_decl ? static_cast<int>(declared_classes) : 0);
}

inline void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("save_graph: cannot open " + path + " for writing");
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "nodes " << g.num_nodes << " features " << g.features.cols << " classes ";
  if (g.num_classes > 0)
    out << g.num_classes << "\n";
  else
    out << "none\n";
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    out << "node " << v;
    for (std::size_t j = 0; j < g.features.cols; ++j) out << ' ' << g.features.at(v, j);
    if (g.has_labels()) out << " label " << g.labels[v];
    out << "\n";
  }
  out << "edges\n";
  for (const auto& [u, v] : g.undirected_edges()) out << u << ' ' << v << "\n";
  if (!out) throw data_error("save_graph: write failed for " + path);
}

inline GraphCollection load_collection(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path index = fs::path(dir) / "collection.txt";
  std::ifstream in(index);
  if (!in) throw data_error("load_collection: cannot open " + index.string());

  GraphCollection col;
  std::size_t lineno = 0;
  std::size_t labeled = 0;
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string content = detail::strip_comment(raw);
    if (content.empty()) continue;
    std::istringstream ls(content);
    std::string fname, label_tok, extra;
    ls >> fname >> label_tok;
    if (fname.empty() || label_tok.empty() || (ls >> extra))
      throw detail::io_error(index.string(), lineno, "expected '<filename> <graph_label|none>'");
    col.graphs.push_back(load_graph((fs::path(dir) / fname).string()));
    if (label_tok == "none") {
      col.graph_labels.push_back(-1);
    } else {
      std::size_t cls = 0;
      if (!detail::parse_size(label_tok, cls))
        throw detail::io_error(index.string(), lineno, "malformed graph label '" + label_tok + "'");
      col.graph_labels.push_back(static_cast<int>(cls));
      col.num_classes = std::max(col.num_classes, static_cast<int>(cls) + 1);
      ++labeled;
    }
  }
  if (col.graphs.empty()) throw data_error("load_collection: empty collection in " + dir);
  if (labeled == 0) {
    col.graph_labels.clear();
  } else if (labeled != col.graphs.size()) {
    throw data_error("load_collection: graph labels are all-or-none in " + index.string());
  }
  return col;
}

inline void save_collection(const GraphCollection& col, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream index(fs::path(dir) / "collection.txt");
  if (!index) throw data_error("save_collection: cannot open index in " + dir);
  for (std::size_t i = 0; i < col.graphs.size(); ++i) {
    const std::string fname = "graph_" + std::to_string(i) + ".graph";
    save_graph(col.graphs[i], (fs::path(dir) / fname).string());
    index << fname << ' ';
    if (!col.graph_labels.empty() && col.graph_labels[i] >= 0)
      index << col.graph_labels[i] << "\n";
    else
      index << "none\n";
  }
}

}  // namespace pronog
