#include "depnet/csv_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace depnet {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

[[noreturn]] void malformed(const std::string& path, std::size_t line_no, const std::string& what) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

IngestResult ingest_dependency_csv(const std::string& edges_path, const std::string& nodes_path,
                                   const IngestOptions& options) {
  std::ifstream nodes_file(nodes_path);
  if (!nodes_file) throw DataError("cannot open nodes file: " + nodes_path);
  std::ifstream edges_file(edges_path);
  if (!edges_file) throw DataError("cannot open edges file: " + edges_path);

  IngestResult result;
  std::vector<std::string> cov_names;
  std::vector<std::string> repo_names;
  std::vector<std::vector<Scalar>> raw_rows;
  std::unordered_map<std::string, Index> index_of;
  std::unordered_map<std::string, bool> filtered_out;

  std::string line;
  std::size_t line_no = 0;
  bool have_nodes_header = false;
  while (std::getline(nodes_file, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_nodes_header) {
      if (fields.empty() || fields[0] != "repo")
        malformed(nodes_path, line_no, "expected header starting with 'repo'");
      cov_names.assign(fields.begin() + 1, fields.end());
      have_nodes_header = true;
      continue;
    }
    if (fields.size() != cov_names.size() + 1)
      malformed(nodes_path, line_no, "expected " + std::to_string(cov_names.size() + 1) +
                                         " fields, got " + std::to_string(fields.size()));
    const std::string& repo = fields[0];
    if (repo.empty()) malformed(nodes_path, line_no, "empty repo name");
    if (index_of.count(repo) || filtered_out.count(repo))
      malformed(nodes_path, line_no, "duplicate repo '" + repo + "'");

    std::vector<Scalar> row(cov_names.size(), std::numeric_limits<Scalar>::quiet_NaN());
    for (std::size_t p = 0; p < cov_names.size(); ++p) {
      if (fields[p + 1].empty()) continue;  // missing
      try {
        std::size_t pos = 0;
        row[p] = std::stod(fields[p + 1], &pos);
        if (pos != fields[p + 1].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        malformed(nodes_path, line_no, "bad numeric value '" + fields[p + 1] + "'");
      }
    }

    bool keep = true;
    for (std::size_t p = 0; p < cov_names.size() && keep; ++p) {
      if (std::isnan(row[p])) continue;
      auto lo = options.min_value.find(cov_names[p]);
      if (lo != options.min_value.end() && row[p] < lo->second) keep = false;
      auto hi = options.max_value.find(cov_names[p]);
      if (hi != options.max_value.end() && row[p] > hi->second) keep = false;
    }
    if (!keep) {
      filtered_out.emplace(repo, true);
      continue;
    }
    index_of.emplace(repo, static_cast<Index>(repo_names.size()));
    repo_names.push_back(repo);
    raw_rows.push_back(std::move(row));
  }

  std::vector<std::pair<Index, Index>> edges;
  line_no = 0;
  bool have_edges_header = false;
  auto resolve = [&](const std::string& repo) -> std::optional<Index> {
    if (filtered_out.count(repo)) return std::nullopt;
    auto it = index_of.find(repo);
    if (it != index_of.end()) return it->second;
    const auto idx = static_cast<Index>(repo_names.size());
    index_of.emplace(repo, idx);
    repo_names.push_back(repo);
    raw_rows.emplace_back(cov_names.size(), std::numeric_limits<Scalar>::quiet_NaN());
    result.warnings.push_back("repo '" + repo + "' appears only in edges; covariates missing");
    return idx;
  };
  while (std::getline(edges_file, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_edges_header) {
      if (fields.size() != 2 || fields[0] != "source_repo" || fields[1] != "target_repo")
        malformed(edges_path, line_no, "expected header 'source_repo,target_repo'");
      have_edges_header = true;
      continue;
    }
    if (fields.size() != 2)
      malformed(edges_path, line_no, "expected 2 fields, got " + std::to_string(fields.size()) +
                                         " (commas in repo names are not supported)");
    if (fields[0].empty() || fields[1].empty()) malformed(edges_path, line_no, "empty repo name");
    auto s = resolve(fields[0]);
    auto t = resolve(fields[1]);
    if (s && t && *s != *t) edges.emplace_back(*s, *t);
  }

  if (repo_names.empty()) throw DataError("no nodes");

  const auto n = static_cast<Index>(repo_names.size());
  const auto p_count = static_cast<int>(cov_names.size());
  Matrix raw(n, p_count);
  std::vector<std::vector<bool>> missing(static_cast<std::size_t>(p_count),
                                         std::vector<bool>(static_cast<std::size_t>(n), false));
  IntMatrix codes = IntMatrix::Zero(n, p_count);
  for (int p = 0; p < p_count; ++p) {
    std::vector<Scalar> present;
    for (Index i = 0; i < n; ++i) {
      raw(i, p) = raw_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
      if (std::isnan(raw(i, p)))
        missing[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] = true;
      else
        present.push_back(raw(i, p));
    }
    if (present.empty()) continue;  // all missing: codes stay 0, all flagged
    auto present_codes = discretize_quartiles(present, options.quantile_categories);
    std::size_t next = 0;
    for (Index i = 0; i < n; ++i)
      if (!missing[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)])
        codes(i, p) = present_codes[next++];
  }

  result.graph = DependencyGraph::from_edges(n, edges, std::move(repo_names));
  result.covariates =
      CovariateTable(std::move(cov_names), std::move(codes), std::move(raw), std::move(missing));
  return result;
}

std::vector<int> read_labels_csv(const std::string& path, const DependencyGraph& graph) {
  std::ifstream file(path);
  if (!file) throw DataError("cannot open labels file: " + path);
  std::unordered_map<std::string, Index> index_of;
  for (Index i = 0; i < graph.node_count(); ++i) index_of.emplace(graph.name(i), i);

  std::vector<int> labels(static_cast<std::size_t>(graph.node_count()), -1);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(file, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      if (fields.size() != 2 || fields[0] != "repo" || fields[1] != "label")
        malformed(path, line_no, "expected header 'repo,label'");
      have_header = true;
      continue;
    }
    if (fields.size() != 2) malformed(path, line_no, "expected 2 fields");
    auto it = index_of.find(fields[0]);
    if (it == index_of.end()) malformed(path, line_no, "unknown repo '" + fields[0] + "'");
    int label = -1;
    try {
      std::size_t pos = 0;
      label = std::stoi(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      malformed(path, line_no, "bad label '" + fields[1] + "'");
    }
    if (label < 0) malformed(path, line_no, "labels must be non-negative");
    labels[static_cast<std::size_t>(it->second)] = label;
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0)
      throw DataError(path + ": no label for repo '" + graph.name(static_cast<Index>(i)) + "'");
  return labels;
}

void write_edges_csv(const std::string& path, const DependencyGraph& graph) {
  std::ofstream file(path);
  if (!file) throw DataError("cannot write " + path);
  file << "source_repo,target_repo\n";
  for (Index i = 0; i < graph.node_count(); ++i)
    for (Index j : graph.out_edges(i)) file << graph.name(i) << ',' << graph.name(j) << '\n';
}

void write_labels_csv(const std::string& path, const DependencyGraph& graph,
                      const std::vector<int>& labels) {
  if (labels.size() != static_cast<std::size_t>(graph.node_count()))
    throw DataError("label count does not match node count");
  std::ofstream file(path);
  if (!file) throw DataError("cannot write " + path);
  file << "repo,label\n";
  for (Index i = 0; i < graph.node_count(); ++i)
    file << graph.name(i) << ',' << labels[static_cast<std::size_t>(i)] << '\n';
}

}  // namespace depnet
