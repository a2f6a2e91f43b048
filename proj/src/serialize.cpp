#include "depnet/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "depnet/components.hpp"

namespace depnet {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'D', 'N', 'E', 'T', 'G', '1', '\n', '\0'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated graph binary");
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw DataError("truncated graph binary");
  return s;
}

ordered_json summary_row_json(const SummaryRow& row) {
  return ordered_json{{"mean", row.mean}, {"std_dev", row.std_dev}, {"min", row.min},
                      {"p5", row.p5},     {"median", row.median},   {"p95", row.p95},
                      {"max", row.max}};
}

}  // namespace

void write_graph_binary(const std::string& path, const DependencyGraph& graph,
                        const CovariateTable& cov) {
  if (cov.row_count() != graph.node_count())
    throw DataError("covariate rows do not match node count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  const auto n = static_cast<std::uint64_t>(graph.node_count());
  const auto e = static_cast<std::uint64_t>(graph.edge_count());
  const auto p = static_cast<std::uint32_t>(cov.covariate_count());
  write_pod(out, n);
  write_pod(out, e);
  write_pod(out, p);
  for (Index i = 0; i < graph.node_count(); ++i) write_string(out, graph.name(i));
  for (Index i = 0; i < graph.node_count(); ++i) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(graph.out_degree(i)));
    for (Index j : graph.out_edges(i)) write_pod<std::int32_t>(out, j);
  }
  for (std::uint32_t c = 0; c < p; ++c) write_string(out, cov.names()[c]);
  for (Index i = 0; i < graph.node_count(); ++i)
    for (std::uint32_t c = 0; c < p; ++c) {
      write_pod<double>(out, cov.raw()(i, static_cast<int>(c)));
      write_pod<std::int32_t>(out, cov.code(i, static_cast<int>(c)));
      write_pod<std::uint8_t>(out, cov.is_missing(i, static_cast<int>(c)) ? 1 : 0);
    }
  if (!out) throw DataError("write failed: " + path);
}

std::pair<DependencyGraph, CovariateTable> read_graph_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError(path + " is not a depnet graph binary");
  const auto n = static_cast<Index>(read_pod<std::uint64_t>(in));
  const auto e = read_pod<std::uint64_t>(in);
  const auto p = static_cast<int>(read_pod<std::uint32_t>(in));

  std::vector<std::string> names(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) names[static_cast<std::size_t>(i)] = read_string(in);
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(e);
  for (Index i = 0; i < n; ++i) {
    const auto deg = read_pod<std::uint32_t>(in);
    for (std::uint32_t d = 0; d < deg; ++d) edges.emplace_back(i, read_pod<std::int32_t>(in));
  }
  std::vector<std::string> cov_names(static_cast<std::size_t>(p));
  for (int c = 0; c < p; ++c) cov_names[static_cast<std::size_t>(c)] = read_string(in);
  Matrix raw(n, p);
  IntMatrix codes(n, p);
  std::vector<std::vector<bool>> missing(static_cast<std::size_t>(p),
                                         std::vector<bool>(static_cast<std::size_t>(n), false));
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < p; ++c) {
      raw(i, c) = read_pod<double>(in);
      codes(i, c) = read_pod<std::int32_t>(in);
      missing[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] =
          read_pod<std::uint8_t>(in) != 0;
    }
  auto graph = DependencyGraph::from_edges(n, edges, std::move(names));
  if (static_cast<std::uint64_t>(graph.edge_count()) != e)
    throw DataError("edge count mismatch in " + path);
  return {std::move(graph),
          CovariateTable(std::move(cov_names), std::move(codes), std::move(raw),
                         std::move(missing))};
}

std::string stats_json(const DependencyGraph& graph, const DegreeSummary& summary) {
  ordered_json j;
  j["nodes"] = graph.node_count();
  j["edges"] = graph.edge_count();
  j["weak_components"] = weak_component_count(graph);
  j["in_degree"] = summary_row_json(summary.in_degree);
  j["out_degree"] = summary_row_json(summary.out_degree);
  j["eigenvector_centrality"] = summary_row_json(summary.eigenvector);
  j["eigenvector_converged"] = summary.eigenvector_converged;
  return j.dump(2) + "\n";
}

std::string params_json(const StructuralParams& params,
                        const std::vector<std::string>& covariate_names) {
  params.validate();
  ordered_json j;
  j["alpha_within"] = params.alpha_within;
  j["alpha_between"] = params.alpha_between;
  j["beta_within"] = std::vector<Scalar>(params.beta_within.begin(), params.beta_within.end());
  j["beta_between"] = std::vector<Scalar>(params.beta_between.begin(), params.beta_between.end());
  j["gamma"] = params.gamma;
  j["eta"] = std::vector<Scalar>(params.eta.begin(), params.eta.end());
  j["covariates"] = covariate_names;
  return j.dump(2) + "\n";
}

std::pair<StructuralParams, std::vector<std::string>> params_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  StructuralParams p;
  p.alpha_within = j.at("alpha_within").get<Scalar>();
  p.alpha_between = j.at("alpha_between").get<Scalar>();
  const auto bw = j.at("beta_within").get<std::vector<Scalar>>();
  const auto bb = j.at("beta_between").get<std::vector<Scalar>>();
  p.beta_within = Eigen::Map<const Vector>(bw.data(), static_cast<Eigen::Index>(bw.size()));
  p.beta_between = Eigen::Map<const Vector>(bb.data(), static_cast<Eigen::Index>(bb.size()));
  p.gamma = j.at("gamma").get<Scalar>();
  if (j.contains("eta")) {
    const auto eta = j.at("eta").get<std::vector<Scalar>>();
    p.eta = Eigen::Map<const Vector>(eta.data(), static_cast<Eigen::Index>(eta.size()));
  }
  std::vector<std::string> names;
  if (j.contains("covariates")) names = j.at("covariates").get<std::vector<std::string>>();
  p.validate();
  return {std::move(p), std::move(names)};
}

std::string state_json(const VariationalState& state) {
  ordered_json j;
  j["nodes"] = state.xi.rows();
  j["types"] = state.xi.cols();
  j["covariates"] = state.pi.covariate_count;
  std::vector<Scalar> xi_flat;
  xi_flat.reserve(static_cast<std::size_t>(state.xi.size()));
  for (Eigen::Index i = 0; i < state.xi.rows(); ++i)
    for (Eigen::Index k = 0; k < state.xi.cols(); ++k) xi_flat.push_back(state.xi(i, k));
  j["xi_row_major"] = xi_flat;
  j["eta"] = std::vector<Scalar>(state.eta.begin(), state.eta.end());
  ordered_json cells = ordered_json::array();
  for (int x = 0; x < state.pi.cell_count(); ++x) {
    ordered_json cell;
    cell["cell"] = x;
    std::vector<Scalar> probs;
    const Matrix& m = state.pi.link_prob[static_cast<std::size_t>(x)];
    for (Eigen::Index k = 0; k < m.rows(); ++k)
      for (Eigen::Index l = 0; l < m.cols(); ++l) probs.push_back(m(k, l));
    cell["link_prob_row_major"] = probs;
    cells.push_back(cell);
  }
  j["pi"] = cells;
  j["lower_bound_trace"] = state.lower_bound_trace;
  j["iterations"] = state.iterations;
  j["converged"] = state.converged;
  return j.dump(2) + "\n";
}

VariationalState state_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  VariationalState state;
  const auto n = j.at("nodes").get<Eigen::Index>();
  const auto k = j.at("types").get<Eigen::Index>();
  const auto p = j.at("covariates").get<int>();
  const auto xi_flat = j.at("xi_row_major").get<std::vector<Scalar>>();
  if (xi_flat.size() != static_cast<std::size_t>(n * k))
    throw DataError("checkpoint xi size mismatch");
  state.xi.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      state.xi(i, c) = xi_flat[static_cast<std::size_t>(i * k + c)];
  const auto eta = j.at("eta").get<std::vector<Scalar>>();
  state.eta = Eigen::Map<const Vector>(eta.data(), static_cast<Eigen::Index>(eta.size()));
  state.pi.type_count = static_cast<int>(k);
  state.pi.covariate_count = p;
  state.pi.link_prob.resize(static_cast<std::size_t>(1) << p);
  state.pi.empty.assign(static_cast<std::size_t>(1) << p,
                        std::vector<bool>(static_cast<std::size_t>(k * k), false));
  for (const auto& cell : j.at("pi")) {
    const auto x = cell.at("cell").get<int>();
    const auto probs = cell.at("link_prob_row_major").get<std::vector<Scalar>>();
    if (probs.size() != static_cast<std::size_t>(k * k))
      throw DataError("checkpoint pi size mismatch");
    Matrix m(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c) m(r, c) = probs[static_cast<std::size_t>(r * k + c)];
    state.pi.link_prob.at(static_cast<std::size_t>(x)) = std::move(m);
  }
  state.lower_bound_trace = j.at("lower_bound_trace").get<std::vector<Scalar>>();
  state.iterations = j.at("iterations").get<int>();
  state.converged = j.at("converged").get<bool>();
  return state;
}

namespace {

ordered_json logit_block_json(const LogitFit& fit, const std::vector<std::string>& names) {
  ordered_json block;
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    rows.push_back(ordered_json{{"name", names[k]},
                                {"estimate", fit.estimates[static_cast<Eigen::Index>(k)]},
                                {"std_error", fit.std_errors[static_cast<Eigen::Index>(k)]},
                                {"z", fit.z_values[static_cast<Eigen::Index>(k)]}});
  }
  block["parameters"] = rows;
  block["log_likelihood"] = fit.log_likelihood;
  block["rows"] = fit.rows;
  block["positives"] = fit.positives;
  block["iterations"] = fit.iterations;
  block["converged"] = fit.converged;
  if (!fit.diagnostic.empty()) block["diagnostic"] = fit.diagnostic;
  return block;
}

std::vector<std::string> within_names(const FitResult& fit) {
  std::vector<std::string> names{"alpha"};
  for (const auto& c : fit.covariate_names) names.push_back(c);
  names.push_back("gamma");
  return names;
}

std::vector<std::string> between_names(const FitResult& fit) {
  std::vector<std::string> names{"alpha"};
  for (const auto& c : fit.covariate_names) names.push_back(c);
  return names;
}

}  // namespace

std::string fit_json(const FitResult& fit) {
  ordered_json j;
  j["within"] = fit.within ? logit_block_json(*fit.within, within_names(fit))
                           : ordered_json(nullptr);
  j["between"] = fit.between ? logit_block_json(*fit.between, between_names(fit))
                             : ordered_json(nullptr);
  j["log_pseudolikelihood"] = fit.log_pseudolikelihood;
  j["converged"] = fit.converged;
  return j.dump(2) + "\n";
}

std::string fit_csv(const FitResult& fit) {
  std::string out = "stratum,parameter,estimate,std_error,z\n";
  auto emit = [&out](const std::string& stratum, const std::vector<std::string>& names,
                     const LogitFit& block) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      out += stratum + "," + names[k] + "," +
             format_number(block.estimates[static_cast<Eigen::Index>(k)]) + "," +
             format_number(block.std_errors[static_cast<Eigen::Index>(k)]) + "," +
             format_number(block.z_values[static_cast<Eigen::Index>(k)]) + "\n";
    }
  };
  if (fit.within) emit("within", within_names(fit), *fit.within);
  if (fit.between) emit("between", between_names(fit), *fit.between);
  return out;
}

std::string contagion_summaries_json(const ContagionReport& report) {
  ordered_json j;
  ordered_json per_k = ordered_json::array();
  for (std::size_t ki = 0; ki < report.k_list.size(); ++ki) {
    const auto& s = report.summaries[ki];
    per_k.push_back(ordered_json{{"k", report.k_list[ki]},
                                 {"mean", s.mean},
                                 {"std_dev", s.std_dev},
                                 {"median", s.median},
                                 {"p5", s.p5},
                                 {"p95", s.p95},
                                 {"p99", s.p99},
                                 {"max", s.max}});
  }
  j["systemicness"] = per_k;
  ordered_json curves = ordered_json::array();
  for (const auto& point : report.curves) {
    curves.push_back(ordered_json{{"strategy", point.strategy},
                                  {"l", point.protected_count},
                                  {"k", point.k},
                                  {"avg_systemicness", point.avg_systemicness},
                                  {"avg_excluding_protected", point.avg_excluding_protected}});
  }
  j["protection"] = curves;
  return j.dump(2) + "\n";
}

std::string contagion_pernode_csv(const DependencyGraph& graph, const ContagionReport& report) {
  std::string header = "repo";
  for (int k : report.k_list) header += ",syst_" + std::to_string(k);
  header += ",ef,betweenness,expected_systemicness\n";
  std::string out = header;
  for (Index i = 0; i < graph.node_count(); ++i) {
    out += graph.name(i);
    for (std::size_t ki = 0; ki < report.k_list.size(); ++ki)
      out += "," + std::to_string(report.syst[ki][static_cast<std::size_t>(i)]);
    out += "," + format_number(report.expected_fatality[static_cast<std::size_t>(i)]);
    out += "," + format_number(report.betweenness_norm[static_cast<std::size_t>(i)]);
    out += "," + format_number(report.expected_systemicness[static_cast<std::size_t>(i)]);
    out += "\n";
  }
  return out;
}

std::string protection_curves_csv(const ContagionReport& report) {
  std::string out = "strategy,l,k,avg_systemicness,avg_excluding_protected\n";
  for (const auto& point : report.curves) {
    out += point.strategy + "," + std::to_string(point.protected_count) + "," +
           std::to_string(point.k) + "," + format_number(point.avg_systemicness) + "," +
           format_number(point.avg_excluding_protected) + "\n";
  }
  return out;
}

std::string format_number(Scalar value) {
  return nlohmann::json(value).dump();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace depnet
