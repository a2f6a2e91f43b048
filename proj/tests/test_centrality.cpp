#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "depnet/centrality.hpp"
#include "oracles.hpp"

using namespace depnet;

TEST_CASE("chain degree stats") {
  auto g = DependencyGraph::from_edges(3, {{0, 1}, {1, 2}});
  auto s = degree_stats(g);
  CHECK(s.out_degree.mean == doctest::Approx(2.0 / 3.0));
  CHECK(s.in_degree.mean == doctest::Approx(2.0 / 3.0));
  CHECK(s.out_degree.max == 1);
  CHECK(s.in_degree.max == 1);
}

TEST_CASE("edgeless graph: every statistic is zero") {
  auto g = DependencyGraph::from_edges(4, {});
  auto s = degree_stats(g);
  for (const SummaryRow* row : {&s.in_degree, &s.out_degree}) {
    CHECK(row->mean == 0);
    CHECK(row->std_dev == 0);
    CHECK(row->min == 0);
    CHECK(row->p5 == 0);
    CHECK(row->median == 0);
    CHECK(row->p95 == 0);
    CHECK(row->max == 0);
  }
}

TEST_CASE("degree sums match the edge count") {
  auto g = oracles::random_graph(30, 0.1, 99);
  auto s = degree_stats(g);
  CHECK(s.in_degree.mean * 30 == doctest::Approx(static_cast<Scalar>(g.edge_count())));
  CHECK(s.out_degree.mean * 30 == doctest::Approx(static_cast<Scalar>(g.edge_count())));
}

TEST_CASE("star: hub saturates, leaves equal and below") {
  // leaves 1..3 depend on hub 0
  auto g = DependencyGraph::from_edges(4, {{1, 0}, {2, 0}, {3, 0}});
  auto c = eigenvector_centrality(g);
  CHECK(c.scores[0] == doctest::Approx(1.0));
  CHECK(c.scores[1] == c.scores[2]);
  CHECK(c.scores[2] == c.scores[3]);
  CHECK(c.scores[1] < 1.0);
  CHECK_FALSE(c.converged);  // purely feed-forward mass collapses
}

TEST_CASE("edgeless graph scores zero and converges by convention") {
  auto g = DependencyGraph::from_edges(3, {});
  auto c = eigenvector_centrality(g);
  CHECK(c.converged);
  for (Scalar v : c.scores) CHECK(v == 0.0);
}

TEST_CASE("matches the dominant eigenvector on a strongly connected graph") {
  // aperiodic strongly connected: ring 0->1->2->3->0 with chords 0->2, 1->3, 3->1
  auto g = DependencyGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}, {3, 1}});
  auto c = eigenvector_centrality(g, 1e-14, 5000);
  REQUIRE(c.converged);

  Matrix at = Matrix::Zero(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j : g.out_edges(i)) at(j, i) = 1.0;
  Eigen::EigenSolver<Matrix> solver(at);
  int dominant = 0;
  for (int k = 1; k < 4; ++k)
    if (solver.eigenvalues()[k].real() > solver.eigenvalues()[dominant].real()) dominant = k;
  Vector v = solver.eigenvectors().col(dominant).real().cwiseAbs();
  v /= v.maxCoeff();
  for (Index i = 0; i < 4; ++i) CHECK(c.scores[static_cast<std::size_t>(i)] ==
                                      doctest::Approx(v[i]).epsilon(1e-6));
}

TEST_CASE("normalization: max equals one whenever any score is positive") {
  auto g = oracles::random_graph(25, 0.15, 4242);
  auto c = eigenvector_centrality(g, 1e-12, 2000);
  Scalar mx = 0;
  for (Scalar v : c.scores) mx = std::max(mx, v);
  if (mx > 0) CHECK(mx == doctest::Approx(1.0));
}
