#include "mpmiqp/spp.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

ArcCostTable::ArcCostTable(std::size_t n) : n_(n), cost_((n + 2) * (n + 1) / 2, 0.0) {}

std::size_t ArcCostTable::slot(std::size_t i, std::size_t j) const {
  const std::size_t N = n_ + 2;
  return i * N - i * (i + 1) / 2 + (j - i - 1);
}

namespace {

double scalar_cost(const FactorizableSpec& s, const ProjectedMIQP& m, std::size_t i, std::size_t j) {
  // Nodes i, j >= 1; j == n+1 is the sink.
  const ScalarArc arc = scalar_arc(s, i - 1, j - 1);
  const double ai = m.a[i - 1];
  const double aj = j <= m.n ? m.a[j - 1] : 0.0;
  const double r = ai - arc.theta * aj;
  return m.c[i - 1] - 0.25 * arc.delta * r * r;
}

double block_cost(const BlockFactorizableSpec& s, const ProjectedMIQP& m, std::size_t i, std::size_t j) {
  const std::size_t d = m.d;
  const BlockArc arc = block_arc(s, i - 1, j - 1);
  Vector r(m.a.begin() + (i - 1) * d, m.a.begin() + i * d);
  if (j <= m.n) {
    const Vector shift = mat_vec(arc.theta, std::span<const double>(m.a).subspan((j - 1) * d, d));
    for (std::size_t k = 0; k < d; ++k) r[k] -= shift[k];
  }
  return m.c[i - 1] - 0.25 * dot(r, mat_vec(arc.delta, r));
}

double dense_cost(const ProjectedMIQP& m, std::size_t i, std::size_t j) {
  const Matrix lambda = std::visit([&](const auto& s) { return lambda_matrix(s, i - 1, j - 1); }, m.spec);
  return m.c[i - 1] - 0.25 * dot(m.a, mat_vec(lambda, m.a));
}

}  // namespace

ArcCostTable arc_costs(const ProjectedMIQP& m, ArcCostMethod method, unsigned threads) {
  require_assumption(m.spec);
  const std::size_t n = m.n;
  ArcCostTable table(n);
  auto fill_row = [&](std::size_t i) {
    for (std::size_t j = i + 1; j <= n + 1; ++j) {
      double v = 0.0;
      if (method == ArcCostMethod::dense_reference) {
        v = dense_cost(m, i, j);
      } else if (m.scalar()) {
        v = scalar_cost(m.scalar_spec(), m, i, j);
      } else {
        v = block_cost(m.block_spec(), m, i, j);
      }
      if (!std::isfinite(v)) {
        throw NumericalError("arc cost (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
      }
      table.set(i, j, v);
    }
  };
  // Row 0 stays zero.
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 1; i <= n; ++i) fill_row(i);
    return table;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = 1 + w; i <= n; i += threads) fill_row(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return table;
}

ShortestPath shortest_path(const ArcCostTable& t) {
  const std::size_t N = t.node_count();
  std::vector<double> dist(N, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> pred(N, 0);
  dist[0] = 0.0;
  for (std::size_t j = 1; j < N; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double cand = dist[i] + t.cost(i, j);
      if (cand < dist[j]) {
        dist[j] = cand;
        pred[j] = i;
      }
    }
  }
  ShortestPath out;
  out.cost = dist[N - 1];
  for (std::size_t v = N - 1;; v = pred[v]) {
    out.nodes.push_back(v);
    if (v == 0) break;
  }
  std::reverse(out.nodes.begin(), out.nodes.end());
  return out;
}

Vector recover_x(const ProjectedMIQP& m, const std::vector<std::size_t>& support) {
  validate_support(support, m.n);
  const std::size_t n = m.n, d = m.d;
  Vector x(n * d, 0.0);
  for (std::size_t t = 0; t < support.size(); ++t) {
    const std::size_t i = support[t];
    const std::size_t j = t + 1 < support.size() ? support[t + 1] : n;
    if (m.scalar()) {
      const ScalarArc arc = scalar_arc(m.scalar_spec(), i, j);
      const double aj = j < n ? m.a[j] : 0.0;
      const double g = arc.delta * (m.a[i] - arc.theta * aj);
      x[i] -= 0.5 * g;
      if (j < n) x[j] += 0.5 * arc.theta * g;
    } else {
      const BlockArc arc = block_arc(m.block_spec(), i, j);
      Vector r(m.a.begin() + i * d, m.a.begin() + (i + 1) * d);
      if (j < n) {
        const Vector shift = mat_vec(arc.theta, std::span<const double>(m.a).subspan(j * d, d));
        for (std::size_t k = 0; k < d; ++k) r[k] -= shift[k];
      }
      const Vector g = mat_vec(arc.delta, r);
      for (std::size_t k = 0; k < d; ++k) x[i * d + k] -= 0.5 * g[k];
      if (j < n) {
        const Vector back = mat_tvec(arc.theta, g);
        for (std::size_t k = 0; k < d; ++k) x[j * d + k] += 0.5 * back[k];
      }
    }
  }
  return x;
}

SppSolution solve(const ProjectedMIQP& m, unsigned threads) {
  const ArcCostTable table = arc_costs(m, ArcCostMethod::compact, threads);
  const ShortestPath sp = shortest_path(table);

  SppSolution sol;
  sol.path = sp.nodes;
  sol.path_cost = sp.cost;
  sol.z.assign(m.n, 0.0);
  for (std::size_t v : sp.nodes) {
    if (v >= 1 && v <= m.n) {
      sol.support.push_back(v - 1);
      sol.z[v - 1] = 1.0;
    }
  }
  sol.x = recover_x(m, sol.support);
  sol.objective = projected_objective(m, sol.x, sol.z);

  const double expected = sol.path_cost + m.constant;
  const double scale = 1.0 + std::abs(sol.path_cost) + std::abs(m.constant);
  if (std::abs(sol.objective - expected) > 1e-9 * scale) {
    throw NumericalError("recovered objective " + std::to_string(sol.objective) +
                         " disagrees with path cost + constant " + std::to_string(expected));
  }
  return sol;
}

}  // namespace mpmiqp
