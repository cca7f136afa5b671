#include "mpmiqp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <thread>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

namespace {

std::vector<std::size_t> expand(std::span<const std::size_t> S, std::size_t d) {
  std::vector<std::size_t> rows;
  rows.reserve(S.size() * d);
  for (std::size_t i : S)
    for (std::size_t k = 0; k < d; ++k) rows.push_back(i * d + k);
  return rows;
}

Matrix principal(const Matrix& q, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.size(); ++c) out(r, c) = q(rows[r], rows[c]);
  return out;
}

struct Candidate {
  std::uint64_t mask = 0;
  double objective = std::numeric_limits<double>::infinity();
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  return support_less(a.mask, b.mask);
}

}  // namespace

std::vector<std::size_t> mask_to_support(std::uint64_t mask) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; mask >> i; ++i)
    if ((mask >> i) & 1u) s.push_back(i);
  return s;
}

bool support_less(std::uint64_t a, std::uint64_t b) {
  const auto sa = mask_to_support(a), sb = mask_to_support(b);
  return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
}

FixedSupportResult solve_fixed_support(const ProjectedMIQP& m, std::span<const std::size_t> S) {
  return solve_fixed_support(m, materialize(m.spec), S);
}

FixedSupportResult solve_fixed_support(const ProjectedMIQP& m, const Matrix& q, std::span<const std::size_t> S) {
  validate_support(S, m.n);
  FixedSupportResult out;
  out.x.assign(m.n * m.d, 0.0);
  long double obj = m.constant;
  for (std::size_t i : S) obj += m.c[i];
  if (!S.empty()) {
    const auto rows = expand(S, m.d);
    const Matrix inv = mat_inverse(principal(q, rows));
    Vector as(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) as[r] = m.a[rows[r]];
    const Vector ia = mat_vec(inv, as);
    for (std::size_t r = 0; r < rows.size(); ++r) out.x[rows[r]] = -0.5 * ia[r];
    obj -= 0.25L * dot(as, ia);
  }
  out.objective = static_cast<double>(obj);
  return out;
}

OracleResult enumerate_supports(const ProjectedMIQP& m, EnumerateOptions options) {
  if (m.n > kOracleMaxN) {
    throw SizeGuardError("support enumeration is limited to n <= " + std::to_string(kOracleMaxN) + " (got " +
                         std::to_string(m.n) + ")");
  }
  const Matrix q = materialize(m.spec);
  const std::uint64_t total = std::uint64_t{1} << m.n;
  std::vector<double> table;
  if (options.keep_table) table.assign(total, 0.0);

  const unsigned threads =
      std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(options.threads, total)));
  std::vector<Candidate> best(threads);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::uint64_t mask = w; mask < total; mask += threads) {
        const auto S = mask_to_support(mask);
        const double obj = solve_fixed_support(m, q, S).objective;
        if (options.keep_table) table[mask] = obj;
        const Candidate cand{mask, obj};
        if (better(cand, best[w])) best[w] = cand;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Candidate winner = best[0];
  for (unsigned w = 1; w < threads; ++w)
    if (better(best[w], winner)) winner = best[w];

  OracleResult out;
  out.best_support = mask_to_support(winner.mask);
  const auto fixed = solve_fixed_support(m, q, out.best_support);
  out.best_x = fixed.x;
  out.best_objective = fixed.objective;
  if (options.keep_table) out.per_support = std::move(table);
  return out;
}

Matrix dense_submatrix_inverse(const Matrix& q, std::size_t d, std::span<const std::size_t> S) {
  Matrix out(q.rows(), q.cols());
  if (S.empty()) return out;
  const auto rows = expand(S, d);
  const Matrix inv = mat_inverse(principal(q, rows));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.size(); ++c) out(rows[r], rows[c]) = inv(r, c);
  return out;
}

InverseReport verify_inverse(const CostSpec& spec, std::span<const std::size_t> S, double tol) {
  InverseReport rep;
  if (S.empty()) return rep;
  const std::size_t d = std::holds_alternative<FactorizableSpec>(spec)
                            ? 1
                            : std::get<BlockFactorizableSpec>(spec).d();
  const Matrix q = materialize(spec);
  const Matrix closed = std::visit([&](const auto& s) { return submatrix_inverse(s, S); }, spec);
  const auto rows = expand(S, d);
  const Matrix prod = mat_mul(principal(closed, rows), principal(q, rows));
  rep.max_error = max_abs_diff(prod, Matrix::identity(rows.size()));
  rep.pass = rep.max_error <= tol;
  return rep;
}

PolytopeReport verify_path_polytope(const CostSpec& spec, std::span<const double> z, double tol) {
  const std::size_t n = std::visit([](const auto& s) { return s.n(); }, spec);
  const std::size_t d = std::holds_alternative<FactorizableSpec>(spec)
                            ? 1
                            : std::get<BlockFactorizableSpec>(spec).d();
  if (z.size() != n) throw DimensionError("z has wrong length");
  std::vector<std::size_t> S;
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] != 0.0 && z[i] != 1.0) throw InvalidArgumentError("z must be binary");
    if (z[i] == 1.0) S.push_back(i);
  }

  PolytopeReport rep;
  // Path 0 -> S_1 -> ... -> S_k -> n+1 over DAG nodes.
  std::vector<std::size_t> nodes{0};
  for (std::size_t i : S) nodes.push_back(i + 1);
  nodes.push_back(n + 1);
  for (std::size_t t = 0; t + 1 < nodes.size(); ++t) rep.flow.push_back({nodes[t], nodes[t + 1], 1});

  std::map<std::pair<std::size_t, std::size_t>, int> w;
  for (const auto& a : rep.flow) w[{a.from, a.to}] += a.value;
  for (const auto& [arc, value] : w)
    if (value != 0 && value != 1) rep.binary = false;

  // Flow balance: out(0) = 1, in(n+1) = 1, in = out elsewhere.
  std::vector<int> in(n + 2, 0), out(n + 2, 0);
  for (const auto& [arc, value] : w) {
    out[arc.first] += value;
    in[arc.second] += value;
  }
  for (std::size_t v = 0; v <= n + 1; ++v) {
    const int net = out[v] - in[v];
    const int want = v == 0 ? 1 : (v == n + 1 ? -1 : 0);
    if (net != want) rep.flow_balance = false;
  }
  // Link: z_l equals the inflow of node l.
  for (std::size_t l = 1; l <= n; ++l)
    if (static_cast<double>(in[l]) != z[l - 1]) rep.link = false;

  rep.W = Matrix(n * d, n * d);
  for (const auto& a : rep.flow) {
    if (a.from == 0) continue;
    const Matrix lambda = std::visit([&](const auto& s) { return lambda_matrix(s, a.from - 1, a.to - 1); }, spec);
    rep.W.add_block(0, 0, lambda, a.value);
  }
  const Matrix dense = dense_submatrix_inverse(materialize(spec), d, S);
  rep.max_error = max_abs_diff(rep.W, dense) / std::max(1.0, dense.max_abs());
  rep.pass = rep.binary && rep.flow_balance && rep.link && rep.max_error <= tol;
  return rep;
}

}  // namespace mpmiqp
