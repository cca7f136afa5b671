#include "mpmiqp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpmiqp/casestudies.hpp"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/instance_io.hpp"
#include "mpmiqp/model.hpp"
#include "mpmiqp/oracle.hpp"
#include "mpmiqp/random_instances.hpp"
#include "mpmiqp/spp.hpp"

namespace mpmiqp {

using nlohmann::json;

namespace {

constexpr const char* kRunSchema = "mpmiqp-run/1";
constexpr const char* kVerifySchema = "mpmiqp-verify/1";
constexpr const char* kRunHeader = "schema,command,params,seed,wall_ms,objective,support_size,artifacts";
constexpr const char* kVerifyHeader = "schema,scope,trial,seed,n,d,checks,max_error,pass,detail";
constexpr std::size_t kVerifyMaxN = 16;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

// Appends one line to a CSV file, writing the header first if the file is new or empty.
void append_csv(const std::string& path, const char* header, const std::string& line) {
  bool fresh = true;
  {
    std::ifstream probe(path, std::ios::binary | std::ios::ate);
    fresh = !probe || probe.tellg() == 0;
  }
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot open " + path + " for appending");
  if (fresh) out << header << '\n';
  out << line << '\n';
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgumentError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed to write " + path);
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& s) {
  std::vector<std::size_t> out;
  for (auto i : s) out.push_back(i + 1);
  return out;
}

// Runs fn(trial) for trial in [0, count) on up to `threads` workers; the
// first exception (by trial index) is rethrown.
template <class Result>
std::vector<Result> run_trials(std::size_t count, unsigned threads, const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < count; t = next++) {
      try {
        results[t] = fn(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

struct TrialResult {
  std::string scope;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t d = 1;
  std::size_t checks = 0;
  double max_error = 0.0;
  bool pass = true;
  std::string detail;
};

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return splitmix64_mix(seed + trial); }

TrialResult verify_inverse_trial(std::size_t n, std::size_t d, std::uint64_t seed) {
  RandomStream rng(seed, "verify.inverse");
  const ProjectedMIQP m = random_projected(n, d, rng);
  TrialResult r;
  r.scope = "inverse";
  r.seed = seed;
  r.n = n;
  r.d = d;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto S = mask_to_support(mask);
    const auto rep = verify_inverse(m.spec, S, 1e-9);
    ++r.checks;
    r.max_error = std::max(r.max_error, rep.max_error);
    if (!rep.pass && r.pass) {
      r.pass = false;
      r.detail = "support mask " + std::to_string(mask) + " error " + fmt(rep.max_error);
    }
  }
  return r;
}

TrialResult verify_polytope_trial(std::size_t n, std::size_t d, std::uint64_t seed) {
  RandomStream rng(seed, "verify.polytope");
  const ProjectedMIQP m = random_projected(n, d, rng);
  TrialResult r;
  r.scope = "polytope";
  r.seed = seed;
  r.n = n;
  r.d = d;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Vector z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i] = (mask >> i) & 1u ? 1.0 : 0.0;
    const auto rep = verify_path_polytope(m.spec, z, 1e-10);
    ++r.checks;
    r.max_error = std::max(r.max_error, rep.max_error);
    if (!rep.pass && r.pass) {
      r.pass = false;
      r.detail = "support mask " + std::to_string(mask) + (rep.binary ? "" : " non-binary flow") +
                 (rep.flow_balance ? "" : " flow balance") + (rep.link ? "" : " link") + " error " +
                 fmt(rep.max_error);
    }
  }
  return r;
}

TrialResult verify_hull_trial(std::size_t n, std::size_t d, std::uint64_t seed) {
  RandomStream rng(seed, "verify.hull");
  const ProjectedMIQP m = random_projected(n, d, rng);
  const SppSolution sol = solve(m);
  const Model model = build_socp(m);
  const HullReport rep = certify_hull_feasibility(model, sol, m, 1e-8);
  TrialResult r;
  r.scope = "hull";
  r.seed = seed;
  r.n = n;
  r.d = d;
  r.checks = 1;
  r.max_error = std::max(rep.max_violation, rep.objective_gap);
  r.pass = rep.pass;
  if (!rep.pass) r.detail = "violation " + fmt(rep.max_violation) + " gap " + fmt(rep.objective_gap);
  return r;
}

// ------------------------------------------------------------- commands

struct GenOptions {
  std::size_t n = 0;
  double mu = 0.05, sigma = 0.1, alpha = 0.96, lambda = 1.0, beta0 = 1.0;
  double hev_lambda = 2.0;
  std::uint64_t seed = 0;
  std::string out, record;
};

struct SolveOptions {
  std::string instance, mode = "spp", out, record;
  unsigned threads = 0;
};

struct ExportOptions {
  std::string instance, formulation = "socp", variant = "relaxed", out;
  bool perspective = false;
  std::optional<double> big_m;
  bool big_m_flag = false;
};

struct VerifyOptions {
  std::string scope = "all", csv;
  std::size_t n = 6, trials = 10, d = 1;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

void record_run(const std::string& path, const std::string& command, const std::string& params, std::uint64_t seed,
                double wall_ms, const std::string& objective, std::size_t support, const std::string& artifacts) {
  if (path.empty()) return;
  std::ostringstream line;
  line << kRunSchema << ',' << command << ',' << csv_field(params) << ',' << seed << ',' << std::fixed
       << std::setprecision(3) << wall_ms << ',' << objective << ',' << support << ',' << csv_field(artifacts);
  append_csv(path, kRunHeader, line.str());
}

int cmd_gen(const std::string& kind, const GenOptions& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  Instance inst;
  std::ostringstream params;
  if (kind == "calcium") {
    inst = gen_calcium(o.n, o.mu, o.sigma, o.alpha, o.lambda, o.seed, o.beta0);
    params << "kind=calcium n=" << o.n << " mu=" << o.mu << " sigma=" << o.sigma << " alpha=" << o.alpha
           << " lambda=" << o.lambda << " beta0=" << o.beta0;
  } else {
    inst = gen_hev(o.n, o.hev_lambda, o.seed);
    params << "kind=hev n=" << o.n << " lambda=" << o.hev_lambda;
  }
  const std::string text = instance_to_json(inst);
  write_text(o.out, text, out);
  std::ostream& summary = (o.out.empty() || o.out == "-") ? err : out;
  summary << "generated " << kind << " n=" << o.n << " seed=" << o.seed << " bytes=" << text.size();
  if (!o.out.empty() && o.out != "-") summary << " -> " << o.out;
  summary << '\n';
  record_run(o.record, "gen", params.str(), o.seed, ms_since(t0), "", 0, o.out);
  return kExitOk;
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  const Instance inst = read_instance_file(o.instance);
  const unsigned threads = o.threads ? std::min(o.threads, default_threads()) : default_threads();
  const auto t0 = Clock::now();
  const ProjectedMIQP m = to_projected(inst);
  require_assumption(m.spec);

  json sol;
  sol["mode"] = o.mode;
  sol["kind"] = instance_kind(inst);
  sol["n"] = m.n;
  sol["d"] = m.d;
  double objective = 0.0;
  std::size_t support_size = 0;
  int code = kExitOk;

  if (o.mode == "oracle" || o.mode == "both") {
    if (m.n > kOracleMaxN) throw SizeGuardError("oracle mode supports n <= " + std::to_string(kOracleMaxN));
  }
  std::optional<SppSolution> spp;
  if (o.mode == "spp" || o.mode == "both") {
    spp = solve(m, threads);
    sol["objective"] = spp->objective;
    sol["pathCost"] = spp->path_cost;
    sol["path"] = spp->path;
    sol["support"] = one_based(spp->support);
    sol["x"] = spp->x;
    sol["z"] = spp->z;
    objective = spp->objective;
    support_size = spp->support.size();
  }
  if (o.mode == "oracle" || o.mode == "both") {
    const OracleResult orc = enumerate_supports(m, {false, threads});
    if (o.mode == "oracle") {
      Vector z(m.n, 0.0);
      for (auto i : orc.best_support) z[i] = 1.0;
      sol["objective"] = orc.best_objective;
      sol["pathCost"] = orc.best_objective - m.constant;
      sol["support"] = one_based(orc.best_support);
      sol["x"] = orc.best_x;
      sol["z"] = z;
      objective = orc.best_objective;
      support_size = orc.best_support.size();
    } else {
      sol["oracleObjective"] = orc.best_objective;
      sol["oracleSupport"] = one_based(orc.best_support);
      const bool agree = std::abs(orc.best_objective - spp->objective) <= 1e-8 * (1.0 + std::abs(orc.best_objective));
      sol["agree"] = agree;
      if (!agree) {
        err << "spp objective " << fmt(spp->objective) << " disagrees with oracle " << fmt(orc.best_objective) << '\n';
        code = kExitVerifyFailed;
      }
    }
  }
  const double wall = ms_since(t0);
  write_text(o.out, sol.dump() + "\n", out);
  std::ostream& summary = (o.out.empty() || o.out == "-") ? err : out;
  summary << "solve mode=" << o.mode << " n=" << m.n << " d=" << m.d << " objective=" << fmt(objective)
          << " support_size=" << support_size << " wall_ms=" << std::fixed << std::setprecision(3) << wall
          << std::defaultfloat << '\n';
  record_run(o.record, "solve", "instance=" + o.instance + " mode=" + o.mode, 0, wall, fmt(objective), support_size,
             o.out);
  return code;
}

int cmd_export(const ExportOptions& o, std::ostream& out, std::ostream& err) {
  const Instance inst = read_instance_file(o.instance);
  Model model;
  if (const auto* c = std::get_if<CalciumInstance>(&inst)) {
    ModelPair pair = calcium_models(*c, parse_calcium_variant(o.variant));
    model = o.formulation == "socp" ? std::move(pair.socp) : std::move(pair.miqp);
  } else if (const auto* h = std::get_if<HevInstance>(&inst)) {
    ModelPair pair = hev_models(*h, o.perspective);
    model = o.formulation == "socp" ? std::move(pair.socp) : std::move(pair.miqp);
  } else {
    const ProjectedMIQP m = to_projected(inst);
    model = o.formulation == "socp" ? build_socp(m) : build_miqp(m);
  }
  if (o.big_m_flag) model = expand_big_m(model, o.big_m);
  const std::string text = model_to_json(model);
  write_text(o.out, text, out);
  const ModelStats st = model_stats(model);
  std::ostream& summary = (o.out.empty() || o.out == "-") ? err : out;
  summary << "model formulation=" << o.formulation << " continuous=" << st.continuous << " binary=" << st.binary
          << " cones=" << st.cones << " rows=" << st.rows << " indicators=" << st.indicators << '\n';
  return kExitOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  if (o.n == 0 || o.d == 0) throw InvalidArgumentError("verify: --n and --d must be positive");
  if (o.n > kVerifyMaxN) throw SizeGuardError("verify enumerates 2^n supports; n <= " + std::to_string(kVerifyMaxN));
  const unsigned threads = o.threads ? std::min(o.threads, default_threads()) : default_threads();

  std::vector<std::pair<std::string, TrialResult (*)(std::size_t, std::size_t, std::uint64_t)>> suites;
  if (o.scope == "inverse" || o.scope == "all") suites.emplace_back("inverse", verify_inverse_trial);
  if (o.scope == "polytope" || o.scope == "all") suites.emplace_back("polytope", verify_polytope_trial);
  if (o.scope == "hull" || o.scope == "all") suites.emplace_back("hull", verify_hull_trial);

  bool all_pass = true;
  std::string first_failure;
  for (const auto& [name, fn] : suites) {
    const auto t0 = Clock::now();
    auto results = run_trials<TrialResult>(o.trials, threads, [&, f = fn](std::size_t t) {
      TrialResult r = f(o.n, o.d, trial_seed(o.seed, t));
      r.trial = t;
      return r;
    });
    std::size_t passed = 0, checks = 0;
    double worst = 0.0;
    for (const auto& r : results) {
      passed += r.pass;
      checks += r.checks;
      worst = std::max(worst, r.max_error);
      if (!r.pass && first_failure.empty())
        first_failure = name + " trial " + std::to_string(r.trial) + ": " + r.detail;
      if (!o.csv.empty()) {
        std::ostringstream line;
        line << kVerifySchema << ',' << r.scope << ',' << r.trial << ',' << r.seed << ',' << r.n << ',' << r.d << ','
             << r.checks << ',' << std::setprecision(6) << std::scientific << r.max_error << ','
             << (r.pass ? "1" : "0") << ',' << csv_field(r.detail);
        append_csv(o.csv, kVerifyHeader, line.str());
      }
    }
    all_pass = all_pass && passed == results.size();
    out << "verify scope=" << name << " n=" << o.n << " d=" << o.d << " trials=" << o.trials << " checks=" << checks
        << " passed=" << passed << " max_error=" << std::setprecision(3) << std::scientific << worst
        << std::defaultfloat << " wall_ms=" << std::fixed << std::setprecision(1) << ms_since(t0)
        << std::defaultfloat << ' ' << (passed == results.size() ? "PASS" : "FAIL") << '\n';
  }
  if (!all_pass) {
    err << "first failure: " << first_failure << '\n';
    return kExitVerifyFailed;
  }
  return kExitOk;
}

}  // namespace

unsigned default_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MPMIQP_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-period MIQP tools: instance generation, shortest-path solves, verification and model export",
               "mpmiqp"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded instance");
  gen_cmd->require_subcommand(1);
  auto* gen_ca = gen_cmd->add_subcommand("calcium", "Calcium-imaging deconvolution instance");
  gen_ca->add_option("--n", gen.n, "Number of periods")->required()->check(CLI::PositiveNumber);
  gen_ca->add_option("--mu", gen.mu, "Poisson spike rate")->capture_default_str();
  gen_ca->add_option("--sigma", gen.sigma, "Noise standard deviation")->capture_default_str();
  gen_ca->add_option("--alpha", gen.alpha, "Decay rate in (0, 1)")->capture_default_str();
  gen_ca->add_option("--lambda", gen.lambda, "Indicator penalty")->capture_default_str();
  gen_ca->add_option("--beta0", gen.beta0, "Initial concentration")->capture_default_str();
  auto* gen_hv = gen_cmd->add_subcommand("hev", "Hybrid-vehicle path-following instance");
  gen_hv->add_option("--n", gen.n, "Number of periods")->required()->check(CLI::PositiveNumber);
  gen_hv->add_option("--lambda", gen.hev_lambda, "Engine fixed cost")->capture_default_str();
  for (auto* sub : {gen_ca, gen_hv}) {
    sub->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    sub->add_option("--out,-o", gen.out, "Output file (default stdout)");
    sub->add_option("--record", gen.record, "Append a run record to this CSV file");
  }

  SolveOptions sol;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance");
  solve_cmd->add_option("instance", sol.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--mode", sol.mode, "spp, oracle or both")
      ->check(CLI::IsMember({"spp", "oracle", "both"}))
      ->capture_default_str();
  solve_cmd->add_option("--out,-o", sol.out, "Solution JSON file (default stdout)");
  solve_cmd->add_option("--threads", sol.threads, "Worker threads (capped by MPMIQP_THREADS)");
  solve_cmd->add_option("--record", sol.record, "Append a run record to this CSV file");

  ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export", "Export a solver-agnostic model");
  export_cmd->add_option("instance", exp.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--formulation", exp.formulation, "socp or miqp")
      ->check(CLI::IsMember({"socp", "miqp"}))
      ->capture_default_str();
  export_cmd->add_option("--variant", exp.variant, "Calcium variant: relaxed, original or capacity")
      ->check(CLI::IsMember({"relaxed", "original", "capacity"}))
      ->capture_default_str();
  export_cmd->add_flag("--perspective", exp.perspective, "HEV MIQP: move the control cost into perspective cones");
  auto* big_m = export_cmd->add_option("--big-m", exp.big_m,
                                       "Replace indicators by big-M rows; the value bounds unbounded variables");
  big_m->expected(0, 1);
  export_cmd->add_option("--out,-o", exp.out, "Model JSON file (default stdout)");

  VerifyOptions ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run randomized property checks");
  verify_cmd->add_option("--scope", ver.scope, "inverse, hull, polytope or all")
      ->check(CLI::IsMember({"inverse", "hull", "polytope", "all"}))
      ->capture_default_str();
  verify_cmd->add_option("--n", ver.n, "Periods per instance")->capture_default_str();
  verify_cmd->add_option("--trials", ver.trials, "Random instances per scope")->capture_default_str();
  verify_cmd->add_option("--seed", ver.seed, "Random seed")->capture_default_str();
  verify_cmd->add_option("--d", ver.d, "Block size")->capture_default_str();
  verify_cmd->add_option("--csv", ver.csv, "Append per-trial rows to this CSV file");
  verify_cmd->add_option("--threads", ver.threads, "Worker threads (capped by MPMIQP_THREADS)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen_ca->parsed() ? "calcium" : "hev", gen, out, err);
    if (solve_cmd->parsed()) return cmd_solve(sol, out, err);
    if (export_cmd->parsed()) {
      exp.big_m_flag = big_m->count() > 0;
      return cmd_export(exp, out, err);
    }
    if (verify_cmd->parsed()) return cmd_verify(ver, out, err);
  } catch (const SizeGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSizeGuard;
  } catch (const InvalidArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace mpmiqp
