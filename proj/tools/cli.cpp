#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "vmrd/closed_forms.hpp"
#include "vmrd/codetree.hpp"
#include "vmrd/csv.hpp"
#include "vmrd/errors.hpp"
#include "vmrd/problem_io.hpp"
#include "vmrd/simulator.hpp"
#include "vmrd/solver.hpp"

namespace vmrd::cli {

namespace {

struct Config {
  std::string problem;
  std::string out_path;
  std::string codetrees;
  std::optional<double> lambda_d, lambda_g, target_d, target_g;
  std::vector<std::vector<double>> grids;
  double tol = 1e-10;
  int max_iter = 100000;
  std::uint64_t cap = kDefaultCodetreeCap;
  std::uint64_t seed = 1;
  int trials = 100;
  int m = 8;
  double eta = 0.0;
  std::optional<double> rate;
  unsigned threads = 1;
  std::string formula;
  std::optional<double> p, q, epsilon;
};

/// A usage problem detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_problem(CLI::App* cmd, Config& c) {
  cmd->add_option("problem,--problem", c.problem, "Problem file (JSON)");
}

void add_solver(CLI::App* cmd, Config& c) {
  cmd->add_option("--tol", c.tol, "Blahut-Arimoto stopping tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", c.max_iter, "Blahut-Arimoto iteration limit")->check(CLI::Range(1, 100000000));
  cmd->add_option("--cap", c.cap, "Largest codetree set to enumerate")->check(CLI::PositiveNumber);
  cmd->add_option("--codetrees", c.codetrees, "File of codetree ordinals to restrict to, one per line");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
}

void add_out(CLI::App* cmd, Config& c) { cmd->add_option("--out", c.out_path, "Write output here instead of stdout"); }

void add_multipliers(CLI::App* cmd, Config& c) {
  cmd->add_option("--lambda-d", c.lambda_d, "Distortion multiplier (bits per unit)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda-g", c.lambda_g, "Cost multiplier (bits per unit)")->check(CLI::NonNegativeNumber);
}

void add_targets(CLI::App* cmd, Config& c) {
  cmd->add_option("--target-d", c.target_d, "Per-symbol distortion target")->check(CLI::NonNegativeNumber);
  cmd->add_option("--target-g", c.target_g, "Per-symbol cost target")->check(CLI::NonNegativeNumber);
}

ProblemSpec load(const Config& c) {
  if (c.problem.empty()) throw UsageError("a problem file is required");
  return load_problem(c.problem);
}

CodetreeSet codetree_set(const ProblemSpec& spec, const Config& c) {
  if (c.codetrees.empty()) return full_codetree_set(spec, c.cap);
  std::ifstream in(c.codetrees);
  if (!in) throw ValidationError("--codetrees: cannot open " + c.codetrees);
  std::vector<std::uint64_t> ordinals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch); }),
               line.end());
    if (line.empty()) continue;
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size()) {
      throw ValidationError("--codetrees line " + std::to_string(line_no) + ": not an ordinal");
    }
    ordinals.push_back(v);
  }
  if (ordinals.size() > c.cap) throw CapExceeded("restricted codetree list exceeds the cap");
  return restricted_codetree_set(spec, std::move(ordinals));
}

BaOptions ba_options(const Config& c) {
  BaOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  return o;
}

/// Point from --target-d/--target-g when given, else from the multipliers.
RdcPoint operating_point(const PairMetrics& pm, const Config& c) {
  if (c.target_d || c.target_g) {
    TargetOptions t;
    t.ba = ba_options(c);
    return rdc_at(pm, c.target_d.value_or(std::numeric_limits<double>::infinity()),
                  c.target_g.value_or(std::numeric_limits<double>::infinity()), t);
  }
  if (c.lambda_d || c.lambda_g) return ba_solve(pm, c.lambda_d.value_or(0.0), c.lambda_g.value_or(0.0), ba_options(c));
  throw UsageError("give --target-d/--target-g or --lambda-d/--lambda-g");
}

int emit(const Config& c, const std::string& text, std::ostream& out) {
  if (c.out_path.empty()) {
    out << text;
    return kOk;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f || !(f << text)) throw ValidationError("--out: cannot write " + c.out_path);
  return kOk;
}

int cmd_count(const Config& c, std::ostream& out) {
  const ProblemSpec spec = load(c);
  std::ostringstream s;
  s << count_codetrees(spec, c.cap) << '\n';
  return emit(c, s.str(), out);
}

int cmd_solve(const Config& c, std::ostream& out) {
  if (!c.lambda_d || !c.lambda_g) throw UsageError("solve needs --lambda-d and --lambda-g");
  const ProblemSpec spec = load(c);
  const PairMetrics pm = compute_pair_metrics(spec, codetree_set(spec, c), c.threads);
  const RdcPoint p = ba_solve(pm, *c.lambda_d, *c.lambda_g, ba_options(c));
  std::ostringstream s;
  write_rdc_header(s);
  write_rdc_row(s, p);
  emit(c, s.str(), out);
  return p.converged ? kOk : kNumericalError;
}

std::vector<double> grid_values(const std::vector<double>& g) {
  return geometric_grid(g[0], g[1], static_cast<int>(g[2]));
}

int cmd_surface(const Config& c, std::ostream& out, std::ostream& err) {
  if (c.grids.empty() || c.grids.size() > 2) throw UsageError("surface needs one or two --grid START STOP COUNT");
  for (const auto& g : c.grids) {
    if (g.size() != 3 || g[2] < 1 || g[2] != std::floor(g[2]) || g[0] < 0 || g[1] < 0) {
      throw UsageError("--grid expects START STOP COUNT with a whole COUNT >= 1");
    }
  }
  const std::vector<double> ld = grid_values(c.grids[0]);
  const std::vector<double> lg =
      c.grids.size() == 2 ? grid_values(c.grids[1]) : std::vector<double>{c.lambda_g.value_or(0.0)};
  std::vector<std::pair<double, double>> grid;
  for (double a : ld) {
    for (double b : lg) grid.emplace_back(a, b);
  }

  const ProblemSpec spec = load(c);
  const PairMetrics pm = compute_pair_metrics(spec, codetree_set(spec, c), c.threads);
  const auto entries = rdc_surface(pm, grid, ba_options(c), c.threads);
  std::ostringstream s;
  write_rdc_header(s);
  int code = kOk;
  for (const auto& e : entries) {
    if (!e.point) {
      err << "lambda_d=" << format_real(e.lambda_d) << " lambda_g=" << format_real(e.lambda_g) << ": " << e.error
          << '\n';
      code = kNumericalError;
      continue;
    }
    write_rdc_row(s, *e.point);
    if (!e.point->converged) code = kNumericalError;
  }
  emit(c, s.str(), out);
  return code;
}

int cmd_target(const Config& c, std::ostream& out) {
  if (!c.target_d && !c.target_g) throw UsageError("target needs --target-d and/or --target-g");
  const ProblemSpec spec = load(c);
  const PairMetrics pm = compute_pair_metrics(spec, codetree_set(spec, c), c.threads);
  const RdcPoint p = operating_point(pm, c);
  std::ostringstream s;
  write_rdc_header(s);
  write_rdc_row(s, p);
  emit(c, s.str(), out);
  return p.converged ? kOk : kNumericalError;
}

int cmd_reduce(const Config& c, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load(c);
  const CodetreeSet set = codetree_set(spec, c);
  const PairMetrics pm = compute_pair_metrics(spec, set, c.threads);
  const RdcPoint p = operating_point(pm, c);
  const SupportReduction r = reduce_support(pm, p.pj_given_x);
  const Eigen::VectorXd q = tree_marginal(pm, r.pj_given_x);
  std::ostringstream s;
  s << "codetree_ordinal,probability\n";
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q[j] > 0.0) s << set.ordinals[static_cast<std::size_t>(j)] << ',' << format_real(q[j]) << '\n';
  }
  err << "support " << r.support_before << " -> " << r.support_after << " (bound " << r.bound << ", drift "
      << format_real(r.max_drift) << ")\n";
  emit(c, s.str(), out);
  if (!r.reached_bound) return kNumericalError;
  return p.converged ? kOk : kNumericalError;
}

int cmd_closed_form(const Config& c, std::ostream& out) {
  auto need = [](const std::optional<double>& v, const char* flag) {
    if (!v) throw UsageError(std::string("closed-form needs ") + flag);
    return *v;
  };
  std::ostringstream s;
  if (c.formula == "feedforward-example") {
    s << "rate\n"
      << format_real(feedforward_example_rate(need(c.p, "--p"), need(c.q, "--q"), need(c.target_d, "--target-d")))
      << '\n';
  } else if (c.formula == "repeat-request") {
    const RepeatRequestRate r = repeat_request_rate(need(c.epsilon, "--epsilon"), need(c.target_d, "--target-d"));
    s << "rate,min_sufficient_cost\n" << format_real(r.rate) << ',' << format_real(r.min_sufficient_cost) << '\n';
  } else if (c.formula == "classic-binary") {
    s << "rate\n" << format_real(classic_binary_rd(need(c.p, "--p"), need(c.target_d, "--target-d"))) << '\n';
  } else {
    throw UsageError("unknown formula \"" + c.formula +
                     "\" (expected feedforward-example, repeat-request or classic-binary)");
  }
  return emit(c, s.str(), out);
}

int cmd_simulate(const Config& c, std::ostream& out) {
  const ProblemSpec spec = load(c);
  CodetreeSet set = codetree_set(spec, c);
  PairMetrics pm = compute_pair_metrics(spec, set, c.threads);
  const RdcPoint p = operating_point(pm, c);
  const Eigen::VectorXd pj = tree_marginal(pm, p.pj_given_x);
  const double rate = c.rate.value_or(p.rate);
  const Simulator sim(spec, std::move(set), std::move(pm));
  SimulationRow row;
  row.rate = rate;
  row.m = c.m;
  row.eta = c.eta;
  row.seed = c.seed;
  row.report = sim.simulate(pj / pj.sum(), rate, c.m, c.trials, c.eta, c.seed, c.threads);
  std::ostringstream s;
  write_simulation_header(s);
  write_simulation_row(s, row);
  emit(c, s.str(), out);
  return p.converged ? kOk : kNumericalError;
}

int cmd_selftest(const Config& c, std::ostream& out) {
  tools::AcceptanceOptions opt;
  opt.fast_only = true;
  opt.threads = c.threads;
  const auto results = tools::run_acceptance(opt);
  tools::print_report(out, results);
  return tools::all_passed(results) ? kOk : kInputError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Rate-distortion-cost computation with in-block memory and controllable side information", "vmrd"};
  app.require_subcommand(1);

  auto* count = app.add_subcommand("count", "Print the number of joint codetrees");
  add_problem(count, c);
  count->add_option("--cap", c.cap, "Fail above this many codetrees")->check(CLI::PositiveNumber);
  add_out(count, c);

  auto* solve = app.add_subcommand("solve", "One Blahut-Arimoto solve at fixed multipliers");
  add_problem(solve, c);
  add_multipliers(solve, c);
  add_solver(solve, c);
  add_out(solve, c);

  auto* surface = app.add_subcommand("surface", "Sweep a geometric multiplier grid");
  add_problem(surface, c);
  surface->add_option("--grid", c.grids, "START STOP COUNT; first for lambda_d, second (optional) for lambda_g")
      ->expected(3)
      ->allow_extra_args(false);
  surface->add_option("--lambda-g", c.lambda_g, "Fixed cost multiplier when only one grid is given")
      ->check(CLI::NonNegativeNumber);
  add_solver(surface, c);
  add_out(surface, c);

  auto* target = app.add_subcommand("target", "Minimum rate at a distortion/cost target");
  add_problem(target, c);
  add_targets(target, c);
  add_solver(target, c);
  add_out(target, c);

  auto* reduce = app.add_subcommand("reduce", "Solve, then shrink the codetree support");
  add_problem(reduce, c);
  add_multipliers(reduce, c);
  add_targets(reduce, c);
  add_solver(reduce, c);
  add_out(reduce, c);

  auto* closed = app.add_subcommand("closed-form", "Evaluate an analytic rate");
  closed->add_option("formula", c.formula, "feedforward-example | repeat-request | classic-binary")->required();
  closed->add_option("--p", c.p, "Source parameter p")->check(CLI::NonNegativeNumber);
  closed->add_option("--q", c.q, "Source parameter q")->check(CLI::NonNegativeNumber);
  closed->add_option("--epsilon", c.epsilon, "Erasure probability")->check(CLI::NonNegativeNumber);
  closed->add_option("--target-d", c.target_d, "Per-symbol distortion")->check(CLI::NonNegativeNumber);
  add_out(closed, c);

  auto* simulate = app.add_subcommand("simulate", "Random-coding simulation at a solver operating point");
  add_problem(simulate, c);
  add_multipliers(simulate, c);
  add_targets(simulate, c);
  add_solver(simulate, c);
  simulate->add_option("--rate", c.rate, "Code rate in bits per symbol (default: the solver's rate)")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--m", c.m, "Blocks per codeword")->check(CLI::Range(1, 1 << 20));
  simulate->add_option("--trials", c.trials, "Independent trials")->check(CLI::Range(1, 1 << 30));
  simulate->add_option("--eta", c.eta, "Cost weight in the encoder score")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", c.seed, "Random seed");
  add_out(simulate, c);

  auto* selftest = app.add_subcommand("selftest", "Run the fast acceptance checks");
  selftest->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*count) return cmd_count(c, out);
    if (*solve) return cmd_solve(c, out);
    if (*surface) return cmd_surface(c, out, err);
    if (*target) return cmd_target(c, out);
    if (*reduce) return cmd_reduce(c, out, err);
    if (*closed) return cmd_closed_form(c, out);
    if (*simulate) return cmd_simulate(c, out);
    if (*selftest) return cmd_selftest(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return kInputError;
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) err << v << '\n';
    return kInputError;
  } catch (const CapExceeded& e) {
    err << "cap exceeded: " << e.what() << '\n';
    return kCapError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const InfeasibleTarget& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kInputError;
  } catch (const std::domain_error& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace vmrd::cli
