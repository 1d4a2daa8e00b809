#include "cli.hpp"

#include "fpa/equivalence.hpp"
#include "fpa/estimation.hpp"
#include "fpa/outcomes.hpp"
#include "fpa/solver.hpp"
#include "fpa/table_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace fpa::cli {

namespace {

using nlohmann::json;

class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig
{
  SolverConfig solver;
  std::size_t probes = 1001;
  EstimationConfig estimation;
  std::string method = "integration";
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  std::vector<double> sweep{ 0.0, 0.05, 0.10, 0.15, 0.20, 0.25 };
  std::size_t trials = 100'000;
  std::vector<double> equal_rates{ 0.0, 0.05, 0.10, 0.15, 0.20, 0.25 };
  std::string bids;
  std::string out;
  std::string report;
  std::string solve;
};

// flags shared by several commands; empty optionals leave the config alone
struct Flags
{
  std::string config;
  std::optional<double> rate;
  std::optional<int> n;
  std::optional<int> steps;
  std::optional<std::size_t> probes;
  std::optional<std::string> bids;
  std::optional<std::string> out;
  std::optional<std::string> report;
  std::optional<std::string> solve;
  std::optional<std::string> sweep;
  std::optional<std::string> method;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> bandwidth;
  std::optional<int> participants;
  std::optional<long long> trials;
  std::string theorem = "all";
  std::string pseudo_out;
  bool round3 = false;
};

void
only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
  if (!j.is_object())
    throw InputError(fmt::format("'{}' must be an object", where));
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key))
      throw InputError(fmt::format("unknown key '{}' in {}", key, where));
}

template<typename T>
void
take(const json& j, const char* key, T& target, const std::string& where)
{
  if (!j.contains(key))
    return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(fmt::format("bad value for '{}' in {}", key, where));
  }
}

std::pair<double, double>
pair_of(const json& j, const char* key, const std::string& where)
{
  std::vector<double> v;
  take(j, key, v, where);
  if (v.size() != 2)
    throw InputError(fmt::format("'{}' in {} must be a two-element array", key, where));
  return { v[0], v[1] };
}

RunConfig
load_config(const std::string& path)
{
  RunConfig cfg;
  if (path.empty())
    return cfg;
  std::ifstream in(path);
  if (!in)
    throw InputError(fmt::format("cannot open config '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("config '{}' is not valid JSON: {}", path, e.what()));
  }
  only_keys(j,
            { "solver", "discounted", "undiscounted", "estimation", "outcomes", "sweep", "verify", "seed", "paths" },
            "config");

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    only_keys(s, { "n", "rate", "steps", "bstar_tolerance", "bracket", "max_iterations", "probes" }, "solver");
    take(s, "n", cfg.solver.n, "solver");
    take(s, "rate", cfg.solver.rate, "solver");
    take(s, "steps", cfg.solver.steps, "solver");
    take(s, "bstar_tolerance", cfg.solver.bstar_tolerance, "solver");
    take(s, "max_iterations", cfg.solver.max_iterations, "solver");
    take(s, "probes", cfg.probes, "solver");
    if (s.contains("bracket"))
      cfg.solver.bracket = pair_of(s, "bracket", "solver");
  }
  try {
    if (j.contains("discounted"))
      cfg.solver.discounted = distribution_from_json(j.at("discounted"));
    if (j.contains("undiscounted"))
      cfg.solver.undiscounted = distribution_from_json(j.at("undiscounted"));
  } catch (const FormatError& e) {
    throw InputError(e.what());
  }
  if (j.contains("estimation")) {
    const auto& e = j.at("estimation");
    only_keys(e, { "rate", "bandwidth", "participants", "trim" }, "estimation");
    take(e, "rate", cfg.estimation.rate, "estimation");
    take(e, "participants", cfg.estimation.participants, "estimation");
    if (e.contains("bandwidth") && !e.at("bandwidth").is_null()) {
      double h = 0.0;
      take(e, "bandwidth", h, "estimation");
      cfg.estimation.bandwidth = h;
    }
    if (e.contains("trim"))
      cfg.estimation.trim = pair_of(e, "trim", "estimation");
  }
  if (j.contains("outcomes")) {
    const auto& o = j.at("outcomes");
    only_keys(o, { "method", "samples" }, "outcomes");
    take(o, "method", cfg.method, "outcomes");
    take(o, "samples", cfg.samples, "outcomes");
  }
  take(j, "sweep", cfg.sweep, "config");
  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    only_keys(v, { "trials", "equal_rates" }, "verify");
    take(v, "trials", cfg.trials, "verify");
    take(v, "equal_rates", cfg.equal_rates, "verify");
  }
  take(j, "seed", cfg.seed, "config");
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    only_keys(p, { "bids", "out", "report", "solve" }, "paths");
    take(p, "bids", cfg.bids, "paths");
    take(p, "out", cfg.out, "paths");
    take(p, "report", cfg.report, "paths");
    take(p, "solve", cfg.solve, "paths");
  }
  return cfg;
}

RunConfig
resolve_config(const Flags& f)
{
  RunConfig cfg = load_config(f.config);
  if (f.rate) {
    cfg.solver.rate = *f.rate;
    cfg.estimation.rate = *f.rate;
  }
  if (f.n)
    cfg.solver.n = *f.n;
  if (f.steps)
    cfg.solver.steps = *f.steps;
  if (f.probes)
    cfg.probes = *f.probes;
  if (f.bids)
    cfg.bids = *f.bids;
  if (f.out)
    cfg.out = *f.out;
  if (f.report)
    cfg.report = *f.report;
  if (f.solve)
    cfg.solve = *f.solve;
  if (f.sweep)
    cfg.sweep = parse_grid(*f.sweep);
  if (f.method)
    cfg.method = *f.method;
  if (f.samples)
    cfg.samples = *f.samples;
  if (f.seed)
    cfg.seed = *f.seed;
  if (f.bandwidth)
    cfg.estimation.bandwidth = *f.bandwidth;
  if (f.participants)
    cfg.estimation.participants = *f.participants;
  if (f.trials) {
    if (*f.trials <= 0)
      throw InputError("trials must be positive");
    cfg.trials = static_cast<std::size_t>(*f.trials);
  }
  if (cfg.method != "integration" && cfg.method != "montecarlo")
    throw InputError(fmt::format("unknown outcome method '{}'", cfg.method));
  if (cfg.probes < 2)
    throw InputError("probes must be at least 2");
  return cfg;
}

void
write_file(const std::string& path, const std::string& text)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw InputError(fmt::format("cannot write '{}'", path));
  f << text;
  if (!f)
    throw InputError(fmt::format("failed writing '{}'", path));
}

void
validate_solver(const SolverConfig& s)
{
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  } catch (const std::domain_error& e) {
    throw InputError(e.what());
  }
}

std::variant<FullIntegration, MonteCarlo>
outcome_method(const RunConfig& cfg)
{
  if (cfg.method == "montecarlo") {
    if (cfg.samples < 10'000)
      throw InputError("montecarlo needs at least 10000 samples");
    return MonteCarlo{ cfg.samples, cfg.seed };
  }
  return FullIntegration{};
}

int
cmd_estimate(const RunConfig& cfg, const Flags& f, std::ostream& out, std::ostream& err)
{
  if (cfg.bids.empty())
    throw InputError("estimate needs --bids");
  try {
    cfg.estimation.validate();
  } catch (const std::domain_error& e) {
    throw InputError(e.what());
  }
  std::ifstream in(cfg.bids);
  if (!in)
    throw InputError(fmt::format("cannot open bids '{}'", cfg.bids));

  IngestResult data;
  EstimationResult result;
  try {
    data = ingest(in);
    for (const auto& e : data.errors)
      err << fmt::format("warning: {}:{}: {}\n", cfg.bids, e.line, e.message);
    err << fmt::format("read {} records, {} rejected rows\n", data.records.size(), data.errors.size());
    result = run_estimation(data.records, cfg.estimation);
  } catch (const IngestError& e) {
    throw InputError(e.what());
  } catch (const EstimationError& e) {
    throw InputError(e.what());
  }

  std::string text = "class,sigma,m,sample_count,trimmed_count,degenerate,bandwidth,"
                     "monotonicity_violations,max_foc_residual\n";
  for (auto c : { BidderClass::discounted, BidderClass::other }) {
    const auto& e = c == BidderClass::discounted ? result.discounted : result.other;
    text += fmt::format("{},{},{},{},{},{},{},{},{}\n",
                        to_string(c),
                        e.fit.sigma,
                        e.fit.scale,
                        e.sample_count,
                        e.trimmed_quantile + e.trimmed_undefined + e.monotonicity_violations,
                        e.fit.degenerate,
                        e.bandwidth,
                        e.monotonicity_violations,
                        e.max_foc_residual);
  }
  if (!cfg.out.empty())
    write_file(cfg.out, text);
  out << text;

  if (!f.pseudo_out.empty()) {
    std::string dump = "class,bid,pseudo_value\n";
    for (auto c : { BidderClass::discounted, BidderClass::other }) {
      const auto& e = c == BidderClass::discounted ? result.discounted : result.other;
      for (std::size_t i = 0; i < e.pseudo_values.size(); ++i)
        dump += fmt::format("{},{},{}\n", to_string(c), e.bids[i], e.pseudo_values[i]);
    }
    write_file(f.pseudo_out, dump);
  }
  return exit_ok;
}

int
cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  validate_solver(cfg.solver);
  err << fmt::format("solving r={} n={} steps={}\n", cfg.solver.rate, cfg.solver.n, cfg.solver.steps);
  SolveReport rep;
  try {
    rep = solve(cfg.solver, cfg.probes);
  } catch (const BracketError& e) {
    err << fmt::format("error: {}\n", e.what());
    err << "hint: widen solver.bracket so its low end is feasible and its high end is not, "
           "or check that the valuation supports overlap\n";
    return exit_numerical;
  }
  std::string report_path = cfg.report;
  if (report_path.empty() && !cfg.out.empty())
    report_path = cfg.out + ".json";
  if (!cfg.out.empty())
    write_file(cfg.out, bid_table_csv(*rep.bid_functions));
  if (!report_path.empty())
    write_file(report_path, solve_report_json(rep, cfg.solver).dump(2) + "\n");
  out << fmt::format("bstar={} gap_discounted={} gap_undiscounted={} knots={},{}\n",
                     rep.bstar,
                     rep.gaps.gap1,
                     rep.gaps.gap2,
                     rep.bid_functions->discounted.size(),
                     rep.bid_functions->undiscounted.size());
  return exit_ok;
}

int
cmd_outcomes(const RunConfig& cfg, const Flags& f, std::ostream& out, std::ostream& err)
{
  validate_solver(cfg.solver);
  for (double r : cfg.sweep)
    if (!(r >= 0.0 && r < 1.0))
      throw InputError(fmt::format("sweep rate {} outside [0, 1)", r));
  auto method = outcome_method(cfg);
  err << fmt::format("sweeping {} rates\n", cfg.sweep.size());
  auto rows = sweep(cfg.sweep, cfg.solver, 101, method);
  for (const auto& row : rows)
    if (!row.stats)
      err << fmt::format("warning: r={} failed: {}\n", row.rate, row.error);
  std::string csv = outcomes_csv(rows, f.round3);
  if (!cfg.out.empty())
    write_file(cfg.out, csv);
  else
    out << csv;
  return exit_ok;
}

int
cmd_verify(const RunConfig& cfg, const Flags& f, std::ostream& out, std::ostream& err)
{
  const std::set<std::string> known{ "all", "additive", "multiplicative", "equal-rate" };
  if (!known.count(f.theorem))
    throw InputError(fmt::format("unknown theorem '{}'", f.theorem));
  std::string text;
  bool passed = true;
  for (auto t : { Theorem::additive, Theorem::multiplicative }) {
    if (f.theorem != "all" && f.theorem != to_string(t))
      continue;
    err << fmt::format("checking {} equivalence\n", to_string(t));
    auto rep = run_equivalence_suite(t, cfg.trials, cfg.seed);
    text += format_report(rep);
    passed = passed && rep.passed;
  }
  if (f.theorem == "all" || f.theorem == "equal-rate") {
    validate_solver(cfg.solver);
    err << "running equal-rate sweep\n";
    auto rep = equal_rate_sweep(cfg.equal_rates, cfg.solver);
    text += format_report(rep);
    passed = passed && rep.passed;
  }
  if (!cfg.out.empty())
    write_file(cfg.out, text);
  out << text;
  return passed ? exit_ok : exit_check_failed;
}

int
cmd_plotdata(const RunConfig& cfg, std::ostream& out)
{
  if (cfg.solve.empty())
    throw InputError("plotdata needs --solve");
  std::ifstream in(cfg.solve);
  if (!in)
    throw InputError(fmt::format("cannot open solve report '{}'", cfg.solve));
  std::stringstream buf;
  buf << in.rdbuf();
  if (buf.str().find_first_not_of(" \t\r\n") == std::string::npos)
    throw InputError("empty solve report");
  auto load = [&] {
    try {
      return read_solve_report(json::parse(buf.str()));
    } catch (const json::parse_error& e) {
      throw InputError(fmt::format("solve report is not valid JSON: {}", e.what()));
    } catch (const FormatError& e) {
      throw InputError(e.what());
    }
  };
  std::string csv = plotdata_csv(load());
  if (!cfg.out.empty())
    write_file(cfg.out, csv);
  else
    out << csv;
  return exit_ok;
}

} // namespace

std::vector<double>
parse_grid(const std::string& text)
{
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    parts.push_back(item);

  auto number = [](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      throw InputError(fmt::format("bad grid value '{}'", s));
    }
    if (s.find_first_not_of(" \t", used) != std::string::npos)
      throw InputError(fmt::format("bad grid value '{}'", s));
    return x;
  };

  std::vector<double> grid;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].find("...") == std::string::npos) {
      grid.push_back(number(parts[i]));
      continue;
    }
    if (grid.size() < 2 || i + 1 != parts.size() - 1)
      throw InputError("'...' needs two leading values and one final value");
    double first = grid[grid.size() - 2];
    double step = grid.back() - first;
    double last = number(parts[i + 1]);
    if (!(step > 0.0) || last < grid.back())
      throw InputError("'...' needs an increasing grid");
    auto count = static_cast<long>(std::llround((last - first) / step));
    if (std::abs(first + static_cast<double>(count) * step - last) > 1e-9 * std::max(1.0, std::abs(last)))
      throw InputError("final grid value is not on the step");
    auto base = static_cast<long>(grid.size()) - 2;
    grid.resize(static_cast<std::size_t>(base));
    // index-based values avoid accumulating the step
    for (long k = 0; k <= count; ++k)
      grid.push_back(k == count ? last : first + static_cast<double>(k) * step);
    // drop sub-ulp noise so 0.15 prints as 0.15
    for (auto& x : grid)
      x = std::stod(fmt::format("{:.12g}", x));
    return grid;
  }
  if (grid.empty())
    throw InputError("empty grid");
  return grid;
}

int
run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "First-price auction discounts: estimation, equilibrium bids and outcomes" };
  app.require_subcommand(1);
  Flags f;

  auto* estimate = app.add_subcommand("estimate", "Fit valuation distributions to a bid log");
  auto* solve_cmd = app.add_subcommand("solve", "Compute equilibrium bid functions");
  auto* outcomes = app.add_subcommand("outcomes", "Revenue, efficiency and per-class outcomes over a rate grid");
  auto* verify = app.add_subcommand("verify", "Check the pre/post discount equivalences");
  auto* plotdata = app.add_subcommand("plotdata", "Bid curves from a solve report as CSV");

  for (auto* sub : { estimate, solve_cmd, outcomes, verify, plotdata }) {
    sub->add_option("--config", f.config, "JSON run configuration");
    sub->add_option("--out", f.out, "output path");
  }
  for (auto* sub : { estimate, solve_cmd, outcomes, verify })
    sub->add_option("--rate", f.rate, "price reduction rate");
  for (auto* sub : { solve_cmd, outcomes, verify }) {
    sub->add_option("--n", f.n, "number of undiscounted bidders");
    sub->add_option("--steps", f.steps, "Euler steps");
  }
  solve_cmd->add_option("--probes", f.probes, "best-response probe count");
  solve_cmd->add_option("--report", f.report, "solve report path (default <out>.json)");
  estimate->add_option("--bids", f.bids, "bid log CSV");
  estimate->add_option("--bandwidth", f.bandwidth, "kernel bandwidth (default Silverman)");
  estimate->add_option("--participants", f.participants, "bidders per auction");
  estimate->add_option("--pseudo-out", f.pseudo_out, "write retained pseudo-values here");
  outcomes->add_option("--sweep", f.sweep, "rates, e.g. \"0,0.05,...,0.25\"");
  outcomes->add_option("--method", f.method, "integration or montecarlo");
  outcomes->add_option("--samples", f.samples, "Monte Carlo samples");
  outcomes->add_flag("--round3", f.round3, "three-decimal presentation");
  for (auto* sub : { outcomes, verify })
    sub->add_option("--seed", f.seed, "random seed");
  verify->add_option("--theorem", f.theorem, "additive, multiplicative, equal-rate or all");
  verify->add_option("--trials", f.trials, "random instances per check");
  plotdata->add_option("--solve", f.solve, "solve report JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  }

  try {
    RunConfig cfg = resolve_config(f);
    if (estimate->parsed())
      return cmd_estimate(cfg, f, out, err);
    if (solve_cmd->parsed())
      return cmd_solve(cfg, out, err);
    if (outcomes->parsed())
      return cmd_outcomes(cfg, f, out, err);
    if (verify->parsed())
      return cmd_verify(cfg, f, out, err);
    return cmd_plotdata(cfg, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const BracketError& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}

} // namespace fpa::cli
