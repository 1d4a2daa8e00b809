#include "fpa/table_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <istream>
#include <set>

namespace fpa {

using nlohmann::json;

namespace {

void
append_table(std::string& out, const TabulatedBidFunction& t, const std::string& prefix)
{
  for (std::size_t i = 0; i < t.size(); ++i)
    out += fmt::format("{}{},{}\n", prefix, t.valuations()[i], t.bids()[i]);
}

double
parse_double(std::string_view s, std::size_t line)
{
  double x = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size())
    throw FormatError(fmt::format("line {}: bad number '{}'", line, s));
  return x;
}

void
check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what)
{
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key))
      throw FormatError(fmt::format("unknown key '{}' in {}", key, what));
}

double
number(const json& j, const char* key, const std::string& what)
{
  if (!j.contains(key))
    throw FormatError(fmt::format("{} is missing '{}'", what, key));
  if (!j.at(key).is_number())
    throw FormatError(fmt::format("'{}' in {} must be a number", key, what));
  return j.at(key).get<double>();
}

json
table_json(const TabulatedBidFunction& t)
{
  return { { "valuation", t.valuations() }, { "bid", t.bids() } };
}

TabulatedBidFunction
table_from_json(const json& j, Role role)
{
  auto what = fmt::format("{} table", to_string(role));
  if (!j.is_object() || !j.contains("valuation") || !j.contains("bid"))
    throw FormatError(fmt::format("{} needs 'valuation' and 'bid' arrays", what));
  try {
    return TabulatedBidFunction(role,
                                j.at("valuation").get<std::vector<double>>(),
                                j.at("bid").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: {}", what, e.what()));
  } catch (const std::invalid_argument& e) {
    throw FormatError(fmt::format("{}: {}", what, e.what()));
  }
}

} // namespace

std::string
bid_table_csv(const BidFunctions& tables)
{
  std::string out = "role,valuation,bid\n";
  append_table(out, tables.discounted, "discounted,");
  append_table(out, tables.undiscounted, "undiscounted,");
  return out;
}

BidFunctions
read_bid_table_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line.rfind("role,valuation,bid", 0) != 0)
    throw FormatError("missing header: expected columns role,valuation,bid");
  std::vector<double> v[2], b[2];
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw FormatError(fmt::format("line {}: expected 3 fields", number));
    std::string_view view(line);
    Role role;
    try {
      role = role_from_string(std::string(view.substr(0, c1)));
    } catch (const std::invalid_argument& e) {
      throw FormatError(fmt::format("line {}: {}", number, e.what()));
    }
    auto k = static_cast<int>(role);
    v[k].push_back(parse_double(view.substr(c1 + 1, c2 - c1 - 1), number));
    b[k].push_back(parse_double(view.substr(c2 + 1), number));
  }
  try {
    return { TabulatedBidFunction(Role::discounted, v[0], b[0]),
             TabulatedBidFunction(Role::undiscounted, v[1], b[1]) };
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::string
outcomes_csv(std::span<const SweepRow> rows, bool round3)
{
  std::string out = outcomes_header;
  out += '\n';
  auto num = [round3](double x) {
    return round3 ? fmt::format("{:.3f}", x) : fmt::format("{}", x);
  };
  for (const auto& row : rows) {
    out += num(row.rate);
    if (!row.stats) {
      out += ",,,,,,,,,,,failed\n";
      continue;
    }
    const auto& s = *row.stats;
    for (double x : { s.expected_revenue,
                      s.efficiency,
                      s.win_disc,
                      s.win_other,
                      s.surplus_disc,
                      s.surplus_other,
                      s.cost_disc,
                      s.cost_other,
                      s.cond_cost_disc(),
                      s.cond_cost_other() })
      out += "," + num(x);
    out += ",ok\n";
  }
  return out;
}

json
to_json(const Distribution& d)
{
  return std::visit(
    [](const auto& k) -> json {
      using T = std::decay_t<decltype(k)>;
      if constexpr (std::is_same_v<T, Uniform>)
        return { { "kind", "uniform" }, { "lo", k.lo }, { "hi", k.hi } };
      else if constexpr (std::is_same_v<T, LogNormal>)
        return { { "kind", "lognormal" }, { "sigma", k.sigma }, { "scale", k.scale } };
      else
        return { { "kind", "truncated_lognormal" },
                 { "sigma", k.sigma },
                 { "scale", k.scale },
                 { "lower_q", k.lower_q },
                 { "upper_q", k.upper_q } };
    },
    d.kind());
}

Distribution
distribution_from_json(const json& j)
{
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw FormatError("distribution needs a string 'kind'");
  auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "uniform") {
      check_keys(j, { "kind", "lo", "hi" }, "uniform distribution");
      return Distribution::uniform(number(j, "lo", kind), number(j, "hi", kind));
    }
    if (kind == "lognormal") {
      check_keys(j, { "kind", "sigma", "scale" }, "lognormal distribution");
      return Distribution::lognormal(number(j, "sigma", kind), number(j, "scale", kind));
    }
    if (kind == "truncated_lognormal") {
      check_keys(j, { "kind", "sigma", "scale", "lower_q", "upper_q" }, "truncated_lognormal distribution");
      TruncatedLogNormal t;
      t.sigma = number(j, "sigma", kind);
      t.scale = number(j, "scale", kind);
      if (j.contains("lower_q"))
        t.lower_q = number(j, "lower_q", kind);
      if (j.contains("upper_q"))
        t.upper_q = number(j, "upper_q", kind);
      return Distribution::truncated_lognormal(t.sigma, t.scale, t.lower_q, t.upper_q);
    }
  } catch (const std::domain_error& e) {
    throw FormatError(fmt::format("{} distribution: {}", kind, e.what()));
  } catch (const std::invalid_argument& e) {
    throw FormatError(fmt::format("{} distribution: {}", kind, e.what()));
  }
  throw FormatError(fmt::format("unknown distribution kind '{}'", kind));
}

json
solve_report_json(const SolveReport& report, const SolverConfig& cfg)
{
  json j = { { "rate", cfg.rate },
             { "n", cfg.n },
             { "steps", cfg.steps },
             { "discounted", to_json(cfg.discounted) },
             { "undiscounted", to_json(cfg.undiscounted) },
             { "bstar", report.bstar },
             { "feasible", report.feasible },
             { "clamped", report.clamped },
             { "gaps",
               { { "discounted", report.gaps.gap1 },
                 { "undiscounted", report.gaps.gap2 },
                 { "mean_discounted", report.gaps.mean_gap1 },
                 { "mean_undiscounted", report.gaps.mean_gap2 } } } };
  if (report.bid_functions)
    j["tables"] = { { "discounted", table_json(report.bid_functions->discounted) },
                    { "undiscounted", table_json(report.bid_functions->undiscounted) } };
  return j;
}

StoredSolve
read_solve_report(const json& j)
{
  if (!j.is_object() || j.empty())
    throw FormatError("empty solve report");
  if (!j.contains("tables") || !j.at("tables").is_object())
    throw FormatError("solve report has no bid tables");
  const auto& t = j.at("tables");
  if (!t.contains("discounted") || !t.contains("undiscounted"))
    throw FormatError("solve report needs discounted and undiscounted tables");
  return { number(j, "rate", "solve report"),
           { table_from_json(t.at("discounted"), Role::discounted),
             table_from_json(t.at("undiscounted"), Role::undiscounted) } };
}

std::string
plotdata_csv(const StoredSolve& s)
{
  std::string out = "role,r,valuation,bid\n";
  auto prefix_d = fmt::format("discounted,{},", s.rate);
  auto prefix_u = fmt::format("undiscounted,{},", s.rate);
  append_table(out, s.tables.discounted, prefix_d);
  append_table(out, s.tables.undiscounted, prefix_u);
  return out;
}

} // namespace fpa
