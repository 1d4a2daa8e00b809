#pragma once

#include "fpa/distributions.hpp"
#include "fpa/outcomes.hpp"
#include "fpa/solver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

namespace fpa {

//! Malformed file or document.
class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* outcomes_header =
  "r,e_rev,eff,win_disc,win_other,surp_disc,surp_other,cost_disc,cost_other,"
  "cond_cost_disc,cond_cost_other,status";

//! role,valuation,bid with round-trip precision.
std::string bid_table_csv(const BidFunctions& tables);
BidFunctions read_bid_table_csv(std::istream& in);

//! One row per sweep entry. Failed rows keep their rate, leave the
//! statistics empty and carry status=failed. With `round3` every statistic
//! is printed to three decimals.
std::string outcomes_csv(std::span<const SweepRow> rows, bool round3 = false);

//! Tagged record, e.g. {"kind": "uniform", "lo": 0, "hi": 1}. Unknown keys
//! and missing parameters raise FormatError.
nlohmann::json to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);

nlohmann::json solve_report_json(const SolveReport& report, const SolverConfig& cfg);

struct StoredSolve
{
  double rate = 0.0;
  BidFunctions tables;
};

StoredSolve read_solve_report(const nlohmann::json& j);

//! role,r,valuation,bid for both curves.
std::string plotdata_csv(const StoredSolve& solve);

} // namespace fpa
