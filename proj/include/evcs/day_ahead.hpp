#ifndef EVCS_DAY_AHEAD_HPP_
#define EVCS_DAY_AHEAD_HPP_

#include <nlohmann/json_fwd.hpp>

#include <vector>

#include "evcs/config.hpp"
#include "evcs/qp.hpp"

namespace evcs {

/// Lower / median / upper forecast quantiles per period.
struct QuantileSeries {
  std::vector<double> lo;
  std::vector<double> med;
  std::vector<double> hi;

  std::size_t size() const { return med.size(); }
  /// Throws when sizes differ or ordering lo <= med <= hi breaks, naming
  /// the offending period.
  void validate(const char* what) const;
};

struct DayAheadInputs {
  double dt_h = 1.0;                     // market period length
  std::vector<double> dam_rate_per_kwh;  // clearing rate per period
  std::vector<double> r_short_per_kwh;   // imbalance rate estimates (signed on input,
  std::vector<double> r_long_per_kwh;    //  clipped at zero inside the program)
  QuantileSeries pv_kw;
  QuantileSeries ev_demand_kw;
  std::vector<double> tariff_per_kwh;    // charging tariff per period
  double initial_soc_pct = 50.0;

  std::size_t periods() const { return dam_rate_per_kwh.size(); }
  void validate(const StationConfig& cfg) const;
};

struct CostBreakdown {
  double dam_cost = 0.0;
  double bm_cost = 0.0;
  double ev_revenue = 0.0;
  double degradation_cost = 0.0;  // exact stress-factor cost, recomputed ex post

  double total() const { return dam_cost + bm_cost + degradation_cost - ev_revenue; }
};

struct DispatchPlan {
  double dt_h = 1.0;
  std::vector<double> p_dp_grid_kw;       // market commitment
  std::vector<double> p_grid_internal_kw; // schedule at the median PV forecast
  std::vector<double> p_ev_kw;
  std::vector<double> p_bess_ac_kw;
  std::vector<double> p_bess_batt_kw;
  std::vector<double> soc_pct;            // periods()+1 entries
  std::vector<double> p_ev_dp_kw;         // committed EV power, kept for the
                                          // intraday revenue delta
  double objective = 0.0;                 // program objective value
  CostBreakdown costs;

  nlohmann::json to_json() const;
};

/// Thrown when an optimization layer cannot produce an optimal plan.
struct SolveError : std::runtime_error {
  SolveError(const std::string& what, SolveReport rep)
      : std::runtime_error(what + ": " + to_string(rep.status) +
                           (rep.message.empty() ? "" : " (" + rep.message + ")")),
        report(std::move(rep)) {}
  SolveReport report;
};

/// Builds the day-ahead program: market cost plus expected imbalance cost
/// via epigraph variables at the median PV forecast, minus charging
/// revenue, plus a throughput-proportional battery wear term; constrained
/// by quantile-separated grid limits, demand caps and speculation bounds.
QuadraticProgram build_da_program(const DayAheadInputs& inputs, const StationConfig& cfg);

DispatchPlan solve_day_ahead(const DayAheadInputs& inputs, const StationConfig& cfg);

/// kW equivalent of one SoC percent per period, used by the speculation
/// bounds (f_s carries percent-to-kW units through the battery capacity).
double soc_pct_to_kw(const StationConfig& cfg, double dt_h);

}  // namespace evcs

#endif  // EVCS_DAY_AHEAD_HPP_
