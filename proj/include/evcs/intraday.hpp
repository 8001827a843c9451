#ifndef EVCS_INTRADAY_HPP_
#define EVCS_INTRADAY_HPP_

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <vector>

#include "evcs/config.hpp"
#include "evcs/day_ahead.hpp"

namespace evcs {

/// Sliding refinement window measured in balancing periods of the
/// day-ahead granularity.
struct Window {
  std::size_t start_period = 0;
  std::size_t n_periods = 0;

  bool empty() const { return n_periods == 0; }
};

/// Clamps a window to the operation day; the sliding horizon becomes a
/// shrinking one near the day end and empty past it.
Window shrink_horizon(Window window, std::size_t day_periods);

struct IntradayInputs {
  double dt_h = 0.25;     // refinement step
  double dt_da_h = 1.0;   // balancing period (= day-ahead granularity)
  std::vector<double> p_ev_max_kw;       // booking-derived ceiling per step
  std::vector<double> p_ev_expected_kw;  // forecast demand per step
  QuantileSeries pv_kw;                  // per step
  std::vector<double> r_short_per_kwh;   // per balancing period (signed)
  std::vector<double> r_long_per_kwh;
  std::vector<double> tariff_per_kwh;    // per step
  std::vector<double> p_dp_grid_kw;      // plan commitment per balancing period
  double p_ev_dp_first_period_kw = 0.0;  // plan EV power in the first period
  double soc_dp_start_pct = 50.0;        // plan SoC at window start / end
  double soc_dp_end_pct = 50.0;
  double initial_soc_pct = 50.0;         // measured state at window start

  std::size_t steps() const { return p_ev_expected_kw.size(); }
  std::size_t bm_periods() const { return p_dp_grid_kw.size(); }
  std::size_t steps_per_period() const;
  void validate(const StationConfig& cfg) const;
};

struct RefinementResult {
  double dt_h = 0.25;
  std::vector<double> p_bess_ac_kw;
  std::vector<double> p_bess_batt_kw;
  std::vector<double> p_ev_kw;
  std::vector<double> s_plus_kw;
  std::vector<double> s_minus_kw;
  std::vector<double> p_g_expected_kw;
  std::vector<double> p_g_lo_kw;
  std::vector<double> p_g_hi_kw;
  std::vector<double> soc_pct;     // steps()+1
  std::vector<double> e_plus_kwh;  // per balancing period
  std::vector<double> e_minus_kwh;
  double objective = 0.0;
  double imbalance_cost = 0.0;
  double slack_cost = 0.0;
  double degradation_cost = 0.0;   // linearized term as optimized
  double soc_tracking_cost = 0.0;
  double ev_revenue = 0.0;

  nlohmann::json to_json() const;
};

struct BudgetStep {
  double lo_kw = 0.0;
  double expected_kw = 0.0;
  double hi_kw = 0.0;
  double bess_ac_kw = 0.0;
  double s_plus_kw = 0.0;
  double s_minus_kw = 0.0;
  double pv_lo_kw = 0.0;
  double pv_med_kw = 0.0;
  double pv_hi_kw = 0.0;
};

/// Real-time envelope handed to the controller: the upsampled short-term
/// span, the remaining window at refinement granularity, and the maximum
/// incentive.
struct GridPowerBudget {
  double dj_h = 1.0 / 60.0;
  double dt_h = 0.25;
  std::vector<BudgetStep> short_term;  // at dj over the first balancing period
  std::vector<BudgetStep> long_term;   // at dt over the whole window
  double max_incentive_per_kwh = 0.0;  // D

  nlohmann::json to_json() const;
};

/// Solves the window refinement: per-period imbalance cost, slack sum and
/// spread penalty, battery wear, SoC tracking against the plan, minus
/// charging revenue. Infeasibility (e.g. a flexibility requirement the
/// slack bounds cannot meet) surfaces as a SolveError naming the row.
RefinementResult refine_window(const IntradayInputs& inputs, const StationConfig& cfg);

/// Per-step grid power interval from the refinement components and the
/// window PV quantiles.
std::vector<BudgetStep> grid_power_budget(const RefinementResult& result,
                                          const IntradayInputs& inputs,
                                          const StationConfig& cfg);

/// Recomputes the first-period budget at the short-term granularity using
/// the finer PV quantiles; battery setpoint and slacks are held constant
/// within each refinement step.
GridPowerBudget upsample_short_term(const RefinementResult& result,
                                    const IntradayInputs& inputs,
                                    const QuantileSeries& short_pv_kw, double dj_h,
                                    const StationConfig& cfg);

/// Maximum incentive over the first balancing period: extra charging
/// revenue net of imbalance cost per unit of mean EV power, floored at the
/// configured tariff fraction.
double max_incentive(const RefinementResult& result, const IntradayInputs& inputs,
                     const StationConfig& cfg);

}  // namespace evcs

#endif  // EVCS_INTRADAY_HPP_
