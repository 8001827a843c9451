#ifndef EVCS_CONFIG_HPP_
#define EVCS_CONFIG_HPP_

#include <nlohmann/json_fwd.hpp>

#include <string>

#include "evcs/assets.hpp"

namespace evcs {

struct GridConfig {
  double p_gc_kw = 400.0;  // grid connection limit
  double eta_tr = 0.98;
};

struct PvConfig {
  double eta_pv = 0.97;
};

struct ColumnConfig {
  int n_cc = 2;             // charging columns
  double p_cc_kw = 150.0;   // rated power per column
  int n_cp = 4;             // charging points per column
  double cp_rated_kw = 150.0;
  double eta_cp = 0.95;
};

struct TariffConfig {
  double peak_per_kwh = 0.60;
  double offpeak_per_kwh = 0.40;
  double discount_cap_fraction = 0.30;  // a
};

struct DayAheadConfig {
  double speculation_factor = 0.80;  // f_s
  bool terminal_soc_equals_initial = true;
};

struct IntradayConfig {
  double slack_weight_b = 1.0;
  double soc_tracking_weight_c = 0.01;
  double flexibility_tau = 0.20;
  int window_bm_periods = 8;
};

struct RealtimeConfig {
  double alpha = 1.0;    // leader tracking weight
  double beta = 0.01;    // follower time-of-charge weight, 1/kW^2
  double gamma = 1.0;    // follower degradation weight
  double delta = 1.0;    // incentive gain
  double rho0 = 1.0;
  double penalty_scale_tau = 2.0;  // tau_rho
  double penalty_ratio_mu = 10.0;  // mu
  double eps_abs = 1e-4;
  double eps_rel = 1e-3;
  double eps_outer = 1e-3;
  int max_inner_iterations = 500;
  int max_outer_iterations = 30;
  double slack_bisection_tol_kw = 0.25;
  std::string incentive_aggregation = "mean";  // mean | max
};

struct SolverConfig {
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  int max_iterations = 50000;
};

struct StationConfig {
  GridConfig grid;
  PvConfig pv;
  ColumnConfig columns;
  BessParams bess;
  StressCoefficients bess_stress;
  TariffConfig tariff;
  DayAheadConfig day_ahead;
  IntradayConfig intraday;
  RealtimeConfig realtime;
  SolverConfig solver;

  void validate() const;

  double tariff_at(bool peak) const {
    return peak ? tariff.peak_per_kwh : tariff.offpeak_per_kwh;
  }

  static StationConfig from_json(const nlohmann::json& j);
  static StationConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace evcs

#endif  // EVCS_CONFIG_HPP_
