#include "evcs/day_ahead.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evcs {

namespace {

std::string idx(const char* base, std::size_t t) {
  return std::string(base) + "[" + std::to_string(t) + "]";
}

}  // namespace

void QuantileSeries::validate(const char* what) const {
  if (lo.size() != med.size() || hi.size() != med.size())
    throw std::invalid_argument(std::string(what) + ": quantile series sizes differ");
  for (std::size_t t = 0; t < med.size(); ++t) {
    if (!(lo[t] <= med[t] && med[t] <= hi[t]))
      throw std::invalid_argument(std::string(what) + ": quantile ordering violated at period " +
                                  std::to_string(t));
    if (!std::isfinite(lo[t]) || !std::isfinite(med[t]) || !std::isfinite(hi[t]))
      throw std::invalid_argument(std::string(what) + ": non-finite quantile at period " +
                                  std::to_string(t));
  }
}

void DayAheadInputs::validate(const StationConfig& cfg) const {
  const std::size_t n = periods();
  if (n == 0) throw std::invalid_argument("day-ahead: empty horizon");
  if (!(dt_h > 0.0)) throw std::invalid_argument("day-ahead: dt_h must be > 0");
  if (r_short_per_kwh.size() != n || r_long_per_kwh.size() != n ||
      tariff_per_kwh.size() != n)
    throw std::invalid_argument("day-ahead: rate/tariff series must match the horizon");
  if (pv_kw.size() != n || ev_demand_kw.size() != n)
    throw std::invalid_argument("day-ahead: forecast series must match the horizon");
  pv_kw.validate("day-ahead pv forecast");
  ev_demand_kw.validate("day-ahead ev demand forecast");
  for (std::size_t t = 0; t < n; ++t) {
    if (!std::isfinite(dam_rate_per_kwh[t]) || !std::isfinite(r_short_per_kwh[t]) ||
        !std::isfinite(r_long_per_kwh[t]))
      throw std::invalid_argument("day-ahead: non-finite rate at period " + std::to_string(t));
  }
  if (!(initial_soc_pct >= cfg.bess.soc_min_pct && initial_soc_pct <= cfg.bess.soc_max_pct))
    throw std::invalid_argument("day-ahead: initial SoC outside the configured bounds");
}

double soc_pct_to_kw(const StationConfig& cfg, double dt_h) {
  return cfg.bess.capacity_kwh / (100.0 * dt_h);
}

QuadraticProgram build_da_program(const DayAheadInputs& in, const StationConfig& cfg) {
  in.validate(cfg);
  const std::size_t n = in.periods();
  const double dt = in.dt_h;
  const auto& b = cfg.bess;
  const double inv_ch = 1.0 / (b.eta_inv * b.eta_ch);  // AC draw per battery kW charged
  const double eff_dh = b.eta_inv * b.eta_dh;          // AC yield per battery kW discharged
  const double p_batt_max = b.p_batt_max_kw();
  const double deg_rate = degradation_cost_per_kwh(cfg.bess_stress, b);
  const double fs_kw = cfg.day_ahead.speculation_factor * soc_pct_to_kw(cfg, dt);
  const double inf = std::numeric_limits<double>::infinity();

  ProgramBuilder pb;
  std::vector<int> v_ch(n), v_dh(n), v_ev(n), v_dp(n), v_g(n), v_us(n), v_ul(n);
  std::vector<int> v_soc(n + 1);
  for (std::size_t t = 0; t <= n; ++t)
    v_soc[t] = pb.add_var(idx("soc", t), b.soc_min_pct, b.soc_max_pct);
  for (std::size_t t = 0; t < n; ++t) {
    v_ch[t] = pb.add_var(idx("b_ch", t), 0.0, p_batt_max);
    v_dh[t] = pb.add_var(idx("b_dh", t), 0.0, p_batt_max);
    v_ev[t] = pb.add_var(idx("p_ev", t), 0.0, std::max(0.0, in.ev_demand_kw.lo[t]));
    v_dp[t] = pb.add_var(idx("p_dp", t), -inf, inf);
    v_g[t] = pb.add_var(idx("p_g", t), -inf, inf);
    v_us[t] = pb.add_var(idx("u_short", t), 0.0, inf);
    v_ul[t] = pb.add_var(idx("u_long", t), 0.0, inf);
  }

  pb.add_eq({{v_soc[0], 1.0}}, in.initial_soc_pct, "soc_init");
  if (cfg.day_ahead.terminal_soc_equals_initial)
    pb.add_eq({{v_soc[n], 1.0}}, in.initial_soc_pct, "soc_terminal");

  const double soc_gain = 100.0 * dt / b.capacity_kwh;
  for (std::size_t t = 0; t < n; ++t) {
    // objective
    pb.add_lin(v_dp[t], dt * in.dam_rate_per_kwh[t]);
    pb.add_lin(v_ev[t], -dt * in.tariff_per_kwh[t]);
    pb.add_lin(v_ch[t], dt * deg_rate);
    pb.add_lin(v_dh[t], dt * deg_rate);
    pb.add_lin(v_us[t], dt * std::max(0.0, in.r_short_per_kwh[t]));
    pb.add_lin(v_ul[t], dt * std::max(0.0, in.r_long_per_kwh[t]));

    // AC busbar balance at the median PV forecast
    pb.add_eq({{v_g[t], cfg.grid.eta_tr},
               {v_ev[t], -1.0 / cfg.columns.eta_cp},
               {v_ch[t], -inv_ch},
               {v_dh[t], eff_dh}},
              -in.pv_kw.med[t] * cfg.pv.eta_pv, idx("balance", t));

    // SoC dynamics
    pb.add_eq({{v_soc[t + 1], 1.0}, {v_soc[t], -1.0}, {v_ch[t], -soc_gain}, {v_dh[t], soc_gain}},
              0.0, idx("soc_dyn", t));

    // quantile-separated grid limits: withdrawal against the low PV
    // quantile, injection against the high one
    const double load_coeff = 1.0 / (cfg.grid.eta_tr * cfg.columns.eta_cp);
    pb.add_ineq({{v_ev[t], load_coeff},
                 {v_ch[t], inv_ch / cfg.grid.eta_tr},
                 {v_dh[t], -eff_dh / cfg.grid.eta_tr}},
                in.pv_kw.lo[t] * cfg.pv.eta_pv + cfg.grid.p_gc_kw, idx("withdraw", t));
    pb.add_ineq({{v_ev[t], -load_coeff},
                 {v_ch[t], -inv_ch / cfg.grid.eta_tr},
                 {v_dh[t], eff_dh / cfg.grid.eta_tr}},
                -(in.pv_kw.hi[t] * cfg.pv.eta_pv - cfg.grid.p_gc_kw), idx("inject", t));

    // speculation bounds on the market commitment
    pb.add_ineq({{v_dp[t], -1.0}, {v_soc[t], -fs_kw}},
                -fs_kw * b.soc_min_pct + in.pv_kw.med[t] * cfg.pv.eta_pv, idx("spec_sell", t));
    pb.add_ineq({{v_dp[t], 1.0}, {v_soc[t], fs_kw}},
                fs_kw * b.soc_max_pct + in.ev_demand_kw.med[t] / cfg.columns.eta_cp,
                idx("spec_buy", t));

    // imbalance epigraph
    pb.add_ineq({{v_g[t], 1.0}, {v_dp[t], -1.0}, {v_us[t], -1.0}}, 0.0, idx("bm_short", t));
    pb.add_ineq({{v_dp[t], 1.0}, {v_g[t], -1.0}, {v_ul[t], -1.0}}, 0.0, idx("bm_long", t));
  }
  return pb.build();
}

DispatchPlan solve_day_ahead(const DayAheadInputs& in, const StationConfig& cfg) {
  const QuadraticProgram qp = build_da_program(in, cfg);
  const SolveReport rep =
      solve_qp(qp, {cfg.solver.eps_abs, cfg.solver.eps_rel}, cfg.solver.max_iterations);
  if (rep.status != SolveStatus::optimal) throw SolveError("day-ahead solve failed", rep);

  const std::size_t n = in.periods();
  DispatchPlan plan;
  plan.dt_h = in.dt_h;
  plan.objective = rep.objective;
  plan.p_dp_grid_kw.resize(n);
  plan.p_grid_internal_kw.resize(n);
  plan.p_ev_kw.resize(n);
  plan.p_bess_ac_kw.resize(n);
  plan.p_bess_batt_kw.resize(n);
  plan.soc_pct.resize(n + 1);
  const auto& x = rep.solution;
  for (std::size_t t = 0; t <= n; ++t) plan.soc_pct[t] = x[qp.var_index(idx("soc", t))];
  std::vector<PowerStep> profile(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double ch = x[qp.var_index(idx("b_ch", t))];
    const double dh = x[qp.var_index(idx("b_dh", t))];
    plan.p_dp_grid_kw[t] = x[qp.var_index(idx("p_dp", t))];
    plan.p_grid_internal_kw[t] = x[qp.var_index(idx("p_g", t))];
    plan.p_ev_kw[t] = x[qp.var_index(idx("p_ev", t))];
    plan.p_bess_batt_kw[t] = ch - dh;
    plan.p_bess_ac_kw[t] = bess_ac_power(plan.p_bess_batt_kw[t], cfg.bess);
    profile[t] = {plan.p_bess_batt_kw[t], in.dt_h};
  }
  plan.p_ev_dp_kw = plan.p_ev_kw;

  CostBreakdown c;
  for (std::size_t t = 0; t < n; ++t) {
    c.dam_cost += in.dt_h * plan.p_dp_grid_kw[t] * in.dam_rate_per_kwh[t];
    const double dev = plan.p_grid_internal_kw[t] - plan.p_dp_grid_kw[t];
    c.bm_cost += in.dt_h * (std::max(0.0, in.r_short_per_kwh[t]) * std::max(0.0, dev) +
                            std::max(0.0, in.r_long_per_kwh[t]) * std::max(0.0, -dev));
    c.ev_revenue += in.dt_h * plan.p_ev_kw[t] * in.tariff_per_kwh[t];
  }
  c.degradation_cost = degradation_cost(profile, plan.soc_pct, cfg.bess_stress, cfg.bess);
  plan.costs = c;
  return plan;
}

nlohmann::json DispatchPlan::to_json() const {
  return nlohmann::json{
      {"dt_h", dt_h},
      {"p_dp_grid_kw", p_dp_grid_kw},
      {"p_grid_internal_kw", p_grid_internal_kw},
      {"p_ev_kw", p_ev_kw},
      {"p_bess_ac_kw", p_bess_ac_kw},
      {"p_bess_batt_kw", p_bess_batt_kw},
      {"soc_pct", soc_pct},
      {"p_ev_dp_kw", p_ev_dp_kw},
      {"objective", objective},
      {"costs",
       {{"dam_cost", costs.dam_cost},
        {"bm_cost", costs.bm_cost},
        {"ev_revenue", costs.ev_revenue},
        {"degradation_cost", costs.degradation_cost},
        {"total", costs.total()}}}};
}

}  // namespace evcs
