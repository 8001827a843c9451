#include "evcs/intraday.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evcs {

namespace {

std::string idx(const char* base, std::size_t t) {
  return std::string(base) + "[" + std::to_string(t) + "]";
}

nlohmann::json budget_step_json(const BudgetStep& s) {
  return nlohmann::json{{"lo_kw", s.lo_kw},         {"expected_kw", s.expected_kw},
                        {"hi_kw", s.hi_kw},         {"bess_ac_kw", s.bess_ac_kw},
                        {"s_plus_kw", s.s_plus_kw}, {"s_minus_kw", s.s_minus_kw},
                        {"pv_lo_kw", s.pv_lo_kw},   {"pv_med_kw", s.pv_med_kw},
                        {"pv_hi_kw", s.pv_hi_kw}};
}

}  // namespace

Window shrink_horizon(Window window, std::size_t day_periods) {
  if (window.start_period >= day_periods) return {window.start_period, 0};
  window.n_periods = std::min(window.n_periods, day_periods - window.start_period);
  return window;
}

std::size_t IntradayInputs::steps_per_period() const {
  const double ratio = dt_da_h / dt_h;
  const auto k = static_cast<std::size_t>(std::llround(ratio));
  if (k == 0 || std::abs(ratio - static_cast<double>(k)) > 1e-9)
    throw std::invalid_argument("intraday: dt_h must divide dt_da_h");
  return k;
}

void IntradayInputs::validate(const StationConfig& cfg) const {
  const std::size_t n = steps();
  if (n == 0) throw std::invalid_argument("intraday: empty window");
  if (!(dt_h > 0.0) || !(dt_da_h > 0.0))
    throw std::invalid_argument("intraday: step lengths must be > 0");
  const std::size_t spp = steps_per_period();
  if (n != bm_periods() * spp)
    throw std::invalid_argument("intraday: window must cover whole balancing periods");
  if (p_ev_max_kw.size() != n || tariff_per_kwh.size() != n || pv_kw.size() != n)
    throw std::invalid_argument("intraday: per-step series must match the window");
  if (r_short_per_kwh.size() != bm_periods() || r_long_per_kwh.size() != bm_periods())
    throw std::invalid_argument("intraday: rate series must match the balancing periods");
  pv_kw.validate("intraday pv forecast");
  for (std::size_t t = 0; t < n; ++t) {
    if (p_ev_expected_kw[t] > p_ev_max_kw[t] + 1e-9)
      throw std::invalid_argument("intraday: expected demand above booking ceiling at step " +
                                  std::to_string(t));
    if (p_ev_expected_kw[t] < 0.0 || p_ev_max_kw[t] < 0.0)
      throw std::invalid_argument("intraday: negative demand input at step " + std::to_string(t));
  }
  for (std::size_t p = 0; p < bm_periods(); ++p) {
    if (r_short_per_kwh[p] + r_long_per_kwh[p] < 0.0)
      throw std::invalid_argument(
          "intraday: short+long rate must be non-negative at period " + std::to_string(p));
  }
  if (!(initial_soc_pct >= cfg.bess.soc_min_pct - 1e-9 &&
        initial_soc_pct <= cfg.bess.soc_max_pct + 1e-9))
    throw std::invalid_argument("intraday: initial SoC outside the configured bounds");
}

RefinementResult refine_window(const IntradayInputs& in, const StationConfig& cfg) {
  in.validate(cfg);
  const std::size_t n = in.steps();
  const std::size_t spp = in.steps_per_period();
  const double dt = in.dt_h;
  const auto& b = cfg.bess;
  const double inv_ch = 1.0 / (b.eta_inv * b.eta_ch);
  const double eff_dh = b.eta_inv * b.eta_dh;
  const double p_batt_max = b.p_batt_max_kw();
  const double deg_rate = degradation_cost_per_kwh(cfg.bess_stress, b);
  const double eta_cp = cfg.columns.eta_cp;
  const double eta_tr = cfg.grid.eta_tr;
  const double eta_pv = cfg.pv.eta_pv;
  const double tau = cfg.intraday.flexibility_tau;
  const double bw = cfg.intraday.slack_weight_b;
  const double cw = cfg.intraday.soc_tracking_weight_c;
  const double inf = std::numeric_limits<double>::infinity();

  ProgramBuilder pb;
  std::vector<int> v_ch(n), v_dh(n), v_ev(n), v_sp(n), v_sm(n), v_g(n), v_hi(n), v_lo(n);
  std::vector<int> v_soc(n + 1), v_ep(in.bm_periods()), v_em(in.bm_periods());
  for (std::size_t t = 0; t <= n; ++t)
    v_soc[t] = pb.add_var(idx("soc", t), b.soc_min_pct, b.soc_max_pct);
  for (std::size_t t = 0; t < n; ++t) {
    v_ch[t] = pb.add_var(idx("b_ch", t), 0.0, p_batt_max);
    v_dh[t] = pb.add_var(idx("b_dh", t), 0.0, p_batt_max);
    v_ev[t] = pb.add_var(idx("p_ev", t), 0.0, in.p_ev_max_kw[t]);
    v_sp[t] = pb.add_var(idx("s_plus", t), 0.0, inf);
    v_sm[t] = pb.add_var(idx("s_minus", t), 0.0, inf);
    v_g[t] = pb.add_var(idx("p_g", t), -inf, inf);
    v_hi[t] = pb.add_var(idx("p_g_hi", t), -inf, cfg.grid.p_gc_kw);
    v_lo[t] = pb.add_var(idx("p_g_lo", t), -cfg.grid.p_gc_kw, inf);
  }
  for (std::size_t p = 0; p < in.bm_periods(); ++p) {
    v_ep[p] = pb.add_var(idx("e_plus", p), 0.0, inf);
    v_em[p] = pb.add_var(idx("e_minus", p), 0.0, inf);
  }

  pb.add_eq({{v_soc[0], 1.0}}, in.initial_soc_pct, "soc_init");
  const double soc_gain = 100.0 * dt / b.capacity_kwh;
  for (std::size_t t = 0; t < n; ++t) {
    pb.add_eq({{v_soc[t + 1], 1.0}, {v_soc[t], -1.0}, {v_ch[t], -soc_gain}, {v_dh[t], soc_gain}},
              0.0, idx("soc_dyn", t));

    // expected grid power and budget endpoints
    pb.add_eq({{v_g[t], eta_tr},
               {v_ev[t], -1.0 / eta_cp},
               {v_ch[t], -inv_ch},
               {v_dh[t], eff_dh}},
              -in.pv_kw.med[t] * eta_pv, idx("balance", t));
    pb.add_eq({{v_hi[t], eta_tr},
               {v_ev[t], -1.0 / eta_cp},
               {v_sp[t], -1.0 / eta_cp},
               {v_ch[t], -inv_ch},
               {v_dh[t], eff_dh}},
              -in.pv_kw.lo[t] * eta_pv, idx("budget_hi", t));
    pb.add_eq({{v_lo[t], eta_tr},
               {v_ev[t], -1.0 / eta_cp},
               {v_sm[t], 1.0 / eta_cp},
               {v_ch[t], -inv_ch},
               {v_dh[t], eff_dh}},
              -in.pv_kw.hi[t] * eta_pv, idx("budget_lo", t));

    // slack chain around the expected demand
    pb.add_ineq({{v_sm[t], 1.0}, {v_ev[t], -1.0}}, 0.0, idx("slack_floor", t));
    pb.add_ineq({{v_ev[t], 1.0}, {v_sm[t], -1.0}}, in.p_ev_expected_kw[t], idx("slack_lo", t));
    pb.add_ineq({{v_ev[t], -1.0}, {v_sp[t], -1.0}}, -in.p_ev_expected_kw[t], idx("slack_hi", t));
    pb.add_ineq({{v_ev[t], 1.0}, {v_sp[t], 1.0}}, in.p_ev_max_kw[t], idx("slack_cap", t));

    // flexibility floor: slack band plus PV spread must cover a share of
    // the expected power fed to the EVs
    pb.add_ineq({{v_g[t], tau * eta_tr},
                 {v_ch[t], -tau * inv_ch},
                 {v_dh[t], tau * eff_dh},
                 {v_sp[t], -1.0 / eta_cp},
                 {v_sm[t], -1.0 / eta_cp}},
                (in.pv_kw.hi[t] - in.pv_kw.lo[t]) * eta_pv, idx("flex_tau", t));

    // objective: slack sum, spread, wear, revenue
    pb.add_lin(v_sp[t], bw);
    pb.add_lin(v_sm[t], bw);
    pb.add_quad(v_sp[t], v_sp[t], bw);
    pb.add_quad(v_sm[t], v_sm[t], bw);
    pb.add_quad(v_sp[t], v_sm[t], -bw);
    pb.add_lin(v_ch[t], dt * deg_rate);
    pb.add_lin(v_dh[t], dt * deg_rate);
    pb.add_lin(v_ev[t], -dt * in.tariff_per_kwh[t]);
  }

  for (std::size_t p = 0; p < in.bm_periods(); ++p) {
    std::vector<ProgramBuilder::Term> terms{{v_ep[p], -1.0}, {v_em[p], 1.0}};
    for (std::size_t t = p * spp; t < (p + 1) * spp; ++t) terms.push_back({v_g[t], dt});
    pb.add_eq(terms, in.p_dp_grid_kw[p] * in.dt_da_h, idx("energy", p));
    pb.add_lin(v_ep[p], in.r_short_per_kwh[p]);
    pb.add_lin(v_em[p], in.r_long_per_kwh[p]);
  }

  // SoC tracking: the window-start term is fixed by the measured state and
  // enters as a constant; the window-end term steers the schedule.
  const double start_dev = in.initial_soc_pct - in.soc_dp_start_pct;
  pb.add_constant(cw * start_dev * start_dev);
  pb.add_quad(v_soc[n], v_soc[n], cw);
  pb.add_lin(v_soc[n], -2.0 * cw * in.soc_dp_end_pct);
  pb.add_constant(cw * in.soc_dp_end_pct * in.soc_dp_end_pct);

  const QuadraticProgram qp = pb.build();
  const SolveReport rep =
      solve_qp(qp, {cfg.solver.eps_abs, cfg.solver.eps_rel}, cfg.solver.max_iterations);
  if (rep.status != SolveStatus::optimal) throw SolveError("intraday refinement failed", rep);

  RefinementResult r;
  r.dt_h = dt;
  const auto& x = rep.solution;
  r.soc_pct.resize(n + 1);
  for (std::size_t t = 0; t <= n; ++t) r.soc_pct[t] = x[v_soc[t]];
  r.p_bess_batt_kw.resize(n);
  r.p_bess_ac_kw.resize(n);
  r.p_ev_kw.resize(n);
  r.s_plus_kw.resize(n);
  r.s_minus_kw.resize(n);
  r.p_g_expected_kw.resize(n);
  r.p_g_lo_kw.resize(n);
  r.p_g_hi_kw.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    r.p_bess_batt_kw[t] = x[v_ch[t]] - x[v_dh[t]];
    r.p_bess_ac_kw[t] = bess_ac_power(r.p_bess_batt_kw[t], b);
    r.p_ev_kw[t] = x[v_ev[t]];
    r.s_plus_kw[t] = std::max(0.0, x[v_sp[t]]);
    r.s_minus_kw[t] = std::max(0.0, x[v_sm[t]]);
    r.p_g_expected_kw[t] = x[v_g[t]];
    r.p_g_lo_kw[t] = x[v_lo[t]];
    r.p_g_hi_kw[t] = x[v_hi[t]];
  }
  r.e_plus_kwh.resize(in.bm_periods());
  r.e_minus_kwh.resize(in.bm_periods());
  for (std::size_t p = 0; p < in.bm_periods(); ++p) {
    r.e_plus_kwh[p] = std::max(0.0, x[v_ep[p]]);
    r.e_minus_kwh[p] = std::max(0.0, x[v_em[p]]);
    r.imbalance_cost +=
        r.e_plus_kwh[p] * in.r_short_per_kwh[p] + r.e_minus_kwh[p] * in.r_long_per_kwh[p];
  }
  for (std::size_t t = 0; t < n; ++t) {
    const double sp = r.s_plus_kw[t], sm = r.s_minus_kw[t];
    r.slack_cost += bw * (sp + sm + (sp - sm) * (sp - sm));
    r.degradation_cost += dt * deg_rate * (x[v_ch[t]] + x[v_dh[t]]);
    r.ev_revenue += dt * r.p_ev_kw[t] * in.tariff_per_kwh[t];
  }
  const double end_dev = r.soc_pct[n] - in.soc_dp_end_pct;
  r.soc_tracking_cost = cw * (start_dev * start_dev + end_dev * end_dev);
  r.objective = rep.objective + pb.constant();
  return r;
}

std::vector<BudgetStep> grid_power_budget(const RefinementResult& result,
                                          const IntradayInputs& inputs,
                                          const StationConfig& cfg) {
  const std::size_t n = result.p_ev_kw.size();
  std::vector<BudgetStep> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    BudgetStep& s = out[t];
    s.bess_ac_kw = result.p_bess_ac_kw[t];
    s.s_plus_kw = result.s_plus_kw[t];
    s.s_minus_kw = result.s_minus_kw[t];
    s.pv_lo_kw = inputs.pv_kw.lo[t];
    s.pv_med_kw = inputs.pv_kw.med[t];
    s.pv_hi_kw = inputs.pv_kw.hi[t];
    s.lo_kw = (s.bess_ac_kw + (result.p_ev_kw[t] - s.s_minus_kw) / cfg.columns.eta_cp -
               s.pv_hi_kw * cfg.pv.eta_pv) /
              cfg.grid.eta_tr;
    s.hi_kw = (s.bess_ac_kw + (result.p_ev_kw[t] + s.s_plus_kw) / cfg.columns.eta_cp -
               s.pv_lo_kw * cfg.pv.eta_pv) /
              cfg.grid.eta_tr;
    s.expected_kw = (s.bess_ac_kw + result.p_ev_kw[t] / cfg.columns.eta_cp -
                     s.pv_med_kw * cfg.pv.eta_pv) /
                    cfg.grid.eta_tr;
  }
  return out;
}

GridPowerBudget upsample_short_term(const RefinementResult& result,
                                    const IntradayInputs& inputs,
                                    const QuantileSeries& short_pv_kw, double dj_h,
                                    const StationConfig& cfg) {
  const double ratio = inputs.dt_h / dj_h;
  const auto per_step = static_cast<std::size_t>(std::llround(ratio));
  if (per_step == 0 || std::abs(ratio - static_cast<double>(per_step)) > 1e-9)
    throw std::invalid_argument("upsample: dj_h must divide dt_h");
  const std::size_t spp = inputs.steps_per_period();
  const std::size_t n_short = spp * per_step;  // first balancing period at dj
  short_pv_kw.validate("short-term pv forecast");
  if (short_pv_kw.size() != n_short)
    throw std::invalid_argument("upsample: short-term quantiles must cover " +
                                std::to_string(n_short) + " steps");

  GridPowerBudget budget;
  budget.dj_h = dj_h;
  budget.dt_h = inputs.dt_h;
  budget.long_term = grid_power_budget(result, inputs, cfg);
  budget.short_term.resize(n_short);
  for (std::size_t j = 0; j < n_short; ++j) {
    const std::size_t t = j / per_step;  // zero-order hold of the parent step
    BudgetStep s = budget.long_term[t];
    s.pv_lo_kw = short_pv_kw.lo[j];
    s.pv_med_kw = short_pv_kw.med[j];
    s.pv_hi_kw = short_pv_kw.hi[j];
    s.lo_kw = (s.bess_ac_kw + (result.p_ev_kw[t] - s.s_minus_kw) / cfg.columns.eta_cp -
               s.pv_hi_kw * cfg.pv.eta_pv) /
              cfg.grid.eta_tr;
    s.hi_kw = (s.bess_ac_kw + (result.p_ev_kw[t] + s.s_plus_kw) / cfg.columns.eta_cp -
               s.pv_lo_kw * cfg.pv.eta_pv) /
              cfg.grid.eta_tr;
    s.expected_kw = (s.bess_ac_kw + result.p_ev_kw[t] / cfg.columns.eta_cp -
                     s.pv_med_kw * cfg.pv.eta_pv) /
                    cfg.grid.eta_tr;
    budget.short_term[j] = s;
  }
  budget.max_incentive_per_kwh = max_incentive(result, inputs, cfg);
  return budget;
}

double max_incentive(const RefinementResult& result, const IntradayInputs& inputs,
                     const StationConfig& cfg) {
  const std::size_t spp = inputs.steps_per_period();
  const double tariff = inputs.tariff_per_kwh.front();
  const double floor = cfg.tariff.discount_cap_fraction * tariff;

  double ev_energy_kwh = 0.0;
  for (std::size_t t = 0; t < spp; ++t) ev_energy_kwh += result.p_ev_kw[t] * inputs.dt_h;
  if (ev_energy_kwh <= 1e-12) return floor;  // no charging: the ratio is undefined

  const double delta_rev =
      (ev_energy_kwh - inputs.p_ev_dp_first_period_kw * inputs.dt_da_h) * tariff;
  const double bm_cost = result.e_plus_kwh.front() * inputs.r_short_per_kwh.front() +
                         result.e_minus_kwh.front() * inputs.r_long_per_kwh.front();
  const double mean_power = ev_energy_kwh / inputs.dt_da_h;
  return std::max(floor, (delta_rev - bm_cost) / mean_power);
}

nlohmann::json RefinementResult::to_json() const {
  return nlohmann::json{{"dt_h", dt_h},
                        {"p_bess_ac_kw", p_bess_ac_kw},
                        {"p_bess_batt_kw", p_bess_batt_kw},
                        {"p_ev_kw", p_ev_kw},
                        {"s_plus_kw", s_plus_kw},
                        {"s_minus_kw", s_minus_kw},
                        {"p_g_expected_kw", p_g_expected_kw},
                        {"p_g_lo_kw", p_g_lo_kw},
                        {"p_g_hi_kw", p_g_hi_kw},
                        {"soc_pct", soc_pct},
                        {"e_plus_kwh", e_plus_kwh},
                        {"e_minus_kwh", e_minus_kwh},
                        {"objective", objective},
                        {"imbalance_cost", imbalance_cost},
                        {"slack_cost", slack_cost},
                        {"degradation_cost", degradation_cost},
                        {"soc_tracking_cost", soc_tracking_cost},
                        {"ev_revenue", ev_revenue}};
}

nlohmann::json GridPowerBudget::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : short_term) st.push_back(budget_step_json(s));
  nlohmann::json lt = nlohmann::json::array();
  for (const auto& s : long_term) lt.push_back(budget_step_json(s));
  return nlohmann::json{{"dj_h", dj_h},
                        {"dt_h", dt_h},
                        {"short_term", std::move(st)},
                        {"long_term", std::move(lt)},
                        {"max_incentive_per_kwh", max_incentive_per_kwh}};
}

}  // namespace evcs
