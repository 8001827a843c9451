#include "evcs/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace evcs {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

StressCurve curve_from(const json& j, StressCurve fallback) {
  StressCurve c = fallback;
  c.gain = get_or(j, "gain", c.gain);
  c.reference = get_or(j, "reference", c.reference);
  return c;
}

json curve_to(const StressCurve& c) {
  return json{{"gain", c.gain}, {"reference", c.reference}};
}

}  // namespace

void StationConfig::validate() const {
  auto check_eta = [](double eta, const char* name) {
    if (!(eta > 0.0 && eta <= 1.0))
      throw std::invalid_argument(std::string("config: ") + name + " must lie in (0, 1]");
  };
  check_eta(grid.eta_tr, "grid.eta_tr");
  check_eta(pv.eta_pv, "pv.eta_pv");
  check_eta(columns.eta_cp, "columns.eta_cp");
  if (!(grid.p_gc_kw > 0.0)) throw std::invalid_argument("config: grid.p_gc_kw must be > 0");
  if (!(columns.p_cc_kw > 0.0)) throw std::invalid_argument("config: columns.p_cc_kw must be > 0");
  if (columns.n_cc < 1 || columns.n_cp < 1)
    throw std::invalid_argument("config: column counts must be >= 1");
  bess.validate();
  bess_stress.validate();
  if (!(tariff.discount_cap_fraction >= 0.0 && tariff.discount_cap_fraction <= 1.0))
    throw std::invalid_argument("config: tariff.discount_cap_fraction must lie in [0, 1]");
  if (!(day_ahead.speculation_factor > 0.0 && day_ahead.speculation_factor <= 1.0))
    throw std::invalid_argument("config: day_ahead.speculation_factor must lie in (0, 1]");
  if (!(intraday.flexibility_tau >= 0.0 && intraday.flexibility_tau <= 1.0))
    throw std::invalid_argument("config: intraday.flexibility_tau must lie in [0, 1]");
  if (intraday.window_bm_periods < 1)
    throw std::invalid_argument("config: intraday.window_bm_periods must be >= 1");
  if (!(realtime.penalty_scale_tau > 1.0))
    throw std::invalid_argument("config: realtime.penalty_scale_tau must be > 1");
  if (!(realtime.penalty_ratio_mu > 1.0))
    throw std::invalid_argument("config: realtime.penalty_ratio_mu must be > 1");
  if (!(realtime.rho0 > 0.0)) throw std::invalid_argument("config: realtime.rho0 must be > 0");
  if (!(realtime.eps_abs > 0.0 && realtime.eps_rel > 0.0 && realtime.eps_outer > 0.0))
    throw std::invalid_argument("config: realtime tolerances must be > 0");
  if (realtime.incentive_aggregation != "mean" && realtime.incentive_aggregation != "max")
    throw std::invalid_argument("config: realtime.incentive_aggregation must be mean or max");
}

StationConfig StationConfig::from_json(const json& j) {
  StationConfig c;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid.p_gc_kw = get_or(g, "p_gc_kw", c.grid.p_gc_kw);
    c.grid.eta_tr = get_or(g, "eta_tr", c.grid.eta_tr);
  }
  if (j.contains("pv")) c.pv.eta_pv = get_or(j.at("pv"), "eta_pv", c.pv.eta_pv);
  if (j.contains("columns")) {
    const auto& col = j.at("columns");
    c.columns.n_cc = get_or(col, "n_cc", c.columns.n_cc);
    c.columns.p_cc_kw = get_or(col, "p_cc_kw", c.columns.p_cc_kw);
    c.columns.n_cp = get_or(col, "n_cp", c.columns.n_cp);
    c.columns.cp_rated_kw = get_or(col, "cp_rated_kw", c.columns.p_cc_kw);
    c.columns.eta_cp = get_or(col, "eta_cp", c.columns.eta_cp);
  }
  if (j.contains("bess")) {
    const auto& b = j.at("bess");
    c.bess.capacity_kwh = get_or(b, "capacity_kwh", c.bess.capacity_kwh);
    c.bess.eta_inv = get_or(b, "eta_inv", c.bess.eta_inv);
    c.bess.eta_ch = get_or(b, "eta_ch", c.bess.eta_ch);
    c.bess.eta_dh = get_or(b, "eta_dh", c.bess.eta_dh);
    c.bess.soc_min_pct = get_or(b, "soc_min_pct", c.bess.soc_min_pct);
    c.bess.soc_max_pct = get_or(b, "soc_max_pct", c.bess.soc_max_pct);
    c.bess.c_rate_max = get_or(b, "c_rate_max", c.bess.c_rate_max);
    c.bess.d_ref_pct_per_fec = get_or(b, "d_ref_pct_per_fec", c.bess.d_ref_pct_per_fec);
    c.bess.d_eol_pct = get_or(b, "d_eol_pct", c.bess.d_eol_pct);
    c.bess.price_per_kwh = get_or(b, "price_per_kwh", c.bess.price_per_kwh);
  }
  if (j.contains("bess_stress")) {
    const auto& s = j.at("bess_stress");
    if (s.contains("soc")) c.bess_stress.soc = curve_from(s.at("soc"), c.bess_stress.soc);
    if (s.contains("temp")) c.bess_stress.temp = curve_from(s.at("temp"), c.bess_stress.temp);
    if (s.contains("dod")) c.bess_stress.dod = curve_from(s.at("dod"), c.bess_stress.dod);
    if (s.contains("c_rate"))
      c.bess_stress.c_rate = curve_from(s.at("c_rate"), c.bess_stress.c_rate);
  }
  if (j.contains("tariff")) {
    const auto& t = j.at("tariff");
    c.tariff.peak_per_kwh = get_or(t, "peak_per_kwh", c.tariff.peak_per_kwh);
    c.tariff.offpeak_per_kwh = get_or(t, "offpeak_per_kwh", c.tariff.offpeak_per_kwh);
    c.tariff.discount_cap_fraction =
        get_or(t, "discount_cap_fraction", c.tariff.discount_cap_fraction);
  }
  if (j.contains("day_ahead")) {
    const auto& d = j.at("day_ahead");
    c.day_ahead.speculation_factor = get_or(d, "speculation_factor", c.day_ahead.speculation_factor);
    c.day_ahead.terminal_soc_equals_initial =
        get_or(d, "terminal_soc_equals_initial", c.day_ahead.terminal_soc_equals_initial);
  }
  if (j.contains("intraday")) {
    const auto& i = j.at("intraday");
    c.intraday.slack_weight_b = get_or(i, "slack_weight_b", c.intraday.slack_weight_b);
    c.intraday.soc_tracking_weight_c =
        get_or(i, "soc_tracking_weight_c", c.intraday.soc_tracking_weight_c);
    c.intraday.flexibility_tau = get_or(i, "flexibility_tau", c.intraday.flexibility_tau);
    c.intraday.window_bm_periods = get_or(i, "window_bm_periods", c.intraday.window_bm_periods);
  }
  if (j.contains("realtime")) {
    const auto& r = j.at("realtime");
    c.realtime.alpha = get_or(r, "alpha", c.realtime.alpha);
    c.realtime.beta = get_or(r, "beta", c.realtime.beta);
    c.realtime.gamma = get_or(r, "gamma", c.realtime.gamma);
    c.realtime.delta = get_or(r, "delta", c.realtime.delta);
    c.realtime.rho0 = get_or(r, "rho0", c.realtime.rho0);
    c.realtime.penalty_scale_tau = get_or(r, "penalty_scale_tau", c.realtime.penalty_scale_tau);
    c.realtime.penalty_ratio_mu = get_or(r, "penalty_ratio_mu", c.realtime.penalty_ratio_mu);
    c.realtime.eps_abs = get_or(r, "eps_abs", c.realtime.eps_abs);
    c.realtime.eps_rel = get_or(r, "eps_rel", c.realtime.eps_rel);
    c.realtime.eps_outer = get_or(r, "eps_outer", c.realtime.eps_outer);
    c.realtime.max_inner_iterations =
        get_or(r, "max_inner_iterations", c.realtime.max_inner_iterations);
    c.realtime.max_outer_iterations =
        get_or(r, "max_outer_iterations", c.realtime.max_outer_iterations);
    c.realtime.slack_bisection_tol_kw =
        get_or(r, "slack_bisection_tol_kw", c.realtime.slack_bisection_tol_kw);
    c.realtime.incentive_aggregation =
        get_or(r, "incentive_aggregation", c.realtime.incentive_aggregation);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    c.solver.eps_abs = get_or(s, "eps_abs", c.solver.eps_abs);
    c.solver.eps_rel = get_or(s, "eps_rel", c.solver.eps_rel);
    c.solver.max_iterations = get_or(s, "max_iterations", c.solver.max_iterations);
  }
  c.validate();
  return c;
}

StationConfig StationConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json StationConfig::to_json() const {
  return json{
      {"grid", {{"p_gc_kw", grid.p_gc_kw}, {"eta_tr", grid.eta_tr}}},
      {"pv", {{"eta_pv", pv.eta_pv}}},
      {"columns",
       {{"n_cc", columns.n_cc},
        {"p_cc_kw", columns.p_cc_kw},
        {"n_cp", columns.n_cp},
        {"cp_rated_kw", columns.cp_rated_kw},
        {"eta_cp", columns.eta_cp}}},
      {"bess",
       {{"capacity_kwh", bess.capacity_kwh},
        {"eta_inv", bess.eta_inv},
        {"eta_ch", bess.eta_ch},
        {"eta_dh", bess.eta_dh},
        {"soc_min_pct", bess.soc_min_pct},
        {"soc_max_pct", bess.soc_max_pct},
        {"c_rate_max", bess.c_rate_max},
        {"d_ref_pct_per_fec", bess.d_ref_pct_per_fec},
        {"d_eol_pct", bess.d_eol_pct},
        {"price_per_kwh", bess.price_per_kwh}}},
      {"bess_stress",
       {{"soc", curve_to(bess_stress.soc)},
        {"temp", curve_to(bess_stress.temp)},
        {"dod", curve_to(bess_stress.dod)},
        {"c_rate", curve_to(bess_stress.c_rate)}}},
      {"tariff",
       {{"peak_per_kwh", tariff.peak_per_kwh},
        {"offpeak_per_kwh", tariff.offpeak_per_kwh},
        {"discount_cap_fraction", tariff.discount_cap_fraction}}},
      {"day_ahead",
       {{"speculation_factor", day_ahead.speculation_factor},
        {"terminal_soc_equals_initial", day_ahead.terminal_soc_equals_initial}}},
      {"intraday",
       {{"slack_weight_b", intraday.slack_weight_b},
        {"soc_tracking_weight_c", intraday.soc_tracking_weight_c},
        {"flexibility_tau", intraday.flexibility_tau},
        {"window_bm_periods", intraday.window_bm_periods}}},
      {"realtime",
       {{"alpha", realtime.alpha},
        {"beta", realtime.beta},
        {"gamma", realtime.gamma},
        {"delta", realtime.delta},
        {"rho0", realtime.rho0},
        {"penalty_scale_tau", realtime.penalty_scale_tau},
        {"penalty_ratio_mu", realtime.penalty_ratio_mu},
        {"eps_abs", realtime.eps_abs},
        {"eps_rel", realtime.eps_rel},
        {"eps_outer", realtime.eps_outer},
        {"max_inner_iterations", realtime.max_inner_iterations},
        {"max_outer_iterations", realtime.max_outer_iterations},
        {"slack_bisection_tol_kw", realtime.slack_bisection_tol_kw},
        {"incentive_aggregation", realtime.incentive_aggregation}}},
      {"solver",
       {{"eps_abs", solver.eps_abs},
        {"eps_rel", solver.eps_rel},
        {"max_iterations", solver.max_iterations}}}};
}

}  // namespace evcs
