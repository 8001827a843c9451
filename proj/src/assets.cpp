#include "evcs/assets.hpp"

#include <cmath>
#include <sstream>

namespace evcs {

namespace {

bool in_unit_interval(double eta) { return eta > 0.0 && eta <= 1.0; }

[[noreturn]] void domain_fail(const std::string& what, double value) {
  std::ostringstream os;
  os << "stress factor domain violation: " << what << " = " << value;
  throw std::domain_error(os.str());
}

}  // namespace

void BessParams::validate() const {
  if (!(capacity_kwh > 0.0)) throw std::invalid_argument("bess capacity_kwh must be > 0");
  if (!in_unit_interval(eta_inv) || !in_unit_interval(eta_ch) || !in_unit_interval(eta_dh))
    throw std::invalid_argument("bess efficiencies must lie in (0, 1]");
  if (!(soc_min_pct >= 0.0 && soc_min_pct < soc_max_pct && soc_max_pct <= 100.0))
    throw std::invalid_argument("bess SoC bounds must satisfy 0 <= min < max <= 100");
  if (!(c_rate_max > 0.0)) throw std::invalid_argument("bess c_rate_max must be > 0");
  if (!(d_eol_pct > 0.0)) throw std::invalid_argument("bess d_eol_pct must be > 0");
  if (!(d_ref_pct_per_fec >= 0.0)) throw std::invalid_argument("bess d_ref_pct_per_fec must be >= 0");
  if (!(price_per_kwh >= 0.0)) throw std::invalid_argument("bess price_per_kwh must be >= 0");
}

double StressCoefficients::factor_soc(double soc_pct) const {
  return std::exp(soc.gain * (soc_pct - soc.reference));
}

double StressCoefficients::factor_temp(double temp_c) const {
  const double ref_k = temp.reference + 273.15;
  const double t_k = temp_c + 273.15;
  return std::exp(temp.gain * (1.0 / ref_k - 1.0 / t_k));
}

double StressCoefficients::factor_dod(double dod_pct) const {
  const double x = dod_pct / dod.reference;
  return 1.0 + dod.gain * (x * x - 1.0);
}

double StressCoefficients::factor_c_rate(double c_rate) const {
  return 1.0 + this->c_rate.gain * (c_rate / this->c_rate.reference - 1.0);
}

void StressCoefficients::validate() const {
  if (!(dod.reference > 0.0)) throw std::invalid_argument("stress DoD reference must be > 0");
  if (!(c_rate.reference > 0.0)) throw std::invalid_argument("stress C-rate reference must be > 0");
  if (!(temp.reference > -273.15)) throw std::invalid_argument("stress temperature reference below 0 K");
}

double bess_ac_power(double p_batt_kw, const BessParams& params) {
  if (p_batt_kw >= 0.0) return p_batt_kw / (params.eta_inv * params.eta_ch);
  return p_batt_kw * params.eta_inv * params.eta_dh;
}

double bess_batt_power(double p_ac_kw, const BessParams& params) {
  if (p_ac_kw >= 0.0) return p_ac_kw * params.eta_inv * params.eta_ch;
  return p_ac_kw / (params.eta_inv * params.eta_dh);
}

SocStepResult soc_step(const BessState& state, double p_batt_kw, double dt_h,
                       const BessParams& params) {
  if (!(dt_h > 0.0)) throw std::invalid_argument("soc_step requires dt_h > 0");
  SocStepResult out;
  out.state.soc_pct = state.soc_pct + 100.0 * p_batt_kw * dt_h / params.capacity_kwh;
  out.state.fec_accum = state.fec_accum + std::abs(p_batt_kw) * dt_h / (2.0 * params.capacity_kwh);
  out.within_bounds = out.state.soc_pct >= params.soc_min_pct - 1e-9 &&
                      out.state.soc_pct <= params.soc_max_pct + 1e-9;
  return out;
}

double stress_factor(double soc_avg_pct, double temp_c, double dod_pct,
                     double c_rate, const StressCoefficients& coeffs) {
  if (!(soc_avg_pct >= 0.0 && soc_avg_pct <= 100.0)) domain_fail("soc_avg_pct", soc_avg_pct);
  if (!(dod_pct >= 0.0 && dod_pct <= 100.0)) domain_fail("dod_pct", dod_pct);
  if (!(c_rate >= 0.0)) domain_fail("c_rate", c_rate);
  if (!(temp_c > -273.15)) domain_fail("temp_c", temp_c);

  const double f_soc = coeffs.factor_soc(soc_avg_pct);
  const double f_temp = coeffs.factor_temp(temp_c);
  const double f_dod = coeffs.factor_dod(dod_pct);
  const double f_cr = coeffs.factor_c_rate(c_rate);
  if (!(f_soc > 0.0)) domain_fail("factor_soc", f_soc);
  if (!(f_temp > 0.0)) domain_fail("factor_temp", f_temp);
  if (!(f_dod > 0.0)) domain_fail("factor_dod", f_dod);
  if (!(f_cr > 0.0)) domain_fail("factor_c_rate", f_cr);
  return f_soc * f_temp * f_dod * f_cr;
}

double degradation_cost(std::span<const PowerStep> profile,
                        std::span<const double> soc_path,
                        const StressCoefficients& coeffs,
                        const BessParams& params) {
  if (profile.empty()) return 0.0;
  if (soc_path.size() != profile.size() + 1)
    throw std::invalid_argument("degradation_cost: soc_path must have profile.size()+1 entries");

  double cost = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double p = profile[i].p_batt_kw;
    if (p == 0.0) continue;
    const double dt = profile[i].dt_h;
    const double soc_avg = 0.5 * (soc_path[i] + soc_path[i + 1]);
    const double dod = std::abs(soc_path[i + 1] - soc_path[i]);
    const double cr = std::abs(p) / params.capacity_kwh;
    const double sf = stress_factor(soc_avg, coeffs.temp.reference, dod, cr, coeffs);
    const double fec = std::abs(p) * dt / (2.0 * params.capacity_kwh);
    const double d_pct = params.d_ref_pct_per_fec * sf * fec;
    cost += d_pct / params.d_eol_pct * params.capacity_kwh * params.price_per_kwh;
  }
  return cost;
}

double degradation_cost_per_kwh(const StressCoefficients& coeffs,
                                const BessParams& params) {
  const double sf_nominal = stress_factor(coeffs.soc.reference, coeffs.temp.reference,
                                          coeffs.dod.reference, coeffs.c_rate.reference, coeffs);
  return params.d_ref_pct_per_fec * sf_nominal * params.price_per_kwh / (2.0 * params.d_eol_pct);
}

}  // namespace evcs
