#ifndef EVCS_ASSETS_HPP_
#define EVCS_ASSETS_HPP_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace evcs {

/// Stationary battery parameters. Efficiencies are unitless in (0,1],
/// SoC bounds in percent, c_rate_max in 1/h.
struct BessParams {
  double capacity_kwh = 500.0;
  double eta_inv = 0.95;
  double eta_ch = 0.97;
  double eta_dh = 0.97;
  double soc_min_pct = 10.0;
  double soc_max_pct = 90.0;
  double c_rate_max = 1.0;
  double d_ref_pct_per_fec = 0.0035;  // reference cycling degradation, %/FEC
  double d_eol_pct = 20.0;            // degradation at end of life, %
  double price_per_kwh = 250.0;       // replacement energy price

  void validate() const;

  /// Largest admissible battery-side power magnitude, kW.
  double p_batt_max_kw() const { return capacity_kwh * c_rate_max; }
};

struct BessState {
  double soc_pct = 50.0;
  double fec_accum = 0.0;  // cumulative full equivalent cycles
};

/// One multiplicative stress curve. All families evaluate to exactly 1 at
/// their reference point and to 1 everywhere when gain == 0.
struct StressCurve {
  double gain = 0.0;
  double reference = 1.0;
};

/// Cycling-degradation stress model: the product of four factor curves,
/// each pinned to 1 at its reference operating point.
///
/// Curve families (placeholders; coefficients come from config):
///   SoC:   exp(gain * (soc - ref))
///   temp:  exp(gain * (1/ref_K - 1/T_K))      (Arrhenius form)
///   DoD:   1 + gain * ((dod/ref)^2 - 1)
///   Cr:    1 + gain * (cr/ref - 1)
struct StressCoefficients {
  StressCurve soc{0.0, 50.0};     // reference SoC, %
  StressCurve temp{0.0, 25.0};    // reference temperature, degC
  StressCurve dod{0.0, 50.0};     // reference DoD, %
  StressCurve c_rate{0.0, 0.5};   // reference C-rate, 1/h

  double factor_soc(double soc_pct) const;
  double factor_temp(double temp_c) const;
  double factor_dod(double dod_pct) const;
  double factor_c_rate(double c_rate) const;

  void validate() const;
};

/// Battery-side power (positive = charging) mapped to the AC bus.
/// Charging draws p/(eta_inv*eta_ch) from the bus; discharging delivers
/// p*eta_inv*eta_dh (magnitude reduced). The sign selects the branch.
double bess_ac_power(double p_batt_kw, const BessParams& params);

/// Inverse map: AC-bus power to battery-side power under the same sign
/// convention. bess_batt_power(bess_ac_power(p)) == p.
double bess_batt_power(double p_ac_kw, const BessParams& params);

struct SocStepResult {
  BessState state;
  bool within_bounds = true;
};

/// Advance SoC and FEC by one step of battery-side power over dt_h hours.
/// Returns the stepped state even when SoC bounds are crossed; the flag
/// tells the caller, which decides whether to reject or clip.
SocStepResult soc_step(const BessState& state, double p_batt_kw, double dt_h,
                       const BessParams& params);

/// Product of the four stress factors at the given operating point.
/// Throws std::domain_error when an input leaves the admissible domain or
/// a factor evaluates non-positive.
double stress_factor(double soc_avg_pct, double temp_c, double dod_pct,
                     double c_rate, const StressCoefficients& coeffs);

struct PowerStep {
  double p_batt_kw = 0.0;
  double dt_h = 0.0;
};

/// Cycling-degradation cost of a battery-side power profile in currency.
/// soc_path holds the SoC before each step plus the final SoC
/// (profile.size() + 1 entries). Stress variables are evaluated per step:
/// average SoC over the step, per-step SoC swing as DoD, |p|/C as C-rate,
/// temperature held at its reference.
double degradation_cost(std::span<const PowerStep> profile,
                        std::span<const double> soc_path,
                        const StressCoefficients& coeffs,
                        const BessParams& params);

/// Degradation cost per kWh of battery-side throughput at nominal stress
/// (SF evaluated at the curve reference points, i.e. SF = 1). Used by the
/// planning layers to keep their programs linear.
double degradation_cost_per_kwh(const StressCoefficients& coeffs,
                                const BessParams& params);

}  // namespace evcs

#endif  // EVCS_ASSETS_HPP_
