#include "pemfc/properties.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace pemfc::props {

namespace {

std::atomic<bool> g_lambda_warned{false};

void maybe_warn_lambda_range(double lambda) {
  if (lambda > k::lambda_fit_limit &&
      !g_lambda_warned.exchange(true, std::memory_order_relaxed)) {
    std::fprintf(stderr,
                 "warning: water content %.3f exceeds the fitted range of the "
                 "membrane correlations (lambda <= 17); extrapolating\n",
                 lambda);
  }
}

[[noreturn]] void domain_fail(const std::string& what) {
  throw std::domain_error(what);
}

double cubic(const double c[4], double x) {
  return c[0] + x * (c[1] + x * (c[2] + x * c[3]));
}

} // namespace

void reset_lambda_range_warning() { g_lambda_warned.store(false); }

double ts_alpha(Direction dir) {
  return dir == Direction::ThroughPlane ? k::ts_alpha_through : k::ts_alpha_in;
}

double tsb_beta1(double eps, Direction dir) {
  const bool high = eps > 0.665; // nearest published row: 0.6 vs 0.73
  if (dir == Direction::ThroughPlane)
    return high ? k::tsb_beta1_through_073 : k::tsb_beta1_through_060;
  return high ? k::tsb_beta1_in_073 : k::tsb_beta1_in_060;
}

double tsb_beta2(double eps, Direction dir) {
  const bool high = eps > 0.665;
  if (dir == Direction::ThroughPlane)
    return high ? k::tsb_beta2_through_073 : k::tsb_beta2_through_060;
  return high ? k::tsb_beta2_in_073 : k::tsb_beta2_in_060;
}

double p_sat(double T) {
  if (T < 223.0 || T > 373.0)
    domain_fail("p_sat: T = " + std::to_string(T) + " K outside [223, 373] K");
  const double t = T - 273.15;
  const double e = k::psat_c[0] + t * (k::psat_c[1] + t * (k::psat_c[2] + t * k::psat_c[3]));
  return kAtm * std::pow(10.0, e);
}

double c_sat(double T) { return p_sat(T) / (kGasConst * T); }

double water_activity(double C_v, double s, double T, const PropertyConfig& cfg) {
  if (C_v < 0.0) domain_fail("water_activity: negative vapour concentration");
  if (s < 0.0 || s > 1.0) domain_fail("water_activity: s outside [0,1]");
  const double rh = C_v / c_sat(T);
  if (cfg.activity_model == ActivityModel::RelativeHumidityOnly)
    return std::clamp(rh, 0.0, 1.0);
  return std::clamp(rh + 2.0 * s, 0.0, 3.0);
}

double lambda_eq(double a_w, double T, const PropertyConfig& cfg) {
  (void)T; // both blends are 80 C fits
  if (a_w < 0.0 || a_w > 3.0)
    domain_fail("lambda_eq: a_w = " + std::to_string(a_w) + " outside [0, 3]");
  const double* cub;
  double at1, rise;
  if (cfg.lambda_eq_variant == LambdaEqVariant::HinatsuBao) {
    cub = k::hin_eq; at1 = k::hin_eq_aw1; rise = k::hin_eq_rise;
  } else {
    cub = k::spr_eq; at1 = k::spr_eq_aw1; rise = k::spr_eq_rise;
  }
  const double w = std::tanh(k::bao_tanh_gain * (a_w - 1.0));
  const double vap = cubic(cub, a_w);
  const double liq = at1 + rise * (1.0 - std::exp(-cfg.k_shape * (a_w - 1.0)));
  return 0.5 * vap * (1.0 - w) + 0.5 * liq * (1.0 + w);
}

double lambda_eq_liquid(double T) {
  const double t = T - 273.15;
  return k::hin_liq[0] + t * (k::hin_liq[1] + t * k::hin_liq[2]);
}

double d_lambda(double lambda, double T, const PropertyConfig& cfg) {
  if (lambda < 0.0) domain_fail("d_lambda: negative water content");
  switch (cfg.d_lambda_variant) {
    case DLambdaVariant::Kulikovsky:
      return k::kul_a * std::pow(lambda / 25.0, k::kul_p) *
             (1.0 + std::tanh((lambda - k::kul_c) / k::kul_w));
    case DLambdaVariant::Springer: {
      maybe_warn_lambda_range(lambda);
      if (lambda <= 2.0) return k::spr_d_const;
      const double arr =
          std::exp(k::spr_d_arrh * (1.0 / k::spr_d_Tref - 1.0 / T));
      if (lambda <= 3.0)
        return k::spr_d_scale * arr * (0.87 * (3.0 - lambda) + 2.95 * (lambda - 2.0));
      if (lambda <= 4.0)
        return k::spr_d_scale * arr * (2.95 * (4.0 - lambda) + 1.642454 * (lambda - 3.0));
      return k::spr_d_scale * arr *
             (2.563 - 0.33 * lambda + 0.0264 * lambda * lambda -
              0.000671 * lambda * lambda * lambda);
    }
    case DLambdaVariant::Motupally: {
      maybe_warn_lambda_range(lambda);
      const double arr = std::exp(-k::mot_arrh / T);
      if (lambda < 3.0)
        return k::mot_a1 * lambda * (std::exp(k::mot_e1 * lambda) - 1.0) * arr;
      return k::mot_a2 * lambda * (k::mot_e2 * std::exp(-lambda) + 1.0) * arr;
    }
  }
  domain_fail("d_lambda: unknown variant");
}

double water_volume_fraction(double lambda, const MembraneConstants& mc) {
  return lambda * mc.V_w / (mc.V_mem() + lambda * mc.V_w);
}

double sorption_rate_branch(bool absorbing, double lambda, double T,
                            double H_cl, const MembraneConstants& mc) {
  const double c = absorbing ? k::ge_absorb : k::ge_desorb;
  const double f_v = water_volume_fraction(lambda, mc);
  return c * f_v / H_cl *
         std::exp(k::spr_d_arrh * (1.0 / k::spr_d_Tref - 1.0 / T));
}

double sorption_rate(double lambda, double lambda_eq, double T, double H_cl,
                     const MembraneConstants& mc) {
  return sorption_rate_branch(lambda_eq >= lambda, lambda, T, H_cl, mc);
}

double surface_tension(double T) {
  if (T <= 273.0 || T >= k::sigma_Tc)
    domain_fail("surface_tension: T = " + std::to_string(T) +
                " K outside (273, 647.15) K");
  const double r = (k::sigma_Tc - T) / k::sigma_Tc;
  return k::sigma_B * std::pow(r, k::sigma_mu) * (1.0 - k::sigma_b * r);
}

double intrinsic_permeability_tsb(const PorousConstants& pc) {
  if (pc.eps <= pc.eps_p)
    domain_fail("intrinsic_permeability: porosity below percolation threshold");
  const double ln_e = std::log(pc.eps);
  const double kernel = pc.eps / (8.0 * ln_e * ln_e) *
                        std::pow(pc.eps - pc.eps_p, pc.alpha + 2.0) *
                        pc.r_f_fiber * pc.r_f_fiber /
                        (std::pow(1.0 - pc.eps_p, pc.alpha) *
                         std::pow((pc.alpha + 1.0) * pc.eps - pc.eps_p, 2.0));
  return kernel * std::exp(pc.beta1 * pc.eps_c);
}

double effective_diffusivity(double D_ij, double s, Layer layer, Direction dir,
                             const PorousConstants& pc) {
  if (s < 0.0 || s > 1.0) domain_fail("effective_diffusivity: s outside [0,1]");
  if (layer == Layer::CL)
    return std::pow(pc.eps, pc.tau) * std::pow(1.0 - s, pc.tau) * D_ij;
  const double alpha = dir == Direction::ThroughPlane ? pc.alpha : ts_alpha(dir);
  const double beta2 = dir == Direction::ThroughPlane ? pc.beta2 : tsb_beta2(pc.eps, dir);
  return pc.eps * std::pow((pc.eps - pc.eps_p) / (1.0 - pc.eps_p), alpha) *
         (1.0 - s) * (1.0 - s) * std::exp(beta2 * pc.eps_c) * D_ij;
}

double binary_diffusivity(GasPair pair, double T, double P) {
  const double base = pair == GasPair::H2O_H2 ? k::dij_h2o_h2 : k::dij_h2o_o2;
  return base * std::pow(T / k::dij_Tref, k::dij_texp) * (kAtm / P);
}

double sherwood(double W_gc, double H_gc) {
  const double ar = W_gc / H_gc;
  if (ar < 0.2 || ar > 10.0)
    domain_fail("sherwood: aspect ratio W/H = " + std::to_string(ar) +
                " outside [0.2, 10]");
  return k::sh_a * std::log(ar) + k::sh_b;
}

double h_codi(double D, double W_gc, double H_gc) {
  return sherwood(W_gc, H_gc) * D / H_gc;
}

double leverett_j(double s) {
  return s * (k::lev[0] + s * (k::lev[1] + s * k::lev[2]));
}

double d_cap(double s, const PorousConstants& pc, double T) {
  const double K0 = intrinsic_permeability_tsb(pc);
  const double dj = k::lev[0] + s * (2.0 * k::lev[1] + s * 3.0 * k::lev[2]);
  return surface_tension(T) * K0 / liquid_viscosity_kinematic(T) *
         std::abs(std::cos(pc.theta_c_deg * M_PI / 180.0)) *
         std::sqrt(pc.eps / K0) * std::pow(s, pc.e_cap) * dj;
}

double proton_conductivity(double lambda, double T, const PropertyConfig& cfg) {
  if (lambda < 0.0) domain_fail("proton_conductivity: negative water content");
  if (cfg.conductivity_variant == ConductivityVariant::Springer) {
    maybe_warn_lambda_range(lambda);
    const double arr =
        std::exp(k::spr_sig_arrh * (1.0 / k::spr_sig_Tref - 1.0 / T));
    const double lin = lambda >= 1.0 ? k::spr_sig_a * lambda - k::spr_sig_b
                                     : k::spr_sig_low;
    return lin * arr;
  }
  const double Ea = k::ram_Ea_a * std::exp(-k::ram_Ea_b * lambda) + k::ram_Ea_c;
  const double poly =
      lambda * (k::ram_sig[0] + lambda * (k::ram_sig[1] + lambda * k::ram_sig[2]));
  return poly * std::exp(Ea * (1.0 / k::ram_Tref - 1.0 / T));
}

double crossover_permeability(CrossoverGas gas, double lambda,
                              double lambda_l_eq, double T,
                              const MembraneConstants& mc) {
  if (lambda < 0.0) domain_fail("crossover_permeability: negative water content");
  const bool liquid = std::abs(lambda - lambda_l_eq) < 1e-9;
  double kernel, Ea;
  if (liquid) {
    kernel = gas == CrossoverGas::H2 ? k::web_h2_l : k::web_o2_l;
    Ea = gas == CrossoverGas::H2 ? k::web_Ea_h2_l : k::web_Ea_o2_l;
  } else {
    const double f_v = water_volume_fraction(lambda, mc);
    kernel = gas == CrossoverGas::H2 ? k::web_h2_v0 + k::web_h2_v1 * f_v
                                     : k::web_o2_v0 + k::web_o2_v1 * f_v;
    Ea = gas == CrossoverGas::H2 ? k::web_Ea_h2_v : k::web_Ea_o2_v;
  }
  return kernel * std::exp(Ea / kGasConst * (1.0 / k::web_Tref - 1.0 / T));
}

namespace {
void check_liquid_range(double T, const char* who) {
  if (T <= 273.0 || T >= 373.0)
    domain_fail(std::string(who) + ": T = " + std::to_string(T) +
                " K outside (273, 373) K");
}
} // namespace

double liquid_water_density(double T) {
  check_liquid_range(T, "liquid_water_density");
  const double t = T - 273.15;
  double num = 0.0, tp = 1.0;
  for (double c : k::kell_num) {
    num += c * tp;
    tp *= t;
  }
  return num / (1.0 + k::kell_den * t);
}

double liquid_viscosity_dynamic(double T) {
  check_liquid_range(T, "liquid_viscosity_dynamic");
  return k::visc_a * std::pow(10.0, -5.0 + k::visc_b / (T - k::visc_T0));
}

double liquid_viscosity_kinematic(double T) {
  return liquid_viscosity_dynamic(T) / liquid_water_density(T);
}

} // namespace pemfc::props
