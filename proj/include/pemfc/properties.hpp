#pragma once

// Closed-form material and electrochemical correlations. Everything here is
// a pure function of its arguments; identical inputs give bit-identical
// outputs. Units are SI throughout (K, Pa, m, mol, s).

#include "pemfc/constants.hpp"

namespace pemfc::props {

enum class DLambdaVariant { Kulikovsky, Springer, Motupally };
enum class LambdaEqVariant { HinatsuBao, SpringerBao };
enum class ConductivityVariant { Springer, Ramousse };
enum class ActivityModel { VapourPlusLiquid, RelativeHumidityOnly };
enum class Layer { CL, GDL };
enum class Direction { InPlane, ThroughPlane };
enum class GasPair { H2O_H2, H2O_O2 };
enum class CrossoverGas { H2, O2 };

struct PropertyConfig {
  DLambdaVariant d_lambda_variant = DLambdaVariant::Kulikovsky;
  LambdaEqVariant lambda_eq_variant = LambdaEqVariant::HinatsuBao;
  ConductivityVariant conductivity_variant = ConductivityVariant::Springer;
  double k_shape = 2.0; // transition sharpness of the Bao blend
  ActivityModel activity_model = ActivityModel::VapourPlusLiquid;
};

struct MembraneConstants {
  double rho_mem = 1980.0;            // kg/m^3, dry membrane
  double M_eq = 1.1;                  // kg/mol, equivalent weight
  double V_w = kMolarMassH2O / 1e3;   // m^3/mol, molar volume of water
  double V_mem() const { return M_eq / rho_mem; }
};

struct PorousConstants {
  double eps = 0.6;          // porosity
  double eps_p = 0.11;       // percolation threshold
  double tau = 1.5;          // Bruggeman pore-structure coefficient
  double alpha = k::ts_alpha_through;
  double beta1 = k::tsb_beta1_through_060; // compression fit, permeability
  double beta2 = k::tsb_beta2_through_060; // compression fit, diffusivity
  double eps_c = 0.0;        // GDL compression ratio
  double r_f_fiber = 4.6e-6; // m, carbon fibre radius
  double e_cap = 4.0;        // capillary exponent
  double theta_c_deg = 120.0;// contact angle for liquid water
  double eps_mc = 0.0;       // ionomer volume fraction (CL only)
};

// Compression-fit lookups, nearest published porosity row (0.6 or 0.73).
double ts_alpha(Direction dir);
double tsb_beta1(double eps, Direction dir);
double tsb_beta2(double eps, Direction dir);

// Saturation pressure of vapour. Valid 223..373 K.
double p_sat(double T);
// Saturated vapour concentration p_sat/(R T).
double c_sat(double T);

// Water activity in the CL pores from vapour concentration and liquid
// saturation. VapourPlusLiquid: C/C_sat + 2s clamped to [0,3];
// RelativeHumidityOnly: C/C_sat clamped to [0,1].
double water_activity(double C_v, double s, double T, const PropertyConfig& cfg);

// Equilibrium membrane water content as a function of activity (Bao blend
// over the Hinatsu or Springer cubic). a_w in [0,3].
double lambda_eq(double a_w, double T, const PropertyConfig& cfg);

// Liquid-equilibrated water content (Hinatsu, temperature in Celsius inside).
double lambda_eq_liquid(double T);

// Dissolved-water diffusivity in the membrane.
double d_lambda(double lambda, double T, const PropertyConfig& cfg);

// Water volume fraction of the membrane f_v = lambda V_w / (V_mem + lambda V_w).
double water_volume_fraction(double lambda, const MembraneConstants& mc);

// Interfacial sorption rate (1/s); absorption rate when lambda_eq >= lambda,
// desorption rate otherwise. The branch-explicit form backs semi-implicit
// switching in the solver.
double sorption_rate(double lambda, double lambda_eq, double T, double H_cl,
                     const MembraneConstants& mc);
double sorption_rate_branch(bool absorbing, double lambda, double T,
                            double H_cl, const MembraneConstants& mc);

// Surface tension of liquid water. Valid 273..647.15 K.
double surface_tension(double T);

// Intrinsic permeability of a fibrous porous layer, Tomadakis & Sotirchos
// kernel times the compression exponential.
double intrinsic_permeability_tsb(const PorousConstants& pc);

// Effective diffusivity: Bruggeman at the CL, compressed Tomadakis &
// Sotirchos at the GDL, both blocked by liquid saturation.
double effective_diffusivity(double D_ij, double s, Layer layer, Direction dir,
                             const PorousConstants& pc);

// Binary diffusivity of a vapour/gas pair in open space.
double binary_diffusivity(GasPair pair, double T, double P);

// Sherwood number for a rectangular channel; W/H in [0.2, 10].
double sherwood(double W_gc, double H_gc);
// Convective-diffusive mass transfer coefficient h = Sh D / H_gc.
double h_codi(double D, double W_gc, double H_gc);

// Leverett J-function and the capillary diffusion coefficient
// D_cap = sigma K0/nu |cos theta| sqrt(eps/K0) s^e J'(s) (kg m^-1 s^-1).
double leverett_j(double s);
double d_cap(double s, const PorousConstants& pc, double T);

// Proton conductivity of the membrane (S/m).
double proton_conductivity(double lambda, double T, const PropertyConfig& cfg);

// Gas permeation coefficient through the membrane (mol m^-1 s^-1 Pa^-1);
// liquid-equilibrated constants when |lambda - lambda_l_eq| < 1e-9.
double crossover_permeability(CrossoverGas gas, double lambda,
                              double lambda_l_eq, double T,
                              const MembraneConstants& mc);

// Liquid water density, dynamic and kinematic viscosity. Valid 273..373 K.
double liquid_water_density(double T);
double liquid_viscosity_dynamic(double T);
double liquid_viscosity_kinematic(double T);

// The water-content fits stop at lambda = 17; first evaluation beyond that
// emits a single stderr warning per run.
void reset_lambda_range_warning();

} // namespace pemfc::props
