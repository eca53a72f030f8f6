#pragma once

// Physical and empirical constants. Every empirical coefficient used by the
// correlations lives here, once, with its source; nothing is duplicated in
// the evaluation code.

namespace pemfc {

inline constexpr double kFaraday = 96485.0;   // C/mol
inline constexpr double kGasConst = 8.314;    // J/(mol K)
inline constexpr double kAtm = 101325.0;      // Pa

inline constexpr double kMolarMassH2O = 0.018;   // kg/mol
inline constexpr double kMolarMassH2 = 0.002;    // kg/mol
inline constexpr double kMolarMassO2 = 0.032;    // kg/mol
inline constexpr double kMolarMassN2 = 0.028;    // kg/mol

namespace k {

// Electro-osmotic drag coefficient, Springer et al. 1991 (Nafion 117):
// n_drag = 2.5 lambda / 22.
inline constexpr double eod_slope = 2.5 / 22.0;

// Membrane water diffusivity, Kulikovsky 2003 fit of Van Bussel's data
// (80 C): D = a (lambda/25)^p [1 + tanh((lambda - c)/w)].
inline constexpr double kul_a = 4.1e-10;
inline constexpr double kul_p = 0.15;
inline constexpr double kul_c = 2.5;
inline constexpr double kul_w = 1.4;

// Membrane water diffusivity, Springer et al. 1991 (Zawodzinski data).
inline constexpr double spr_d_const = 2.692661843e-10; // lambda <= 2 branch
inline constexpr double spr_d_scale = 1.0e-10;
inline constexpr double spr_d_arrh = 2416.0;           // K, also used by Ge rates
inline constexpr double spr_d_Tref = 303.0;            // K

// Membrane water diffusivity, Motupally et al. 2000.
inline constexpr double mot_a1 = 3.1e-7;
inline constexpr double mot_e1 = 0.28;
inline constexpr double mot_a2 = 4.17e-8;
inline constexpr double mot_e2 = 161.0;
inline constexpr double mot_arrh = 2436.0; // K, exp(-2436/T) as published

// Equilibrium water content cubics (a_w in [0,1]).
// Springer et al. 1991 (30 C) and Hinatsu et al. 1994 (80 C).
inline constexpr double spr_eq[4] = {0.043, 17.81, -39.85, 36.0};
inline constexpr double hin_eq[4] = {0.300, 10.8, -16.0, 14.1};
// Single-expression blend over the full a_w range, Bao & Bessler 2015:
// lambda at a_w=1 and the rise to the liquid-equilibrated value at a_w=3.
inline constexpr double bao_tanh_gain = 100.0;
inline constexpr double spr_eq_aw1 = 14.0, spr_eq_rise = 2.8; // 16.8 at a_w=3
inline constexpr double hin_eq_aw1 = 9.2, hin_eq_rise = 8.6;  // 17.8 at a_w=3
// Liquid-equilibrated content, Hinatsu et al. 1994 (t in Celsius).
inline constexpr double hin_liq[3] = {10.0, 1.84e-2, 9.90e-4};

// Interfacial sorption rates, Ge et al. 2005 (as modified by Wu et al. 2009
// with the 1/H_cl scaling): gamma = c f_v / H_cl * exp(2416 (1/303 - 1/T)).
inline constexpr double ge_absorb = 1.14e-5;  // m/s
inline constexpr double ge_desorb = 4.59e-5;  // m/s

// Surface tension of water against air, Vargaftik et al. 1983.
inline constexpr double sigma_B = 235.8e-3;   // N/m
inline constexpr double sigma_Tc = 647.15;    // K, critical temperature
inline constexpr double sigma_mu = 1.256;
inline constexpr double sigma_b = 0.625;

// Leverett J-function (sand-bed data), Udell 1985 form.
inline constexpr double lev[3] = {1.417, -2.12, 1.263};

// Tomadakis & Sotirchos fibrous-media fits; Bao et al. 2021 compression
// exponentials exp(beta eps_c) for eps ~ 0.6 and ~ 0.73.
inline constexpr double ts_alpha_through = 0.785;
inline constexpr double ts_alpha_in = 0.521;
inline constexpr double tsb_beta1_through_060 = -3.60, tsb_beta1_in_060 = -5.07;
inline constexpr double tsb_beta1_through_073 = -2.60, tsb_beta1_in_073 = -3.51;
inline constexpr double tsb_beta2_through_060 = -1.59, tsb_beta2_in_060 = -2.05;
inline constexpr double tsb_beta2_through_073 = -0.90, tsb_beta2_in_073 = -1.04;

// Binary diffusivities at 333 K and 1 atm, O'Hayre et al. (T/333)^2.334.
inline constexpr double dij_h2o_h2 = 1.644e-4;  // m^2/s
inline constexpr double dij_h2o_o2 = 3.242e-5;  // m^2/s
inline constexpr double dij_Tref = 333.0;       // K
inline constexpr double dij_texp = 2.334;

// Sherwood number fit against O'Hayre's rectangular-channel data,
// valid for W/H in [0.2, 10].
inline constexpr double sh_a = 0.9247;
inline constexpr double sh_b = 2.3787;

// Membrane proton conductivity, Springer et al. 1991 (30 C fit; the
// 0.1879 constant below lambda=1 is stated in Springer's text).
inline constexpr double spr_sig_a = 0.5139;
inline constexpr double spr_sig_b = 0.326;
inline constexpr double spr_sig_low = 0.1879;
inline constexpr double spr_sig_arrh = 1268.0;  // K = 10542 / 8.314
inline constexpr double spr_sig_Tref = 303.15;  // K

// Membrane proton conductivity, Ramousse et al. 2005.
inline constexpr double ram_sig[3] = {0.2658, 0.0298, 0.0013}; // lambda^1..3
inline constexpr double ram_Ea_a = 2640.0, ram_Ea_b = 0.6, ram_Ea_c = 1183.0;
inline constexpr double ram_Tref = 353.0; // K

// Gas permeation through Nafion, Weber & Newman 2004. Vapour-equilibrated
// kernels (0.29 + 2.2 f_v) / (0.11 + 1.9 f_v) e-14, liquid-equilibrated
// constants, activation energies, T_ref = 303.15 K.
inline constexpr double web_h2_v0 = 0.29e-14, web_h2_v1 = 2.2e-14;
inline constexpr double web_o2_v0 = 0.11e-14, web_o2_v1 = 1.9e-14;
inline constexpr double web_h2_l = 1.8e-14, web_o2_l = 1.2e-14;
inline constexpr double web_Ea_h2_v = 2.1e4, web_Ea_o2_v = 2.2e4;  // J/mol
inline constexpr double web_Ea_h2_l = 1.8e4, web_Ea_o2_l = 2.0e4;  // J/mol
inline constexpr double web_Tref = 303.15; // K

// Short-circuit areal resistance, Giner-Sanz et al. 2014 (Nafion 117,
// pressures near 1 atm).
inline constexpr double gs_r0 = 1.79e-2;   // ohm m^2
inline constexpr double gs_pa_exp = -9.63;
inline constexpr double gs_pc_exp = 0.38;

// Saturation pressure of water, quartic-in-Celsius log10 fit
// (-50..100 C range).
inline constexpr double psat_c[4] = {-2.1794, 0.02953, -9.1837e-5, 1.4454e-7};

// Liquid water density, Kell 1975 rational polynomial (t in Celsius).
inline constexpr double kell_num[6] = {999.83952,     16.945176,
                                       -7.9870401e-3, -46.170461e-6,
                                       105.56302e-9,  -280.54253e-12};
inline constexpr double kell_den = 16.879850e-3;

// Liquid water dynamic viscosity, Vogel-type fit: 2.414e(-5 + 247.8/(T-140)).
inline constexpr double visc_a = 2.414;
inline constexpr double visc_b = 247.8;
inline constexpr double visc_T0 = 140.0;

// Nernst equation temperature coefficient dE/dT for H2/O2, standard value.
inline constexpr double nernst_dEdT = 8.5e-4; // V/K

// Reference temperature for the temperature-activated exchange current.
inline constexpr double i0_Tref = 353.15; // K

// Published applicability limit of the Springer/Motupally water-content
// correlations; evaluations beyond it warn once per run.
inline constexpr double lambda_fit_limit = 17.0;

} // namespace k
} // namespace pemfc
