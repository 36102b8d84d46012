#pragma once

// Physical constants and unit conventions.
//
// Units are fixed project-wide: energies/couplings in linear-frequency MHz,
// magnetic fields in Gauss, times in microseconds, distances in Angstrom.
// The angular 2*pi shows up exactly once, inside the propagator.

namespace nvsim::constants {

// gyromagnetic ratios, linear frequency per field (MHz/G), sign preserved
inline constexpr double gyro_electron = 2.802495;     // NV- electron, g_e mu_B / h
inline constexpr double gyro_c13 = 1.0705e-3;
inline constexpr double gyro_n15 = -0.4316e-3;
inline constexpr double gyro_h1 = 4.25774e-3;
inline constexpr double gyro_f19 = 4.00576e-3;

// dipole-dipole prefactor: tensor = dipole_prefactor * g1 * g2 / r^3 * (1 - 3 rr^T)
// with g in MHz/G and r in Angstrom, tensor in MHz.
// Derived from (mu0/4pi) * h * (1e10)^2 * 1e30 * 1e-6 = 1e-7 * 6.62607015e-34 * 1e44.
inline constexpr double dipole_prefactor = 6.62607015e3;  // MHz * A^3 / (MHz/G)^2

// diamond crystallography
inline constexpr double diamond_lattice_constant = 3.567;  // Angstrom, conventional cell
inline constexpr double c13_natural_abundance = 0.0107;

inline constexpr double pi = 3.14159265358979323846;

}  // namespace nvsim::constants
