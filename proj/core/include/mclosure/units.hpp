// units.hpp - energy/time conventions
//
// Energies, frequencies and rates are carried in wavenumbers (cm^-1), times in
// femtoseconds. A phase E*t picks up the factor 2*pi*c with c in cm/fs.
#pragma once

#include <complex>
#include <numbers>

namespace mclosure::units {

inline constexpr double speed_of_light_cm_per_fs = 2.99792458e-5;
// angular frequency in rad/fs of one wavenumber
inline constexpr double rad_per_fs_per_wavenumber =
    2.0 * std::numbers::pi * speed_of_light_cm_per_fs;

inline constexpr double to_rad_per_fs(double wavenumber) {
  return rad_per_fs_per_wavenumber * wavenumber;
}
inline constexpr double phase(double wavenumber, double t_fs) {
  return rad_per_fs_per_wavenumber * wavenumber * t_fs;
}

using cplx = std::complex<double>;

// exp(-i E t)
inline cplx propagator_phase(double wavenumber, double t_fs) {
  return std::polar(1.0, -phase(wavenumber, t_fs));
}

}  // namespace mclosure::units
