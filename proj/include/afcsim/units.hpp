#pragma once

namespace afcsim::units {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

/// Optical frequency in GHz of a vacuum wavelength in nm.
constexpr double frequency_ghz(double wavelength_nm) { return kSpeedOfLight / wavelength_nm; }

/// Vacuum wavelength in nm of a frequency given in GHz.
constexpr double wavelength_nm(double frequency_ghz) { return kSpeedOfLight / frequency_ghz; }

/// Frequency offset (GHz) of `wavelength` relative to `reference` (positive = bluer).
constexpr double offset_ghz(double wavelength, double reference) {
  return frequency_ghz(wavelength) - frequency_ghz(reference);
}

/// Wavelength (nm) sitting `offset` GHz above the frequency of `reference`.
constexpr double wavelength_at_offset(double reference, double offset) {
  return wavelength_nm(frequency_ghz(reference) + offset);
}

inline constexpr double kPsPerNs = 1000.0;

}  // namespace afcsim::units
