#pragma once

#include <map>
#include <numbers>
#include <string>

namespace zsm {

enum class UnitSystem { natural, si };

/// CODATA-2018 values. Every SI number in the library comes from this table.
namespace codata2018 {
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double speed_of_light = 299792458.0;         // m / s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F / m
inline constexpr double electron_volt = 1.602176634e-19;         // J
}  // namespace codata2018

/// Particle and field constants. The diffusion coefficient and the Compton
/// frequency are derived on every call from mass, hbar and c; they are never
/// stored.
class PhysicalConstants {
 public:
  double mass() const { return mass_; }
  double hbar() const { return hbar_; }
  double light_speed() const { return light_speed_; }
  double charge() const { return charge_; }
  /// Only meaningful in SI; natural units use Gaussian-style couplings.
  double vacuum_permittivity() const { return vacuum_permittivity_; }
  UnitSystem unit_system() const { return unit_system_; }

  double diffusion() const { return hbar_ / (2.0 * mass_); }
  double compton_frequency() const { return mass_ * light_speed_ * light_speed_ / hbar_; }
  double rest_energy() const { return mass_ * light_speed_ * light_speed_; }
  double planck() const { return 2.0 * std::numbers::pi * hbar_; }
  /// Reduced Compton wavelength hbar / (m c).
  double compton_wavelength() const { return hbar_ / (mass_ * light_speed_); }

 private:
  friend PhysicalConstants make_constants(UnitSystem, const std::map<std::string, double>&);
  PhysicalConstants() = default;

  double mass_ = 1.0;
  double hbar_ = 1.0;
  double light_speed_ = 1.0;
  double charge_ = 1.0;
  double vacuum_permittivity_ = 1.0 / (4.0 * std::numbers::pi);
  UnitSystem unit_system_ = UnitSystem::natural;
};

/// Builds a constants set. Natural units default to m = hbar = c = e = 1; SI
/// defaults to the electron. Recognised override keys: "mass", "hbar", "c",
/// "charge". Every override must be strictly positive.
PhysicalConstants make_constants(UnitSystem units,
                                 const std::map<std::string, double>& overrides = {});

std::string to_string(UnitSystem units);
UnitSystem unit_system_from_string(const std::string& name);

}  // namespace zsm
