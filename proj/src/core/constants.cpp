#include "zsm/core/constants.hpp"

#include "zsm/core/error.hpp"

#include <cmath>

namespace zsm {

PhysicalConstants make_constants(UnitSystem units, const std::map<std::string, double>& overrides) {
  PhysicalConstants k;
  k.unit_system_ = units;
  if (units == UnitSystem::si) {
    k.mass_ = codata2018::electron_mass;
    k.hbar_ = codata2018::hbar;
    k.light_speed_ = codata2018::speed_of_light;
    k.charge_ = codata2018::elementary_charge;
    k.vacuum_permittivity_ = codata2018::vacuum_permittivity;
  }
  for (const auto& [key, value] : overrides) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw InvalidArgument("constants." + key + " must be strictly positive");
    if (key == "mass") {
      k.mass_ = value;
    } else if (key == "hbar") {
      k.hbar_ = value;
    } else if (key == "c") {
      k.light_speed_ = value;
    } else if (key == "charge") {
      k.charge_ = value;
    } else {
      throw InvalidArgument("constants: unknown override '" + key + "'");
    }
  }
  return k;
}

std::string to_string(UnitSystem units) { return units == UnitSystem::si ? "SI" : "natural"; }

UnitSystem unit_system_from_string(const std::string& name) {
  if (name == "natural") return UnitSystem::natural;
  if (name == "SI" || name == "si") return UnitSystem::si;
  throw InvalidArgument("unknown unit system '" + name + "'");
}

}  // namespace zsm
