#pragma once

#include <memory>

#include "pulsestab/profile.hpp"

namespace fixtures {

inline constexpr double c_roll = 0.7849388899;   // F = 9, r = 2, s = 0
inline constexpr double c_11 = 3.1868775173;     // F = 0.222, r = s = 1

inline pulsestab::ModelSpec roll_model() { return pulsestab::ModelSpec::st_venant(9.0, 0.1, 2.0, 0.0); }
inline pulsestab::ModelSpec model_11() { return pulsestab::ModelSpec::st_venant(0.222, 20.0, 1.0, 1.0); }
inline pulsestab::ModelSpec jinxin_model() { return pulsestab::ModelSpec::jin_xin(1.0, 0.5); }

inline std::shared_ptr<const pulsestab::ProfileSolution> roll_profile() {
  static auto p = std::make_shared<const pulsestab::ProfileSolution>(
      pulsestab::solve_homoclinic(roll_model(), {c_roll, 1.0 + c_roll}));
  return p;
}

inline std::shared_ptr<const pulsestab::ProfileSolution> profile_11() {
  static auto p =
      std::make_shared<const pulsestab::ProfileSolution>(pulsestab::solve_homoclinic(model_11(), {c_11, 1.0 + c_11}));
  return p;
}

inline std::shared_ptr<const pulsestab::ProfileSolution> jinxin_profile() {
  static auto p =
      std::make_shared<const pulsestab::ProfileSolution>(pulsestab::jinxin_quadrature(jinxin_model(), 2.0, -0.5, 0));
  return p;
}

}  // namespace fixtures
