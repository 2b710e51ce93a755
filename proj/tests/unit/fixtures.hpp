#pragma once

#include <cmath>

#include "msb/mechanism.hpp"

namespace msb::fixtures {

inline BranchingMechanism mech0() {
  BranchingMechanism m;
  m.a11 = 0.5;
  m.a21 = 0.2;
  m.alpha = 0.3;
  m.n1.atoms = {{1.0, 1, 0.4}};
  m.n2.atoms = {{0.5, -1, 1.0}, {0.0, 1, 0.2}};
  return m;
}

inline ImmigrationMechanism imm0() {
  ImmigrationMechanism i;
  i.b = 0.1;
  i.m.atoms = {{1.0, 1, 0.5}};
  return i;
}

// z-score of an estimate against a reference
inline double zscore(double estimate, double se, double reference) {
  return se > 0.0 ? std::fabs(estimate - reference) / se : std::fabs(estimate - reference) * 1e300;
}

}  // namespace msb::fixtures
