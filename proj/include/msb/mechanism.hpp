#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "msb/common.hpp"
#include "msb/linalg.hpp"

namespace msb {

/// One jump atom of a finite Levy measure: mass `weight` at (z1, z2).
struct LevyAtom {
  double z1 = 0.0;
  std::int64_t z2 = 0;
  double weight = 0.0;

  Vec2 size() const { return {z1, static_cast<double>(z2)}; }
  friend bool operator==(const LevyAtom&, const LevyAtom&) = default;
};

/// Finite atomic measure. Every integral against it is an exact sum.
struct LevyAtomMeasure {
  std::vector<LevyAtom> atoms;

  bool empty() const { return atoms.empty(); }
  double total_mass() const;
  /// sum w * z1
  double moment_z1() const;
  /// sum w * z2
  double moment_z2() const;

  friend bool operator==(const LevyAtomMeasure&, const LevyAtomMeasure&) = default;
};

/// Parameters of (Phi1, Phi2). n1 lives on M\{0}, n2 on M_{-1}\{0}.
struct BranchingMechanism {
  double a11 = 0.0;
  double a21 = 0.0;
  double alpha = 0.0;
  LevyAtomMeasure n1;
  LevyAtomMeasure n2;

  friend bool operator==(const BranchingMechanism&, const BranchingMechanism&) = default;
};

/// Parameters of Psi: drift b and immigration measure m on M\{0}.
struct ImmigrationMechanism {
  double b = 0.0;
  LevyAtomMeasure m;

  bool is_zero() const { return b == 0.0 && m.empty(); }
  friend bool operator==(const ImmigrationMechanism&, const ImmigrationMechanism&) = default;
};

struct Violation {
  std::string field;
  std::string message;
};

std::vector<Violation> validate_branching(const BranchingMechanism& mech);
std::vector<Violation> validate_immigration(const ImmigrationMechanism& imm);

/// -a11 l1 - alpha l1^2 - sum w (e^{-<l,z>} - 1 + l1 z1) over n1.
double phi1(const BranchingMechanism& mech, Vec2 lambda);

/// a21 l1 + sum w (1 - e^{-<l,z>}) over n2.
double phi2(const BranchingMechanism& mech, Vec2 lambda);

inline Vec2 phi(const BranchingMechanism& mech, Vec2 lambda) {
  return {phi1(mech, lambda), phi2(mech, lambda)};
}

/// b l1 + sum w (1 - e^{-<l,z>}) over m.
double psi(const ImmigrationMechanism& imm, Vec2 lambda);

using MomentMatrix = Mat2;

/// H = [[-a11, int z2 n1], [a21 + int z1 n2, int z2 n2]].
MomentMatrix moment_matrix(const BranchingMechanism& mech);

/// Mechanism with the jumps in A_r = (r1, inf) x (r2, inf) removed, keeping
/// the compensator of the removed n1 jumps in the drift.
struct TruncatedMechanism {
  double a11 = 0.0;  ///< a11 + int_{A_r} z1 n1
  double b11 = 0.0;  ///< int_{M \ A_r} z2 n1
  double a21 = 0.0;  ///< a21 + int_{M_-1 \ A_r} z1 n2
  double b21 = 0.0;  ///< int_{M_-1 \ A_r} z2 n2
  double alpha = 0.0;
  LevyAtomMeasure n1_rest;  ///< n1 restricted to M \ A_r
  LevyAtomMeasure n2_rest;  ///< n2 restricted to M_-1 \ A_r
  Vec2 excess;              ///< (n1(A_r), n2(A_r))

  double phi1(Vec2 lambda) const;
  double phi2(Vec2 lambda) const;
  Mat2 moment_matrix() const;
};

/// z in A_r, i.e. z1 > r1 and z2 > r2.
inline bool in_upper_orthant(double z1, double z2, Vec2 r) { return z1 > r.x1 && z2 > r.x2; }

TruncatedMechanism truncate_mechanism(const BranchingMechanism& mech, Vec2 r);

struct StabilityReport {
  std::complex<double> eigen1;  ///< larger real part
  std::complex<double> eigen2;
  double det = 0.0;
  double trace = 0.0;
  double discriminant = 0.0;
  bool contraction_hypothesis = false;     ///< det > 0 and trace < 0
  bool negative_real_parts = false;  ///< max Re(eigen) < 0
};

StabilityReport stability_report(const Mat2& h);
inline StabilityReport stability_report(const BranchingMechanism& mech) {
  return stability_report(moment_matrix(mech));
}

}  // namespace msb
