#include "msb/mechanism.hpp"

#include <cmath>
#include <sstream>

namespace msb {

double LevyAtomMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

double LevyAtomMeasure::moment_z1() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight * a.z1;
  return s;
}

double LevyAtomMeasure::moment_z2() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight * static_cast<double>(a.z2);
  return s;
}

namespace {

std::string atom_label(const char* measure, std::size_t i, const LevyAtom& a) {
  std::ostringstream os;
  os << measure << "[" << i << "] = (" << a.z1 << ", " << a.z2 << ", w=" << a.weight << ")";
  return os.str();
}

void check_atoms(const LevyAtomMeasure& m, const char* name, std::int64_t min_z2,
                 std::vector<Violation>& out) {
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    const auto& a = m.atoms[i];
    const std::string label = atom_label(name, i, a);
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      out.push_back({label, std::string("non-positive or nonfinite weight in ") + name});
    }
    if (!(a.z1 >= 0.0) || !std::isfinite(a.z1)) {
      out.push_back({label, std::string("z1 < 0 in ") + name});
    }
    if (a.z2 < min_z2) {
      out.push_back({label, std::string("z2 < ") + std::to_string(min_z2) + " in " + name});
    }
    if (a.z1 == 0.0 && a.z2 == 0) {
      out.push_back({label, std::string("origin atom in ") + name});
    }
  }
}

}  // namespace

std::vector<Violation> validate_branching(const BranchingMechanism& mech) {
  std::vector<Violation> out;
  if (!std::isfinite(mech.a11)) out.push_back({"a11", "a11 must be finite"});
  if (!(mech.a21 >= 0.0) || !std::isfinite(mech.a21)) out.push_back({"a21", "a21 < 0"});
  if (!(mech.alpha >= 0.0) || !std::isfinite(mech.alpha)) out.push_back({"alpha", "alpha < 0"});
  check_atoms(mech.n1, "n1", 0, out);
  check_atoms(mech.n2, "n2", -1, out);
  return out;
}

std::vector<Violation> validate_immigration(const ImmigrationMechanism& imm) {
  std::vector<Violation> out;
  if (!(imm.b >= 0.0) || !std::isfinite(imm.b)) out.push_back({"b", "b < 0"});
  check_atoms(imm.m, "m", 0, out);
  return out;
}

double phi1(const BranchingMechanism& mech, Vec2 lambda) {
  require_nonneg(lambda, "phi1");
  double s = -mech.a11 * lambda.x1 - mech.alpha * lambda.x1 * lambda.x1;
  for (const auto& a : mech.n1.atoms) {
    const double lz = dot(lambda, a.size());
    s -= a.weight * (std::expm1(-lz) + lambda.x1 * a.z1);
  }
  return s;
}

double phi2(const BranchingMechanism& mech, Vec2 lambda) {
  require_nonneg(lambda, "phi2");
  double s = mech.a21 * lambda.x1;
  for (const auto& a : mech.n2.atoms) {
    s -= a.weight * std::expm1(-dot(lambda, a.size()));
  }
  return s;
}

double psi(const ImmigrationMechanism& imm, Vec2 lambda) {
  require_nonneg(lambda, "psi");
  double s = imm.b * lambda.x1;
  for (const auto& a : imm.m.atoms) {
    s -= a.weight * std::expm1(-dot(lambda, a.size()));
  }
  return s;
}

MomentMatrix moment_matrix(const BranchingMechanism& mech) {
  return {-mech.a11, mech.n1.moment_z2(), mech.a21 + mech.n2.moment_z1(), mech.n2.moment_z2()};
}

double TruncatedMechanism::phi1(Vec2 lambda) const {
  require_nonneg(lambda, "phi1_r");
  double s = -a11 * lambda.x1 + b11 * lambda.x2 - alpha * lambda.x1 * lambda.x1;
  for (const auto& a : n1_rest.atoms) {
    const double lz = dot(lambda, a.size());
    s -= a.weight * (std::expm1(-lz) + lz);
  }
  return s;
}

double TruncatedMechanism::phi2(Vec2 lambda) const {
  require_nonneg(lambda, "phi2_r");
  double s = a21 * lambda.x1 + b21 * lambda.x2;
  for (const auto& a : n2_rest.atoms) {
    const double lz = dot(lambda, a.size());
    s -= a.weight * (std::expm1(-lz) + lz);
  }
  return s;
}

Mat2 TruncatedMechanism::moment_matrix() const { return {-a11, b11, a21, b21}; }

TruncatedMechanism truncate_mechanism(const BranchingMechanism& mech, Vec2 r) {
  if (!(r.x1 >= 0.0) || !(r.x2 >= 0.0)) throw DomainError("truncate_mechanism: r must be >= 0");
  TruncatedMechanism out;
  out.a11 = mech.a11;
  out.a21 = mech.a21;
  out.alpha = mech.alpha;
  for (const auto& a : mech.n1.atoms) {
    if (in_upper_orthant(a.z1, static_cast<double>(a.z2), r)) {
      out.a11 += a.weight * a.z1;
      out.excess.x1 += a.weight;
    } else {
      out.b11 += a.weight * static_cast<double>(a.z2);
      out.n1_rest.atoms.push_back(a);
    }
  }
  for (const auto& a : mech.n2.atoms) {
    if (in_upper_orthant(a.z1, static_cast<double>(a.z2), r)) {
      out.excess.x2 += a.weight;
    } else {
      out.a21 += a.weight * a.z1;
      out.b21 += a.weight * static_cast<double>(a.z2);
      out.n2_rest.atoms.push_back(a);
    }
  }
  return out;
}

StabilityReport stability_report(const Mat2& h) {
  StabilityReport rep;
  const auto ev = eigenvalues(h);
  rep.eigen1 = ev[0];
  rep.eigen2 = ev[1];
  rep.det = h.det();
  rep.trace = h.trace();
  rep.discriminant = h.discriminant();
  rep.contraction_hypothesis = rep.det > 0.0 && rep.trace < 0.0;
  rep.negative_real_parts = ev[0].real() < 0.0 && ev[1].real() < 0.0;
  return rep;
}

}  // namespace msb
