#pragma once

#include "qtopc/types.hpp"

#include <string>

namespace qtopc {

/// Pure state |psi>, a unit vector in C^d.
struct PureState {
  Vector amplitudes;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }

  /// Computational basis state |i> in dimension d.
  static PureState basis(int i, int d);
  /// Normalizes and fixes the global phase so the first nonzero amplitude
  /// is real-positive.
  static PureState normalized(const Vector& v);
};

/// Density matrix rho: Hermitian, unit trace, positive semidefinite.
struct DensityMatrix {
  Matrix m;

  int dim() const { return static_cast<int>(m.rows()); }

  static DensityMatrix fromPure(const PureState& psi);
  static DensityMatrix maximallyMixed(int d);
  static DensityMatrix fromMatrix(const Matrix& a) { return DensityMatrix{a}; }
};

/// Report-only diagnostic of the density-matrix invariants.
struct StateDiagnostics {
  double hermiticity_defect = 0.0; // max entrywise |rho - rho^dag|
  double trace_defect = 0.0;       // |Tr(rho) - 1|
  double min_eigenvalue = 0.0;
  bool pass = false;
  std::string summary() const;
};

StateDiagnostics validate_state(const DensityMatrix& rho,
                                const NumericPolicy& policy = default_policy());

// Named operators used throughout: Pauli matrices (d=2), spin-1 angular
// momentum matrices (d=3), basis projectors and the identity.
namespace ops {
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();
Matrix jx();
Matrix jy();
Matrix jz();
Matrix projector(int i, int d); // |i><i|
Matrix identity(int d);
Matrix lowering2(); // |0><1|, amplitude-damping operator
} // namespace ops

/// Largest singular value.
double operator_norm(const Matrix& a);

} // namespace qtopc
