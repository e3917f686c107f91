#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qvol/statevector.hpp"

namespace qvol {

/// Phased Pauli operator in the canonical form
///
///   P = i^phase_power * prod_q X_q^{x_q} Z_q^{z_q}
///
/// with phase_power in {0,1,2,3}.  Y appears as i * X * Z, so a Hermitian
/// string satisfies phase_power == x.z (mod 2).  All products, conjugations
/// and transposes track the phase exactly.
class PauliString {
 public:
  /// Identity on n qubits.
  explicit PauliString(int num_qubits);

  PauliString(std::vector<std::uint8_t> x, std::vector<std::uint8_t> z,
              int phase_power);

  /// Builds X^a Z^b from bit vectors (phase_power 0).
  static PauliString from_xz(const std::vector<int>& x,
                             const std::vector<int>& z);

  int num_qubits() const { return static_cast<int>(x_.size()); }
  const std::vector<std::uint8_t>& x_bits() const { return x_; }
  const std::vector<std::uint8_t>& z_bits() const { return z_; }
  int phase_power() const { return phase_; }
  cplx phase() const;

  bool is_identity_pattern() const;  ///< all x and z bits zero (any phase)
  bool is_hermitian() const;

  /// True when this commutes with other (phases are irrelevant).
  bool commutes(const PauliString& other) const;

  /// Exact operator product this * other.
  PauliString operator*(const PauliString& other) const;

  bool operator==(const PauliString& other) const;

  /// Matrix transpose in the computational basis: flips the sign when the
  /// string contains an odd number of qubits with both x and z set.
  PauliString transposed() const;

  /// Hermitian adjoint.
  PauliString adjoint() const;

  /// In-place Heisenberg conjugation P -> g P g^dagger by named Clifford
  /// generators.
  void conjugate_h(int q);
  void conjugate_s(int q);
  void conjugate_cnot(int control, int target);

  /// Applies P to a dense state (permutation + phases, O(2^m)).
  void apply(StateVector& state) const;

  /// Dense matrix (use only for small registers).
  Eigen::MatrixXcd dense() const;

  /// Display form such as "+XYIZ" or "-iXZ": the printed phase absorbs the
  /// i factors of the Y letters.
  std::string str() const;

 private:
  std::vector<std::uint8_t> x_, z_;
  int phase_;  // power of i, 0..3
};

}  // namespace qvol
