#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "qvol/rng.hpp"

namespace qvol {

using cplx = std::complex<double>;
using DensityMatrix = Eigen::MatrixXcd;

/// Unitary acting on `arity` qubits (arity 1 or 2), stored dense.
/// Row/column index bits follow the target order passed to apply_gate:
/// for targets (q1, q2) the index is bit(q1) * 2 + bit(q2), i.e. the first
/// target is the more significant bit, so kron(A, B) acts with A on q1.
struct GateMatrix {
  int arity;
  Eigen::MatrixXcd mat;

  /// Validates dimensions and unitarity (max-norm tolerance 1e-10).
  GateMatrix(int arity_, Eigen::MatrixXcd mat_);

  static GateMatrix identity(int arity);
};

/// Dense state of `num_qubits` qubits.  Qubit 0 is the MOST significant
/// index bit: basis state |b_0 b_1 ... b_{m-1}> sits at index
/// sum_i b_i * 2^(m-1-i).  Norms other than 1 are allowed everywhere;
/// only sampling operations require a normalized input.
///
/// A register of zero qubits is a valid degenerate state holding a single
/// scalar amplitude; it arises when every qubit has been measured away.
class StateVector {
 public:
  /// |0...0> on m qubits.
  explicit StateVector(int num_qubits);

  /// Takes ownership of raw amplitudes (size must be 2^m).
  StateVector(int num_qubits, std::vector<cplx> amplitudes);

  /// Computational basis state |bits[0] bits[1] ...>.
  static StateVector basis(int num_qubits, const std::vector<int>& bits);

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }
  cplx amplitude(std::size_t idx) const { return amps_[idx]; }

  double norm() const;
  void normalize();  ///< Errors on the zero vector.

  /// Applies `gate` to the listed target qubits (distinct, in range).
  void apply_gate(const GateMatrix& gate, const std::vector<int>& targets);

  /// Applies an arbitrary (not necessarily unitary) 2^k x 2^k matrix to the
  /// targets; used for generator insertions and other linear-map probes.
  void apply_matrix(const Eigen::MatrixXcd& mat, const std::vector<int>& targets);

  /// Maximum register width accepted by constructors (soft cap, default 24).
  static int qubit_limit();
  static void set_qubit_limit(int limit);

 private:
  int num_qubits_;
  std::vector<cplx> amps_;
};

/// Kronecker product: a's qubits become the leading (most significant) ones.
StateVector tensor(const StateVector& a, const StateVector& b);

/// |<a|b>|^2 / (|a|^2 |b|^2).  Errors if either vector is zero.
double fidelity(const StateVector& a, const StateVector& b);

/// Plain inner product <a|b> (no normalization).
cplx inner(const StateVector& a, const StateVector& b);

/// Projects the listed qubits onto the given bits.  Returns the squared-norm
/// weight of the branch (the branch probability when the input is normalized)
/// and the *unnormalized* residual state on the remaining qubits, which keep
/// their original relative order.
struct Projection {
  double weight;
  StateVector residual;
};
Projection project_computational(const StateVector& state,
                                 const std::vector<int>& qubits,
                                 const std::vector<int>& bits);

/// Samples a computational-basis measurement of the listed qubits.
/// The input must be normalized to 1e-8; the post state is normalized and
/// lives on the unmeasured qubits.  `outcome[i]` is the bit of `qubits[i]`.
struct MeasurementResult {
  std::vector<int> outcome;
  StateVector post;
  double probability;
};
MeasurementResult measure_computational(const StateVector& state,
                                        const std::vector<int>& qubits,
                                        Rng& rng);

/// Reduced density matrix on `keep` (ascending order defines row index bits;
/// keep[0] is the most significant).  Input may be unnormalized; the result
/// trace equals the input's squared norm restricted appropriately.
DensityMatrix partial_trace(const StateVector& state,
                            const std::vector<int>& keep);

/// Full density matrix |psi><psi|.
DensityMatrix density(const StateVector& state);

double purity(const DensityMatrix& rho);

/// Sum of absolute eigenvalues.  Errors if the input is not Hermitian
/// within 1e-10 (max norm).
double trace_norm(const DensityMatrix& a);

/// Common 1- and 2-qubit gates.
namespace gates {
GateMatrix x();
GateMatrix y();
GateMatrix z();
GateMatrix h();
GateMatrix s();
GateMatrix cnot();  ///< control = first target (more significant bit)
}  // namespace gates

}  // namespace qvol
