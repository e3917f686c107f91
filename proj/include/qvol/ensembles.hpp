#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qvol/rng.hpp"
#include "qvol/statevector.hpp"

namespace qvol {

/// One two-qubit gate inside a brickwork layer, acting on the adjacent pair
/// (left_qubit, left_qubit + 1).
struct BrickGate {
  int left_qubit;
  Eigen::Matrix4cd mat;
};

/// One layer of non-overlapping nearest-neighbour gates.  `offset` is 0 when
/// pairs start at qubit 0 and 1 when they start at qubit 1; on open
/// boundaries an offset-1 layer on m qubits holds floor((m-1)/2) gates, and
/// can be empty (m = 2).
struct BrickLayer {
  int offset;
  std::vector<BrickGate> gates;
};

/// Brickwork circuit: layers alternate offset 0, 1, 0, ... starting at 0.
/// The *declared volume* floor(m/2) * depth counts one slot per pair per
/// layer regardless of boundary truncation; the actual gate count can be
/// smaller and is reported separately.
struct BrickworkCircuit {
  int num_qubits = 0;
  std::vector<BrickLayer> layers;

  int depth() const { return static_cast<int>(layers.size()); }
  long long declared_volume() const {
    return static_cast<long long>(num_qubits / 2) * depth();
  }
  long long gate_count() const;

  /// Applies the circuit to `state`, shifting every qubit index by
  /// `qubit_offset` (used to act on the second half of a Choi register).
  void apply(StateVector& state, int qubit_offset = 0) const;

  /// Reverse layer order with each gate transposed: the matrix transpose of
  /// the whole circuit in the computational basis.
  BrickworkCircuit transposed() const;
};

/// Dense matrix of a circuit on its own register (small m only).
Eigen::MatrixXcd circuit_unitary(const BrickworkCircuit& c);

/// Haar-random U(4) element: QR of a complex Ginibre matrix with the phases
/// fixed so the triangular factor has a positive diagonal.
Eigen::Matrix4cd haar_unitary4(Rng& rng);

/// Uniformly random brickwork circuit with independent Haar U(4) gates.
/// Requires m >= 2, d >= 0.
BrickworkCircuit build_brickwork(int m, int d, Rng& rng);

/// n EPR pairs: 2^(-n/2) sum_j |j>_A |j>_B with A = qubits 0..n-1 and
/// pair i = (i, n+i).
StateVector prepare_epr(int n);

/// State ensembles used throughout the experiments.
struct EnsembleSpec {
  enum class Kind { BrickworkStates, BrickworkChoi, HaarStates, LocalStab };

  Kind kind;
  int m = 0;  // register width (for BrickworkChoi: per-side width n)
  int d = 0;  // circuit depth (BrickworkStates / BrickworkChoi only)

  static EnsembleSpec brickwork_states(int m, int d);
  static EnsembleSpec brickwork_choi(int n, int t);
  static EnsembleSpec haar_states(int n);
  static EnsembleSpec local_stab(int n);

  /// Number of qubits of a sampled state.
  int state_qubits() const;

  std::string str() const;
};

/// Draws one state from the ensemble.
StateVector sample_state(const EnsembleSpec& spec, Rng& rng);

/// Choi state |I, U> of a sampled brickwork circuit U, together with the
/// circuit itself.  The identity side is qubits 0..n-1.  n = 1 is allowed
/// and produces the bare EPR pair (no two-qubit pairs exist on one qubit,
/// so the circuit part is empty).
struct ChoiSample {
  StateVector state;
  BrickworkCircuit circuit;
};
ChoiSample sample_choi(int n, int t, Rng& rng);

/// The three single-qubit states {|0>, |+>, |+i>} used by the LocalStab
/// ensemble.
const std::vector<StateVector>& local_stab_states();

/// Text serialization of brickwork circuits.  Numbers are written with 17
/// significant digits, so write/read round-trips are bit exact.
void write_circuit(std::ostream& os, const BrickworkCircuit& c);
BrickworkCircuit read_circuit(std::istream& is);
std::string circuit_to_string(const BrickworkCircuit& c);
BrickworkCircuit circuit_from_string(const std::string& text);

}  // namespace qvol
