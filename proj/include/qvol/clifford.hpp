#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qvol/pauli.hpp"
#include "qvol/rng.hpp"
#include "qvol/statevector.hpp"
#include "qvol/teleport.hpp"

namespace qvol {

/// Generator-set gate: H q, S q, or CX control target.
struct CliffordGate {
  enum class Kind { H, S, CX };
  Kind kind;
  int a = 0;   // target (H, S) or control (CX)
  int b = -1;  // target (CX only)
};

/// Layered circuit over {H, S, CX}.  depth() counts layers; gates within a
/// layer are applied in list order, so overlapping placements stay well
/// defined (canonical circuits keep layers disjoint).
struct CliffordCircuit {
  int num_qubits = 0;
  std::vector<std::vector<CliffordGate>> layers;

  int depth() const { return static_cast<int>(layers.size()); }
  long long gate_count() const;

  /// Appends a single gate as its own layer.
  void push_gate(const CliffordGate& g);

  /// Matrix transpose: reversed gate order (H, S, CX are all symmetric).
  CliffordCircuit transposed() const;
};

/// Matrix inverse: reversed gate order with S replaced by S,S,S.
CliffordCircuit inverse_clifford(const CliffordCircuit& c);

/// Applies the circuit to a dense state, shifted by `qubit_offset`.
void apply_clifford(StateVector& state, const CliffordCircuit& c,
                    int qubit_offset = 0);

/// Heisenberg conjugation C P C-dagger with exact phase, gate by gate.
PauliString conjugate_pauli(const CliffordCircuit& c, const PauliString& p);

/// Dense unitary of the circuit (intended for small n oracle checks).
Eigen::MatrixXcd clifford_unitary(const CliffordCircuit& c);

/// Clifford map stored as the Pauli images of the generators X_q and Z_q.
/// Rows carry exact phases; the binary parts form the symplectic tableau.
class CliffordTableau {
 public:
  explicit CliffordTableau(int n);  // identity map

  int num_qubits() const { return n_; }
  const PauliString& x_image(int q) const { return xrow_[q]; }
  const PauliString& z_image(int q) const { return zrow_[q]; }

  /// Composes a gate after the current map (rows are conjugated by it).
  void apply_h(int q);
  void apply_s(int q);
  void apply_cx(int control, int target);
  void apply_gate(const CliffordGate& g);
  void apply_circuit(const CliffordCircuit& c);

  /// C P C-dagger assembled from the generator images, phase-exact.
  PauliString conjugate(const PauliString& p) const;

  bool is_identity() const;

  /// Rows are Hermitian and preserve the commutation relations.
  bool is_symplectic() const;

 private:
  int n_;
  std::vector<PauliString> xrow_, zrow_;
};

CliffordTableau tableau_from_circuit(const CliffordCircuit& c);
void apply_clifford(CliffordTableau& tableau, const CliffordCircuit& c);

/// Uniformly random Clifford group element as a generator-gate circuit
/// (sweep construction; exact uniformity).
CliffordCircuit random_clifford(int n, Rng& rng);

/// Random circuit with t declared layers of disjoint H/S/CX placements.
CliffordCircuit random_layered_clifford(int n, int t, Rng& rng);

/// Choi state |I, C> on 2n qubits (identity side first).
StateVector clifford_choi(const CliffordCircuit& c);

/// Text serialization:
///   clifford 1
///   qubits <n>
///   layers <L>
///   <gate lines: "H q" | "S q" | "CX a b">, each layer closed by "---"
void write_clifford(std::ostream& os, const CliffordCircuit& c);
CliffordCircuit read_clifford(std::istream& is);
std::string clifford_to_string(const CliffordCircuit& c);
CliffordCircuit clifford_from_string(const std::string& text);

/// Gate teleportation of a Clifford V with a classically computed byproduct:
/// post = (correction · V)|input>, exactly; applying correction.adjoint()
/// to post recovers V|input> including global phase.
struct CliffordTeleportResult {
  StateVector post{0};
  PauliString correction{0};  // V (Z^b X^a) V-dagger, phase-exact
  TeleportTrace trace;
};
CliffordTeleportResult clifford_teleport(const CliffordCircuit& v,
                                         const StateVector& input, Rng& rng);

/// Depth-converted execution of a Clifford circuit.  The output equals
/// correction * (C |input>) exactly; applying correction.adjoint() recovers
/// the target state including global phase.  trace.depth_used is the
/// protocol budget floor(t/k) + 4.
struct CliffordSpacetimeResult {
  StateVector output{0};
  PauliString correction{0};
  TeleportTrace trace;
};

/// Prepares C|0^n> within the depth budget; any k >= 2.
CliffordSpacetimeResult clifford_spacetime(const CliffordCircuit& c, int k,
                                           Rng& rng);

/// Applies C to an arbitrary input state; requires odd k >= 3.
CliffordSpacetimeResult clifford_spacetime_apply(const CliffordCircuit& c,
                                                 int k,
                                                 const StateVector& input,
                                                 Rng& rng);

/// All stabilizer states on n qubits (n <= 4), phase-normalized and in a
/// deterministic canonical order.  Counts: 6, 60, 1080, 36720.
const std::vector<StateVector>& enumerate_stabilizer_states(int n);

/// Uniform draw from the canonical enumeration.
StateVector random_stabilizer_state(int n, Rng& rng);

}  // namespace qvol
