#pragma once

#include <utility>
#include <vector>

#include "qvol/ensembles.hpp"
#include "qvol/pauli.hpp"
#include "qvol/rng.hpp"
#include "qvol/statevector.hpp"

namespace qvol {

/// Per-pair Bell outcome exponents: pair i was projected onto
/// (X^a_i Z^b_i ⊗ I) |00+11>/sqrt(2).
struct BellOutcome {
  std::vector<int> a, b;
};

/// Bookkeeping attached to teleportation-style operations.
struct TeleportTrace {
  BellOutcome outcome;  ///< all measurement bits, in protocol order
  PauliString pauli_error{0};  ///< byproduct Z^b X^a actually applied by a
                            ///< single teleport step, phase-exact; identity
                            ///< for conversions, whose byproducts are
                            ///< recorded as program frames instead
  int depth_used = 0;          ///< circuit-depth budget charged to the protocol
  double postselect_prob = 1;  ///< probability of the sampled measurement branch
};

/// Result of Bell-measuring a set of disjoint qubit pairs.  The post state
/// is normalized and lives on the unmeasured qubits (original order).
struct BellMeasurement {
  BellOutcome outcome;
  StateVector post{0};
  double probability = 0;
};

/// Projects each listed pair onto the Bell basis and samples the outcome.
/// Input must be normalized; pairs must be disjoint.
BellMeasurement bell_measure(const StateVector& state,
                             const std::vector<std::pair<int, int>>& pairs,
                             Rng& rng);

/// Recorded effective circuit: brickwork layers interleaved with Pauli
/// frames (X^a Z^b up to global sign).  Frames carry no depth: a frame is
/// always absorbable into an adjacent random layer.  Two adjacent layers
/// with equal offset merge into one layer of that offset, which is how
/// circuit transposition at a merge junction saves one unit of depth.
struct LayeredProgram {
  struct Op {
    bool is_layer;
    BrickLayer layer;                // when is_layer
    std::vector<std::uint8_t> fx, fz;  // frame bits otherwise
  };

  int num_qubits = 0;
  std::vector<Op> ops;  // application order

  static LayeredProgram from_circuit(const BrickworkCircuit& c);

  void append_layer(const BrickLayer& layer);
  void append_frame(std::vector<std::uint8_t> fx, std::vector<std::uint8_t> fz);
  void prepend_frame(std::vector<std::uint8_t> fx, std::vector<std::uint8_t> fz);
  void append_program(const LayeredProgram& other);

  /// Matrix transpose of the whole program (reverse order, gates transposed;
  /// frame signs are global phases and are dropped).
  LayeredProgram transposed() const;

  /// Applies the program to a state on the same register width.
  void apply(StateVector& state) const;

  /// Brickwork depth after fusing adjacent equal-offset layers; frames are
  /// transparent.
  int effective_depth() const;

  /// Layer offsets after fusion (strictly alternating for a well-formed
  /// merged brickwork).
  std::vector<int> fused_offsets() const;
};

/// Choi state together with the recorded program of its circuit side.
struct ChoiProgram {
  StateVector state{0};    // 2n qubits; identity side first
  LayeredProgram program;  // effective circuit applied on the second side
};

ChoiProgram make_choi_program(const ChoiSample& sample);

/// Teleports the Choi's gate onto the input: Bell-measures the Choi's
/// identity side against the first n qubits of `input`.  The post state is
/// exactly (U pauli_error (x) I) |input>, with the teleported content on the
/// Choi's circuit-side register followed by the untouched remainder of
/// `input` and pauli_error = Z^b X^a from the trace.
struct TeleportResult {
  StateVector post{0};
  TeleportTrace trace;
};
TeleportResult teleport_gate(const StateVector& choi, const StateVector& input,
                             Rng& rng);

/// Merges two Choi states by Bell-measuring the two identity sides:
/// |I,U> * |I,V> -> |I, V X^a Z^b U^T>, exactly.  The merged program is
/// transpose(left) + frame + right, one depth unit shorter than the sum
/// whenever the junction offsets coincide.
struct MergeResult {
  ChoiProgram merged;
  BellOutcome outcome;
  double probability;
};
MergeResult merge_choi(const ChoiProgram& left, const ChoiProgram& right,
                       Rng& rng);

/// Circuit-depth budget of the k-register conversion: floor(t/k) + 4.
int depth_budget(int t, int k);

/// Output of a spacetime conversion run.
struct SpacetimeResult {
  StateVector output{0};   ///< n qubits, normalized
  LayeredProgram program;  ///< applying it to |0^n> (or the input state)
                           ///< reproduces `output` up to global phase
  int effective_t = 0;     ///< brickwork depth of `program`
  TeleportTrace trace;
};

/// Samples a state distributed as a depth-effective_t brickwork state on n
/// qubits while spending only depth_budget(t, k) layers of circuit depth on
/// k*n qubits; effective_t >= t.  Requires n >= 2, k >= 2, t >= 1.
SpacetimeResult spacetime_convert_state(int n, int k, int t, Rng& rng);

/// Applies a random depth >= t brickwork unitary to `input` (n >= 2 qubits)
/// within the same depth budget.  Requires odd k >= 3.
SpacetimeResult spacetime_convert_apply(const StateVector& input, int k, int t,
                                        Rng& rng);

}  // namespace qvol
