#include "qvol/teleport.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace qvol {
namespace {

std::vector<std::uint8_t> to_u8(const std::vector<int>& bits) {
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    out[i] = static_cast<std::uint8_t>(bits[i] & 1);
  return out;
}

void extend(BellOutcome& acc, const BellOutcome& more) {
  acc.a.insert(acc.a.end(), more.a.begin(), more.a.end());
  acc.b.insert(acc.b.end(), more.b.begin(), more.b.end());
}

}  // namespace

BellMeasurement bell_measure(const StateVector& state,
                             const std::vector<std::pair<int, int>>& pairs,
                             Rng& rng) {
  const int m = state.num_qubits();
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  for (const auto& [p, q] : pairs) {
    if (p < 0 || p >= m || q < 0 || q >= m || p == q)
      throw std::invalid_argument("bell_measure: pair out of range");
    if (used[p] || used[q])
      throw std::invalid_argument("bell_measure: pairs must be disjoint");
    used[p] = used[q] = 1;
  }

  // Rotate each pair's Bell basis onto the computational basis:
  // CNOT(p->q) then H(p) maps |phi_ab> on (p,q) to |b>_p |a>_q.
  StateVector rotated = state;
  const GateMatrix cx = gates::cnot();
  const GateMatrix had = gates::h();
  std::vector<int> qubits;
  qubits.reserve(2 * pairs.size());
  for (const auto& [p, q] : pairs) {
    rotated.apply_gate(cx, {p, q});
    rotated.apply_gate(had, {p});
    qubits.push_back(p);
    qubits.push_back(q);
  }

  MeasurementResult mr = measure_computational(rotated, qubits, rng);
  BellMeasurement out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.outcome.b.push_back(mr.outcome[2 * i]);      // bit read from p
    out.outcome.a.push_back(mr.outcome[2 * i + 1]);  // bit read from q
  }
  out.post = std::move(mr.post);
  out.probability = mr.probability;
  return out;
}

LayeredProgram LayeredProgram::from_circuit(const BrickworkCircuit& c) {
  LayeredProgram p;
  p.num_qubits = c.num_qubits;
  for (const auto& layer : c.layers) p.append_layer(layer);
  return p;
}

void LayeredProgram::append_layer(const BrickLayer& layer) {
  Op op;
  op.is_layer = true;
  op.layer = layer;
  ops.push_back(std::move(op));
}

void LayeredProgram::append_frame(std::vector<std::uint8_t> fx,
                                  std::vector<std::uint8_t> fz) {
  if (static_cast<int>(fx.size()) != num_qubits ||
      static_cast<int>(fz.size()) != num_qubits)
    throw std::invalid_argument("frame width mismatch");
  Op op;
  op.is_layer = false;
  op.fx = std::move(fx);
  op.fz = std::move(fz);
  ops.push_back(std::move(op));
}

void LayeredProgram::prepend_frame(std::vector<std::uint8_t> fx,
                                   std::vector<std::uint8_t> fz) {
  if (static_cast<int>(fx.size()) != num_qubits ||
      static_cast<int>(fz.size()) != num_qubits)
    throw std::invalid_argument("frame width mismatch");
  Op op;
  op.is_layer = false;
  op.fx = std::move(fx);
  op.fz = std::move(fz);
  ops.insert(ops.begin(), std::move(op));
}

void LayeredProgram::append_program(const LayeredProgram& other) {
  if (other.num_qubits != num_qubits)
    throw std::invalid_argument("program width mismatch");
  ops.insert(ops.end(), other.ops.begin(), other.ops.end());
}

LayeredProgram LayeredProgram::transposed() const {
  LayeredProgram out;
  out.num_qubits = num_qubits;
  out.ops.reserve(ops.size());
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    Op op = *it;
    if (op.is_layer)
      for (auto& g : op.layer.gates) g.mat.transposeInPlace();
    // (X^a Z^b)^T = (-1)^(a.b) X^a Z^b: frames transpose to themselves up to
    // a global sign, which is dropped.
    out.ops.push_back(std::move(op));
  }
  return out;
}

void LayeredProgram::apply(StateVector& state) const {
  if (state.num_qubits() != num_qubits)
    throw std::invalid_argument("program/state width mismatch");
  for (const auto& op : ops) {
    if (op.is_layer) {
      for (const auto& g : op.layer.gates)
        state.apply_gate(GateMatrix(2, g.mat),
                         {g.left_qubit, g.left_qubit + 1});
    } else {
      PauliString(op.fx, op.fz, 0).apply(state);
    }
  }
}

std::vector<int> LayeredProgram::fused_offsets() const {
  std::vector<int> out;
  for (const auto& op : ops) {
    if (!op.is_layer) continue;
    if (out.empty() || out.back() != op.layer.offset)
      out.push_back(op.layer.offset);
  }
  return out;
}

int LayeredProgram::effective_depth() const {
  return static_cast<int>(fused_offsets().size());
}

ChoiProgram make_choi_program(const ChoiSample& sample) {
  ChoiProgram cp;
  cp.state = sample.state;
  cp.program = LayeredProgram::from_circuit(sample.circuit);
  return cp;
}

TeleportResult teleport_gate(const StateVector& choi, const StateVector& input,
                             Rng& rng) {
  if (choi.num_qubits() == 0 || choi.num_qubits() % 2 != 0)
    throw std::invalid_argument("teleport_gate: choi register must hold 2n qubits");
  const int n = choi.num_qubits() / 2;
  if (input.num_qubits() < n)
    throw std::invalid_argument("teleport_gate: input narrower than the gate");

  StateVector full = tensor(choi, input);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n);
  for (int i = 0; i < n; ++i) pairs.emplace_back(i, 2 * n + i);
  BellMeasurement bm = bell_measure(full, pairs, rng);

  TeleportResult res;
  res.post = std::move(bm.post);
  res.trace.outcome = bm.outcome;
  // The byproduct actually applied is Z^b X^a (the Bell projection carries a
  // (-1)^(a.b) sign relative to the X^a Z^b frame), so store it phase-exact.
  const std::vector<int> zeros(bm.outcome.a.size(), 0);
  res.trace.pauli_error = PauliString::from_xz(zeros, bm.outcome.b) *
                          PauliString::from_xz(bm.outcome.a, zeros);
  res.trace.depth_used = 2;  // Bell rotation: one CNOT layer, one H layer
  res.trace.postselect_prob = bm.probability;
  return res;
}

MergeResult merge_choi(const ChoiProgram& left, const ChoiProgram& right,
                       Rng& rng) {
  const int n = left.program.num_qubits;
  if (n <= 0 || left.state.num_qubits() != 2 * n ||
      right.state.num_qubits() != 2 * n || right.program.num_qubits != n)
    throw std::invalid_argument("merge_choi: register width mismatch");

  // Bell-measuring the two identity sides leaves |I, V X^a Z^b U^T> with
  // the left circuit side as the new identity side.
  StateVector full = tensor(left.state, right.state);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n);
  for (int i = 0; i < n; ++i) pairs.emplace_back(i, 2 * n + i);
  BellMeasurement bm = bell_measure(full, pairs, rng);

  MergeResult res;
  res.merged.state = std::move(bm.post);
  res.merged.program = left.program.transposed();
  res.merged.program.append_frame(to_u8(bm.outcome.a), to_u8(bm.outcome.b));
  res.merged.program.append_program(right.program);
  res.outcome = bm.outcome;
  res.probability = bm.probability;
  return res;
}

int depth_budget(int t, int k) {
  if (k < 2) throw std::invalid_argument("depth_budget: k must be at least 2");
  if (t < 0) throw std::invalid_argument("depth_budget: negative target depth");
  return t / k + 4;
}

namespace {

// EPR pairs with independent circuits applied to the two sides:
// (U1 x U2)|EPR> = |I, U2 U1^T>, recorded as transpose(U1) then U2.
ChoiProgram sample_block(int n, int d2, Rng& rng) {
  BrickworkCircuit u1 = build_brickwork(n, d2, rng);
  BrickworkCircuit u2 = build_brickwork(n, d2, rng);
  ChoiProgram block;
  block.state = prepare_epr(n);
  u1.apply(block.state, 0);
  u2.apply(block.state, n);
  block.program = LayeredProgram::from_circuit(u1).transposed();
  block.program.append_program(LayeredProgram::from_circuit(u2));
  return block;
}

ChoiProgram merge_blocks(int n, int d2, int num_blocks, TeleportTrace& trace,
                         Rng& rng) {
  ChoiProgram acc = sample_block(n, d2, rng);
  for (int j = 1; j < num_blocks; ++j) {
    ChoiProgram next = sample_block(n, d2, rng);
    MergeResult mr = merge_choi(acc, next, rng);
    acc = std::move(mr.merged);
    extend(trace.outcome, mr.outcome);
    trace.postselect_prob *= mr.probability;
  }
  return acc;
}

// Odd-k tail: one extra register carries a depth-(d2+1) circuit applied to
// `front` and is teleported through the merged Choi.
SpacetimeResult convert_odd(int n, int k, int t, int d2,
                            const StateVector& front, Rng& rng) {
  SpacetimeResult res;
  res.trace.pauli_error = PauliString(n);
  res.trace.depth_used = depth_budget(t, k);

  ChoiProgram acc = merge_blocks(n, d2, (k - 1) / 2, res.trace, rng);

  BrickworkCircuit s_circ = build_brickwork(n, d2 + 1, rng);
  StateVector extra = front;
  s_circ.apply(extra);
  TeleportResult tr = teleport_gate(acc.state, extra, rng);
  extend(res.trace.outcome, tr.trace.outcome);
  res.trace.postselect_prob *= tr.trace.postselect_prob;

  res.output = std::move(tr.post);
  res.program = LayeredProgram::from_circuit(s_circ);
  res.program.append_frame(to_u8(tr.trace.outcome.a), to_u8(tr.trace.outcome.b));
  res.program.append_program(acc.program);
  res.effective_t = res.program.effective_depth();
  if (res.effective_t < t)
    throw std::logic_error("conversion fell short of the target depth");
  return res;
}

}  // namespace

SpacetimeResult spacetime_convert_state(int n, int k, int t, Rng& rng) {
  if (n < 2) throw std::invalid_argument("spacetime_convert_state: n >= 2");
  if (k < 2) throw std::invalid_argument("spacetime_convert_state: k >= 2");
  if (t < 1) throw std::invalid_argument("spacetime_convert_state: t >= 1");
  const int d2 = t / k + 2;

  if (k % 2 != 0) return convert_odd(n, k, t, d2, StateVector(n), rng);

  SpacetimeResult res;
  res.trace.pauli_error = PauliString(n);
  res.trace.depth_used = depth_budget(t, k);

  ChoiProgram acc = merge_blocks(n, d2, k / 2, res.trace, rng);

  // Reading out the identity side in the computational basis leaves W|j>
  // on the circuit side, i.e. W X^j applied to |0^n>.
  std::vector<int> id_side(static_cast<std::size_t>(n));
  std::iota(id_side.begin(), id_side.end(), 0);
  MeasurementResult mr = measure_computational(acc.state, id_side, rng);
  for (int i = 0; i < n; ++i) {
    res.trace.outcome.a.push_back(mr.outcome[i]);
    res.trace.outcome.b.push_back(0);
  }
  res.trace.postselect_prob *= mr.probability;

  res.output = std::move(mr.post);
  res.program = std::move(acc.program);
  res.program.prepend_frame(to_u8(mr.outcome),
                            std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
  res.effective_t = res.program.effective_depth();
  if (res.effective_t < t)
    throw std::logic_error("conversion fell short of the target depth");
  return res;
}

SpacetimeResult spacetime_convert_apply(const StateVector& input, int k, int t,
                                        Rng& rng) {
  const int n = input.num_qubits();
  if (n < 2)
    throw std::invalid_argument("spacetime_convert_apply: input needs >= 2 qubits");
  if (k < 3 || k % 2 == 0)
    throw std::invalid_argument("spacetime_convert_apply: k must be odd and >= 3");
  if (t < 1) throw std::invalid_argument("spacetime_convert_apply: t >= 1");
  if (std::abs(input.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("spacetime_convert_apply: input must be normalized");
  const int d2 = t / k + 2;
  return convert_odd(n, k, t, d2, input, rng);
}

}  // namespace qvol
