#include "qvol/clifford.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace qvol {

long long CliffordCircuit::gate_count() const {
  long long total = 0;
  for (const auto& layer : layers) total += static_cast<long long>(layer.size());
  return total;
}

void CliffordCircuit::push_gate(const CliffordGate& g) {
  layers.push_back({g});
}

CliffordCircuit CliffordCircuit::transposed() const {
  CliffordCircuit out;
  out.num_qubits = num_qubits;
  out.layers.reserve(layers.size());
  for (auto lit = layers.rbegin(); lit != layers.rend(); ++lit)
    out.layers.emplace_back(lit->rbegin(), lit->rend());
  return out;
}

CliffordCircuit inverse_clifford(const CliffordCircuit& c) {
  CliffordCircuit out;
  out.num_qubits = c.num_qubits;
  out.layers.reserve(c.layers.size());
  for (auto lit = c.layers.rbegin(); lit != c.layers.rend(); ++lit) {
    std::vector<CliffordGate> layer;
    for (auto git = lit->rbegin(); git != lit->rend(); ++git) {
      if (git->kind == CliffordGate::Kind::S) {
        layer.push_back(*git);
        layer.push_back(*git);
        layer.push_back(*git);
      } else {
        layer.push_back(*git);
      }
    }
    out.layers.push_back(std::move(layer));
  }
  return out;
}

void apply_clifford(StateVector& state, const CliffordCircuit& c,
                    int qubit_offset) {
  static const GateMatrix kH = gates::h();
  static const GateMatrix kS = gates::s();
  static const GateMatrix kCX = gates::cnot();
  for (const auto& layer : c.layers)
    for (const auto& g : layer) {
      switch (g.kind) {
        case CliffordGate::Kind::H:
          state.apply_gate(kH, {qubit_offset + g.a});
          break;
        case CliffordGate::Kind::S:
          state.apply_gate(kS, {qubit_offset + g.a});
          break;
        case CliffordGate::Kind::CX:
          state.apply_gate(kCX, {qubit_offset + g.a, qubit_offset + g.b});
          break;
      }
    }
}

PauliString conjugate_pauli(const CliffordCircuit& c, const PauliString& p) {
  if (p.num_qubits() != c.num_qubits)
    throw std::invalid_argument("conjugate_pauli: size mismatch");
  PauliString out = p;
  for (const auto& layer : c.layers)
    for (const auto& g : layer) {
      switch (g.kind) {
        case CliffordGate::Kind::H:
          out.conjugate_h(g.a);
          break;
        case CliffordGate::Kind::S:
          out.conjugate_s(g.a);
          break;
        case CliffordGate::Kind::CX:
          out.conjugate_cnot(g.a, g.b);
          break;
      }
    }
  return out;
}

Eigen::MatrixXcd clifford_unitary(const CliffordCircuit& c) {
  const int n = c.num_qubits;
  if (n > 12) throw std::invalid_argument("clifford_unitary: register too wide");
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd u(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    std::vector<int> bits(n);
    for (int q = 0; q < n; ++q) bits[q] = (col >> (n - 1 - q)) & 1;
    StateVector s = StateVector::basis(n, bits);
    apply_clifford(s, c);
    for (std::size_t row = 0; row < dim; ++row) u(row, col) = s.amplitude(row);
  }
  return u;
}

CliffordTableau::CliffordTableau(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("CliffordTableau: n must be positive");
  xrow_.reserve(n);
  zrow_.reserve(n);
  std::vector<int> x(n, 0), z(n, 0);
  for (int q = 0; q < n; ++q) {
    x[q] = 1;
    xrow_.push_back(PauliString::from_xz(x, z));
    x[q] = 0;
    z[q] = 1;
    zrow_.push_back(PauliString::from_xz(x, z));
    z[q] = 0;
  }
}

void CliffordTableau::apply_h(int q) {
  for (auto& r : xrow_) r.conjugate_h(q);
  for (auto& r : zrow_) r.conjugate_h(q);
}

void CliffordTableau::apply_s(int q) {
  for (auto& r : xrow_) r.conjugate_s(q);
  for (auto& r : zrow_) r.conjugate_s(q);
}

void CliffordTableau::apply_cx(int control, int target) {
  for (auto& r : xrow_) r.conjugate_cnot(control, target);
  for (auto& r : zrow_) r.conjugate_cnot(control, target);
}

void CliffordTableau::apply_gate(const CliffordGate& g) {
  switch (g.kind) {
    case CliffordGate::Kind::H:
      apply_h(g.a);
      break;
    case CliffordGate::Kind::S:
      apply_s(g.a);
      break;
    case CliffordGate::Kind::CX:
      apply_cx(g.a, g.b);
      break;
  }
}

void CliffordTableau::apply_circuit(const CliffordCircuit& c) {
  if (c.num_qubits != n_)
    throw std::invalid_argument("CliffordTableau: circuit width mismatch");
  for (const auto& layer : c.layers)
    for (const auto& g : layer) apply_gate(g);
}

PauliString CliffordTableau::conjugate(const PauliString& p) const {
  if (p.num_qubits() != n_)
    throw std::invalid_argument("CliffordTableau: operand width mismatch");
  // P = i^ph prod_q X_q^{a_q} Z_q^{b_q}; the image substitutes each
  // generator's image factor by factor, so phases compose exactly.
  PauliString out(std::vector<std::uint8_t>(n_, 0),
                  std::vector<std::uint8_t>(n_, 0), p.phase_power());
  for (int q = 0; q < n_; ++q) {
    if (p.x_bits()[q]) out = out * xrow_[q];
    if (p.z_bits()[q]) out = out * zrow_[q];
  }
  return out;
}

bool CliffordTableau::is_identity() const {
  CliffordTableau id(n_);
  for (int q = 0; q < n_; ++q)
    if (!(xrow_[q] == id.xrow_[q]) || !(zrow_[q] == id.zrow_[q])) return false;
  return true;
}

bool CliffordTableau::is_symplectic() const {
  for (int i = 0; i < n_; ++i) {
    if (!xrow_[i].is_hermitian() || !zrow_[i].is_hermitian()) return false;
    if (xrow_[i].commutes(zrow_[i])) return false;
    for (int j = 0; j < n_; ++j) {
      if (!xrow_[i].commutes(xrow_[j]) || !zrow_[i].commutes(zrow_[j]))
        return false;
      if (j != i && !xrow_[i].commutes(zrow_[j])) return false;
    }
  }
  return true;
}

CliffordTableau tableau_from_circuit(const CliffordCircuit& c) {
  CliffordTableau t(c.num_qubits);
  t.apply_circuit(c);
  return t;
}

void apply_clifford(CliffordTableau& tableau, const CliffordCircuit& c) {
  tableau.apply_circuit(c);
}

namespace {

// Uniform nonidentity Hermitian Pauli supported on qubits [start, n); when
// `anticommute_with` is given, rejection-samples until it anticommutes.
PauliString sample_window_pauli(int n, int start, Rng& rng,
                                const PauliString* anticommute_with) {
  const int w = n - start;
  for (;;) {
    const std::uint64_t pat = rng.below((std::uint64_t{1} << (2 * w)) - 1) + 1;
    std::vector<std::uint8_t> x(n, 0), z(n, 0);
    int xz = 0;
    for (int i = 0; i < w; ++i) {
      x[start + i] = static_cast<std::uint8_t>((pat >> i) & 1);
      z[start + i] = static_cast<std::uint8_t>((pat >> (w + i)) & 1);
      xz += x[start + i] & z[start + i];
    }
    const int phase = (xz & 1) + 2 * static_cast<int>(rng.below(2));
    PauliString p(std::move(x), std::move(z), phase);
    if (!anticommute_with || !p.commutes(*anticommute_with)) return p;
  }
}

// Emits generator gates that conjugate (p1, p2) to (+X_start, +Z_start),
// mutating both operators along the way.
void reduce_pair(PauliString& p1, PauliString& p2, int start, int n,
                 std::vector<CliffordGate>& r) {
  auto do_h = [&](int q) {
    p1.conjugate_h(q);
    p2.conjugate_h(q);
    r.push_back({CliffordGate::Kind::H, q, -1});
  };
  auto do_s = [&](int q) {
    p1.conjugate_s(q);
    p2.conjugate_s(q);
    r.push_back({CliffordGate::Kind::S, q, -1});
  };
  auto do_cx = [&](int c, int t) {
    p1.conjugate_cnot(c, t);
    p2.conjugate_cnot(c, t);
    r.push_back({CliffordGate::Kind::CX, c, t});
  };

  // p1 -> pure X pattern on its support.
  for (int q = start; q < n; ++q) {
    if (p1.x_bits()[q] && p1.z_bits()[q])
      do_s(q);
    else if (!p1.x_bits()[q] && p1.z_bits()[q])
      do_h(q);
  }
  // Fan the X support into a single pivot.
  std::vector<int> support;
  for (int q = start; q < n; ++q)
    if (p1.x_bits()[q]) support.push_back(q);
  const int pivot = support[0];
  for (std::size_t j = 1; j < support.size(); ++j) do_cx(pivot, support[j]);
  if (pivot != start) {  // SWAP via three CNOTs
    do_cx(pivot, start);
    do_cx(start, pivot);
    do_cx(pivot, start);
  }
  // p1 = +-X_start; park it as +-Z_start while p2 is reduced.
  do_h(start);

  // p2 anticommutes with Z_start, so its X bit at start is set; the same
  // reduction with pivot fixed at start leaves Z_start untouched.
  for (int q = start; q < n; ++q) {
    if (p2.x_bits()[q] && p2.z_bits()[q])
      do_s(q);
    else if (!p2.x_bits()[q] && p2.z_bits()[q])
      do_h(q);
  }
  for (int q = start + 1; q < n; ++q)
    if (p2.x_bits()[q]) do_cx(start, q);

  // (p1, p2) = (+-Z_start, +-X_start); swap roles back.
  do_h(start);

  // Sign fixes: Z flips X_start only, X flips Z_start only.
  if (p1.phase_power() == 2) {
    do_s(start);
    do_s(start);
  }
  if (p2.phase_power() == 2) {
    do_h(start);
    do_s(start);
    do_s(start);
    do_h(start);
  }
}

}  // namespace

CliffordCircuit random_clifford(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("random_clifford: n must be positive");
  // Sweep: at window [start, n) draw the images (P1, P2) of (X_start,
  // Z_start) uniformly over anticommuting Hermitian pairs and record a
  // reduction R_start with R P1 R† = X_start, R P2 R† = Z_start.  The
  // sampled Clifford is R_0† R_1† ... R_{n-1}†.
  std::vector<std::vector<CliffordGate>> reductions;
  reductions.reserve(n);
  for (int start = 0; start < n; ++start) {
    PauliString p1 = sample_window_pauli(n, start, rng, nullptr);
    PauliString p2 = sample_window_pauli(n, start, rng, &p1);
    std::vector<CliffordGate> r;
    reduce_pair(p1, p2, start, n, r);
    reductions.push_back(std::move(r));
  }
  CliffordCircuit c;
  c.num_qubits = n;
  for (int i = n - 1; i >= 0; --i)
    for (auto git = reductions[i].rbegin(); git != reductions[i].rend(); ++git) {
      if (git->kind == CliffordGate::Kind::S) {
        c.push_gate(*git);  // S† = S^3
        c.push_gate(*git);
        c.push_gate(*git);
      } else {
        c.push_gate(*git);
      }
    }
  return c;
}

CliffordCircuit random_layered_clifford(int n, int t, Rng& rng) {
  if (n < 1 || t < 0)
    throw std::invalid_argument("random_layered_clifford: bad shape");
  CliffordCircuit c;
  c.num_qubits = n;
  c.layers.resize(t);
  for (auto& layer : c.layers) {
    int q = 0;
    while (q < n) {
      if (q + 1 < n && rng.below(3) == 0) {
        if (rng.below(2) == 0)
          layer.push_back({CliffordGate::Kind::CX, q, q + 1});
        else
          layer.push_back({CliffordGate::Kind::CX, q + 1, q});
        q += 2;
      } else {
        switch (rng.below(3)) {
          case 0:
            layer.push_back({CliffordGate::Kind::H, q, -1});
            break;
          case 1:
            layer.push_back({CliffordGate::Kind::S, q, -1});
            break;
          default:
            break;  // idle wire
        }
        q += 1;
      }
    }
  }
  return c;
}

StateVector clifford_choi(const CliffordCircuit& c) {
  StateVector st = prepare_epr(c.num_qubits);
  apply_clifford(st, c, c.num_qubits);
  return st;
}

void write_clifford(std::ostream& os, const CliffordCircuit& c) {
  os << "clifford 1\n";
  os << "qubits " << c.num_qubits << "\n";
  os << "layers " << c.layers.size() << "\n";
  for (const auto& layer : c.layers) {
    for (const auto& g : layer) {
      switch (g.kind) {
        case CliffordGate::Kind::H:
          os << "H " << g.a << "\n";
          break;
        case CliffordGate::Kind::S:
          os << "S " << g.a << "\n";
          break;
        case CliffordGate::Kind::CX:
          os << "CX " << g.a << " " << g.b << "\n";
          break;
      }
    }
    os << "---\n";
  }
}

CliffordCircuit read_clifford(std::istream& is) {
  auto fail = [](const std::string& msg) -> CliffordCircuit {
    throw std::runtime_error("read_clifford: " + msg);
  };
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line))
      if (!line.empty()) return true;
    return false;
  };
  if (!next_line() || line != "clifford 1") return fail("bad magic");
  int n = -1;
  std::size_t num_layers = 0;
  if (!next_line() || std::sscanf(line.c_str(), "qubits %d", &n) != 1 || n < 1)
    return fail("bad qubits line");
  if (!next_line() ||
      std::sscanf(line.c_str(), "layers %zu", &num_layers) != 1)
    return fail("bad layers line");
  CliffordCircuit c;
  c.num_qubits = n;
  c.layers.resize(num_layers);
  for (auto& layer : c.layers) {
    for (;;) {
      if (!next_line()) return fail("truncated layer");
      if (line == "---") break;
      std::istringstream ls(line);
      std::string op;
      ls >> op;
      CliffordGate g{CliffordGate::Kind::H, 0, -1};
      if (op == "H" || op == "S") {
        g.kind = op == "H" ? CliffordGate::Kind::H : CliffordGate::Kind::S;
        if (!(ls >> g.a) || g.a < 0 || g.a >= n) return fail("bad gate target");
      } else if (op == "CX") {
        g.kind = CliffordGate::Kind::CX;
        if (!(ls >> g.a >> g.b) || g.a < 0 || g.a >= n || g.b < 0 ||
            g.b >= n || g.a == g.b)
          return fail("bad CX pair");
      } else {
        return fail("unknown gate '" + op + "'");
      }
      layer.push_back(g);
    }
  }
  return c;
}

std::string clifford_to_string(const CliffordCircuit& c) {
  std::ostringstream os;
  write_clifford(os, c);
  return os.str();
}

CliffordCircuit clifford_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_clifford(is);
}

CliffordTeleportResult clifford_teleport(const CliffordCircuit& v,
                                         const StateVector& input, Rng& rng) {
  StateVector choi = clifford_choi(v);
  TeleportResult tr = teleport_gate(choi, input, rng);
  CliffordTeleportResult res;
  res.post = std::move(tr.post);
  res.correction = conjugate_pauli(v, tr.trace.pauli_error);
  res.trace = std::move(tr.trace);
  return res;
}

namespace {

// Contiguous layer split into k chunks; the first t%k chunks carry one
// extra layer, so every chunk depth is at most floor(t/k)+1.
std::vector<CliffordCircuit> split_chunks(const CliffordCircuit& c, int k) {
  const int t = c.depth();
  std::vector<CliffordCircuit> chunks;
  chunks.reserve(k);
  int pos = 0;
  for (int i = 1; i <= k; ++i) {
    const int s = t / k + (i <= t % k ? 1 : 0);
    CliffordCircuit ch;
    ch.num_qubits = c.num_qubits;
    ch.layers.assign(c.layers.begin() + pos, c.layers.begin() + pos + s);
    pos += s;
    chunks.push_back(std::move(ch));
  }
  return chunks;
}

// |I, second*first> built physically: first^T on the identity side, second
// on the circuit side of an EPR rail.
StateVector clifford_block_choi(const CliffordCircuit& first,
                                const CliffordCircuit& second) {
  StateVector st = prepare_epr(first.num_qubits);
  apply_clifford(st, first.transposed(), 0);
  apply_clifford(st, second, first.num_qubits);
  return st;
}

PauliString identity_pauli(int n) { return PauliString(n); }

}  // namespace

CliffordSpacetimeResult clifford_spacetime(const CliffordCircuit& c, int k,
                                           Rng& rng) {
  const int n = c.num_qubits;
  if (n < 1) throw std::invalid_argument("clifford_spacetime: empty register");
  if (k < 2) throw std::invalid_argument("clifford_spacetime: k must be >= 2");
  if (k % 2 != 0) return clifford_spacetime_apply(c, k, StateVector(n), rng);

  const int t = c.depth();
  auto chunks = split_chunks(c, k);

  CliffordSpacetimeResult res;
  res.trace.depth_used = depth_budget(t, k);
  res.trace.pauli_error = identity_pauli(n);
  res.trace.postselect_prob = 1.0;

  // Accumulator Choi |I, P * C_{2j}...C_1>; P tracked classically.
  StateVector acc = clifford_block_choi(chunks[0], chunks[1]);
  PauliString err = identity_pauli(n);
  for (int j = 1; j < k / 2; ++j) {
    StateVector next = clifford_block_choi(chunks[2 * j], chunks[2 * j + 1]);
    StateVector full = tensor(acc, next);
    // Measuring (acc circuit side, next identity side) composes the blocks:
    // the post state is |I, V Z^b X^a M> on (acc id side, next circuit side).
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(n);
    for (int i = 0; i < n; ++i) pairs.emplace_back(n + i, 2 * n + i);
    BellMeasurement bm = bell_measure(full, pairs, rng);
    acc = std::move(bm.post);
    res.trace.outcome.a.insert(res.trace.outcome.a.end(), bm.outcome.a.begin(),
                               bm.outcome.a.end());
    res.trace.outcome.b.insert(res.trace.outcome.b.end(), bm.outcome.b.begin(),
                               bm.outcome.b.end());
    res.trace.postselect_prob *= bm.probability;

    // The Bell projection sign folds into the inserted operator: the
    // accumulator is exactly |I, V X^a Z^b M>.
    PauliString q = PauliString::from_xz(bm.outcome.a, bm.outcome.b);
    err = q * err;
    err = conjugate_pauli(chunks[2 * j], err);
    err = conjugate_pauli(chunks[2 * j + 1], err);
  }

  // Computational readout of the identity side leaves P * C * X^j |0^n>.
  std::vector<int> id_side(static_cast<std::size_t>(n));
  std::iota(id_side.begin(), id_side.end(), 0);
  MeasurementResult mr = measure_computational(acc, id_side, rng);
  for (int i = 0; i < n; ++i) {
    res.trace.outcome.a.push_back(mr.outcome[i]);
    res.trace.outcome.b.push_back(0);
  }
  res.trace.postselect_prob *= mr.probability;

  std::vector<int> zeros(static_cast<std::size_t>(n), 0);
  PauliString pushed = conjugate_pauli(c, PauliString::from_xz(mr.outcome, zeros));
  res.correction = err * pushed;
  res.trace.pauli_error = res.correction;
  res.output = std::move(mr.post);
  return res;
}

CliffordSpacetimeResult clifford_spacetime_apply(const CliffordCircuit& c,
                                                 int k,
                                                 const StateVector& input,
                                                 Rng& rng) {
  const int n = c.num_qubits;
  if (n < 1) throw std::invalid_argument("clifford_spacetime: empty register");
  if (input.num_qubits() != n)
    throw std::invalid_argument("clifford_spacetime: input width mismatch");
  if (k < 3 || k % 2 == 0)
    throw std::invalid_argument(
        "clifford_spacetime: arbitrary inputs require odd k >= 3");

  const int t = c.depth();
  auto chunks = split_chunks(c, k);

  CliffordSpacetimeResult res;
  res.trace.depth_used = depth_budget(t, k);
  res.trace.pauli_error = identity_pauli(n);
  res.trace.postselect_prob = 1.0;

  // First chunk runs physically on the input register.
  StateVector e = input;
  apply_clifford(e, chunks[0]);

  // Remaining k-1 chunks pair into blocks, merged as in the even case.
  StateVector acc = clifford_block_choi(chunks[1], chunks[2]);
  PauliString err = identity_pauli(n);
  for (int j = 1; j < (k - 1) / 2; ++j) {
    StateVector next =
        clifford_block_choi(chunks[1 + 2 * j], chunks[2 + 2 * j]);
    StateVector full = tensor(acc, next);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(n);
    for (int i = 0; i < n; ++i) pairs.emplace_back(n + i, 2 * n + i);
    BellMeasurement bm = bell_measure(full, pairs, rng);
    acc = std::move(bm.post);
    res.trace.outcome.a.insert(res.trace.outcome.a.end(), bm.outcome.a.begin(),
                               bm.outcome.a.end());
    res.trace.outcome.b.insert(res.trace.outcome.b.end(), bm.outcome.b.begin(),
                               bm.outcome.b.end());
    res.trace.postselect_prob *= bm.probability;

    // As in the even case, the projection sign folds into the operator.
    PauliString q = PauliString::from_xz(bm.outcome.a, bm.outcome.b);
    err = q * err;
    err = conjugate_pauli(chunks[1 + 2 * j], err);
    err = conjugate_pauli(chunks[2 + 2 * j], err);
  }

  // Teleport the physical register through the accumulated Choi:
  // post = P * (C_k...C_2) Z^b X^a C_1 |input>, phase-exact.
  TeleportResult tr = teleport_gate(acc, e, rng);
  res.trace.outcome.a.insert(res.trace.outcome.a.end(),
                             tr.trace.outcome.a.begin(),
                             tr.trace.outcome.a.end());
  res.trace.outcome.b.insert(res.trace.outcome.b.end(),
                             tr.trace.outcome.b.begin(),
                             tr.trace.outcome.b.end());
  res.trace.postselect_prob *= tr.trace.postselect_prob;

  PauliString q = tr.trace.pauli_error;  // Z^b X^a, phase-exact
  for (int j = 1; j < k; ++j) q = conjugate_pauli(chunks[j], q);
  res.correction = err * q;
  res.trace.pauli_error = res.correction;
  res.output = std::move(tr.post);
  return res;
}

namespace {

std::string stabilizer_key(StateVector& s) {
  // Phase-normalize in place: first significant amplitude becomes positive
  // real.  Amplitude magnitudes of stabilizer states are bounded below by
  // 2^{-n/2}, so the threshold is safe.
  cplx phase(1, 0);
  for (const cplx& a : s.amplitudes())
    if (std::abs(a) > 1e-6) {
      phase = std::conj(a) / std::abs(a);
      break;
    }
  std::string key;
  key.reserve(s.dim() * 24);
  char buf[32];
  for (cplx& a : s.amplitudes()) {
    a *= phase;
    const long long re = llround(a.real() * 1e9);
    const long long im = llround(a.imag() * 1e9);
    std::snprintf(buf, sizeof buf, "%lld,%lld;", re, im);
    key += buf;
  }
  return key;
}

}  // namespace

const std::vector<StateVector>& enumerate_stabilizer_states(int n) {
  if (n < 1 || n > 4)
    throw std::invalid_argument(
        "enumerate_stabilizer_states: supported for 1 <= n <= 4");
  static std::mutex mu;
  static std::map<int, std::vector<StateVector>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Orbit of |0^n> under {H_q, S_q, CX(a,b)} = all stabilizer states.
  static const GateMatrix kH = gates::h();
  static const GateMatrix kS = gates::s();
  static const GateMatrix kCX = gates::cnot();
  std::map<std::string, StateVector> seen;
  std::vector<const StateVector*> frontier;

  StateVector root(n);
  std::string root_key = stabilizer_key(root);
  auto root_it = seen.emplace(std::move(root_key), std::move(root)).first;
  frontier.push_back(&root_it->second);

  while (!frontier.empty()) {
    std::vector<const StateVector*> next;
    for (const StateVector* cur : frontier) {
      auto visit = [&](StateVector&& cand) {
        std::string key = stabilizer_key(cand);
        auto [vit, fresh] = seen.emplace(std::move(key), std::move(cand));
        if (fresh) next.push_back(&vit->second);
      };
      for (int q = 0; q < n; ++q) {
        StateVector a = *cur;
        a.apply_gate(kH, {q});
        visit(std::move(a));
        StateVector b = *cur;
        b.apply_gate(kS, {q});
        visit(std::move(b));
      }
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          if (p == q) continue;
          StateVector a = *cur;
          a.apply_gate(kCX, {p, q});
          visit(std::move(a));
        }
    }
    frontier = std::move(next);
  }

  std::vector<StateVector> states;
  states.reserve(seen.size());
  for (auto& [key, st] : seen) states.push_back(std::move(st));
  return cache.emplace(n, std::move(states)).first->second;
}

StateVector random_stabilizer_state(int n, Rng& rng) {
  const auto& all = enumerate_stabilizer_states(n);
  return all[static_cast<std::size_t>(rng.below(all.size()))];
}

}  // namespace qvol
