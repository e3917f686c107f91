#include "qvol/ensembles.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qvol {

long long BrickworkCircuit::gate_count() const {
  long long n = 0;
  for (const auto& layer : layers) n += static_cast<long long>(layer.gates.size());
  return n;
}

void BrickworkCircuit::apply(StateVector& state, int qubit_offset) const {
  for (const auto& layer : layers) {
    for (const auto& g : layer.gates) {
      GateMatrix gm(2, g.mat);
      state.apply_gate(gm, {qubit_offset + g.left_qubit,
                            qubit_offset + g.left_qubit + 1});
    }
  }
}

BrickworkCircuit BrickworkCircuit::transposed() const {
  BrickworkCircuit out;
  out.num_qubits = num_qubits;
  out.layers.reserve(layers.size());
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    BrickLayer layer;
    layer.offset = it->offset;
    for (const auto& g : it->gates)
      layer.gates.push_back({g.left_qubit, g.mat.transpose()});
    out.layers.push_back(std::move(layer));
  }
  return out;
}

Eigen::MatrixXcd circuit_unitary(const BrickworkCircuit& c) {
  const std::size_t d = std::size_t(1) << c.num_qubits;
  Eigen::MatrixXcd u(d, d);
  for (std::size_t col = 0; col < d; ++col) {
    std::vector<cplx> amps(d, cplx(0, 0));
    amps[col] = cplx(1, 0);
    StateVector s(c.num_qubits, std::move(amps));
    c.apply(s);
    for (std::size_t row = 0; row < d; ++row) u(row, col) = s.amplitude(row);
  }
  return u;
}

Eigen::Matrix4cd haar_unitary4(Rng& rng) {
  Eigen::Matrix4cd g;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) g(r, c) = cplx(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(g);
  Eigen::Matrix4cd q = qr.householderQ();
  Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < 4; ++c) {
    cplx diag = r(c, c);
    cplx ph = diag == cplx(0, 0) ? cplx(1, 0) : diag / std::abs(diag);
    q.col(c) *= ph;
  }
  return q;
}

BrickworkCircuit build_brickwork(int m, int d, Rng& rng) {
  if (m < 2)
    throw std::invalid_argument("build_brickwork: need at least two qubits");
  if (d < 0) throw std::invalid_argument("build_brickwork: negative depth");
  BrickworkCircuit c;
  c.num_qubits = m;
  for (int layer = 0; layer < d; ++layer) {
    BrickLayer bl;
    bl.offset = layer % 2;
    for (int j = bl.offset; j + 1 < m; j += 2)
      bl.gates.push_back({j, haar_unitary4(rng)});
    c.layers.push_back(std::move(bl));
  }
  return c;
}

StateVector prepare_epr(int n) {
  if (n < 1) throw std::invalid_argument("prepare_epr: need at least one pair");
  const int m = 2 * n;
  std::vector<cplx> amps(std::size_t(1) << m, cplx(0, 0));
  const double w = std::pow(2.0, -0.5 * n);
  const std::size_t dn = std::size_t(1) << n;
  for (std::size_t j = 0; j < dn; ++j) amps[j * dn + j] = cplx(w, 0);
  return StateVector(m, std::move(amps));
}

EnsembleSpec EnsembleSpec::brickwork_states(int m, int d) {
  if (m < 2) throw std::invalid_argument("brickwork_states: m < 2");
  if (d < 0) throw std::invalid_argument("brickwork_states: negative depth");
  return EnsembleSpec{Kind::BrickworkStates, m, d};
}

EnsembleSpec EnsembleSpec::brickwork_choi(int n, int t) {
  if (n < 1) throw std::invalid_argument("brickwork_choi: n < 1");
  if (t < 0) throw std::invalid_argument("brickwork_choi: negative depth");
  return EnsembleSpec{Kind::BrickworkChoi, n, t};
}

EnsembleSpec EnsembleSpec::haar_states(int n) {
  if (n < 1) throw std::invalid_argument("haar_states: n < 1");
  return EnsembleSpec{Kind::HaarStates, n, 0};
}

EnsembleSpec EnsembleSpec::local_stab(int n) {
  if (n < 1) throw std::invalid_argument("local_stab: n < 1");
  return EnsembleSpec{Kind::LocalStab, n, 0};
}

int EnsembleSpec::state_qubits() const {
  return kind == Kind::BrickworkChoi ? 2 * m : m;
}

std::string EnsembleSpec::str() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::BrickworkStates:
      os << "brickwork-states(m=" << m << ",d=" << d << ")";
      break;
    case Kind::BrickworkChoi:
      os << "brickwork-choi(n=" << m << ",t=" << d << ")";
      break;
    case Kind::HaarStates:
      os << "haar-states(n=" << m << ")";
      break;
    case Kind::LocalStab:
      os << "local-stab(n=" << m << ")";
      break;
  }
  return os.str();
}

const std::vector<StateVector>& local_stab_states() {
  static const std::vector<StateVector> states = [] {
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<StateVector> v;
    v.push_back(StateVector(1, {cplx(1, 0), cplx(0, 0)}));   // |0>
    v.push_back(StateVector(1, {cplx(r, 0), cplx(r, 0)}));   // |+>
    v.push_back(StateVector(1, {cplx(r, 0), cplx(0, r)}));   // |+i>
    return v;
  }();
  return states;
}

StateVector sample_state(const EnsembleSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case EnsembleSpec::Kind::BrickworkStates: {
      StateVector s(spec.m);
      BrickworkCircuit c = build_brickwork(spec.m, spec.d, rng);
      c.apply(s);
      return s;
    }
    case EnsembleSpec::Kind::BrickworkChoi:
      return sample_choi(spec.m, spec.d, rng).state;
    case EnsembleSpec::Kind::HaarStates: {
      std::vector<cplx> amps(std::size_t(1) << spec.m);
      for (auto& a : amps) a = cplx(rng.normal(), rng.normal());
      StateVector s(spec.m, std::move(amps));
      s.normalize();
      return s;
    }
    case EnsembleSpec::Kind::LocalStab: {
      const auto& basis = local_stab_states();
      StateVector s = basis[rng.below(3)];
      for (int q = 1; q < spec.m; ++q) s = tensor(s, basis[rng.below(3)]);
      return s;
    }
  }
  throw std::logic_error("sample_state: unknown ensemble kind");
}

ChoiSample sample_choi(int n, int t, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_choi: n < 1");
  if (t < 0) throw std::invalid_argument("sample_choi: negative depth");
  BrickworkCircuit circuit;
  if (n >= 2) {
    circuit = build_brickwork(n, t, rng);
  } else {
    // One qubit admits no nearest-neighbour pairs: the circuit is empty but
    // keeps its declared layer structure.
    circuit.num_qubits = 1;
    for (int layer = 0; layer < t; ++layer)
      circuit.layers.push_back(BrickLayer{layer % 2, {}});
  }
  StateVector state = prepare_epr(n);
  circuit.apply(state, n);
  return ChoiSample{std::move(state), std::move(circuit)};
}

namespace {

void write_double(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_circuit(std::ostream& os, const BrickworkCircuit& c) {
  os << "brickwork 1\n";
  os << "qubits " << c.num_qubits << "\n";
  os << "layers " << c.layers.size() << "\n";
  for (const auto& layer : c.layers) {
    os << "layer " << layer.offset << " gates " << layer.gates.size() << "\n";
    for (const auto& g : layer.gates) {
      os << "gate " << g.left_qubit;
      for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 4; ++col) {
          os << ' ';
          write_double(os, g.mat(r, col).real());
          os << ' ';
          write_double(os, g.mat(r, col).imag());
        }
      os << "\n";
    }
  }
}

BrickworkCircuit read_circuit(std::istream& is) {
  auto fail = [](const std::string& what) -> void {
    throw std::runtime_error("read_circuit: " + what);
  };
  std::string tok;
  int version = 0;
  if (!(is >> tok) || tok != "brickwork") fail("missing header");
  if (!(is >> version) || version != 1) fail("unsupported version");
  BrickworkCircuit c;
  std::size_t layer_count = 0;
  if (!(is >> tok) || tok != "qubits") fail("missing qubit count");
  if (!(is >> c.num_qubits) || c.num_qubits < 1) fail("bad qubit count");
  if (!(is >> tok) || tok != "layers") fail("missing layer count");
  if (!(is >> layer_count)) fail("bad layer count");
  for (std::size_t l = 0; l < layer_count; ++l) {
    BrickLayer layer;
    std::size_t gate_count = 0;
    if (!(is >> tok) || tok != "layer") fail("missing layer record");
    if (!(is >> layer.offset) || (layer.offset != 0 && layer.offset != 1))
      fail("bad layer offset");
    if (!(is >> tok) || tok != "gates") fail("missing gate count");
    if (!(is >> gate_count)) fail("bad gate count");
    for (std::size_t g = 0; g < gate_count; ++g) {
      BrickGate gate;
      if (!(is >> tok) || tok != "gate") fail("missing gate record");
      if (!(is >> gate.left_qubit) || gate.left_qubit < 0 ||
          gate.left_qubit + 1 >= c.num_qubits)
        fail("gate placement out of range");
      for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 4; ++col) {
          double re = 0, im = 0;
          if (!(is >> re >> im)) fail("truncated gate matrix");
          gate.mat(r, col) = cplx(re, im);
        }
      layer.gates.push_back(std::move(gate));
    }
    c.layers.push_back(std::move(layer));
  }
  return c;
}

std::string circuit_to_string(const BrickworkCircuit& c) {
  std::ostringstream os;
  write_circuit(os, c);
  return os.str();
}

BrickworkCircuit circuit_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_circuit(is);
}

}  // namespace qvol
