#include "qvol/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qvol {

namespace {

int g_qubit_limit = 24;

void check_targets(int num_qubits, const std::vector<int>& targets,
                   int expected) {
  if (static_cast<int>(targets.size()) != expected)
    throw std::invalid_argument("apply_gate: target count does not match gate arity");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= num_qubits)
      throw std::invalid_argument("apply_gate: target qubit out of range");
    for (std::size_t j = i + 1; j < targets.size(); ++j)
      if (targets[i] == targets[j])
        throw std::invalid_argument("apply_gate: duplicate target qubit");
  }
}

}  // namespace

GateMatrix::GateMatrix(int arity_, Eigen::MatrixXcd mat_)
    : arity(arity_), mat(std::move(mat_)) {
  if (arity != 1 && arity != 2)
    throw std::invalid_argument("GateMatrix: arity must be 1 or 2");
  const Eigen::Index d = Eigen::Index(1) << arity;
  if (mat.rows() != d || mat.cols() != d)
    throw std::invalid_argument("GateMatrix: dimension does not match arity");
  Eigen::MatrixXcd err = mat.adjoint() * mat - Eigen::MatrixXcd::Identity(d, d);
  if (err.cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("GateMatrix: matrix is not unitary");
}

GateMatrix GateMatrix::identity(int arity) {
  const Eigen::Index d = Eigen::Index(1) << arity;
  return GateMatrix(arity, Eigen::MatrixXcd::Identity(d, d));
}

int StateVector::qubit_limit() { return g_qubit_limit; }

void StateVector::set_qubit_limit(int limit) {
  if (limit < 1) throw std::invalid_argument("qubit limit must be positive");
  g_qubit_limit = limit;
}

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 0)
    throw std::invalid_argument("StateVector: negative qubit count");
  if (num_qubits > g_qubit_limit)
    throw std::invalid_argument("StateVector: register exceeds qubit limit (" +
                                std::to_string(g_qubit_limit) + ")");
  amps_.assign(std::size_t(1) << num_qubits, cplx(0.0, 0.0));
  amps_[0] = cplx(1.0, 0.0);
}

StateVector::StateVector(int num_qubits, std::vector<cplx> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
  if (num_qubits < 0)
    throw std::invalid_argument("StateVector: negative qubit count");
  if (num_qubits > g_qubit_limit)
    throw std::invalid_argument("StateVector: register exceeds qubit limit (" +
                                std::to_string(g_qubit_limit) + ")");
  if (amps_.size() != (std::size_t(1) << num_qubits))
    throw std::invalid_argument("StateVector: amplitude count is not 2^m");
}

StateVector StateVector::basis(int num_qubits, const std::vector<int>& bits) {
  if (static_cast<int>(bits.size()) != num_qubits)
    throw std::invalid_argument("basis: bit count does not match qubit count");
  std::size_t idx = 0;
  for (int q = 0; q < num_qubits; ++q) {
    if (bits[q] != 0 && bits[q] != 1)
      throw std::invalid_argument("basis: bits must be 0 or 1");
    idx |= std::size_t(bits[q]) << (num_qubits - 1 - q);
  }
  StateVector s(num_qubits);
  s.amps_[0] = cplx(0.0, 0.0);
  s.amps_[idx] = cplx(1.0, 0.0);
  return s;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

void StateVector::normalize() {
  const double n = norm();
  if (n == 0.0) throw std::runtime_error("normalize: zero vector");
  const double inv = 1.0 / n;
  for (auto& a : amps_) a *= inv;
}

void StateVector::apply_gate(const GateMatrix& gate,
                             const std::vector<int>& targets) {
  check_targets(num_qubits_, targets, gate.arity);
  if (gate.arity == 1) {
    const std::size_t s = std::size_t(1) << (num_qubits_ - 1 - targets[0]);
    const cplx m00 = gate.mat(0, 0), m01 = gate.mat(0, 1);
    const cplx m10 = gate.mat(1, 0), m11 = gate.mat(1, 1);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & s) continue;
      const cplx a0 = amps_[i], a1 = amps_[i | s];
      amps_[i] = m00 * a0 + m01 * a1;
      amps_[i | s] = m10 * a0 + m11 * a1;
    }
  } else {
    const std::size_t s1 = std::size_t(1) << (num_qubits_ - 1 - targets[0]);
    const std::size_t s2 = std::size_t(1) << (num_qubits_ - 1 - targets[1]);
    cplx m[4][4];
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m[r][c] = gate.mat(r, c);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if ((i & s1) || (i & s2)) continue;
      cplx a[4] = {amps_[i], amps_[i | s2], amps_[i | s1], amps_[i | s1 | s2]};
      for (int r = 0; r < 4; ++r) {
        cplx acc = m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
        amps_[i | (r & 2 ? s1 : 0) | (r & 1 ? s2 : 0)] = acc;
      }
    }
  }
}

void StateVector::apply_matrix(const Eigen::MatrixXcd& mat,
                               const std::vector<int>& targets) {
  const int k = static_cast<int>(targets.size());
  if (k < 1 || k > 2)
    throw std::invalid_argument("apply_matrix: one or two targets supported");
  const Eigen::Index d = Eigen::Index(1) << k;
  if (mat.rows() != d || mat.cols() != d)
    throw std::invalid_argument("apply_matrix: dimension mismatch");
  check_targets(num_qubits_, targets, k);
  std::vector<std::size_t> strides(k);
  for (int i = 0; i < k; ++i)
    strides[i] = std::size_t(1) << (num_qubits_ - 1 - targets[i]);
  std::size_t skip = 0;
  for (auto s : strides) skip |= s;
  std::vector<cplx> in(d), out(d);
  for (std::size_t base = 0; base < amps_.size(); ++base) {
    if (base & skip) continue;
    for (Eigen::Index r = 0; r < d; ++r) {
      std::size_t idx = base;
      for (int bit = 0; bit < k; ++bit)
        if (r & (Eigen::Index(1) << (k - 1 - bit))) idx |= strides[bit];
      in[r] = amps_[idx];
    }
    for (Eigen::Index r = 0; r < d; ++r) {
      cplx acc(0, 0);
      for (Eigen::Index c = 0; c < d; ++c) acc += mat(r, c) * in[c];
      out[r] = acc;
    }
    for (Eigen::Index r = 0; r < d; ++r) {
      std::size_t idx = base;
      for (int bit = 0; bit < k; ++bit)
        if (r & (Eigen::Index(1) << (k - 1 - bit))) idx |= strides[bit];
      amps_[idx] = out[r];
    }
  }
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  const int m = a.num_qubits() + b.num_qubits();
  std::vector<cplx> out(std::size_t(1) << m);
  const std::size_t db = b.dim();
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < db; ++j)
      out[i * db + j] = a.amplitude(i) * b.amplitude(j);
  return StateVector(m, std::move(out));
}

cplx inner(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits())
    throw std::invalid_argument("inner: qubit counts differ");
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < a.dim(); ++i)
    s += std::conj(a.amplitude(i)) * b.amplitude(i);
  return s;
}

double fidelity(const StateVector& a, const StateVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("fidelity: zero vector");
  const cplx ip = inner(a, b);
  return std::norm(ip) / (na * na * nb * nb);
}

namespace {

/// Maps qubit lists to masks/positions used by projection and tracing.
struct QubitSplit {
  std::vector<int> sel;    // selected qubits, input order
  std::vector<int> rest;   // remaining qubits, ascending
  int m;

  QubitSplit(int num_qubits, const std::vector<int>& qubits) : m(num_qubits) {
    std::vector<char> taken(num_qubits, 0);
    for (int q : qubits) {
      if (q < 0 || q >= num_qubits)
        throw std::invalid_argument("qubit index out of range");
      if (taken[q]) throw std::invalid_argument("duplicate qubit index");
      taken[q] = 1;
      sel.push_back(q);
    }
    for (int q = 0; q < num_qubits; ++q)
      if (!taken[q]) rest.push_back(q);
  }

  std::size_t bit(int q) const { return std::size_t(1) << (m - 1 - q); }

  /// Builds the full index from remaining-register index and fixed sel bits.
  std::size_t assemble(std::size_t rest_idx, std::size_t sel_bits) const {
    std::size_t idx = 0;
    const int mr = static_cast<int>(rest.size());
    for (int i = 0; i < mr; ++i)
      if (rest_idx & (std::size_t(1) << (mr - 1 - i))) idx |= bit(rest[i]);
    const int ms = static_cast<int>(sel.size());
    for (int i = 0; i < ms; ++i)
      if (sel_bits & (std::size_t(1) << (ms - 1 - i))) idx |= bit(sel[i]);
    return idx;
  }
};

}  // namespace

Projection project_computational(const StateVector& state,
                                 const std::vector<int>& qubits,
                                 const std::vector<int>& bits) {
  if (qubits.size() != bits.size())
    throw std::invalid_argument("project: qubit and bit counts differ");
  QubitSplit split(state.num_qubits(), qubits);
  std::size_t sel_bits = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1)
      throw std::invalid_argument("project: bits must be 0 or 1");
    if (bits[i])
      sel_bits |= std::size_t(1) << (bits.size() - 1 - i);
  }
  const int mr = static_cast<int>(split.rest.size());
  std::vector<cplx> out(std::size_t(1) << mr);
  double w = 0.0;
  for (std::size_t r = 0; r < out.size(); ++r) {
    const cplx a = state.amplitude(split.assemble(r, sel_bits));
    out[r] = a;
    w += std::norm(a);
  }
  return Projection{w, StateVector(mr, std::move(out))};
}

MeasurementResult measure_computational(const StateVector& state,
                                        const std::vector<int>& qubits,
                                        Rng& rng) {
  const double n = state.norm();
  if (std::abs(n - 1.0) > 1e-8)
    throw std::runtime_error("measure: state is not normalized");
  if (qubits.empty())
    throw std::invalid_argument("measure: empty qubit list");

  StateVector work = state;
  std::vector<int> outcome;
  outcome.reserve(qubits.size());
  double branch_weight = 1.0;  // product of conditional probabilities

  // Sample one qubit at a time: compute the two conditional weights, draw,
  // zero out the dead branch.  Compaction happens once at the end.
  std::vector<char> seen(state.num_qubits(), 0);
  for (int q : qubits) {
    if (q < 0 || q >= state.num_qubits())
      throw std::invalid_argument("measure: qubit index out of range");
    if (seen[q]) throw std::invalid_argument("measure: duplicate qubit index");
    seen[q] = 1;
    const std::size_t s = std::size_t(1) << (state.num_qubits() - 1 - q);
    double w0 = 0.0, w1 = 0.0;
    auto& amps = work.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i)
      ((i & s) ? w1 : w0) += std::norm(amps[i]);
    const double total = w0 + w1;
    if (total <= 0.0)
      throw std::runtime_error("measure: state collapsed to zero weight");
    const int bit = rng.uniform() * total < w1 ? 1 : 0;
    outcome.push_back(bit);
    branch_weight *= (bit ? w1 : w0) / total;
    for (std::size_t i = 0; i < amps.size(); ++i)
      if (((i & s) != 0) != (bit != 0)) amps[i] = cplx(0.0, 0.0);
  }

  std::vector<int> bits = outcome;
  Projection proj = project_computational(work, qubits, bits);
  proj.residual.normalize();
  return MeasurementResult{std::move(outcome), std::move(proj.residual),
                           branch_weight};
}

DensityMatrix partial_trace(const StateVector& state,
                            const std::vector<int>& keep) {
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  QubitSplit split(state.num_qubits(), sorted);
  const std::size_t dk = std::size_t(1) << sorted.size();
  const std::size_t de = std::size_t(1) << split.rest.size();
  DensityMatrix rho = DensityMatrix::Zero(dk, dk);
  // rho[i,j] = sum_e psi(i,e) conj(psi(j,e)); the unselected qubits form
  // the environment index e.
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      cplx acc(0.0, 0.0);
      for (std::size_t e = 0; e < de; ++e)
        acc += state.amplitude(split.assemble(e, i)) *
               std::conj(state.amplitude(split.assemble(e, j)));
      rho(i, j) = acc;
      if (i != j) rho(j, i) = std::conj(acc);
    }
  return rho;
}

DensityMatrix density(const StateVector& state) {
  const std::size_t d = state.dim();
  DensityMatrix rho(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      rho(i, j) = state.amplitude(i) * std::conj(state.amplitude(j));
  return rho;
}

double purity(const DensityMatrix& rho) {
  return (rho * rho).trace().real();
}

double trace_norm(const DensityMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("trace_norm: matrix is not square");
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("trace_norm: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

namespace gates {

GateMatrix x() {
  Eigen::MatrixXcd m(2, 2);
  m << 0, 1, 1, 0;
  return GateMatrix(1, m);
}

GateMatrix y() {
  Eigen::MatrixXcd m(2, 2);
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return GateMatrix(1, m);
}

GateMatrix z() {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 0, 0, -1;
  return GateMatrix(1, m);
}

GateMatrix h() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m(2, 2);
  m << r, r, r, -r;
  return GateMatrix(1, m);
}

GateMatrix s() {
  Eigen::MatrixXcd m(2, 2);
  m << cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(0, 1);
  return GateMatrix(1, m);
}

GateMatrix cnot() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return GateMatrix(2, m);
}

}  // namespace gates

}  // namespace qvol
