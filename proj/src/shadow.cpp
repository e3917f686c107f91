#include "qvol/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace qvol {
namespace {

constexpr int kDeskCap = 4;  // enumeration + flat-table scale limit

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void validate_density(const DensityMatrix& rho, int n) {
  const std::size_t dim = std::size_t{1} << n;
  require(rho.rows() == static_cast<Eigen::Index>(dim) &&
              rho.cols() == static_cast<Eigen::Index>(dim),
          "shadow: density matrix dimension mismatch");
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-8,
          "shadow: density matrix not Hermitian");
  require(std::abs(rho.trace().real() - 1.0) < 1e-8 &&
              std::abs(rho.trace().imag()) < 1e-8,
          "shadow: density matrix trace must be 1");
}

// Storage masks put qubit q at bit q; amplitude indices put qubit q at bit
// n-1-q.  The conversion is an n-bit reversal.
std::size_t reverse_bits(std::size_t mask, int n) {
  std::size_t out = 0;
  for (int q = 0; q < n; ++q)
    if ((mask >> q) & 1) out |= std::size_t{1} << (n - 1 - q);
  return out;
}

std::uint16_t pack_outcome(const BellOutcome& o, int n) {
  std::uint16_t a = 0, b = 0;
  for (int q = 0; q < n; ++q) {
    a = static_cast<std::uint16_t>(a | ((o.a[q] & 1) << q));
    b = static_cast<std::uint16_t>(b | ((o.b[q] & 1) << q));
  }
  return static_cast<std::uint16_t>((a << n) | b);
}

BellOutcome unpack_outcome(std::uint16_t packed, int n) {
  BellOutcome o;
  o.a.resize(n);
  o.b.resize(n);
  for (int q = 0; q < n; ++q) {
    o.a[q] = (packed >> (n + q)) & 1;
    o.b[q] = (packed >> q) & 1;
  }
  return o;
}

// v = Z^b X^a conj(phi) for a packed (a,b) outcome.
void effective_amps(const std::vector<cplx>& phi, int n, std::uint16_t packed,
                    Eigen::VectorXcd& v) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t amask = reverse_bits((packed >> n) & ((1u << n) - 1), n);
  const std::size_t bmask = reverse_bits(packed & ((1u << n) - 1), n);
  v.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    const double sign = (__builtin_popcountll(bmask & j) & 1) ? -1.0 : 1.0;
    v[static_cast<Eigen::Index>(j)] = sign * std::conj(phi[j ^ amask]);
  }
}

StateVector local_phi(int n, std::uint32_t packed) {
  const auto& set = local_stab_states();
  StateVector acc = set[(packed >> 0) & 3];
  for (int q = 1; q < n; ++q) acc = tensor(acc, set[(packed >> (2 * q)) & 3]);
  return acc;
}

std::uint32_t pack_local_indices(const std::vector<std::uint32_t>& idx) {
  std::uint32_t packed = 0;
  for (std::size_t q = 0; q < idx.size(); ++q)
    packed |= (idx[q] & 3u) << (2 * q);
  return packed;
}

const char* kind_name(AncillaEnsemble::Kind k) {
  switch (k) {
    case AncillaEnsemble::Kind::GlobalStab:
      return "global-stab";
    case AncillaEnsemble::Kind::LocalStab:
      return "local-stab";
    case AncillaEnsemble::Kind::Haar:
      return "haar";
  }
  return "?";
}

}  // namespace

AncillaEnsemble AncillaEnsemble::global_stab(int n) {
  require(n >= 1 && n <= kDeskCap, "global-stab ensemble: 1 <= n <= 4");
  return {Kind::GlobalStab, n};
}

AncillaEnsemble AncillaEnsemble::local_stab(int n) {
  require(n >= 1 && n <= 16, "local-stab ensemble: 1 <= n <= 16");
  return {Kind::LocalStab, n};
}

AncillaEnsemble AncillaEnsemble::haar(int n) {
  require(n >= 1, "haar ensemble: n >= 1");
  return {Kind::Haar, n};
}

std::string AncillaEnsemble::str() const {
  return std::string(kind_name(kind)) + "(" + std::to_string(n) + ")";
}

StateVector reconstruct_ancilla(const AncillaEnsemble& ens,
                                const std::vector<std::uint32_t>& descriptor) {
  switch (ens.kind) {
    case AncillaEnsemble::Kind::GlobalStab: {
      require(descriptor.size() == 1, "global-stab descriptor: one index");
      const auto& states = enumerate_stabilizer_states(ens.n);
      require(descriptor[0] < states.size(), "stabilizer index out of range");
      return states[descriptor[0]];
    }
    case AncillaEnsemble::Kind::LocalStab: {
      require(static_cast<int>(descriptor.size()) == ens.n,
              "local-stab descriptor: one index per qubit");
      for (auto d : descriptor) require(d < 3, "local index out of range");
      return local_phi(ens.n, pack_local_indices(descriptor));
    }
    case AncillaEnsemble::Kind::Haar: {
      require(descriptor.size() == 2, "haar descriptor: two seed words");
      const std::uint64_t seed =
          (std::uint64_t{descriptor[1]} << 32) | descriptor[0];
      Rng r(seed);
      return sample_state(EnsembleSpec::haar_states(ens.n), r);
    }
  }
  throw std::logic_error("unreachable ensemble kind");
}

StateVector reconstruct_ancilla(const ShadowSample& sample) {
  return reconstruct_ancilla(sample.ensemble, sample.descriptor);
}

StateVector effective_state(const StateVector& phi, const std::vector<int>& a,
                            const std::vector<int>& b) {
  const int n = phi.num_qubits();
  require(static_cast<int>(a.size()) == n && static_cast<int>(b.size()) == n,
          "effective_state: outcome width mismatch");
  BellOutcome o{a, b};
  Eigen::VectorXcd v;
  effective_amps(phi.amplitudes(), n, pack_outcome(o, n), v);
  std::vector<cplx> amps(v.data(), v.data() + v.size());
  return StateVector(n, std::move(amps));
}

std::vector<double> outcome_distribution(const DensityMatrix& rho,
                                         const StateVector& phi) {
  const int n = phi.num_qubits();
  validate_density(rho, n);
  const std::size_t num_out = std::size_t{1} << (2 * n);
  std::vector<double> p(num_out);
  const double scale = 1.0 / static_cast<double>(std::size_t{1} << n);
  Eigen::VectorXcd v;
  for (std::size_t out = 0; out < num_out; ++out) {
    effective_amps(phi.amplitudes(), n, static_cast<std::uint16_t>(out), v);
    p[out] = scale * (v.adjoint() * rho * v)(0, 0).real();
  }
  return p;
}

namespace {

// Per-ancilla outcome CDFs for a finite ensemble.
struct CdfTable {
  std::size_t rows = 0;
  std::size_t num_out = 0;
  std::vector<double> cdf;                  // rows x num_out
  std::vector<std::uint32_t> descriptors;   // packed descriptor per row
  std::vector<const StateVector*> states;   // ancilla per row (borrowed)
  std::vector<StateVector> storage;         // backing store for local mode
};

CdfTable build_cdf_table(const DensityMatrix& rho, const AncillaEnsemble& ens) {
  CdfTable t;
  const int n = ens.n;
  t.num_out = std::size_t{1} << (2 * n);
  if (ens.kind == AncillaEnsemble::Kind::GlobalStab) {
    const auto& states = enumerate_stabilizer_states(n);
    t.rows = states.size();
    for (std::size_t r = 0; r < t.rows; ++r) {
      t.descriptors.push_back(static_cast<std::uint32_t>(r));
      t.states.push_back(&states[r]);
    }
  } else if (ens.kind == AncillaEnsemble::Kind::LocalStab) {
    require(n <= kDeskCap, "local-stab batch: n <= 4");
    std::size_t rows = 1;
    for (int q = 0; q < n; ++q) rows *= 3;
    t.rows = rows;
    t.storage.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint32_t packed = 0;
      std::size_t rem = r;
      for (int q = 0; q < n; ++q) {
        packed |= static_cast<std::uint32_t>(rem % 3) << (2 * q);
        rem /= 3;
      }
      t.descriptors.push_back(packed);
      t.storage.push_back(local_phi(n, packed));
    }
    for (const auto& s : t.storage) t.states.push_back(&s);
  } else {
    throw std::invalid_argument("batch sampling needs a finite ensemble");
  }
  t.cdf.resize(t.rows * t.num_out);
  for (std::size_t r = 0; r < t.rows; ++r) {
    std::vector<double> p = outcome_distribution(rho, *t.states[r]);
    double acc = 0;
    for (std::size_t o = 0; o < t.num_out; ++o) {
      acc += p[o];
      t.cdf[r * t.num_out + o] = acc;
    }
    require(std::abs(acc - 1.0) < 1e-8, "outcome law does not sum to 1");
    t.cdf[r * t.num_out + (t.num_out - 1)] = 1.0;
  }
  return t;
}

// Spectral sampler for the simulated-Bell mode.
struct RhoSampler {
  std::vector<double> weight_cdf;
  std::vector<StateVector> vecs;

  RhoSampler(const DensityMatrix& rho, int n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    require(es.info() == Eigen::Success, "eigendecomposition failed");
    const auto& vals = es.eigenvalues();
    double total = 0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      require(vals[i] > -1e-8, "density matrix has a negative eigenvalue");
      total += std::max(0.0, vals[i]);
    }
    double acc = 0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      acc += std::max(0.0, vals[i]) / total;
      weight_cdf.push_back(acc);
      std::vector<cplx> amps(es.eigenvectors().col(i).data(),
                             es.eigenvectors().col(i).data() + vals.size());
      vecs.emplace_back(n, std::move(amps));
    }
    weight_cdf.back() = 1.0;
  }

  const StateVector& draw(Rng& rng) const {
    const double u = rng.uniform();
    const std::size_t i =
        std::upper_bound(weight_cdf.begin(), weight_cdf.end(), u) -
        weight_cdf.begin();
    return vecs[std::min(i, vecs.size() - 1)];
  }
};

std::uint32_t draw_descriptor(const AncillaEnsemble& ens, Rng& rng) {
  if (ens.kind == AncillaEnsemble::Kind::GlobalStab)
    return static_cast<std::uint32_t>(
        rng.below(enumerate_stabilizer_states(ens.n).size()));
  std::uint32_t packed = 0;
  for (int q = 0; q < ens.n; ++q)
    packed |= static_cast<std::uint32_t>(rng.below(3)) << (2 * q);
  return packed;
}

std::vector<std::uint32_t> descriptor_vector(const AncillaEnsemble& ens,
                                             std::uint32_t packed) {
  if (ens.kind == AncillaEnsemble::Kind::GlobalStab) return {packed};
  std::vector<std::uint32_t> idx(ens.n);
  for (int q = 0; q < ens.n; ++q) idx[q] = (packed >> (2 * q)) & 3;
  return idx;
}

std::uint16_t simulate_bell_outcome(const StateVector& phi,
                                    const RhoSampler& sampler, int n,
                                    Rng& rng) {
  StateVector full = tensor(phi, sampler.draw(rng));
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n);
  for (int q = 0; q < n; ++q) pairs.emplace_back(q, n + q);
  BellMeasurement bm = bell_measure(full, pairs, rng);
  return pack_outcome(bm.outcome, n);
}

}  // namespace

ShadowSample sample_shadow(const DensityMatrix& rho,
                           const AncillaEnsemble& ensemble, Rng& rng,
                           SampleMode mode) {
  const int n = ensemble.n;
  validate_density(rho, n);
  ShadowSample s;
  s.ensemble = ensemble;
  StateVector phi{0};
  if (ensemble.kind == AncillaEnsemble::Kind::Haar) {
    const std::uint64_t seed = rng.bits();
    s.descriptor = {static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32)};
    phi = reconstruct_ancilla(ensemble, s.descriptor);
  } else {
    const std::uint32_t packed = draw_descriptor(ensemble, rng);
    s.descriptor = descriptor_vector(ensemble, packed);
    phi = reconstruct_ancilla(ensemble, s.descriptor);
  }

  std::uint16_t out;
  if (mode == SampleMode::FormulaDirect) {
    std::vector<double> p = outcome_distribution(rho, phi);
    double acc = 0;
    const double u = rng.uniform();
    std::size_t pick = p.size() - 1;
    for (std::size_t o = 0; o < p.size(); ++o) {
      acc += p[o];
      if (u < acc) {
        pick = o;
        break;
      }
    }
    out = static_cast<std::uint16_t>(pick);
  } else {
    RhoSampler sampler(rho, n);
    out = simulate_bell_outcome(phi, sampler, n, rng);
  }
  s.outcome = unpack_outcome(out, n);
  return s;
}

ShadowSample ShadowBatch::get(std::size_t i) const {
  ShadowSample s;
  s.ensemble = ensemble;
  s.descriptor = descriptor_vector(ensemble, phi[i]);
  s.outcome = unpack_outcome(outcome[i], ensemble.n);
  return s;
}

ShadowBatch sample_shadow_batch(const DensityMatrix& rho,
                                const AncillaEnsemble& ensemble,
                                std::size_t count, Rng& rng, SampleMode mode) {
  const int n = ensemble.n;
  require(ensemble.kind != AncillaEnsemble::Kind::Haar,
          "batch sampling supports the finite stabilizer ensembles");
  validate_density(rho, n);

  ShadowBatch batch;
  batch.ensemble = ensemble;
  batch.phi.resize(count);
  batch.outcome.resize(count);

  if (mode == SampleMode::FormulaDirect) {
    CdfTable t = build_cdf_table(rho, ensemble);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t row = rng.below(t.rows);
      const double u = rng.uniform();
      const auto begin = t.cdf.begin() + row * t.num_out;
      const std::size_t out = std::upper_bound(begin, begin + t.num_out, u) - begin;
      batch.phi[i] = t.descriptors[row];
      batch.outcome[i] =
          static_cast<std::uint16_t>(std::min(out, t.num_out - 1));
    }
  } else {
    RhoSampler sampler(rho, n);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t packed = draw_descriptor(ensemble, rng);
      StateVector phi = reconstruct_ancilla(
          ensemble, descriptor_vector(ensemble, packed));
      batch.phi[i] = packed;
      batch.outcome[i] = simulate_bell_outcome(phi, sampler, n, rng);
    }
  }
  return batch;
}

DensityMatrix snapshot_global(const ShadowSample& sample) {
  require(sample.ensemble.kind == AncillaEnsemble::Kind::GlobalStab ||
              sample.ensemble.kind == AncillaEnsemble::Kind::Haar,
          "snapshot_global needs a 3-design ensemble");
  const int n = sample.ensemble.n;
  const std::size_t dim = std::size_t{1} << n;
  StateVector phi = reconstruct_ancilla(sample);
  Eigen::VectorXcd v;
  effective_amps(phi.amplitudes(), n, pack_outcome(sample.outcome, n), v);
  DensityMatrix sigma = static_cast<double>(dim + 1) * (v * v.adjoint());
  sigma -= DensityMatrix::Identity(dim, dim);
  return sigma;
}

LocalSnapshot snapshot_local(const ShadowSample& sample) {
  require(sample.ensemble.kind == AncillaEnsemble::Kind::LocalStab,
          "snapshot_local needs the local stabilizer ensemble");
  const int n = sample.ensemble.n;
  const auto& set = local_stab_states();
  LocalSnapshot snap;
  snap.factors.reserve(n);
  for (int q = 0; q < n; ++q) {
    const StateVector& phi = set[sample.descriptor[q]];
    StateVector psi = effective_state(phi, {sample.outcome.a[q]},
                                      {sample.outcome.b[q]});
    Eigen::Vector2cd u(psi.amplitude(0), psi.amplitude(1));
    snap.factors.push_back(3.0 * (u * u.adjoint()) -
                           Eigen::Matrix2cd::Identity());
  }
  return snap;
}

Eigen::MatrixXcd LocalSnapshot::dense() const {
  const int n = static_cast<int>(factors.size());
  require(n >= 1 && n <= 12, "LocalSnapshot::dense: 1 <= n <= 12");
  Eigen::MatrixXcd acc = factors[0];
  for (int q = 1; q < n; ++q) {
    const Eigen::MatrixXcd& f = factors[q];
    Eigen::MatrixXcd next(acc.rows() * 2, acc.cols() * 2);
    for (Eigen::Index i = 0; i < acc.rows(); ++i)
      for (Eigen::Index j = 0; j < acc.cols(); ++j)
        next.block(2 * i, 2 * j, 2, 2) = acc(i, j) * f;
    acc = std::move(next);
  }
  return acc;
}

Observable Observable::from_dense(Eigen::MatrixXcd mat) {
  require(mat.rows() == mat.cols() && mat.rows() >= 2,
          "Observable: square matrix expected");
  int n = 0;
  while ((Eigen::Index{1} << n) < mat.rows()) ++n;
  require((Eigen::Index{1} << n) == mat.rows(),
          "Observable: dimension must be a power of two");
  require((mat - mat.adjoint()).cwiseAbs().maxCoeff() < 1e-10,
          "Observable: not Hermitian");
  Observable o;
  o.is_pauli_sum_ = false;
  o.num_qubits_ = n;
  o.locality_ = n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat);
  o.infinity_norm_bound_ = es.eigenvalues().cwiseAbs().maxCoeff();
  o.mat_ = std::move(mat);
  return o;
}

Observable Observable::from_pauli_sum(int num_qubits,
                                      std::vector<PauliTerm> terms) {
  require(num_qubits >= 1, "Observable: n >= 1");
  // Canonicalize each term to the positive Hermitian representative and
  // merge duplicate patterns.
  std::map<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>,
           double>
      merged;
  for (auto& t : terms) {
    require(t.pauli.num_qubits() == num_qubits, "Observable: term width");
    require(t.pauli.is_hermitian(), "Observable: non-Hermitian Pauli term");
    int xz = 0;
    for (int q = 0; q < num_qubits; ++q)
      xz += t.pauli.x_bits()[q] & t.pauli.z_bits()[q];
    const int canonical_phase = xz & 1;
    double c = t.coeff;
    if (t.pauli.phase_power() != canonical_phase) c = -c;  // differs by i^2
    merged[{t.pauli.x_bits(), t.pauli.z_bits()}] += c;
  }
  Observable o;
  o.is_pauli_sum_ = true;
  o.num_qubits_ = num_qubits;
  double norm1 = 0;
  int locality = 0;
  for (auto& [pattern, c] : merged) {
    if (c == 0.0) continue;
    int support = 0, xz = 0;
    for (int q = 0; q < num_qubits; ++q) {
      support += (pattern.first[q] | pattern.second[q]) ? 1 : 0;
      xz += pattern.first[q] & pattern.second[q];
    }
    locality = std::max(locality, support);
    norm1 += std::abs(c);
    o.terms_.push_back(
        {c, PauliString(pattern.first, pattern.second, xz & 1)});
  }
  o.locality_ = locality;
  o.infinity_norm_bound_ = norm1;
  return o;
}

double Observable::trace() const {
  if (!is_pauli_sum_) return mat_.trace().real();
  const double dim = std::pow(2.0, num_qubits_);
  for (const auto& t : terms_)
    if (t.pauli.is_identity_pattern()) return t.coeff * dim;
  return 0.0;
}

double Observable::trace_sq() const {
  if (!is_pauli_sum_) return mat_.squaredNorm();  // tr(O^2) for Hermitian O
  const double dim = std::pow(2.0, num_qubits_);
  double s = 0;
  for (const auto& t : terms_) s += t.coeff * t.coeff;
  return dim * s;
}

Eigen::MatrixXcd Observable::dense() const {
  if (!is_pauli_sum_) return mat_;
  require(num_qubits_ <= 12, "Observable::dense: register too wide");
  const std::size_t dim = std::size_t{1} << num_qubits_;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : terms_) acc += t.coeff * t.pauli.dense();
  return acc;
}

std::vector<PauliTerm> Observable::pauli_terms() const {
  if (is_pauli_sum_) return terms_;
  require(num_qubits_ <= kDeskCap,
          "Observable::pauli_terms: dense expansion capped at n <= 4");
  const int n = num_qubits_;
  const std::size_t dim = std::size_t{1} << n;
  std::vector<PauliTerm> out;
  for (std::size_t xa = 0; xa < dim; ++xa)
    for (std::size_t zb = 0; zb < dim; ++zb) {
      std::vector<std::uint8_t> x(n), z(n);
      int xz = 0;
      for (int q = 0; q < n; ++q) {
        x[q] = (xa >> q) & 1;
        z[q] = (zb >> q) & 1;
        xz += x[q] & z[q];
      }
      PauliString p(x, z, xz & 1);
      const double c = (p.dense().adjoint() * mat_).trace().real() /
                       static_cast<double>(dim);
      if (std::abs(c) > 1e-12) out.push_back({c, std::move(p)});
    }
  return out;
}

double shadow_norm_bound(const Observable& o) { return 3.0 * o.trace_sq(); }

EstimationPlan plan_estimation(const std::vector<Observable>& observables,
                               double epsilon, double delta,
                               EstimatorMode mode) {
  require(!observables.empty(), "plan_estimation: no observables");
  require(epsilon > 0, "plan_estimation: epsilon must be positive");
  require(delta > 0 && delta < 1, "plan_estimation: delta in (0,1)");
  double worst = 0;
  for (const auto& o : observables) {
    if (mode == EstimatorMode::Global) {
      worst = std::max(worst, o.trace_sq());
    } else {
      require(o.infinity_norm_bound() <= 1.0 + 1e-9,
              "plan_estimation: local mode needs norm-1 observables");
      worst = std::max(worst, std::pow(4.0, o.locality()));
    }
  }
  EstimationPlan plan;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.B = static_cast<long long>(
      std::ceil(30.0 * worst / (epsilon * epsilon)));
  plan.K = static_cast<long long>(std::ceil(
      2.0 * std::log(2.0 * static_cast<double>(observables.size()) / delta)));
  plan.B = std::max<long long>(plan.B, 1);
  plan.K = std::max<long long>(plan.K, 1);
  return plan;
}

namespace {

// Per-qubit single-shot expectations <psi|P|psi> for the six effective
// states, indexed [phi_idx][a][b][P], P in {X, Y, Z}.
const double (&six_state_table())[3][2][2][3] {
  static double table[3][2][2][3];
  static bool ready = [] {
    const auto& set = local_stab_states();
    const Eigen::Matrix2cd X = gates::x().mat, Y = gates::y().mat,
                           Z = gates::z().mat;
    for (int f = 0; f < 3; ++f)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          StateVector psi = effective_state(set[f], {a}, {b});
          Eigen::Vector2cd u(psi.amplitude(0), psi.amplitude(1));
          table[f][a][b][0] = (u.adjoint() * X * u)(0, 0).real();
          table[f][a][b][1] = (u.adjoint() * Y * u)(0, 0).real();
          table[f][a][b][2] = (u.adjoint() * Z * u)(0, 0).real();
        }
    return true;
  }();
  (void)ready;
  return table;
}

// Flat lookup tables tr(O sigma-hat) over (descriptor row, outcome).
std::vector<double> value_table(const ShadowBatch& batch, const Observable& o) {
  const int n = batch.ensemble.n;
  const std::size_t num_out = std::size_t{1} << (2 * n);
  require(o.num_qubits() == n, "estimate: observable width mismatch");

  if (batch.ensemble.kind == AncillaEnsemble::Kind::GlobalStab) {
    const auto& states = enumerate_stabilizer_states(n);
    const Eigen::MatrixXcd dense = o.dense();
    const double tr = dense.trace().real();
    const double dplus1 = static_cast<double>((std::size_t{1} << n) + 1);
    std::vector<double> table(states.size() * num_out);
    Eigen::VectorXcd v;
    for (std::size_t r = 0; r < states.size(); ++r)
      for (std::size_t out = 0; out < num_out; ++out) {
        effective_amps(states[r].amplitudes(), n,
                       static_cast<std::uint16_t>(out), v);
        table[r * num_out + out] =
            dplus1 * (v.adjoint() * dense * v)(0, 0).real() - tr;
      }
    return table;
  }

  // Local mode: factored per-term products over the six-state table.
  require(n <= kDeskCap, "estimate: local mode capped at n <= 4");
  const auto& six = six_state_table();
  const std::vector<PauliTerm> terms = o.pauli_terms();
  const std::size_t rows = std::size_t{1} << (2 * n);  // packed descriptors
  std::vector<double> table(rows * num_out, 0.0);
  for (std::size_t packed = 0; packed < rows; ++packed) {
    bool valid = true;
    for (int q = 0; q < n; ++q)
      if (((packed >> (2 * q)) & 3) == 3) valid = false;
    if (!valid) continue;
    for (std::size_t out = 0; out < num_out; ++out) {
      double total = 0;
      for (const auto& t : terms) {
        double prod = t.coeff;
        for (int q = 0; q < n && prod != 0.0; ++q) {
          const int x = t.pauli.x_bits()[q], z = t.pauli.z_bits()[q];
          if (!x && !z) continue;
          const int p = x ? (z ? 1 : 0) : 2;  // X, Y, Z
          const int f = (packed >> (2 * q)) & 3;
          const int a = (out >> (n + q)) & 1;
          const int b = (out >> q) & 1;
          prod *= 3.0 * six[f][a][b][p];
        }
        total += prod;
      }
      table[packed * num_out + out] = total;
    }
  }
  return table;
}

double median_of(std::vector<double>& groups) {
  std::sort(groups.begin(), groups.end());
  const std::size_t k = groups.size();
  if (k % 2 == 1) return groups[k / 2];
  return 0.5 * (groups[k / 2 - 1] + groups[k / 2]);
}

}  // namespace

std::vector<double> estimate_observables(const ShadowBatch& batch,
                                         const std::vector<Observable>& observables,
                                         const EstimationPlan& plan) {
  const std::size_t n_samples = batch.size();
  require(static_cast<long long>(n_samples) >= plan.total(),
          "estimate_observables: insufficient samples for the plan");
  const std::size_t K = static_cast<std::size_t>(plan.K);
  const std::size_t group = n_samples / K;
  require(group >= 1, "estimate_observables: empty median groups");

  const int n = batch.ensemble.n;
  const std::size_t num_out = std::size_t{1} << (2 * n);
  std::vector<double> estimates;
  estimates.reserve(observables.size());
  for (const auto& o : observables) {
    const std::vector<double> table = value_table(batch, o);
    std::vector<double> groups(K, 0.0);
    for (std::size_t g = 0; g < K; ++g) {
      double acc = 0;
      for (std::size_t i = g * group; i < (g + 1) * group; ++i)
        acc += table[batch.phi[i] * num_out + batch.outcome[i]];
      groups[g] = acc / static_cast<double>(group);
    }
    estimates.push_back(median_of(groups));
  }
  return estimates;
}

namespace {

// Distinct (descriptor, outcome) keys with multiplicities.
struct Buckets {
  std::vector<std::uint64_t> keys;
  std::vector<double> counts;
};

Buckets bucketize(const ShadowBatch& batch) {
  std::unordered_map<std::uint64_t, double> m;
  const int n = batch.ensemble.n;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::uint64_t key =
        (std::uint64_t{batch.phi[i]} << (2 * n)) | batch.outcome[i];
    m[key] += 1.0;
  }
  Buckets b;
  b.keys.reserve(m.size());
  for (const auto& [k, c] : m) {
    b.keys.push_back(k);
    b.counts.push_back(c);
  }
  return b;
}

Eigen::VectorXcd key_effective_vector(const AncillaEnsemble& ens,
                                      std::uint64_t key) {
  const int n = ens.n;
  const std::uint32_t packed_phi = static_cast<std::uint32_t>(key >> (2 * n));
  const std::uint16_t out =
      static_cast<std::uint16_t>(key & ((1u << (2 * n)) - 1));
  StateVector phi = reconstruct_ancilla(ens, descriptor_vector(ens, packed_phi));
  Eigen::VectorXcd v;
  effective_amps(phi.amplitudes(), n, out, v);
  return v;
}

}  // namespace

double estimate_purity(const ShadowBatch& batch) {
  const std::size_t n_samples = batch.size();
  require(n_samples >= 2, "estimate_purity: need at least two samples");
  const int n = batch.ensemble.n;
  const double dim = static_cast<double>(std::size_t{1} << n);
  Buckets b = bucketize(batch);
  const std::size_t s = b.keys.size();

  double total = 0;
  if (batch.ensemble.kind == AncillaEnsemble::Kind::GlobalStab) {
    std::vector<Eigen::VectorXcd> vecs(s);
    for (std::size_t i = 0; i < s; ++i)
      vecs[i] = key_effective_vector(batch.ensemble, b.keys[i]);
    const double dp1 = dim + 1;
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = i; j < s; ++j) {
        const double ov = std::norm(vecs[i].dot(vecs[j]));
        const double kernel = dp1 * dp1 * ov - 2 * dp1 + dim;
        if (i == j)
          total += b.counts[i] * (b.counts[i] - 1) * kernel;
        else
          total += 2 * b.counts[i] * b.counts[j] * kernel;
      }
    }
  } else {
    // Per-qubit factored kernel: prod_q (9 |<u|w>|^2 - 4).
    std::vector<std::vector<Eigen::Vector2cd>> vecs(s);
    const auto& set = local_stab_states();
    for (std::size_t i = 0; i < s; ++i) {
      const std::uint32_t packed =
          static_cast<std::uint32_t>(b.keys[i] >> (2 * n));
      const std::uint16_t out =
          static_cast<std::uint16_t>(b.keys[i] & ((1u << (2 * n)) - 1));
      vecs[i].resize(n);
      for (int q = 0; q < n; ++q) {
        StateVector psi =
            effective_state(set[(packed >> (2 * q)) & 3],
                            {(out >> (n + q)) & 1}, {(out >> q) & 1});
        vecs[i][q] = Eigen::Vector2cd(psi.amplitude(0), psi.amplitude(1));
      }
    }
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = i; j < s; ++j) {
        double kernel = 1;
        for (int q = 0; q < n; ++q)
          kernel *= 9.0 * std::norm(vecs[i][q].dot(vecs[j][q])) - 4.0;
        if (i == j)
          total += b.counts[i] * (b.counts[i] - 1) * kernel;
        else
          total += 2 * b.counts[i] * b.counts[j] * kernel;
      }
    }
  }
  const double nn = static_cast<double>(n_samples);
  return total / (nn * (nn - 1));
}

double estimate_polynomial(const ShadowBatch& batch, int degree,
                           const Eigen::MatrixXcd& obs_on_copies) {
  require(degree == 1 || degree == 2,
          "estimate_polynomial: degree 1 and 2 supported");
  require(batch.size() >= static_cast<std::size_t>(degree),
          "estimate_polynomial: not enough samples");
  const int n = batch.ensemble.n;
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t want = degree == 1 ? dim : dim * dim;
  require(obs_on_copies.rows() == static_cast<Eigen::Index>(want) &&
              obs_on_copies.cols() == static_cast<Eigen::Index>(want),
          "estimate_polynomial: observable must act on `degree` copies");

  Buckets b = bucketize(batch);
  const std::size_t s = b.keys.size();
  std::vector<Eigen::MatrixXcd> snaps(s);
  for (std::size_t i = 0; i < s; ++i) {
    ShadowSample sample;
    sample.ensemble = batch.ensemble;
    sample.descriptor = descriptor_vector(
        batch.ensemble, static_cast<std::uint32_t>(b.keys[i] >> (2 * n)));
    sample.outcome = unpack_outcome(
        static_cast<std::uint16_t>(b.keys[i] & ((1u << (2 * n)) - 1)), n);
    snaps[i] = batch.ensemble.kind == AncillaEnsemble::Kind::LocalStab
                   ? snapshot_local(sample).dense()
                   : snapshot_global(sample);
  }

  const double nn = static_cast<double>(batch.size());
  if (degree == 1) {
    double total = 0;
    for (std::size_t i = 0; i < s; ++i)
      total += b.counts[i] * (obs_on_copies * snaps[i]).trace().real();
    return total / nn;
  }

  double total = 0;
  Eigen::MatrixXcd kron(dim * dim, dim * dim);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      const double weight =
          i == j ? b.counts[i] * (b.counts[i] - 1) : b.counts[i] * b.counts[j];
      if (weight == 0) continue;
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
          kron.block(r * dim, c * dim, dim, dim) = snaps[i](r, c) * snaps[j];
      total += weight * (obs_on_copies * kron).trace().real();
    }
  return total / (nn * (nn - 1));
}

DensityMatrix depolarizing_map(const DensityMatrix& rho, double p) {
  const std::size_t dim = rho.rows();
  return p * rho + (1.0 - p) * rho.trace().real() / static_cast<double>(dim) *
                       DensityMatrix::Identity(dim, dim);
}

DensityMatrix average_effective_state(const DensityMatrix& rho,
                                      const AncillaEnsemble& ensemble) {
  const int n = ensemble.n;
  validate_density(rho, n);
  require(ensemble.kind != AncillaEnsemble::Kind::Haar,
          "average_effective_state needs a finite ensemble");
  CdfTable t = build_cdf_table(rho, ensemble);
  const std::size_t dim = std::size_t{1} << n;
  DensityMatrix avg = DensityMatrix::Zero(dim, dim);
  Eigen::VectorXcd v;
  for (std::size_t r = 0; r < t.rows; ++r) {
    std::vector<double> p = outcome_distribution(rho, *t.states[r]);
    for (std::size_t out = 0; out < t.num_out; ++out) {
      effective_amps(t.states[r]->amplitudes(), n,
                     static_cast<std::uint16_t>(out), v);
      avg += (p[out] / static_cast<double>(t.rows)) * (v * v.adjoint());
    }
  }
  return avg;
}

namespace {

Eigen::VectorXd vectorize_hermitian(const Eigen::MatrixXcd& m) {
  const Eigen::Index d = m.rows();
  Eigen::VectorXd v(d * d);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < d; ++i) v[pos++] = m(i, i).real();
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      v[pos++] = r2 * m(i, j).real();
      v[pos++] = r2 * m(i, j).imag();
    }
  return v;
}

}  // namespace

CompletenessResult check_tomographic_completeness(
    const std::vector<StateVector>& ancillas, int n) {
  require(!ancillas.empty(), "completeness: empty ensemble");
  require(n >= 1 && n <= kDeskCap, "completeness: 1 <= n <= 4");
  const std::size_t dim = std::size_t{1} << n;
  const int full = static_cast<int>(dim * dim);

  std::vector<Eigen::VectorXd> basis;
  int rank = 0;
  auto absorb = [&](const Eigen::MatrixXcd& m) {
    Eigen::VectorXd v = vectorize_hermitian(m);
    const double orig = v.norm();
    if (orig < 1e-12) return;
    v /= orig;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    const double res = v.norm();
    if (res > 1e-9) {
      basis.push_back(v / res);
      ++rank;
    }
  };

  absorb(Eigen::MatrixXcd::Identity(dim, dim));
  Eigen::VectorXcd v;
  for (const auto& phi : ancillas) {
    require(phi.num_qubits() == n, "completeness: state width mismatch");
    for (std::size_t out = 0; out < dim * dim && rank < full; ++out) {
      effective_amps(phi.amplitudes(), n, static_cast<std::uint16_t>(out), v);
      absorb(v * v.adjoint());
    }
    if (rank >= full) break;
  }
  return {rank == full, rank};
}

std::string sample_to_line(const ShadowSample& sample) {
  const int n = sample.ensemble.n;
  std::uint32_t amask = 0, bmask = 0;
  for (int q = 0; q < n; ++q) {
    amask |= (sample.outcome.a[q] & 1) << q;
    bmask |= (sample.outcome.b[q] & 1) << q;
  }
  std::ostringstream os;
  os << kind_name(sample.ensemble.kind) << " " << n << " ";
  for (std::size_t i = 0; i < sample.descriptor.size(); ++i) {
    if (i) os << ",";
    os << sample.descriptor[i];
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, " %x %x", amask, bmask);
  os << buf;
  return os.str();
}

ShadowSample sample_from_line(const std::string& line) {
  std::istringstream is(line);
  std::string kind, desc;
  int n = 0;
  std::string ahex, bhex;
  if (!(is >> kind >> n >> desc >> ahex >> bhex))
    throw std::runtime_error("sample_from_line: malformed record");
  ShadowSample s;
  if (kind == "global-stab")
    s.ensemble = AncillaEnsemble::global_stab(n);
  else if (kind == "local-stab")
    s.ensemble = AncillaEnsemble::local_stab(n);
  else if (kind == "haar")
    s.ensemble = AncillaEnsemble::haar(n);
  else
    throw std::runtime_error("sample_from_line: unknown ensemble kind");
  std::istringstream ds(desc);
  std::string tok;
  while (std::getline(ds, tok, ','))
    s.descriptor.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
  const std::uint32_t amask =
      static_cast<std::uint32_t>(std::stoul(ahex, nullptr, 16));
  const std::uint32_t bmask =
      static_cast<std::uint32_t>(std::stoul(bhex, nullptr, 16));
  s.outcome.a.resize(n);
  s.outcome.b.resize(n);
  for (int q = 0; q < n; ++q) {
    s.outcome.a[q] = (amask >> q) & 1;
    s.outcome.b[q] = (bmask >> q) & 1;
  }
  // Round-trip sanity: the descriptor must reconstruct.
  reconstruct_ancilla(s);
  return s;
}

void write_batch(std::ostream& os, const ShadowBatch& batch) {
  os << "shadowlog 1\n";
  os << "ensemble " << kind_name(batch.ensemble.kind) << " "
     << batch.ensemble.n << "\n";
  os << "count " << batch.size() << "\n";
  char buf[32];
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%u %x\n", batch.phi[i], batch.outcome[i]);
    os << buf;
  }
}

ShadowBatch read_batch(std::istream& is) {
  auto fail = [](const char* msg) -> ShadowBatch {
    throw std::runtime_error(std::string("read_batch: ") + msg);
  };
  std::string line;
  if (!std::getline(is, line) || line != "shadowlog 1")
    return fail("bad magic");
  std::string kind;
  int n = 0;
  std::size_t count = 0;
  {
    if (!std::getline(is, line)) return fail("missing ensemble");
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag >> kind >> n) || tag != "ensemble")
      return fail("bad ensemble line");
  }
  {
    if (!std::getline(is, line)) return fail("missing count");
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag >> count) || tag != "count") return fail("bad count line");
  }
  ShadowBatch batch;
  if (kind == "global-stab")
    batch.ensemble = AncillaEnsemble::global_stab(n);
  else if (kind == "local-stab")
    batch.ensemble = AncillaEnsemble::local_stab(n);
  else
    return fail("unknown ensemble kind");
  batch.phi.resize(count);
  batch.outcome.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) return fail("truncated sample list");
    std::istringstream ls(line);
    std::string ohex;
    if (!(ls >> batch.phi[i] >> ohex)) return fail("bad sample record");
    batch.outcome[i] =
        static_cast<std::uint16_t>(std::stoul(ohex, nullptr, 16));
  }
  return batch;
}

}  // namespace qvol
