#include "qvol/designlab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qvol {
namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void require_normalized(const StateVector& s) {
  require(std::abs(s.norm() - 1.0) < 1e-8, "designlab: state not normalized");
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

ProjectedEnsemble projected_ensemble(const StateVector& state,
                                     int num_measured) {
  const int m = state.num_qubits();
  require(num_measured >= 1 && num_measured < m,
          "projected_ensemble: need 1 <= measured < total qubits");
  require_normalized(state);

  std::vector<int> qubits(num_measured);
  for (int q = 0; q < num_measured; ++q) qubits[q] = q;

  ProjectedEnsemble ens;
  const std::size_t outcomes = std::size_t{1} << num_measured;
  for (std::size_t j = 0; j < outcomes; ++j) {
    std::vector<int> bits(num_measured);
    for (int q = 0; q < num_measured; ++q)
      bits[q] = (j >> (num_measured - 1 - q)) & 1;
    Projection pr = project_computational(state, qubits, bits);
    if (pr.weight <= 1e-15) continue;
    pr.residual.normalize();
    ens.entries.emplace_back(pr.weight, std::move(pr.residual));
  }
  return ens;
}

namespace {

double frame_potential_weighted(
    const std::vector<std::pair<double, const StateVector*>>& ens, int t) {
  require(!ens.empty(), "frame_potential: empty ensemble");
  require(t >= 1, "frame_potential: t >= 1");
  const int n = ens[0].second->num_qubits();
  for (const auto& [p, s] : ens) {
    require(s->num_qubits() == n, "frame_potential: width mismatch");
    require_normalized(*s);
  }
  double total = 0;
  for (const auto& [pi, si] : ens)
    for (const auto& [pj, sj] : ens)
      total += pi * pj * std::pow(std::norm(inner(*si, *sj)), t);
  return total;
}

}  // namespace

double frame_potential(const std::vector<StateVector>& states, int t) {
  std::vector<std::pair<double, const StateVector*>> ens;
  ens.reserve(states.size());
  const double p = states.empty() ? 0.0 : 1.0 / states.size();
  for (const auto& s : states) ens.emplace_back(p, &s);
  return frame_potential_weighted(ens, t);
}

double frame_potential(const ProjectedEnsemble& ensemble, int t) {
  std::vector<std::pair<double, const StateVector*>> ens;
  ens.reserve(ensemble.entries.size());
  for (const auto& [p, s] : ensemble.entries) ens.emplace_back(p, &s);
  return frame_potential_weighted(ens, t);
}

double haar_frame_potential(int n, int t) {
  require(n >= 1 && t >= 1, "haar_frame_potential: n, t >= 1");
  const double dim = std::pow(2.0, n);
  double value = 1;
  for (int s = 1; s <= t; ++s) value *= s / (dim + s - 1);
  return value;
}

namespace {

double moment_distance_weighted(
    const std::vector<std::pair<double, const StateVector*>>& ens, int t) {
  require(!ens.empty(), "moment_distance: empty ensemble");
  require(t >= 1, "moment_distance: t >= 1");
  const int n = ens[0].second->num_qubits();
  require(n * t <= 12, "moment_distance: 2^(n t) exceeds the dense cap");
  const std::size_t d = std::size_t{1} << n;
  std::size_t big = 1;
  for (int i = 0; i < t; ++i) big *= d;

  Eigen::MatrixXcd moment = Eigen::MatrixXcd::Zero(big, big);
  for (const auto& [p, s] : ens) {
    require(s->num_qubits() == n, "moment_distance: width mismatch");
    require_normalized(*s);
    Eigen::VectorXcd w(1);
    w(0) = 1.0;
    for (int copy = 0; copy < t; ++copy) {
      Eigen::VectorXcd next(w.size() * d);
      for (Eigen::Index i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
          next[i * d + j] = w[i] * s->amplitude(j);
      w = std::move(next);
    }
    moment += p * (w * w.adjoint());
  }

  // Symmetric-subspace projector, column by column: P|c> spreads uniformly
  // over the rearrangements of c's digit multiset.
  double dim_sym = 1;  // binom(d + t - 1, t)
  for (int i = 1; i <= t; ++i) dim_sym *= (double(d) + t - i) / i;
  const double tfact = factorial(t);
  for (std::size_t c = 0; c < big; ++c) {
    std::vector<int> digits(t);
    std::size_t rem = c;
    for (int i = t - 1; i >= 0; --i) {
      digits[i] = static_cast<int>(rem % d);
      rem /= d;
    }
    std::sort(digits.begin(), digits.end());
    double mults = 1;
    int run = 1;
    for (int i = 1; i <= t; ++i) {
      if (i < t && digits[i] == digits[i - 1]) {
        ++run;
      } else {
        mults *= factorial(run);
        run = 1;
      }
    }
    const double coeff = mults / tfact / dim_sym;
    do {
      std::size_t r = 0;
      for (int i = 0; i < t; ++i) r = r * d + digits[i];
      moment(r, c) -= coeff;
    } while (std::next_permutation(digits.begin(), digits.end()));
  }
  return trace_norm(moment);
}

}  // namespace

double moment_distance(const std::vector<StateVector>& states, int t) {
  std::vector<std::pair<double, const StateVector*>> ens;
  ens.reserve(states.size());
  const double p = states.empty() ? 0.0 : 1.0 / states.size();
  for (const auto& s : states) ens.emplace_back(p, &s);
  return moment_distance_weighted(ens, t);
}

double moment_distance(const ProjectedEnsemble& ensemble, int t) {
  std::vector<std::pair<double, const StateVector*>> ens;
  ens.reserve(ensemble.entries.size());
  for (const auto& [p, s] : ensemble.entries) ens.emplace_back(p, &s);
  return moment_distance_weighted(ens, t);
}

const std::vector<Eigen::Matrix4cd>& su4_generators() {
  static const std::vector<Eigen::Matrix4cd> gens = [] {
    std::vector<Eigen::Matrix4cd> g;
    const cplx im(0, 1);
    for (int j = 0; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) {
        Eigen::Matrix4cd sym = Eigen::Matrix4cd::Zero();
        sym(j, k) = 1;
        sym(k, j) = 1;
        g.push_back(sym);
        Eigen::Matrix4cd asym = Eigen::Matrix4cd::Zero();
        asym(j, k) = -im;
        asym(k, j) = im;
        g.push_back(asym);
      }
    for (int l = 1; l <= 3; ++l) {
      Eigen::Matrix4cd diag = Eigen::Matrix4cd::Zero();
      const double scale = std::sqrt(2.0 / (l * (l + 1.0)));
      for (int i = 0; i < l; ++i) diag(i, i) = scale;
      diag(l, l) = -scale * l;
      g.push_back(diag);
    }
    return g;
  }();
  return gens;
}

Eigen::Matrix4cd gate_from_coordinates(const Eigen::VectorXd& c) {
  require(c.size() == 15, "gate coordinates must have 15 entries");
  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  const auto& gens = su4_generators();
  for (int j = 0; j < 15; ++j) h += c[j] * gens[j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  const cplx im(0, 1);
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases[i] = std::exp(im * es.eigenvalues()[i]);
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

std::vector<GateSlot> brickwork_slots(int m, int d) {
  require(m >= 1 && d >= 0, "brickwork_slots: m >= 1, d >= 0");
  std::vector<GateSlot> slots;
  for (int layer = 0; layer < d; ++layer)
    for (int j = layer % 2; j + 1 < m; j += 2) slots.push_back({layer, j});
  return slots;
}

namespace {

void validate_gpoint(const GPoint& point) {
  require(point.m >= 1 && point.n >= 1 && point.n <= point.m &&
              point.d >= 0,
          "GPoint: need 1 <= n <= m and d >= 0");
  require(point.slots.size() == point.coords.size(),
          "GPoint: one coordinate vector per slot");
  for (const auto& c : point.coords)
    require(c.size() == 15, "GPoint: coordinate vectors must have 15 entries");
}

std::vector<Eigen::Matrix4cd> slot_gates(const GPoint& point) {
  std::vector<Eigen::Matrix4cd> gates;
  gates.reserve(point.coords.size());
  for (const auto& c : point.coords) gates.push_back(gate_from_coordinates(c));
  return gates;
}

Eigen::VectorXcd postselect_output(const StateVector& st, int n) {
  const std::size_t out_dim = std::size_t{1} << n;
  Eigen::VectorXcd out(out_dim);
  for (std::size_t j = 0; j < out_dim; ++j) out[j] = st.amplitude(j);
  return out;
}

Eigen::VectorXcd run_with_gates(const GPoint& point,
                                const std::vector<Eigen::Matrix4cd>& gates) {
  StateVector st(point.m);
  for (std::size_t s = 0; s < point.slots.size(); ++s)
    st.apply_gate(GateMatrix(2, gates[s]),
                  {point.slots[s].left_qubit, point.slots[s].left_qubit + 1});
  return postselect_output(st, point.n);
}

void flatten_into(const Eigen::VectorXcd& out, Eigen::MatrixXd& jac,
                  Eigen::Index col) {
  const Eigen::Index half = out.size();
  for (Eigen::Index r = 0; r < half; ++r) {
    jac(r, col) = out[r].real();
    jac(half + r, col) = out[r].imag();
  }
}

}  // namespace

GPoint random_gpoint(int m, int n, int d, Rng& rng, double sigma) {
  GPoint p;
  p.m = m;
  p.n = n;
  p.d = d;
  p.slots = brickwork_slots(m, d);
  require(n >= 1 && n <= m, "random_gpoint: need 1 <= n <= m");
  p.coords.reserve(p.slots.size());
  for (std::size_t s = 0; s < p.slots.size(); ++s) {
    Eigen::VectorXd c(15);
    for (int j = 0; j < 15; ++j) c[j] = sigma * rng.normal();
    p.coords.push_back(std::move(c));
  }
  return p;
}

GPoint zero_gpoint(int m, int n, int d) {
  GPoint p;
  p.m = m;
  p.n = n;
  p.d = d;
  p.slots = brickwork_slots(m, d);
  require(n >= 1 && n <= m, "zero_gpoint: need 1 <= n <= m");
  p.coords.assign(p.slots.size(), Eigen::VectorXd::Zero(15));
  return p;
}

Eigen::VectorXcd evaluate_G(const GPoint& point) {
  validate_gpoint(point);
  return run_with_gates(point, slot_gates(point));
}

Eigen::MatrixXd jacobian(const GPoint& point) {
  validate_gpoint(point);
  const std::vector<Eigen::Matrix4cd> gates = slot_gates(point);
  const auto& gens = su4_generators();
  const std::size_t num_slots = point.slots.size();
  const Eigen::Index rows = Eigen::Index{2} << point.n;
  Eigen::MatrixXd jac(rows, static_cast<Eigen::Index>(15 * num_slots));

  const cplx im(0, 1);
  StateVector prefix(point.m);
  for (std::size_t s = 0; s < num_slots; ++s) {
    const std::vector<int> targets{point.slots[s].left_qubit,
                                   point.slots[s].left_qubit + 1};
    for (int j = 0; j < 15; ++j) {
      StateVector probe = prefix;
      probe.apply_matrix(gates[s] * (im * Eigen::Matrix4cd(gens[j])),
                         targets);
      for (std::size_t r = s + 1; r < num_slots; ++r)
        probe.apply_gate(GateMatrix(2, gates[r]),
                         {point.slots[r].left_qubit,
                          point.slots[r].left_qubit + 1});
      flatten_into(postselect_output(probe, point.n), jac,
                   static_cast<Eigen::Index>(15 * s + j));
    }
    prefix.apply_gate(GateMatrix(2, gates[s]), targets);
  }
  return jac;
}

Eigen::MatrixXd jacobian_fd(const GPoint& point, double h) {
  validate_gpoint(point);
  require(h > 0, "jacobian_fd: step must be positive");
  const std::vector<Eigen::Matrix4cd> base = slot_gates(point);
  const std::size_t num_slots = point.slots.size();
  const Eigen::Index rows = Eigen::Index{2} << point.n;
  Eigen::MatrixXd jac(rows, static_cast<Eigen::Index>(15 * num_slots));

  std::vector<Eigen::Matrix4cd> gates = base;
  for (std::size_t s = 0; s < num_slots; ++s) {
    for (int j = 0; j < 15; ++j) {
      Eigen::VectorXd step = Eigen::VectorXd::Zero(15);
      step[j] = h;
      gates[s] = base[s] * gate_from_coordinates(step);
      const Eigen::VectorXcd plus = run_with_gates(point, gates);
      step[j] = -h;
      gates[s] = base[s] * gate_from_coordinates(step);
      const Eigen::VectorXcd minus = run_with_gates(point, gates);
      flatten_into((plus - minus) / (2 * h), jac,
                   static_cast<Eigen::Index>(15 * s + j));
    }
    gates[s] = base[s];
  }
  return jac;
}

RankPoint point_rank(const GPoint& point) {
  const Eigen::MatrixXd jac = jacobian(point);
  if (jac.cols() == 0) return {0, true};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  const double top = sv.size() ? sv[0] : 0.0;
  if (top <= 0) return {0, true};
  auto count_above = [&](double threshold) {
    int c = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > threshold) ++c;
    return c;
  };
  RankPoint rp;
  rp.rank = count_above(1e-8 * top);
  rp.threshold_stable = rp.rank == count_above(1e-7 * top) &&
                        rp.rank == count_above(1e-9 * top);
  return rp;
}

int accessible_dimension(int m, int n, int d, Rng& rng, int num_points) {
  require(num_points >= 1, "accessible_dimension: num_points >= 1");
  require(n >= 1 && n <= m, "accessible_dimension: need 1 <= n <= m");
  int best = 0;
  for (int p = 0; p < num_points; ++p) {
    GPoint point;
    bool found = false;
    for (int attempt = 0; attempt < 50; ++attempt) {
      point = random_gpoint(m, n, d, rng);
      if (evaluate_G(point).norm() > 1e-12) {
        found = true;
        break;
      }
    }
    if (!found)
      throw std::runtime_error(
          "accessible_dimension: repeated degenerate points");
    best = std::max(best, point_rank(point).rank);
  }
  return best;
}

ComplexityBound complexity_bound(int m, int n, int d) {
  require(m >= 1 && n >= 1 && d >= 0, "complexity_bound: m, n >= 1, d >= 0");
  ComplexityBound b;
  const double md_term =
      static_cast<double>(m) * d / (2.0 * n * n);
  b.thm_bound =
      std::min(md_term - 2.0 * m, std::pow(2.0, n + 1) - 2.0) / 15.0;
  b.dimension_lower =
      md_term - m * (1.0 + 1.0 / n + 1.0 / (static_cast<double>(n) * n)) - 1.0;
  b.domain_ok = m >= n && n >= 4;
  return b;
}

long long swap_network_gate_count(int n) {
  require(n >= 1, "swap_network_gate_count: n >= 1");
  return 2LL * (static_cast<long long>(n) * n + n);
}

}  // namespace qvol
