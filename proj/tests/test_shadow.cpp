#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "qvol/clifford.hpp"
#include "qvol/rng.hpp"
#include "qvol/shadow.hpp"
#include "qvol/statevector.hpp"

using namespace qvol;

namespace {

DensityMatrix random_density(int dim, Rng& rng) {
  Eigen::MatrixXcd a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = cplx(rng.normal(), rng.normal());
  DensityMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return rho;
}

DensityMatrix pure_density(const StateVector& s) {
  Eigen::Map<const Eigen::VectorXcd> v(s.amplitudes().data(), long(s.dim()));
  return v * v.adjoint();
}

StateVector random_state(int n, Rng& rng) {
  std::vector<cplx> amps(std::size_t(1) << n);
  for (auto& a : amps) a = cplx(rng.normal(), rng.normal());
  StateVector s(n, std::move(amps));
  s.normalize();
  return s;
}

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

PauliString pauli_z() { return PauliString({0}, {1}, 0); }
PauliString pauli_x() { return PauliString({1}, {0}, 0); }

}  // namespace

TEST_CASE("ancilla descriptors reconstruct their states deterministically") {
  const auto& enumerated = enumerate_stabilizer_states(2);
  AncillaEnsemble gs = AncillaEnsemble::global_stab(2);
  StateVector s = reconstruct_ancilla(gs, {17});
  CHECK(fidelity(s, enumerated[17]) == doctest::Approx(1.0));

  AncillaEnsemble ls = AncillaEnsemble::local_stab(2);
  StateVector t = reconstruct_ancilla(ls, {1, 2});
  StateVector expect = tensor(local_stab_states()[1], local_stab_states()[2]);
  CHECK(fidelity(t, expect) == doctest::Approx(1.0));

  AncillaEnsemble hs = AncillaEnsemble::haar(3);
  StateVector h1 = reconstruct_ancilla(hs, {123, 456});
  StateVector h2 = reconstruct_ancilla(hs, {123, 456});
  StateVector h3 = reconstruct_ancilla(hs, {123, 457});
  CHECK(fidelity(h1, h2) == doctest::Approx(1.0));
  CHECK(fidelity(h1, h3) < 0.999);

  CHECK_THROWS_AS(AncillaEnsemble::global_stab(5), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct_ancilla(gs, {60}), std::invalid_argument);
  CHECK(gs.str() != ls.str());
}

TEST_CASE("effective states apply Z^b X^a to the conjugated ancilla") {
  StateVector zero(1);
  CHECK(fidelity(effective_state(zero, {1}, {0}),
                 StateVector::basis(1, {1})) == doctest::Approx(1.0));

  // Z on |+> gives |->.
  StateVector plus(1);
  plus.apply_gate(gates::h(), {0});
  StateVector minus = StateVector::basis(1, {1});
  minus.apply_gate(gates::h(), {0});
  CHECK(fidelity(effective_state(plus, {0}, {1}), minus) ==
        doctest::Approx(1.0));

  // Conjugation flips |+i> to |-i>; X then maps it back up to phase -i.
  StateVector plus_i(1, {cplx(1 / std::sqrt(2.0), 0), cplx(0, 1 / std::sqrt(2.0))});
  StateVector v = effective_state(plus_i, {1}, {0});
  CHECK(fidelity(v, plus_i) == doctest::Approx(1.0));
  CHECK(std::abs(v.amplitude(0) - cplx(0, -1 / std::sqrt(2.0))) < 1e-12);

  // (a,b) = (1,1) on |0>: Z X |0> = -|1>.
  StateVector w = effective_state(zero, {1}, {1});
  CHECK(std::abs(w.amplitude(1) - cplx(-1, 0)) < 1e-12);
}

TEST_CASE("outcome law is uniform on the maximally mixed state") {
  Rng rng(307);
  DensityMatrix rho = DensityMatrix::Identity(2, 2) / 2.0;
  StateVector phi = random_state(1, rng);
  std::vector<double> p = outcome_distribution(rho, phi);
  REQUIRE(p.size() == 4);
  for (double x : p) CHECK(x == doctest::Approx(0.25));
}

TEST_CASE("outcome law packs a before b and matches hand values") {
  // rho = |0><0|, phi = |0>: only outcomes with v = +-|0> survive.
  DensityMatrix rho = DensityMatrix::Zero(2, 2);
  rho(0, 0) = 1;
  std::vector<double> p = outcome_distribution(rho, StateVector(1));
  CHECK(p[0] == doctest::Approx(0.5));   // (a,b) = (0,0)
  CHECK(p[1] == doctest::Approx(0.5));   // (a,b) = (0,1)
  CHECK(p[2] == doctest::Approx(0.0));   // (a,b) = (1,0)
  CHECK(p[3] == doctest::Approx(0.0));
  double sum = 0;
  for (double x : p) sum += x;
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("formula sampling and simulated bell measurement agree in law") {
  Rng rng(311);
  StateVector psi = random_state(1, rng);
  DensityMatrix rho = pure_density(psi);
  AncillaEnsemble ens = AncillaEnsemble::global_stab(1);

  const int trials = 60000;
  std::map<std::pair<unsigned, unsigned>, int> formula, bell;
  Rng r1(1001), r2(1002);
  for (int i = 0; i < trials; ++i) {
    ShadowSample sf = sample_shadow(rho, ens, r1, SampleMode::FormulaDirect);
    ShadowSample sb = sample_shadow(rho, ens, r2, SampleMode::SimulatedBell);
    unsigned of = unsigned(sf.outcome.a[0] * 2 + sf.outcome.b[0]);
    unsigned ob = unsigned(sb.outcome.a[0] * 2 + sb.outcome.b[0]);
    ++formula[{sf.descriptor[0], of}];
    ++bell[{sb.descriptor[0], ob}];
  }
  double tv = 0;
  for (unsigned d = 0; d < 6; ++d)
    for (unsigned o = 0; o < 4; ++o) {
      double pf = double(formula[{d, o}]) / trials;
      double pb = double(bell[{d, o}]) / trials;
      tv += std::abs(pf - pb);
    }
  tv /= 2;
  // 24 cells at 6e4 samples: TV fluctuation ~ sqrt(24 / 6e4) / 2 ~ 0.01.
  CHECK(tv < 0.02);
}

TEST_CASE("batch sampling matches its own single-sample view") {
  Rng rng(313);
  DensityMatrix rho = random_density(4, rng);
  AncillaEnsemble ens = AncillaEnsemble::local_stab(2);
  ShadowBatch batch = sample_shadow_batch(rho, ens, 50, rng);
  REQUIRE(batch.size() == 50);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ShadowSample s = batch.get(i);
    CHECK(s.descriptor.size() == 2);
    CHECK(s.outcome.a.size() == 2);
    // Round trip through the packed representation is lossless.
    StateVector phi = reconstruct_ancilla(s);
    CHECK(std::abs(phi.norm() - 1.0) < 1e-10);
  }
  CHECK_THROWS_AS(
      sample_shadow_batch(rho, AncillaEnsemble::haar(2), 10, rng),
      std::invalid_argument);
}

TEST_CASE("identical seeds reproduce identical batches") {
  Rng a(99);
  DensityMatrix rho = random_density(2, a);
  Rng a2(314), b2(314);
  AncillaEnsemble ens = AncillaEnsemble::global_stab(1);
  ShadowBatch x = sample_shadow_batch(rho, ens, 200, a2);
  ShadowBatch y = sample_shadow_batch(rho, ens, 200, b2);
  CHECK(x.phi == y.phi);
  CHECK(x.outcome == y.outcome);
}

TEST_CASE("global snapshot of |0> with trivial outcome is diag(2,-1)") {
  const auto& states = enumerate_stabilizer_states(1);
  std::uint32_t zero_idx = 0;
  for (std::uint32_t i = 0; i < states.size(); ++i)
    if (fidelity(states[i], StateVector(1)) > 0.999) zero_idx = i;

  ShadowSample s;
  s.ensemble = AncillaEnsemble::global_stab(1);
  s.descriptor = {zero_idx};
  s.outcome.a = {0};
  s.outcome.b = {0};
  DensityMatrix snap = snapshot_global(s);
  CHECK(std::abs(snap(0, 0) - cplx(2, 0)) < 1e-12);
  CHECK(std::abs(snap(1, 1) - cplx(-1, 0)) < 1e-12);
  CHECK(std::abs(snap(0, 1)) < 1e-12);
}

TEST_CASE("snapshots carry unit trace and average toward the state") {
  Rng rng(317);
  StateVector psi = random_state(2, rng);
  DensityMatrix rho = pure_density(psi);
  AncillaEnsemble ens = AncillaEnsemble::global_stab(2);
  ShadowBatch batch = sample_shadow_batch(rho, ens, 10000, rng);
  DensityMatrix mean = DensityMatrix::Zero(4, 4);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    DensityMatrix snap = snapshot_global(batch.get(i));
    CHECK(std::abs(snap.trace().real() - 1.0) < 1e-10);
    mean += snap;
  }
  mean /= double(batch.size());
  CHECK(trace_norm(mean - rho) < 0.15);
}

TEST_CASE("local snapshots factorize and match the rank-one formula") {
  ShadowSample s;
  s.ensemble = AncillaEnsemble::local_stab(2);
  s.descriptor = {1, 2};  // |+>, |+i>
  s.outcome.a = {1, 0};
  s.outcome.b = {0, 1};
  LocalSnapshot snap = snapshot_local(s);
  REQUIRE(snap.factors.size() == 2);

  StateVector phi = reconstruct_ancilla(s);
  StateVector v = effective_state(phi, {1, 0}, {0, 1});
  Eigen::Map<const Eigen::VectorXcd> vv(v.amplitudes().data(), 4);
  // Product of per-qubit inverses equals 3 v v^dag - I applied per factor;
  // check against the explicit Kronecker assembly.
  Eigen::MatrixXcd dense = snap.dense();
  Eigen::Matrix4cd kron;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      kron(r, c) = snap.factors[0](r >> 1, c >> 1) * snap.factors[1](r & 1, c & 1);
  CHECK(max_abs_diff(dense, kron) < 1e-12);
  CHECK(std::abs(dense.trace().real() - 1.0) < 1e-12);

  // Each factor is 3 |psi_q><psi_q| - I for the per-qubit effective state.
  StateVector u0 = effective_state(local_stab_states()[1], {1}, {0});
  Eigen::Map<const Eigen::VectorXcd> u0v(u0.amplitudes().data(), 2);
  Eigen::Matrix2cd f0 = 3.0 * (u0v * u0v.adjoint()) - Eigen::Matrix2cd::Identity();
  CHECK(max_abs_diff(snap.factors[0], f0) < 1e-12);
}

TEST_CASE("observables expose traces, locality, and pauli terms") {
  Observable zz = Observable::from_pauli_sum(
      2, {{1.0, PauliString::from_xz({0, 0}, {1, 1})}});
  CHECK(zz.trace() == doctest::Approx(0.0));
  CHECK(zz.trace_sq() == doctest::Approx(4.0));
  CHECK(zz.locality() == 2);
  CHECK(zz.infinity_norm_bound() == doctest::Approx(1.0));

  // Duplicate patterns merge; identity contributes to the trace.
  Observable o = Observable::from_pauli_sum(
      1, {{1.0, pauli_z()}, {0.5, pauli_z()}, {0.25, PauliString(1)}});
  CHECK(o.pauli_terms().size() == 2);
  CHECK(o.trace() == doctest::Approx(0.5));
  CHECK(o.trace_sq() == doctest::Approx(2 * (1.5 * 1.5 + 0.25 * 0.25)));
  Eigen::MatrixXcd od = o.dense();
  CHECK(std::abs(od(0, 0) - cplx(1.75, 0)) < 1e-12);
  CHECK(std::abs(od(1, 1) - cplx(-1.25, 0)) < 1e-12);

  // Canonical phases fold into signed coefficients: i^3 XZ = -Y.
  Observable folded = Observable::from_pauli_sum(
      1, {{2.0, PauliString({1}, {1}, 3)}});
  Observable minus_y = Observable::from_pauli_sum(
      1, {{-2.0, PauliString({1}, {1}, 1)}});
  CHECK(max_abs_diff(folded.dense(), minus_y.dense()) < 1e-12);

  // Dense round trip through the Pauli expansion.
  Rng rng(331);
  DensityMatrix h = random_density(4, rng);  // Hermitian by construction
  Observable dense_obs = Observable::from_dense(h);
  Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(4, 4);
  for (const PauliTerm& t : dense_obs.pauli_terms())
    rebuilt += t.coeff * t.pauli.dense();
  CHECK(max_abs_diff(rebuilt, h) < 1e-10);
  CHECK(dense_obs.trace_sq() ==
        doctest::Approx((h * h).trace().real()).epsilon(1e-10));

  Eigen::MatrixXcd bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(Observable::from_dense(bad), std::invalid_argument);
  CHECK_THROWS_AS(Observable::from_pauli_sum(
                      1, {{1.0, PauliString({1}, {1}, 0)}}),
                  std::invalid_argument);
}

TEST_CASE("estimation plans follow the variance-and-failure budget") {
  Observable zz = Observable::from_pauli_sum(
      2, {{1.0, PauliString::from_xz({0, 0}, {1, 1})}});
  EstimationPlan loose = plan_estimation({zz}, 0.5, 0.5, EstimatorMode::Global);
  CHECK(loose.B == 480);
  CHECK(loose.K == 3);

  EstimationPlan tight = plan_estimation({zz}, 0.1, 0.01, EstimatorMode::Global);
  CHECK(tight.B == 12000);
  CHECK(tight.K == 11);
  CHECK(tight.total() == 132000);

  // Local plans scale with 4^locality, not the trace.
  Observable z0 = Observable::from_pauli_sum(
      2, {{1.0, PauliString::from_xz({0, 0}, {1, 0})}});
  EstimationPlan local = plan_estimation({z0}, 0.2, 0.05, EstimatorMode::Local);
  CHECK(local.B == 3000);
  CHECK(local.K == 8);  // ceil(2 ln(2/0.05)) = ceil(7.38)

  Observable big = Observable::from_pauli_sum(1, {{2.0, pauli_z()}});
  CHECK_THROWS_AS(plan_estimation({big}, 0.2, 0.05, EstimatorMode::Local),
                  std::invalid_argument);
  CHECK_THROWS_AS(plan_estimation({zz}, 0.0, 0.05, EstimatorMode::Global),
                  std::invalid_argument);
  CHECK_THROWS_AS(plan_estimation({}, 0.2, 0.05, EstimatorMode::Global),
                  std::invalid_argument);
}

TEST_CASE("identity observables are estimated exactly") {
  Rng rng(337);
  DensityMatrix rho = random_density(2, rng);
  ShadowBatch batch =
      sample_shadow_batch(rho, AncillaEnsemble::global_stab(1), 300, rng);
  Observable id = Observable::from_pauli_sum(1, {{1.0, PauliString(1)}});
  EstimationPlan plan{0.5, 0.5, 3, 100};
  std::vector<double> est = estimate_observables(batch, {id}, plan);
  REQUIRE(est.size() == 1);
  CHECK(std::abs(est[0] - 1.0) < 1e-12);
}

TEST_CASE("median of means recovers pauli expectations in both modes") {
  Rng rng(347);
  StateVector psi(2);  // |0>|+>
  psi.apply_gate(gates::h(), {1});
  DensityMatrix rho = pure_density(psi);
  Observable z0 = Observable::from_pauli_sum(
      2, {{1.0, PauliString::from_xz({0, 0}, {1, 0})}});
  Observable x1 = Observable::from_pauli_sum(
      2, {{1.0, PauliString::from_xz({0, 1}, {0, 0})}});

  EstimationPlan gp =
      plan_estimation({z0, x1}, 0.25, 0.05, EstimatorMode::Global);
  ShadowBatch gb = sample_shadow_batch(rho, AncillaEnsemble::global_stab(2),
                                       std::size_t(gp.total()), rng);
  std::vector<double> ge = estimate_observables(gb, {z0, x1}, gp);
  CHECK(std::abs(ge[0] - 1.0) <= 0.25);
  CHECK(std::abs(ge[1] - 1.0) <= 0.25);

  EstimationPlan lp = plan_estimation({z0, x1}, 0.25, 0.05, EstimatorMode::Local);
  ShadowBatch lb = sample_shadow_batch(rho, AncillaEnsemble::local_stab(2),
                                       std::size_t(lp.total()), rng);
  std::vector<double> le = estimate_observables(lb, {z0, x1}, lp);
  CHECK(std::abs(le[0] - 1.0) <= 0.25);
  CHECK(std::abs(le[1] - 1.0) <= 0.25);

  EstimationPlan starved{0.25, 0.05, 4, 1000000};
  CHECK_THROWS_AS(estimate_observables(gb, {z0}, starved),
                  std::invalid_argument);
}

TEST_CASE("a one-group plan reduces to the plain snapshot mean") {
  Rng rng(349);
  DensityMatrix rho = random_density(2, rng);
  ShadowBatch batch =
      sample_shadow_batch(rho, AncillaEnsemble::global_stab(1), 400, rng);
  Observable z = Observable::from_pauli_sum(1, {{1.0, pauli_z()}});
  EstimationPlan plan{0.5, 0.5, 1, 400};
  double est = estimate_observables(batch, {z}, plan)[0];

  double manual = 0;
  Eigen::MatrixXcd zd = z.dense();
  for (std::size_t i = 0; i < batch.size(); ++i)
    manual += (snapshot_global(batch.get(i)) * zd).trace().real();
  manual /= double(batch.size());
  CHECK(est == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("purity estimates separate pure from maximally mixed") {
  Rng rng(353);
  StateVector psi = random_state(1, rng);
  ShadowBatch pure_batch = sample_shadow_batch(
      pure_density(psi), AncillaEnsemble::global_stab(1), 10000, rng);
  CHECK(std::abs(estimate_purity(pure_batch) - 1.0) < 0.05);

  DensityMatrix mixed = DensityMatrix::Identity(2, 2) / 2.0;
  ShadowBatch mixed_batch = sample_shadow_batch(
      mixed, AncillaEnsemble::global_stab(1), 10000, rng);
  CHECK(std::abs(estimate_purity(mixed_batch) - 0.5) < 0.05);

  // Product-ensemble kernel, two qubits.
  StateVector psi2 = random_state(2, rng);
  ShadowBatch local_batch = sample_shadow_batch(
      pure_density(psi2), AncillaEnsemble::local_stab(2), 20000, rng);
  CHECK(std::abs(estimate_purity(local_batch) - 1.0) < 0.1);

  ShadowBatch tiny = sample_shadow_batch(
      mixed, AncillaEnsemble::global_stab(1), 1, rng);
  CHECK_THROWS_AS(estimate_purity(tiny), std::invalid_argument);
}

TEST_CASE("degree-2 polynomial with the swap kernel equals the purity") {
  Rng rng(359);
  DensityMatrix rho = random_density(2, rng);
  ShadowBatch batch =
      sample_shadow_batch(rho, AncillaEnsemble::global_stab(1), 800, rng);
  Eigen::Matrix4cd swap = Eigen::Matrix4cd::Zero();
  swap(0, 0) = swap(3, 3) = 1;
  swap(1, 2) = swap(2, 1) = 1;
  double poly = estimate_polynomial(batch, 2, swap);
  double pur = estimate_purity(batch);
  CHECK(poly == doctest::Approx(pur).epsilon(1e-9));

  // Degree 1 is the snapshot mean.
  Observable z = Observable::from_pauli_sum(1, {{1.0, pauli_z()}});
  double lin = estimate_polynomial(batch, 1, z.dense());
  double manual = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    manual += (snapshot_global(batch.get(i)) * z.dense()).trace().real();
  manual /= double(batch.size());
  CHECK(lin == doctest::Approx(manual).epsilon(1e-12));

  CHECK_THROWS_AS(estimate_polynomial(batch, 3, swap), std::invalid_argument);
}

TEST_CASE("variance proxy bounds the empirical snapshot variance") {
  Rng rng(367);
  Observable z = Observable::from_pauli_sum(1, {{1.0, pauli_z()}});
  CHECK(shadow_norm_bound(z) == doctest::Approx(6.0));

  StateVector psi = random_state(1, rng);
  DensityMatrix rho = pure_density(psi);
  ShadowBatch batch =
      sample_shadow_batch(rho, AncillaEnsemble::global_stab(1), 20000, rng);
  double mean = 0, mean_sq = 0;
  Eigen::MatrixXcd zd = z.dense();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double v = (snapshot_global(batch.get(i)) * zd).trace().real();
    mean += v;
    mean_sq += v * v;
  }
  mean /= double(batch.size());
  mean_sq /= double(batch.size());
  CHECK(mean_sq - mean * mean <= shadow_norm_bound(z) + 0.3);
}

TEST_CASE("depolarizing map interpolates between the state and the identity") {
  Rng rng(373);
  DensityMatrix rho = random_density(2, rng);
  CHECK(max_abs_diff(depolarizing_map(rho, 1.0), rho) < 1e-14);
  CHECK(max_abs_diff(depolarizing_map(rho, 0.0),
                     DensityMatrix::Identity(2, 2) / 2.0) < 1e-14);
  DensityMatrix third = depolarizing_map(rho, 1.0 / 3.0);
  CHECK(max_abs_diff(third, rho / 3.0 + DensityMatrix::Identity(2, 2) / 3.0) <
        1e-14);
}

TEST_CASE("ensemble-averaged effective states depolarize exactly") {
  Rng rng(379);
  // Global ensemble: D_{1/(D+1)} on the whole register.
  for (int n : {1, 2}) {
    int dim = 1 << n;
    DensityMatrix rho = random_density(dim, rng);
    DensityMatrix want = depolarizing_map(rho, 1.0 / (dim + 1.0));
    CHECK(max_abs_diff(
              average_effective_state(rho, AncillaEnsemble::global_stab(n)),
              want) < 1e-10);
  }
  // Local ensemble: a tensor product of single-qubit D_{1/3} maps, i.e.
  // every Pauli coefficient shrinks by (1/3)^weight.
  for (int n : {1, 2}) {
    int dim = 1 << n;
    DensityMatrix rho = random_density(dim, rng);
    DensityMatrix want = DensityMatrix::Zero(dim, dim);
    for (int am = 0; am < dim; ++am)
      for (int bm = 0; bm < dim; ++bm) {
        std::vector<int> ax(std::size_t(n), 0), bz(std::size_t(n), 0);
        int w = 0;
        for (int q = 0; q < n; ++q) {
          ax[std::size_t(q)] = (am >> (n - 1 - q)) & 1;
          bz[std::size_t(q)] = (bm >> (n - 1 - q)) & 1;
          w += (ax[std::size_t(q)] | bz[std::size_t(q)]);
        }
        Eigen::MatrixXcd p = PauliString::from_xz(ax, bz).dense();
        cplx coeff = (p.adjoint() * rho).trace() / double(dim);
        want += coeff * std::pow(1.0 / 3.0, w) * p;
      }
    CHECK(max_abs_diff(
              average_effective_state(rho, AncillaEnsemble::local_stab(n)),
              want) < 1e-10);
  }
}

TEST_CASE("tomographic completeness needs phase-diverse ancillas") {
  CompletenessResult lone =
      check_tomographic_completeness({StateVector(1)}, 1);
  CHECK(!lone.complete);
  CHECK(lone.rank == 2);

  CompletenessResult trio =
      check_tomographic_completeness(local_stab_states(), 1);
  CHECK(trio.complete);
  CHECK(trio.rank == 4);

  // Nine product ancillas span the full two-qubit matrix space.
  std::vector<StateVector> products;
  for (const auto& a : local_stab_states())
    for (const auto& b : local_stab_states()) products.push_back(tensor(a, b));
  CompletenessResult full = check_tomographic_completeness(products, 2);
  CHECK(full.complete);
  CHECK(full.rank == 16);

  // Computational ancillas only reach the diagonal.
  std::vector<StateVector> comp;
  for (int j = 0; j < 4; ++j)
    comp.push_back(StateVector::basis(2, {j >> 1, j & 1}));
  CompletenessResult diag = check_tomographic_completeness(comp, 2);
  CHECK(!diag.complete);
  CHECK(diag.rank == 4);
}

TEST_CASE("sample and batch serialization round-trip") {
  Rng rng(383);
  DensityMatrix rho = random_density(4, rng);
  ShadowSample s = sample_shadow(rho, AncillaEnsemble::global_stab(2), rng);
  ShadowSample back = sample_from_line(sample_to_line(s));
  CHECK(back.descriptor == s.descriptor);
  CHECK(back.outcome.a == s.outcome.a);
  CHECK(back.outcome.b == s.outcome.b);

  ShadowSample h = sample_shadow(rho, AncillaEnsemble::haar(2), rng,
                                 SampleMode::SimulatedBell);
  ShadowSample hb = sample_from_line(sample_to_line(h));
  CHECK(hb.descriptor == h.descriptor);

  ShadowBatch batch =
      sample_shadow_batch(rho, AncillaEnsemble::local_stab(2), 64, rng);
  std::ostringstream os;
  write_batch(os, batch);
  std::istringstream is(os.str());
  ShadowBatch rb = read_batch(is);
  CHECK(rb.phi == batch.phi);
  CHECK(rb.outcome == batch.outcome);

  std::istringstream bad("shadowlog 2\n");
  CHECK_THROWS_AS(read_batch(bad), std::runtime_error);
  CHECK_THROWS_AS(sample_from_line("garbage"), std::runtime_error);
}
