#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "qvol/clifford.hpp"
#include "qvol/designlab.hpp"
#include "qvol/ensembles.hpp"
#include "qvol/rng.hpp"
#include "qvol/statevector.hpp"

using namespace qvol;

namespace {

StateVector random_state(int n, Rng& rng) {
  std::vector<cplx> amps(std::size_t(1) << n);
  for (auto& a : amps) a = cplx(rng.normal(), rng.normal());
  StateVector s(n, std::move(amps));
  s.normalize();
  return s;
}

}  // namespace

TEST_CASE("projected choi ensembles enumerate the gate columns") {
  Rng rng(401);
  ChoiSample cs = sample_choi(2, 3, rng);
  ProjectedEnsemble pe = projected_ensemble(cs.state, 2);
  REQUIRE(pe.entries.size() == 4);
  for (int j = 0; j < 4; ++j) {
    CHECK(pe.entries[std::size_t(j)].first == doctest::Approx(0.25));
    StateVector col = StateVector::basis(2, {j >> 1, j & 1});
    cs.circuit.apply(col);
    CHECK(fidelity(pe.entries[std::size_t(j)].second, col) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("projection drops zero-weight branches and keeps the simplex") {
  // Product state: only one branch.
  StateVector prod = tensor(StateVector::basis(1, {1}), StateVector(2));
  ProjectedEnsemble pe = projected_ensemble(prod, 1);
  REQUIRE(pe.entries.size() == 1);
  CHECK(pe.entries[0].first == doctest::Approx(1.0));
  CHECK(std::abs(pe.entries[0].second.amplitude(0) - cplx(1, 0)) < 1e-12);

  // GHZ: measuring the first qubit leaves |00> or |11> at half weight.
  StateVector ghz(3);
  ghz.apply_gate(gates::h(), {0});
  ghz.apply_gate(gates::cnot(), {0, 1});
  ghz.apply_gate(gates::cnot(), {1, 2});
  ProjectedEnsemble gpe = projected_ensemble(ghz, 1);
  REQUIRE(gpe.entries.size() == 2);
  CHECK(gpe.entries[0].first == doctest::Approx(0.5));
  CHECK(fidelity(gpe.entries[0].second, StateVector(2)) ==
        doctest::Approx(1.0));
  CHECK(fidelity(gpe.entries[1].second, StateVector::basis(2, {1, 1})) ==
        doctest::Approx(1.0));

  Rng rng(409);
  StateVector hs = random_state(3, rng);
  ProjectedEnsemble rpe = projected_ensemble(hs, 2);
  double total = 0;
  for (const auto& e : rpe.entries) {
    total += e.first;
    CHECK(std::abs(e.second.norm() - 1.0) < 1e-10);
  }
  CHECK(std::abs(total - 1.0) < 1e-10);

  CHECK_THROWS_AS(projected_ensemble(hs, 0), std::invalid_argument);
  CHECK_THROWS_AS(projected_ensemble(hs, 3), std::invalid_argument);
}

TEST_CASE("frame potential of a singleton ensemble is one") {
  StateVector s(2);
  for (int t = 1; t <= 3; ++t)
    CHECK(frame_potential(std::vector<StateVector>{s}, t) ==
          doctest::Approx(1.0));
  CHECK_THROWS_AS(frame_potential(std::vector<StateVector>{}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(frame_potential(std::vector<StateVector>{s}, 0),
                  std::invalid_argument);
}

TEST_CASE("haar frame potentials follow the exact formula") {
  CHECK(haar_frame_potential(1, 1) == doctest::Approx(0.5));
  CHECK(haar_frame_potential(1, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(haar_frame_potential(2, 1) == doctest::Approx(0.25));
  CHECK(haar_frame_potential(2, 2) == doctest::Approx(0.1));
  CHECK(haar_frame_potential(2, 3) == doctest::Approx(6.0 / 120.0));
}

TEST_CASE("haar samples saturate the frame potential bound") {
  Rng rng(419);
  std::vector<StateVector> states;
  for (int i = 0; i < 60; ++i)
    states.push_back(sample_state(EnsembleSpec::haar_states(1), rng));
  // N = 60 Haar states: E fp_t ~ haar + O(1/N); allow generous slack but
  // require the defining lower bound.
  for (int t : {1, 2}) {
    double fp = frame_potential(states, t);
    CHECK(fp >= haar_frame_potential(1, t) - 1e-9);
    CHECK(fp < haar_frame_potential(1, t) + 0.1);
  }
}

TEST_CASE("frozen moment distances for the product and stabilizer ensembles") {
  // Computational basis: exact 1-design, distance 2/3 at t = 2.
  std::vector<StateVector> comp = {StateVector(1), StateVector::basis(1, {1})};
  CHECK(moment_distance(comp, 1) < 1e-10);
  CHECK(moment_distance(comp, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

  // Single-qubit stabilizer states: exact 3-design, broken at t = 4.
  const auto& stab1 = enumerate_stabilizer_states(1);
  CHECK(moment_distance(stab1, 3) < 1e-10);
  CHECK(moment_distance(stab1, 4) == doctest::Approx(0.2).epsilon(1e-5));

  // Two-qubit stabilizer states remain a 3-design.
  const auto& stab2 = enumerate_stabilizer_states(2);
  CHECK(moment_distance(stab2, 3) < 1e-10);

  // {|0>, |+>, |+i>} is not even a 1-design: its mean state is
  // I/2 + (X+Y+Z)/6, which sits at trace distance 1/sqrt(3) from I/2.
  const auto& prod = local_stab_states();
  CHECK(moment_distance(prod, 1) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-10));
  CHECK(frame_potential(prod, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(frame_potential(prod, 3) == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
  CHECK(moment_distance(prod, 2) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(2e-3));

  // Design property in the frame-potential metric.
  CHECK(frame_potential(stab1, 3) ==
        doctest::Approx(haar_frame_potential(1, 3)).epsilon(1e-12));
  CHECK(frame_potential(stab1, 4) > haar_frame_potential(1, 4) + 1e-6);

  CHECK_THROWS_AS(moment_distance(comp, 13), std::invalid_argument);
}

TEST_CASE("su4 generators are an orthogonal traceless hermitian basis") {
  const auto& gens = su4_generators();
  REQUIRE(gens.size() == 15);
  for (std::size_t a = 0; a < gens.size(); ++a) {
    CHECK(std::abs(gens[a].trace()) < 1e-12);
    CHECK((gens[a] - gens[a].adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t b = 0; b < gens.size(); ++b) {
      double want = (a == b) ? 2.0 : 0.0;
      CHECK(std::abs((gens[a] * gens[b]).trace().real() - want) < 1e-10);
      CHECK(std::abs((gens[a] * gens[b]).trace().imag()) < 1e-10);
    }
  }
}

TEST_CASE("coordinate gates exponentiate the generator sum") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(15);
  CHECK((gate_from_coordinates(zero) - Eigen::Matrix4cd::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  Rng rng(431);
  Eigen::VectorXd c(15);
  for (int j = 0; j < 15; ++j) c[j] = rng.normal();
  Eigen::Matrix4cd u = gate_from_coordinates(c);
  CHECK((u * u.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() <
        1e-12);

  // First-order expansion: exp(i eps G) ~ I + i eps G.
  const auto& gens = su4_generators();
  Eigen::VectorXd step = Eigen::VectorXd::Zero(15);
  const double eps = 1e-6;
  step[3] = eps;
  Eigen::Matrix4cd expanded = gate_from_coordinates(step);
  Eigen::Matrix4cd linear =
      Eigen::Matrix4cd::Identity() + cplx(0, eps) * gens[3];
  CHECK((expanded - linear).cwiseAbs().maxCoeff() < 1e-11);

  CHECK_THROWS_AS(gate_from_coordinates(Eigen::VectorXd::Zero(14)),
                  std::invalid_argument);
}

TEST_CASE("brickwork slot grids respect offsets and boundaries") {
  std::vector<GateSlot> narrow = brickwork_slots(2, 4);
  REQUIRE(narrow.size() == 2);  // odd layers are empty on two qubits
  CHECK(narrow[0].layer == 0);
  CHECK(narrow[1].layer == 2);

  std::vector<GateSlot> grid = brickwork_slots(5, 2);
  REQUIRE(grid.size() == 4);
  CHECK(grid[0].layer == 0);
  CHECK(grid[0].left_qubit == 0);
  CHECK(grid[1].left_qubit == 2);
  CHECK(grid[2].layer == 1);
  CHECK(grid[2].left_qubit == 1);
  CHECK(grid[3].left_qubit == 3);

  CHECK(brickwork_slots(3, 0).empty());
}

TEST_CASE("the zero point evaluates to the all-zero output") {
  GPoint p = zero_gpoint(4, 2, 3);
  Eigen::VectorXcd out = evaluate_G(p);
  REQUIRE(out.size() == 4);
  CHECK(std::abs(out[0] - cplx(1, 0)) < 1e-12);
  CHECK(out.tail(3).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("evaluation preserves norm exactly when nothing is projected out") {
  Rng rng(433);
  GPoint p = random_gpoint(2, 2, 3, rng);
  CHECK(std::abs(evaluate_G(p).norm() - 1.0) < 1e-12);

  // With projection the squared norm is a probability.
  GPoint q = random_gpoint(4, 2, 3, rng);
  double nn = evaluate_G(q).squaredNorm();
  CHECK(nn > 0.0);
  CHECK(nn < 1.0 + 1e-12);
}

TEST_CASE("analytic jacobian matches central differences") {
  Rng rng(439);
  for (auto [m, n, d] : {std::tuple<int, int, int>{4, 2, 3},
                         std::tuple<int, int, int>{3, 1, 2}}) {
    GPoint p = random_gpoint(m, n, d, rng);
    Eigen::MatrixXd ja = jacobian(p);
    Eigen::MatrixXd jf = jacobian_fd(p);
    REQUIRE(ja.rows() == jf.rows());
    REQUIRE(ja.cols() == jf.cols());
    CHECK(ja.rows() == 2L << n);
    CHECK(ja.cols() == 15L * long(p.slots.size()));
    double rel = (ja - jf).norm() / std::max(1e-30, ja.norm());
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("jacobian ranks hit the frozen plateau table") {
  // Independently tabulated by finite differences: n = 1 plateaus at 4;
  // n = 2 plateaus at 7 for m = 2 (normalized output sphere) and 8 above.
  Rng rng(443);
  CHECK(accessible_dimension(2, 2, 0, rng, 4) == 0);
  CHECK(accessible_dimension(2, 2, 3, rng, 4) == 7);
  CHECK(accessible_dimension(3, 2, 2, rng, 4) == 8);
  CHECK(accessible_dimension(2, 1, 1, rng, 4) == 4);
  CHECK(accessible_dimension(3, 1, 1, rng, 4) == 2);
  CHECK(accessible_dimension(3, 1, 2, rng, 4) == 4);

  GPoint p = random_gpoint(2, 2, 2, rng);
  RankPoint rp = point_rank(p);
  CHECK(rp.rank == 7);
  CHECK(rp.threshold_stable);
}

TEST_CASE("rank growth is monotone in depth") {
  Rng rng(449);
  int prev = 0;
  for (int d = 0; d <= 4; ++d) {
    int r = accessible_dimension(3, 2, d, rng, 3);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("complexity bounds reproduce the frozen table rows") {
  ComplexityBound b = complexity_bound(4, 4, 160);
  CHECK(b.domain_ok);
  CHECK(b.thm_bound == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(b.dimension_lower == doctest::Approx(13.75).epsilon(1e-12));

  ComplexityBound c = complexity_bound(6, 4, 100);
  CHECK(c.domain_ok);
  CHECK(c.thm_bound == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(c.dimension_lower == doctest::Approx(9.875).epsilon(1e-12));

  // Outside the asymptotic domain the raw formula values are still exposed.
  ComplexityBound d = complexity_bound(3, 2, 10);
  CHECK(!d.domain_ok);

  ComplexityBound e = complexity_bound(4, 4, 0);
  CHECK(e.domain_ok);
  CHECK(e.thm_bound < 0.0);
}

TEST_CASE("swap ladder accounting") {
  CHECK(swap_network_gate_count(1) == 4);
  CHECK(swap_network_gate_count(2) == 12);
  CHECK(swap_network_gate_count(4) == 40);
}
