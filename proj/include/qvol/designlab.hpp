#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qvol/ensembles.hpp"
#include "qvol/rng.hpp"
#include "qvol/statevector.hpp"

namespace qvol {

/// Outcome-indexed ensemble obtained by measuring part of a pure state:
/// entries are (branch probability, normalized residual state).
struct ProjectedEnsemble {
  std::vector<std::pair<double, StateVector>> entries;
};

/// Measures the first `num_measured` qubits of an m-qubit state in the
/// computational basis and collects every outcome branch.  Zero-probability
/// branches (weight <= 1e-15) are dropped; the remaining probabilities sum
/// to 1 within 1e-10 for a normalized input.  Requires
/// 1 <= num_measured < m.
ProjectedEnsemble projected_ensemble(const StateVector& state,
                                     int num_measured);

/// (1/N^2) sum_{i,j} |<psi_i|psi_j>|^(2t) over a uniform ensemble of
/// normalized equal-width states.  t >= 1.
double frame_potential(const std::vector<StateVector>& states, int t);

/// Probability-weighted variant: sum_{i,j} p_i p_j |<psi_i|psi_j>|^(2t).
double frame_potential(const ProjectedEnsemble& ensemble, int t);

/// Haar t-th frame potential on n qubits: t!(D-1)!/(D+t-1)! with D = 2^n.
double haar_frame_potential(int n, int t);

/// Trace-norm distance between the ensemble's t-th moment operator
/// sum_i p_i (|psi_i><psi_i|)^(tensor t) and the Haar moment operator
/// (symmetric-subspace projector / dim).  Requires 2^(n t) <= 4096.
double moment_distance(const std::vector<StateVector>& states, int t);
double moment_distance(const ProjectedEnsemble& ensemble, int t);

/// The 15 generalized Gell-Mann generators of su(4): traceless Hermitian,
/// orthogonal with tr(G_a G_b) = 2 delta_ab.
const std::vector<Eigen::Matrix4cd>& su4_generators();

/// exp(i sum_j c[j] G_j) for a 15-real coordinate vector.
Eigen::Matrix4cd gate_from_coordinates(const Eigen::VectorXd& c);

/// One two-qubit gate slot of an (m,d) brickwork: layer index and the upper
/// qubit of the pair it acts on.
struct GateSlot {
  int layer;
  int left_qubit;
};

/// The populated gate slots of an (m,d) brickwork, in application order
/// (layer-major).  Layers alternate offset layer%2; a slot exists whenever
/// both qubits of the pair fit on the register.
std::vector<GateSlot> brickwork_slots(int m, int d);

/// A point of the parameter space of the postselected brickwork map: one
/// 15-coordinate vector per populated gate slot.  The map sends the
/// coordinates to the unnormalized n-qubit vector obtained by running the
/// circuit on |0^m> and projecting the first m-n qubits onto 0...0.
struct GPoint {
  int m = 0;
  int n = 0;
  int d = 0;
  std::vector<GateSlot> slots;
  std::vector<Eigen::VectorXd> coords;  // one 15-vector per slot
};

/// A GPoint with all coordinates drawn i.i.d. N(0, sigma^2).
GPoint random_gpoint(int m, int n, int d, Rng& rng, double sigma = 1.0);

/// A GPoint with every coordinate zero (identity gates).
GPoint zero_gpoint(int m, int n, int d);

/// Evaluates the map: (<0^(m-n)| (x) I) U(coords) |0^m>, an unnormalized
/// complex vector of length 2^n whose squared norm is the postselection
/// probability (exactly 1 when m == n).
Eigen::VectorXcd evaluate_G(const GPoint& point);

/// Real Jacobian of the map at `point`, as a 2^(n+1) x (15 * slots) matrix:
/// rows stack Re over Im of the output; column (s, j) is the derivative
/// along the left-invariant direction gate_s -> gate_s exp(i eps G_j),
/// computed analytically by inserting i G_j into the circuit.
Eigen::MatrixXd jacobian(const GPoint& point);

/// Same directions by central finite differences with step h (oracle for
/// the analytic version).
Eigen::MatrixXd jacobian_fd(const GPoint& point, double h = 1e-5);

/// Numeric rank of the Jacobian at one point: singular values above
/// 1e-8 * sigma_max.  `threshold_stable` records whether the count is
/// unchanged when the threshold is multiplied and divided by 10.
struct RankPoint {
  int rank = 0;
  bool threshold_stable = true;
};
RankPoint point_rank(const GPoint& point);

/// Max numeric Jacobian rank over `num_points` random Gaussian points
/// (generic-rank lower bound).  Points whose output vector is numerically
/// zero are resampled (bounded retries).  d = 0 gives rank 0.
int accessible_dimension(int m, int n, int d, Rng& rng, int num_points);

/// Circuit-complexity lower bound and the accessible-dimension lower bound
/// L for an (m,n,d) postselected brickwork.  `domain_ok` is false outside
/// m >= n >= 4, where the formula values are still returned raw.
struct ComplexityBound {
  double thm_bound = 0;
  double dimension_lower = 0;
  bool domain_ok = false;
};
ComplexityBound complexity_bound(int m, int n, int d);

/// Gate count of the swap-ladder routing construction on n qubits:
/// 2(n^2 + n).  Pure accounting, not simulated.
long long swap_network_gate_count(int n);

}  // namespace qvol
