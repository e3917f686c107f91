#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qvol/clifford.hpp"
#include "qvol/ensembles.hpp"
#include "qvol/pauli.hpp"
#include "qvol/rng.hpp"
#include "qvol/statevector.hpp"
#include "qvol/teleport.hpp"

namespace qvol {

/// Ancilla ensemble for Bell-measurement tomography.
/// GlobalStab draws uniformly from the canonical stabilizer-state
/// enumeration (an exact 3-design); LocalStab draws each qubit from
/// {|0>, |+>, |+i>}; Haar draws a Haar-random state (kept as an option —
/// it is also a 3-design, but sampling is slower and not replay-compact).
struct AncillaEnsemble {
  enum class Kind { GlobalStab, LocalStab, Haar };

  Kind kind = Kind::GlobalStab;
  int n = 0;

  static AncillaEnsemble global_stab(int n);
  static AncillaEnsemble local_stab(int n);
  static AncillaEnsemble haar(int n);

  std::string str() const;
};

/// One Bell-measurement shot.  The descriptor reconstructs the ancilla
/// state deterministically: GlobalStab stores the enumeration index,
/// LocalStab one index in {0,1,2} per qubit, Haar a 64-bit seed split into
/// two words.
struct ShadowSample {
  AncillaEnsemble ensemble;
  std::vector<std::uint32_t> descriptor;
  BellOutcome outcome;
};

enum class SampleMode { FormulaDirect, SimulatedBell };

/// Rebuilds |phi> from an ensemble and descriptor.
StateVector reconstruct_ancilla(const AncillaEnsemble& ens,
                                const std::vector<std::uint32_t>& descriptor);
StateVector reconstruct_ancilla(const ShadowSample& sample);

/// The effective measured state Z^b X^a |phi*> (conjugation entrywise in
/// the computational basis).
StateVector effective_state(const StateVector& phi, const std::vector<int>& a,
                            const std::vector<int>& b);

/// Outcome law for a fixed ancilla: p_ab = 2^{-n} <phi*| X^a Z^b rho Z^b X^a
/// |phi*>, indexed by (a_mask << n) | b_mask with qubit q at bit q.
std::vector<double> outcome_distribution(const DensityMatrix& rho,
                                         const StateVector& phi);

/// Draws (phi, outcome).  FormulaDirect samples the outcome law above;
/// SimulatedBell Bell-measures |phi> against an eigenvector of rho drawn
/// with its eigenvalue weight.  The two modes agree in distribution.
ShadowSample sample_shadow(const DensityMatrix& rho,
                           const AncillaEnsemble& ensemble, Rng& rng,
                           SampleMode mode = SampleMode::FormulaDirect);

/// Compact column layout for large sample counts: packed descriptors and
/// packed outcomes ((a_mask << n) | b_mask).  Stabilizer ensembles only.
struct ShadowBatch {
  AncillaEnsemble ensemble;
  std::vector<std::uint32_t> phi;
  std::vector<std::uint16_t> outcome;

  std::size_t size() const { return phi.size(); }
  ShadowSample get(std::size_t i) const;
};

ShadowBatch sample_shadow_batch(const DensityMatrix& rho,
                                const AncillaEnsemble& ensemble,
                                std::size_t count, Rng& rng,
                                SampleMode mode = SampleMode::FormulaDirect);

/// Global snapshot (2^n + 1)|b><b| - I; unit trace by construction.
/// Requires a 3-design ensemble (GlobalStab or Haar).
DensityMatrix snapshot_global(const ShadowSample& sample);

/// Local snapshot kept factored: one 2x2 factor 3|psi_q><psi_q| - I per
/// qubit.  Requires the LocalStab ensemble.
struct LocalSnapshot {
  std::vector<Eigen::Matrix2cd> factors;
  Eigen::MatrixXcd dense() const;  // n <= 12
};
LocalSnapshot snapshot_local(const ShadowSample& sample);

/// Hermitian observable, either dense or a real-weighted Pauli sum.
struct PauliTerm {
  double coeff;
  PauliString pauli;
};

class Observable {
 public:
  static Observable from_dense(Eigen::MatrixXcd mat);
  static Observable from_pauli_sum(int num_qubits, std::vector<PauliTerm> terms);

  int num_qubits() const { return num_qubits_; }
  bool is_pauli_sum() const { return is_pauli_sum_; }
  int locality() const { return locality_; }
  double infinity_norm_bound() const { return infinity_norm_bound_; }

  double trace() const;
  double trace_sq() const;  ///< tr(O^2)
  Eigen::MatrixXcd dense() const;
  /// Pauli decomposition (the stored sum, or an exact expansion of the
  /// dense form for n <= 6).
  std::vector<PauliTerm> pauli_terms() const;

 private:
  Observable() = default;
  bool is_pauli_sum_ = false;
  int num_qubits_ = 0;
  int locality_ = 0;
  double infinity_norm_bound_ = 0;
  Eigen::MatrixXcd mat_;
  std::vector<PauliTerm> terms_;
};

enum class EstimatorMode { Global, Local };

/// Median-of-means plan: B = ceil(30 max_i tr(O_i^2) / eps^2) in global
/// mode, ceil(30 max_i 4^{k_i} / eps^2) in local mode; K = ceil(2 ln(2M/d)).
struct EstimationPlan {
  double epsilon = 0;
  double delta = 0;
  long long K = 0;
  long long B = 0;
  long long total() const { return K * B; }
};

EstimationPlan plan_estimation(const std::vector<Observable>& observables,
                               double epsilon, double delta,
                               EstimatorMode mode);

/// Median-of-means estimates of tr(O_i rho): K groups of floor(N/K)
/// samples, group means, median across groups.  The estimator mode follows
/// the batch's ensemble kind.
std::vector<double> estimate_observables(const ShadowBatch& batch,
                                         const std::vector<Observable>& observables,
                                         const EstimationPlan& plan);

/// Degree-2 U-statistic for tr(rho^2) using the pairwise snapshot overlap
/// identity; no 4^n-dimensional object is formed.
double estimate_purity(const ShadowBatch& batch);

/// Degree-k U-statistic of a dense observable on k state copies
/// (k in {1, 2}; k=1 is the plain snapshot mean).
double estimate_polynomial(const ShadowBatch& batch, int degree,
                           const Eigen::MatrixXcd& obs_on_copies);

/// Variance proxy 3 tr(O^2) for the centered shadow estimator.
double shadow_norm_bound(const Observable& o);

/// D_p(rho) = p rho + (1 - p) tr(rho) I / 2^n.
DensityMatrix depolarizing_map(const DensityMatrix& rho, double p);

/// Exact expectation of |b><b| over the full ensemble and all outcomes;
/// equals D_{1/(2^n+1)}(rho) for the 3-design and product ensembles.
DensityMatrix average_effective_state(const DensityMatrix& rho,
                                      const AncillaEnsemble& ensemble);

/// Rank of the real span of {X^a Z^b |phi><phi| Z^b X^a} plus the identity
/// inside Hermitian matrix space; complete iff rank = 4^n (n <= 4).
struct CompletenessResult {
  bool complete;
  int rank;
};
CompletenessResult check_tomographic_completeness(
    const std::vector<StateVector>& ancillas, int n);

/// One sample per line: kind, n, descriptor CSV, outcome bit masks in hex.
std::string sample_to_line(const ShadowSample& sample);
ShadowSample sample_from_line(const std::string& line);
void write_batch(std::ostream& os, const ShadowBatch& batch);
ShadowBatch read_batch(std::istream& is);

}  // namespace qvol
