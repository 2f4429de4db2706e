#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "cuemom/moment_estimate.hpp"

namespace cuemom::ensemble {

// Stochastic routes to the same moments the deterministic modules compute:
// Metropolis sampling of the N-point eigenvalue measure with weight
// prod_j (1+x_j^2)^{-(N+s)} times the squared Vandermonde, direct simulation
// of Haar-unitary eigenangles, and the Cayley bridge x = cot(theta/2) between
// the two.  Everything is seed-deterministic: the same inputs produce
// bit-identical outputs regardless of thread count, because replicas draw
// from seeds derived with derive_seed(master, index) and are reduced in
// index order.

enum class SampleOrigin { mcmc, cue_cayley };

// One eigenvalue configuration, sorted non-increasing.
struct EigenvalueSample {
  std::vector<double> points;
  SampleOrigin origin = SampleOrigin::mcmc;
};

// Eigenangles of a unitary matrix, each reduced to [0, 2pi).
struct ThetaSample {
  std::vector<double> angles;
};

// Knobs for the Metropolis chain.  n_samples is the total kept across all
// replicas; each replica keeps ceil(n_samples / replicas).  proposal_scale
// is only the starting value: burn-in tunes it toward ~0.4 acceptance and
// freezes it before the first kept sample, so the kept stream comes from a
// fixed transition kernel.
struct ChainConfig {
  std::uint64_t seed = 20260817;
  int burn_in = 2000;
  int thinning = 4;
  double proposal_scale = 1.0;
  long n_samples = 20000;
  int replicas = 8;
};

// Single-coordinate random-walk Metropolis chain targeting the log-density
//   2 sum_{i<j} ln|x_i - x_j| - (N+s) sum_j ln(1+x_j^2).
// Proposals are Cauchy-shaped steps, matching the tail weight of the target
// so that excursions into the tails are actually proposed.  The constructor
// runs the burn-in (with scale tuning) before returning; next() advances
// `thinning` sweeps and snapshots the state.
class HpChain {
 public:
  // Throws std::domain_error for s <= -1/2, std::invalid_argument for
  // N < 1 or a nonpositive config field.
  HpChain(double s, int N, const ChainConfig& cfg);
  ~HpChain();
  HpChain(HpChain&&) noexcept;
  HpChain& operator=(HpChain&&) noexcept;

  EigenvalueSample next();
  void advance(int sweeps);
  const std::vector<double>& state() const;

  // Fraction of accepted proposals after burn-in; 0 before any post-burn-in
  // sweep has run.  Auto-tuning aims at 0.4.
  double acceptance_rate() const;
  // The frozen step scale the burn-in settled on.
  double tuned_scale() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Materialized stream of cfg.n_samples states from a single chain seeded
// with cfg.seed.  Identical cfg gives a bit-identical stream.
std::vector<EigenvalueSample> mcmc_sample_hp(double s, int N,
                                             const ChainConfig& cfg);

// Eigenangles of one Haar-distributed N x N unitary: a complex Gaussian
// matrix is QR-factored and the Q columns are rephased by the signs of the
// diagonal of R, which makes the factor exactly Haar rather than merely
// orthonormal.  One draw per call; pass distinct seeds for distinct draws.
ThetaSample cue_sample(int N, std::uint64_t seed);

// x_j = cot(theta_j / 2), sorted non-increasing.  An angle of exactly zero
// (a probability-zero event) is perturbed to 1e-300 instead of producing an
// infinite point.  For Haar input the result follows the s = 0 eigenvalue
// measure.
EigenvalueSample cayley_transform(const ThetaSample& theta);

// Monte Carlo estimate of the joint moment at finite N directly from
// unitary samples: the averaged weight is
//   |V(0)|^(2s) * (|sum_j cot(theta_j/2)| / 2)^(2h),
// with |V(0)| = prod_j 2|sin(theta_j/2)|, which equals
// |V(0)|^(2s-2h) |V'(0)|^(2h) because V'(0) = V(0) * (-1/2) sum cot.
// Finite for -1/2 < h < s + 1/2 only; h >= s + 1/2 throws divergence_error
// and h <= -1/2 as well.  Negative h is accepted but flagged as the
// conjectural extension of that range.  N <= 64.
//
// abs_error is the larger of the between-replica standard error and the
// plug-in standard error from the sample variance.  When the Hill tail
// index of the weight distribution indicates a divergent estimator
// variance, the standard error is withheld (abs_error = +infinity, with a
// warning); metadata["replica_spread"] and metadata["plugin_se"] still
// record the observed dispersion.
MomentEstimate joint_moment_cue(double s, double h, int N, long n_samples,
                                std::uint64_t seed);

// The usable dispersion scale of an estimate from this module: abs_error
// when finite, otherwise the larger of the replica spread and the plug-in
// standard error, widened by the Pareto tail-completion gap (metadata
// "tail_deficit": the mean mass the fitted power-law tail says the sample
// may be missing).  In the withheld-error regime this is a self-normalized
// scale, not a Gaussian standard error; confidence statements built on it
// are indicative.
double dispersion_proxy(const MomentEstimate& est);

// Monte Carlo estimate of E_N[ |x_1 + ... + x_N|^(2h) ] under the N-point
// eigenvalue measure, by Metropolis sampling (replicated per cfg).  Finite
// for -1/2 < h < s + 1/2.  Error policy matches joint_moment_cue: the Hill
// index is measured on |sum x| and the standard error is withheld when
// E[|sum x|^(4h)] diverges.  metadata also reports the acceptance-rate range
// across replicas and the mean of sum x with its spread (the target law is
// symmetric, so that mean must vanish within noise).
MomentEstimate abs_moment_mcmc(double s, double h, int N,
                               const ChainConfig& cfg);

// Estimates E_N[ |(x_1+...+x_N)/N|^(2h) ] on every N in N_grid and
// extrapolates N -> infinity with the two-parameter fit E_N = E_inf + c/N,
// weighted by the per-level errors.  The model is heuristic (the underlying
// convergence theorem carries no rate), so the fit residual is folded into
// the returned error and a residual budget is enforced: when the levels
// disagree with the 1/N shape by more than the budget allows, throws
// convergence_error instead of returning a number.  Requires 0 <= h < s+1/2
// and at least three grid levels.  h = 0 returns exactly 1.
MomentEstimate abs_moment_limit(double s, double h,
                                const std::vector<int>& N_grid,
                                const ChainConfig& cfg);

// Diagnostics for the diagonal entries of H = i (I + U)(I - U)^(-1) with U
// Haar on U(16): every diagonal entry of H follows the s = 0 one-point law
// (a standard Cauchy), the entries are exchangeable, and trace H equals the
// sum of H's eigenvalues, which for this convention are -cot(theta_j / 2)
// over the eigenangles of U.
struct DiagonalCheck {
  double ks_statistic;        // sup distance, entry (0,0) vs Cauchy CDF
  double ks_critical;         // 1% asymptotic one-sample critical value
  double two_sample_ks;       // entry (0,0) vs entry (7,7) empirical laws
  double two_sample_critical; // 1% two-sample critical value, equal sizes
  double max_trace_error;     // max_i |tr H + sum cot| / (1 + |sum cot|)
  int n_draws;
  int dim;
};

// Draws n Haar unitaries at dimension 16 and runs the checks above.  Only
// s = 0 is supported: the Cayley route is the only matrix-level sampler
// here, and it realizes exactly that case.  Throws std::invalid_argument
// for s != 0 or n < 100.
DiagonalCheck pearson_diagonal_check(double s, int n, std::uint64_t seed);

// One CSV row per sample: the N points (columns x1..xN, non-increasing)
// followed by their sum, the statistic every moment above averages.
void write_sample_csv(std::ostream& os,
                      const std::vector<EigenvalueSample>& samples);

}  // namespace cuemom::ensemble
