#include "cuemom/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "cuemom/errors.hpp"
#include "cuemom/parallel.hpp"
#include "cuemom/rng.hpp"

namespace cuemom::ensemble {

namespace {

constexpr int kCueReplicas = 8;

void check_s(double s, const char* who) {
  if (!(s > -0.5))
    throw std::domain_error(std::string(who) + ": requires s > -1/2, got s = " +
                            std::to_string(s));
}

void check_h_window(double s, double h, const char* who) {
  if (!(h > -0.5) || h >= s + 0.5)
    throw divergence_error(std::string(who) +
                           ": moment is finite only for -1/2 < h < s + 1/2");
}

void check_config(const ChainConfig& cfg, const char* who) {
  if (cfg.burn_in < 1 || cfg.thinning < 1 || cfg.n_samples < 1 ||
      cfg.replicas < 1 || !(cfg.proposal_scale > 0.0))
    throw std::invalid_argument(std::string(who) +
                                ": chain config fields must be positive");
}

// Keeps the `cap` largest values seen, smallest-on-top so eviction is O(log cap).
class TopBuffer {
 public:
  explicit TopBuffer(std::size_t cap) : cap_(cap) {}
  void push(double v) {
    if (heap_.size() < cap_) {
      heap_.push(v);
    } else if (v > heap_.top()) {
      heap_.pop();
      heap_.push(v);
    }
  }
  std::vector<double> take() {
    std::vector<double> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    return out;
  }

 private:
  std::size_t cap_;
  std::priority_queue<double, std::vector<double>, std::greater<double>> heap_;
};

long hill_k(long total) { return std::clamp(total / 100, 10L, 20000L); }

// The k+1 largest values of the pool, sorted descending.  Returns an empty
// vector when the pool is too small to rank.
std::vector<double> top_slice(std::vector<double> pool, long k) {
  if (k < 2 || static_cast<long>(pool.size()) < k + 1) return {};
  std::nth_element(pool.begin(), pool.begin() + k, pool.end(),
                   std::greater<double>());
  pool.resize(k + 1);
  std::sort(pool.begin(), pool.end(), std::greater<double>());
  return pool;
}

// Hill estimate of the power-law index from a sorted-descending top slice:
// k / sum_{i<k} ln(v_(i) / v_(k+1)).  +infinity means the upper tail is too
// light to measure (zero threshold, vanishing log-excess, or not enough
// points), which never triggers a refusal.
double hill_tail_index(const std::vector<double>& top, long k) {
  if (top.empty() || static_cast<long>(top.size()) < k + 1) return INFINITY;
  const double thr = top[k];
  if (!(thr > 0.0)) return INFINITY;
  double acc = 0.0;
  for (long i = 0; i < k; ++i) acc += std::log(top[i] / thr);
  if (acc <= k * 1e-12) return INFINITY;
  return static_cast<double>(k) / acc;
}

// How much mean mass the measured power-law tail says the sample may be
// missing: the Pareto model with index alpha above the threshold w_(k+1)
// carries mean contribution (k/n) * u * alpha/(alpha-1), and the observed
// counterpart is the top-k average (1/n) sum w_(i).  The absolute gap is a
// dispersion scale for sample means whose variance diverges; it is not a
// bias correction.  An index at or below ~1 signals a (near-)divergent
// mean, where no finite scale is defensible: `cap` is returned.
double tail_deficit(const std::vector<double>& top, long k, double n_total,
                    double alpha, double cap) {
  if (!std::isfinite(alpha)) return 0.0;
  if (top.empty() || static_cast<long>(top.size()) < k + 1) return 0.0;
  if (alpha <= 1.05) return cap;
  const double u = top[k];
  double emp = 0.0;
  for (long i = 0; i < k; ++i) emp += top[i];
  emp /= n_total;
  const double model = (k / n_total) * u * alpha / (alpha - 1.0);
  return std::abs(model - emp);
}

double capped(double v) { return std::min(v, 1e6); }

double meta_or(const MomentEstimate& est, const char* key, double fallback) {
  const auto it = est.metadata.find(key);
  return it == est.metadata.end() ? fallback : it->second;
}

// QR of a standard complex Gaussian matrix gives a Haar factor only after
// the columns are rephased by the unit directions of diag(R); without that
// correction the distribution depends on the QR pivoting convention.
Eigen::MatrixXcd haar_unitary(int N, Rng& rng) {
  Eigen::MatrixXcd A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      A(i, j) = std::complex<double>(rng.gauss(), rng.gauss()) * M_SQRT1_2;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  Eigen::MatrixXcd Q = qr.householderQ();
  const Eigen::MatrixXcd& packed = qr.matrixQR();
  for (int j = 0; j < N; ++j) {
    const std::complex<double> d = packed(j, j);
    const double m = std::abs(d);
    Q.col(j) *= m > 0.0 ? d / m : std::complex<double>(1.0, 0.0);
  }
  return Q;
}

ThetaSample angles_of(const Eigen::MatrixXcd& U) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(U, false);
  if (es.info() != Eigen::Success)
    throw convergence_error("ensemble: unitary eigenvalue iteration failed");
  ThetaSample t;
  t.angles.resize(U.rows());
  for (Eigen::Index j = 0; j < U.rows(); ++j) {
    double a = std::arg(es.eigenvalues()[j]);
    if (a < 0.0) a += 2.0 * M_PI;
    if (a >= 2.0 * M_PI) a = 0.0;
    t.angles[j] = a;
  }
  return t;
}

// ln prod_j 2|sin(theta_j/2)| and sum_j cot(theta_j/2).  theta/2 lies in
// [0, pi), so the sine is nonnegative; the clamp only shields the
// probability-zero angle 0 from producing -infinity or a division by zero.
void angle_statistics(const ThetaSample& th, double& log_v, double& cot_sum) {
  log_v = 0.0;
  cot_sum = 0.0;
  for (double a : th.angles) {
    const double half = 0.5 * a;
    const double sn = std::max(std::sin(half), 1e-300);
    log_v += std::log(2.0 * sn);
    cot_sum += std::cos(half) / sn;
  }
}

double spread_of_means(const std::vector<double>& means, double grand) {
  const std::size_t r = means.size();
  if (r < 2) return 0.0;
  double acc = 0.0;
  for (double m : means) acc += (m - grand) * (m - grand);
  return std::sqrt(acc / (static_cast<double>(r) * (r - 1)));
}

}  // namespace

double dispersion_proxy(const MomentEstimate& est) {
  if (std::isfinite(est.abs_error)) return est.abs_error;
  return std::max(meta_or(est, "replica_spread", INFINITY),
                  meta_or(est, "plugin_se", 0.0)) +
         meta_or(est, "tail_deficit", 0.0);
}

struct HpChain::Impl {
  double s;
  int N;
  ChainConfig cfg;
  std::vector<double> x;
  Rng rng;
  double scale;
  double shift_scale;
  double weight_sum = 0.0;
  int shifts_per_sweep;
  long proposed = 0;
  long accepted = 0;
  long local_proposed = 0;
  long local_accepted = 0;
  long shift_proposed = 0;
  long shift_accepted = 0;

  // Fraction of coordinate proposals drawn at unit scale instead of the
  // adapted local scale.  The adapted scale tracks the bulk spacing, which
  // shrinks like 1/N, so without a fixed-scale component a coordinate out
  // at |x| >> 1 returns only through a long chain of small steps and the
  // tail excursions that carry the heavy moments decorrelate very slowly.
  static constexpr double kWideFraction = 0.15;

  Impl(double s_in, int N_in, const ChainConfig& c)
      : s(s_in),
        N(N_in),
        cfg(c),
        rng(c.seed),
        scale(c.proposal_scale),
        shift_scale(3.0 * c.proposal_scale / N_in),
        shifts_per_sweep(std::max(2, N_in / 8)) {
    // Start on the Cauchy quantiles: distinct, spread through both tails,
    // and independent of the seed so equal seeds give equal streams.
    x.resize(N);
    for (int j = 0; j < N; ++j)
      x[j] = std::tan(M_PI * ((j + 1.0) / (N + 1.0) - 0.5));
    sync_weight_sum();
    int done = 0;
    while (done < cfg.burn_in) {
      const int window = std::min(50, cfg.burn_in - done);
      const long a0 = local_accepted, p0 = local_proposed;
      const long sa0 = shift_accepted, sp0 = shift_proposed;
      for (int t = 0; t < window; ++t) sweep();
      done += window;
      const double rate = static_cast<double>(local_accepted - a0) /
                          static_cast<double>(local_proposed - p0);
      scale = std::clamp(scale * std::exp(1.5 * (rate - 0.4)), 1e-4, 1e4);
      const double srate = static_cast<double>(shift_accepted - sa0) /
                           static_cast<double>(shift_proposed - sp0);
      shift_scale =
          std::clamp(shift_scale * std::exp(1.5 * (srate - 0.4)), 1e-9, 1e4);
      sync_weight_sum();
    }
    proposed = accepted = 0;
    shift_proposed = shift_accepted = 0;
  }

  void sync_weight_sum() {
    weight_sum = 0.0;
    for (int j = 0; j < N; ++j) weight_sum += std::log1p(x[j] * x[j]);
  }

  // One Metropolis pass over all coordinates, followed by a few rigid
  // translation proposals.  The coordinate log acceptance ratio needs
  // prod_{i != j} |p - x_i| / |x_j - x_i|; the ratios are accumulated as a
  // running product and flushed to log space every few factors (or when the
  // magnitude leaves a safe band), which costs one log per group instead of
  // two per factor.
  void sweep() {
    const double exponent = N + s;
    for (int j = 0; j < N; ++j) {
      const double xj = x[j];
      const double p = xj + scale * rng.cauchy();
      const double wp = std::log1p(p * p);
      const double wx = std::log1p(xj * xj);
      double dlog = -exponent * (wp - wx);
      double prod = 1.0;
      int since = 0;
      bool hit = false;
      for (int i = 0; i < N; ++i) {
        if (i == j) continue;
        prod *= (p - x[i]) / (xj - x[i]);
        if (prod == 0.0) {
          hit = true;
          break;
        }
        if (++since == 8 || std::abs(prod) > 1e280 || std::abs(prod) < 1e-280) {
          dlog += 2.0 * std::log(std::abs(prod));
          prod = 1.0;
          since = 0;
        }
      }
      ++proposed;
      if (hit) continue;
      dlog += 2.0 * std::log(std::abs(prod));
      if (dlog >= 0.0 || std::log(rng.uniform_pos()) < dlog) {
        x[j] = p;
        weight_sum += wp - wx;
        ++accepted;
      }
    }
    for (int t = 0; t < shifts_per_sweep; ++t) shift_move();
  }

  // Translating every coordinate by the same delta leaves the Vandermonde
  // factor unchanged, so only the confining weight enters the ratio.  The
  // move drives the mean of the configuration directly, which otherwise
  // decorrelates one O(1/N) coordinate step at a time.
  void shift_move() {
    const double delta = shift_scale * rng.cauchy();
    double shifted = 0.0;
    for (int j = 0; j < N; ++j) {
      const double v = x[j] + delta;
      shifted += std::log1p(v * v);
    }
    ++shift_proposed;
    const double dlog = -(N + s) * (shifted - weight_sum);
    if (dlog >= 0.0 || std::log(rng.uniform_pos()) < dlog) {
      for (int j = 0; j < N; ++j) x[j] += delta;
      weight_sum = shifted;
      ++shift_accepted;
    }
  }
};

HpChain::HpChain(double s, int N, const ChainConfig& cfg) {
  check_s(s, "HpChain");
  if (N < 1) throw std::invalid_argument("HpChain: N must be >= 1");
  check_config(cfg, "HpChain");
  impl_ = std::make_unique<Impl>(s, N, cfg);
}

HpChain::~HpChain() = default;
HpChain::HpChain(HpChain&&) noexcept = default;
HpChain& HpChain::operator=(HpChain&&) noexcept = default;

void HpChain::advance(int sweeps) {
  for (int t = 0; t < sweeps; ++t) impl_->sweep();
}

const std::vector<double>& HpChain::state() const { return impl_->x; }

EigenvalueSample HpChain::next() {
  advance(impl_->cfg.thinning);
  EigenvalueSample out;
  out.points = impl_->x;
  std::sort(out.points.begin(), out.points.end(), std::greater<double>());
  out.origin = SampleOrigin::mcmc;
  return out;
}

double HpChain::acceptance_rate() const {
  return impl_->proposed == 0
             ? 0.0
             : static_cast<double>(impl_->accepted) / impl_->proposed;
}

double HpChain::tuned_scale() const { return impl_->scale; }

std::vector<EigenvalueSample> mcmc_sample_hp(double s, int N,
                                             const ChainConfig& cfg) {
  HpChain chain(s, N, cfg);
  std::vector<EigenvalueSample> out;
  out.reserve(cfg.n_samples);
  for (long i = 0; i < cfg.n_samples; ++i) out.push_back(chain.next());
  return out;
}

ThetaSample cue_sample(int N, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("cue_sample: N must be >= 1");
  Rng rng(seed);
  return angles_of(haar_unitary(N, rng));
}

EigenvalueSample cayley_transform(const ThetaSample& theta) {
  EigenvalueSample out;
  out.points.reserve(theta.angles.size());
  for (double a : theta.angles) {
    if (a == 0.0) a = 1e-300;
    const double half = 0.5 * a;
    out.points.push_back(std::cos(half) / std::sin(half));
  }
  std::sort(out.points.begin(), out.points.end(), std::greater<double>());
  out.origin = SampleOrigin::cue_cayley;
  return out;
}

MomentEstimate joint_moment_cue(double s, double h, int N, long n_samples,
                                std::uint64_t seed) {
  check_s(s, "joint_moment_cue");
  if (N < 1 || N > 64)
    throw std::invalid_argument("joint_moment_cue: N must be in [1, 64]");
  if (n_samples < 16)
    throw std::invalid_argument("joint_moment_cue: n_samples must be >= 16");
  check_h_window(s, h, "joint_moment_cue");

  const long per = (n_samples + kCueReplicas - 1) / kCueReplicas;
  const long k = hill_k(per * kCueReplicas);
  std::vector<double> means(kCueReplicas, 0.0), sq(kCueReplicas, 0.0);
  std::vector<std::vector<double>> tops(kCueReplicas);

  parallel_for(kCueReplicas, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    TopBuffer top(k + 1);
    double acc = 0.0, acc2 = 0.0;
    for (long i = 0; i < per; ++i) {
      const ThetaSample th = angles_of(haar_unitary(N, rng));
      double log_v = 0.0, cot = 0.0;
      angle_statistics(th, log_v, cot);
      double lw = 2.0 * s * log_v;
      if (h != 0.0)
        lw += 2.0 * h * (std::log(std::max(std::abs(cot), 1e-300)) - M_LN2);
      const double w = std::exp(lw);
      acc += w;
      acc2 += w * w;
      top.push(w);
    }
    means[r] = acc / per;
    sq[r] = acc2 / per;
    tops[r] = top.take();
  });

  std::vector<double> pool;
  for (const auto& t : tops) pool.insert(pool.end(), t.begin(), t.end());
  const std::vector<double> top = top_slice(std::move(pool), k);
  const double alpha = hill_tail_index(top, k);

  double grand = 0.0, grand_sq = 0.0;
  for (int r = 0; r < kCueReplicas; ++r) {
    grand += means[r];
    grand_sq += sq[r];
  }
  grand /= kCueReplicas;
  grand_sq /= kCueReplicas;
  const double n_tot = static_cast<double>(per) * kCueReplicas;
  const double spread = spread_of_means(means, grand);
  const double plugin =
      std::sqrt(std::max(grand_sq - grand * grand, 0.0) / (n_tot - 1.0));

  MomentEstimate est;
  est.value = grand;
  est.method = Method::cue_direct;
  est.metadata["n_total"] = n_tot;
  est.metadata["replicas"] = kCueReplicas;
  est.metadata["replica_spread"] = spread;
  est.metadata["plugin_se"] = plugin;
  est.metadata["hill_weight_index"] = capped(alpha);
  if (alpha <= 2.0) {
    est.abs_error = INFINITY;
    est.metadata["tail_deficit"] =
        tail_deficit(top, k, n_tot, alpha, std::abs(grand));
    est.warnings.push_back(
        "standard error withheld: weight tail index <= 2 implies infinite "
        "estimator variance; metadata replica_spread, plugin_se and "
        "tail_deficit hold the observed dispersion");
  } else {
    est.abs_error = std::max(spread, plugin);
  }
  if (h > s + 0.4)
    est.warnings.push_back(
        "h within 0.1 of the divergence edge s + 1/2: heavy-tailed weights, "
        "expect slow convergence");
  if (h < 0.0)
    est.warnings.push_back(
        "h < 0 lies in the conjectural extension of the admissible range");
  return est;
}

MomentEstimate abs_moment_mcmc(double s, double h, int N,
                               const ChainConfig& cfg) {
  check_s(s, "abs_moment_mcmc");
  if (N < 1) throw std::invalid_argument("abs_moment_mcmc: N must be >= 1");
  check_config(cfg, "abs_moment_mcmc");
  check_h_window(s, h, "abs_moment_mcmc");
  if (h == 0.0) {
    MomentEstimate est;
    est.value = 1.0;
    est.abs_error = 0.0;
    est.method = Method::mcmc;
    est.metadata["n_total"] = 0.0;
    return est;
  }

  const int R = cfg.replicas;
  const long per = (cfg.n_samples + R - 1) / R;
  const long k = hill_k(per * R);
  const double p2h = 2.0 * h;
  std::vector<double> means(R, 0.0), sq(R, 0.0), sum_means(R, 0.0);
  std::vector<double> acc_rates(R, 0.0), scales(R, 0.0);
  std::vector<std::vector<double>> tops_hi(R), tops_lo(R);

  parallel_for(R, [&](std::size_t r) {
    ChainConfig local = cfg;
    local.seed = derive_seed(cfg.seed, r);
    HpChain chain(s, N, local);
    TopBuffer hi(k + 1), lo(k + 1);
    double acc_w = 0.0, acc_w2 = 0.0, acc_sum = 0.0;
    for (long i = 0; i < per; ++i) {
      chain.advance(cfg.thinning);
      const std::vector<double>& x = chain.state();
      double sum = 0.0;
      for (double v : x) sum += v;
      const double a = std::abs(sum);
      double w;
      if (p2h == 1.0)
        w = a;
      else if (p2h == 2.0)
        w = a * a;
      else
        w = std::pow(std::max(a, 1e-300), p2h);
      acc_w += w;
      acc_w2 += w * w;
      acc_sum += sum;
      hi.push(a);
      if (h < 0.0) lo.push(1.0 / std::max(a, 1e-300));
    }
    means[r] = acc_w / per;
    sq[r] = acc_w2 / per;
    sum_means[r] = acc_sum / per;
    acc_rates[r] = chain.acceptance_rate();
    scales[r] = chain.tuned_scale();
    tops_hi[r] = hi.take();
    if (h < 0.0) tops_lo[r] = lo.take();
  });

  std::vector<double> pool_hi;
  for (const auto& t : tops_hi) pool_hi.insert(pool_hi.end(), t.begin(), t.end());
  const std::vector<double> top_abs = top_slice(std::move(pool_hi), k);
  const double beta = hill_tail_index(top_abs, k);

  // The largest weights sit where the monotone map a -> a^(2h) (or, for
  // h < 0, (1/a) -> (1/a)^(-2h)) sends the buffered extremes, so the weight
  // tail index and the weight top slice both come from the same buffers.
  double alpha_w;
  std::vector<double> top_w;
  if (h > 0.0) {
    alpha_w = beta / p2h;
    top_w = top_abs;
    for (double& v : top_w) v = std::pow(v, p2h);
  } else {
    std::vector<double> pool_lo;
    for (const auto& t : tops_lo)
      pool_lo.insert(pool_lo.end(), t.begin(), t.end());
    top_w = top_slice(std::move(pool_lo), k);
    alpha_w = hill_tail_index(top_w, k) / (-p2h);
    for (double& v : top_w) v = std::pow(v, -p2h);
  }

  double grand = 0.0, grand_sq = 0.0, grand_sum = 0.0;
  for (int r = 0; r < R; ++r) {
    grand += means[r];
    grand_sq += sq[r];
    grand_sum += sum_means[r];
  }
  grand /= R;
  grand_sq /= R;
  grand_sum /= R;
  const double n_tot = static_cast<double>(per) * R;
  const double spread = spread_of_means(means, grand);
  const double plugin =
      std::sqrt(std::max(grand_sq - grand * grand, 0.0) / (n_tot - 1.0));

  MomentEstimate est;
  est.value = grand;
  est.method = Method::mcmc;
  est.metadata["n_total"] = n_tot;
  est.metadata["replicas"] = R;
  est.metadata["replica_spread"] = spread;
  est.metadata["plugin_se"] = plugin;
  est.metadata["hill_tail_index"] = capped(beta);
  est.metadata["hill_weight_index"] = capped(alpha_w);
  est.metadata["sum_mean"] = grand_sum;
  est.metadata["sum_mean_se"] = spread_of_means(sum_means, grand_sum);
  est.metadata["acceptance_min"] =
      *std::min_element(acc_rates.begin(), acc_rates.end());
  est.metadata["acceptance_max"] =
      *std::max_element(acc_rates.begin(), acc_rates.end());
  est.metadata["scale_min"] = *std::min_element(scales.begin(), scales.end());
  est.metadata["scale_max"] = *std::max_element(scales.begin(), scales.end());
  if (alpha_w <= 2.0) {
    est.abs_error = INFINITY;
    est.metadata["tail_deficit"] =
        tail_deficit(top_w, k, n_tot, alpha_w, std::abs(grand));
    est.warnings.push_back(
        "standard error withheld: |sum x| tail index indicates infinite "
        "variance of the averaged weight; metadata replica_spread, plugin_se "
        "and tail_deficit hold the observed dispersion");
  } else {
    est.abs_error = std::max(spread, plugin);
  }
  if (h > s + 0.4)
    est.warnings.push_back(
        "h within 0.1 of the divergence edge s + 1/2: heavy-tailed weights, "
        "expect slow convergence");
  if (h < 0.0)
    est.warnings.push_back(
        "h < 0 lies in the conjectural extension of the admissible range");
  return est;
}

MomentEstimate abs_moment_limit(double s, double h,
                                const std::vector<int>& N_grid,
                                const ChainConfig& cfg) {
  check_s(s, "abs_moment_limit");
  if (h < 0.0)
    throw std::invalid_argument("abs_moment_limit: requires h >= 0");
  if (h >= s + 0.5)
    throw divergence_error(
        "abs_moment_limit: moment is finite only for h < s + 1/2");
  check_config(cfg, "abs_moment_limit");
  if (h == 0.0) {
    MomentEstimate est;
    est.value = 1.0;
    est.abs_error = 0.0;
    est.method = Method::closed_form;
    return est;
  }
  std::vector<int> grid = N_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.size() < 3)
    throw std::invalid_argument("abs_moment_limit: need at least three grid levels");
  if (grid.front() < 1)
    throw std::invalid_argument("abs_moment_limit: grid levels must be >= 1");
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw std::invalid_argument("abs_moment_limit: grid levels must be distinct");

  const std::size_t n = grid.size();
  std::vector<double> y(n), sig(n);
  bool any_refused = false;
  std::vector<std::string> level_warnings;
  for (std::size_t i = 0; i < n; ++i) {
    ChainConfig local = cfg;
    local.seed = derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(grid[i]));
    const MomentEstimate lev = abs_moment_mcmc(s, h, grid[i], local);
    const double scale = std::pow(grid[i], -2.0 * h);
    y[i] = lev.value * scale;
    const double raw = dispersion_proxy(lev);
    any_refused |= !std::isfinite(lev.abs_error);
    sig[i] = std::max(raw * scale, std::max(1e-12, 1e-9 * std::abs(y[i])));
    for (const std::string& w : lev.warnings)
      if (std::find(level_warnings.begin(), level_warnings.end(), w) ==
          level_warnings.end())
        level_warnings.push_back(w);
  }

  // Two-parameter weighted least squares for y = a + b / N.
  double S = 0.0, Su = 0.0, Sy = 0.0, Suu = 0.0, Suy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wt = 1.0 / (sig[i] * sig[i]);
    const double u = 1.0 / grid[i];
    S += wt;
    Su += wt * u;
    Sy += wt * y[i];
    Suu += wt * u * u;
    Suy += wt * u * y[i];
  }
  const double det = S * Suu - Su * Su;
  const double a = (Suu * Sy - Su * Suy) / det;
  const double b = (S * Suy - Su * Sy) / det;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = (y[i] - a - b / grid[i]) / sig[i];
    chi2 += res * res;
  }
  const double chi2_dof = chi2 / (n - 2);
  if (chi2_dof > 25.0)
    throw convergence_error(
        "abs_moment_limit: 1/N extrapolation unreliable, level residuals "
        "exceed the error budget (chi2/dof = " +
        std::to_string(chi2_dof) + ")");

  MomentEstimate est;
  est.value = a;
  est.abs_error = std::sqrt(Suu / det) * std::max(1.0, std::sqrt(chi2_dof));
  est.method = Method::mcmc;
  est.metadata["chi2_dof"] = chi2_dof;
  est.metadata["slope"] = b;
  est.metadata["levels"] = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    est.metadata["E_" + std::to_string(grid[i])] = y[i];
    est.metadata["se_" + std::to_string(grid[i])] = sig[i];
  }
  est.warnings = level_warnings;
  if (any_refused)
    est.warnings.push_back(
        "per-level standard errors were withheld (heavy tail); the fit is "
        "weighted by observed replica spreads instead");
  return est;
}

DiagonalCheck pearson_diagonal_check(double s, int n, std::uint64_t seed) {
  if (s != 0.0)
    throw std::invalid_argument(
        "pearson_diagonal_check: only s = 0 has a matrix-level sampler "
        "(Cayley transform of a Haar unitary)");
  if (n < 100)
    throw std::invalid_argument("pearson_diagonal_check: n must be >= 100");
  constexpr int D = 16;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(D, D);
  std::vector<double> d0(n), d7(n);
  double worst = 0.0;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXcd U = haar_unitary(D, rng);
    // (I+U) and (I-U)^(-1) commute, so i (I+U)(I-U)^(-1) = i (I-U)^(-1)(I+U);
    // the latter is one LU solve.
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(I - U);
    const Eigen::MatrixXcd H = std::complex<double>(0.0, 1.0) * lu.solve(I + U);
    double tr = 0.0;
    for (int j = 0; j < D; ++j) tr += H(j, j).real();
    // The eigenvalues of this Cayley convention are -cot(theta_j / 2):
    // i (1 + e^(i theta)) / (1 - e^(i theta)) = -cot(theta / 2).  The law is
    // unchanged (theta -> 2 pi - theta is a Haar symmetry), but the trace
    // identity must use the matching sign.
    const ThetaSample th = angles_of(U);
    double log_v = 0.0, cot = 0.0;
    angle_statistics(th, log_v, cot);
    worst = std::max(worst, std::abs(tr + cot) / (1.0 + std::abs(cot)));
    d0[i] = H(0, 0).real();
    d7[i] = H(7, 7).real();
  }

  std::sort(d0.begin(), d0.end());
  double ks1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double F = 0.5 + std::atan(d0[i]) / M_PI;
    ks1 = std::max(ks1, std::max((i + 1.0) / n - F, F - static_cast<double>(i) / n));
  }

  std::vector<double> e7 = d7;
  std::sort(e7.begin(), e7.end());
  double ks2 = 0.0;
  {
    std::size_t i = 0, j = 0;
    while (i < d0.size() && j < e7.size()) {
      if (d0[i] <= e7[j])
        ++i;
      else
        ++j;
      ks2 = std::max(ks2, std::abs(static_cast<double>(i) / n -
                                   static_cast<double>(j) / n));
    }
  }

  DiagonalCheck out;
  out.ks_statistic = ks1;
  out.ks_critical = 1.628 / std::sqrt(static_cast<double>(n));
  out.two_sample_ks = ks2;
  out.two_sample_critical = 1.628 * std::sqrt(2.0 / n);
  out.max_trace_error = worst;
  out.n_draws = n;
  out.dim = D;
  return out;
}

void write_sample_csv(std::ostream& os,
                      const std::vector<EigenvalueSample>& samples) {
  if (samples.empty()) return;
  const std::size_t N = samples.front().points.size();
  for (std::size_t j = 0; j < N; ++j) os << "x" << (j + 1) << ",";
  os << "sum\n";
  char buf[32];
  for (const EigenvalueSample& s : samples) {
    if (s.points.size() != N)
      throw std::invalid_argument("write_sample_csv: ragged sample list");
    double sum = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      sum += s.points[j];
      std::snprintf(buf, sizeof buf, "%.17g", s.points[j]);
      os << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", sum);
    os << buf << "\n";
  }
}

}  // namespace cuemom::ensemble
