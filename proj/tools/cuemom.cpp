// Command-line front end for the joint-moment library.
//
// Subcommands: exact, moment, limit, kernel, fredholm, painleve, verify.
// Scalar results are JSON with a stable schema: the keys command, config,
// value, error, method, and route are always present, and config echoes every
// resolved option (defaults included) so a result file is self-describing.
// Sample streams and scans are CSV with the same echo in # comment lines.
//
// Exit codes: 0 success, 2 usage or domain error, 3 numerical
// non-convergence, 4 verification failure.
//
// A --config <file> before the subcommand reads key=value lines grouped in
// [subcommand] sections; command-line flags override file values.  If
// CUEMOM_OUT_DIR is set, relative --output paths are placed under it.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cuemom/ensemble.hpp"
#include "cuemom/errors.hpp"
#include "cuemom/exact_moments.hpp"
#include "cuemom/hp_quadrature.hpp"
#include "cuemom/limit_kernel.hpp"
#include "cuemom/moment_estimate.hpp"
#include "cuemom/painleve.hpp"
#include "cuemom/parallel.hpp"
#include "cuemom/rng.hpp"
#include "cuemom/verify.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace cuemom;

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string resolve_output(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* dir = std::getenv("CUEMOM_OUT_DIR");
  if (!dir || !*dir) return path;
  return std::string(dir) + "/" + path;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const std::string full = resolve_output(path);
  std::ofstream f(full);
  if (!f) throw std::invalid_argument("cannot open output file: " + full);
  f << text;
}

void emit_json(const json& j, const std::string& output) {
  write_text(output, j.dump(2) + "\n");
}

// Shared JSON skeleton; metadata and warnings from a MomentEstimate.
json result_json(const std::string& command, const json& config,
                 const MomentEstimate& est, const std::string& route) {
  json j;
  j["command"] = command;
  j["config"] = config;
  j["value"] = finite_or_null(est.value);
  j["error"] = finite_or_null(est.abs_error);
  j["method"] = method_name(est.method);
  j["route"] = route;
  if (!std::isfinite(est.abs_error)) {
    j["error_withheld"] = true;
    j["dispersion"] = finite_or_null(ensemble::dispersion_proxy(est));
  }
  json meta = json::object();
  for (const auto& [k, v] : est.metadata) meta[k] = finite_or_null(v);
  j["metadata"] = meta;
  j["warnings"] = est.warnings;
  return j;
}

std::string csv_header_comment(const json& config) {
  std::string s = "# command echo:";
  for (const auto& [k, v] : config.items())
    s += " " + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
  return s + "\n";
}

// ---- subcommand option bags -------------------------------------------

struct ChainOpts {
  std::uint64_t seed = 20260817;
  int burn_in = 2000;
  int thinning = 4;
  double proposal_scale = 1.0;
  long samples = 200000;
  int replicas = 8;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master seed for all replica streams")
        ->capture_default_str();
    cmd->add_option("--burn-in", burn_in, "tuning sweeps before sampling")
        ->capture_default_str();
    cmd->add_option("--thinning", thinning, "sweeps between retained samples")
        ->capture_default_str();
    cmd->add_option("--proposal-scale", proposal_scale,
                    "initial Cauchy proposal scale")
        ->capture_default_str();
    cmd->add_option("--samples", samples, "total samples across replicas")
        ->capture_default_str();
    cmd->add_option("--replicas", replicas, "independent chains")
        ->capture_default_str();
  }

  ensemble::ChainConfig config() const {
    ensemble::ChainConfig cfg;
    cfg.seed = seed;
    cfg.burn_in = burn_in;
    cfg.thinning = thinning;
    cfg.proposal_scale = proposal_scale;
    cfg.n_samples = samples;
    cfg.replicas = replicas;
    return cfg;
  }

  void echo(json& config) const {
    config["seed"] = seed;
    config["burn_in"] = burn_in;
    config["thinning"] = thinning;
    config["proposal_scale"] = proposal_scale;
    config["samples"] = samples;
    config["replicas"] = replicas;
  }
};

// ---- exact --------------------------------------------------------------

struct ExactCmd {
  double s = 0.0;
  int N = 0;  // 0 = limit only
  std::string output;

  int run() const {
    json config{{"s", s}, {"threads", max_threads()}};
    if (N > 0) config["N"] = N;
    const double limit = exact_moments::F_limit_s0(s);
    const auto a = exact_moments::arithmetic_constant(s);

    MomentEstimate est;
    est.value = N > 0 ? exact_moments::F_N_s0(s, N) : limit;
    est.abs_error = 1e-13 * std::abs(est.value);
    est.method = Method::closed_form;
    json j = result_json("exact", config, est, "barnes_g");
    if (N > 0) {
      j["F_N"] = est.value;
      j["log_c_N"] = exact_moments::log_c_N(s, N);
    }
    j["F_limit"] = limit;
    j["arithmetic_constant"] = {{"value", a.value},
                                {"truncation_error", a.truncation_error},
                                {"primes_used", a.primes_used}};
    emit_json(j, output);
    return 0;
  }
};

// ---- moment ---------------------------------------------------------------

struct MomentCmd {
  double s = 0.0, h = 0.0;
  int N = 1;
  std::string method = "quadrature";
  int order = 0;
  ChainOpts chain;
  std::string output;
  std::string dump_samples;
  long dump_count = 1000;

  int run() const {
    json config{{"s", s},      {"h", h},
                {"N", N},      {"method", method},
                {"order", order}, {"threads", max_threads()}};
    chain.echo(config);

    MomentEstimate est;
    double value_scale = 1.0;
    if (method == "quadrature") {
      est = joint_moment_quadrature(s, h, N, order);
    } else if (method == "cue") {
      est = ensemble::joint_moment_cue(s, h, N, chain.samples, chain.seed);
    } else {
      // mcmc samples E_N[|sum x|^{2h}]; the joint moment follows from the
      // eigenvalue-measure factorization F_N(s,0) 2^{-2h} E_N[...].
      est = ensemble::abs_moment_mcmc(s, h, N, chain.config());
      value_scale = exact_moments::F_N_s0(s, N) * std::pow(2.0, -2.0 * h);
    }

    MomentEstimate scaled = est;
    scaled.value = value_scale * est.value;
    scaled.abs_error = value_scale * est.abs_error;
    json j = result_json("moment", config, scaled, method);
    if (value_scale != 1.0) {
      j["abs_moment"] = est.value;
      j["factor"] = value_scale;
      if (!std::isfinite(est.abs_error))
        j["dispersion"] = value_scale * ensemble::dispersion_proxy(est);
    }
    emit_json(j, output);

    if (!dump_samples.empty()) dump(config);
    return 0;
  }

  void dump(const json& config) const {
    std::vector<ensemble::EigenvalueSample> stream;
    if (method == "cue") {
      stream.reserve(static_cast<std::size_t>(dump_count));
      for (long i = 0; i < dump_count; ++i)
        stream.push_back(ensemble::cayley_transform(
            ensemble::cue_sample(N, derive_seed(chain.seed, i))));
    } else {
      ensemble::ChainConfig cfg = chain.config();
      cfg.n_samples = dump_count;
      stream = ensemble::mcmc_sample_hp(s, N, cfg);
    }
    std::ostringstream os;
    os << csv_header_comment(config);
    ensemble::write_sample_csv(os, stream);
    write_text(dump_samples, os.str());
  }
};

// ---- limit ---------------------------------------------------------------

struct LimitCmd {
  double s = 0.0, h = 0.0;
  std::string route = "mcmc_extrapolate";
  std::vector<int> grid{25, 50, 100, 200};
  ChainOpts chain;
  double R = 50.0;
  int nodes = 3000;
  std::string output;

  int run() const {
    json config{{"s", s},        {"h", h},     {"route", route},
                {"R", R},        {"nodes", nodes},
                {"threads", max_threads()}};
    chain.echo(config);
    config["grid"] = grid;

    // Every route measures E[|X|^{2h}] of the limiting statistic; the
    // limiting joint moment adds the closed-form prefactor.
    const double factor = exact_moments::F_limit_s0(s) * std::pow(2.0, -2.0 * h);
    MomentEstimate abs_moment;
    if (route == "mcmc_extrapolate") {
      abs_moment = ensemble::abs_moment_limit(s, h, grid, chain.config());
    } else if (route == "kernel_variance") {
      if (std::abs(h - 1.0) > 1e-12)
        throw std::invalid_argument("kernel_variance route requires h = 1");
      abs_moment = limit_kernel::variance_via_kernel(s, R, nodes);
    } else if (route == "painleve") {
      const int hi = static_cast<int>(std::lround(h));
      if (std::abs(h - hi) > 1e-12 || hi < 1)
        throw std::invalid_argument("painleve route requires integer h >= 1");
      abs_moment = painleve::even_moment_via_series(s, hi);
    } else {
      const int hi = static_cast<int>(std::lround(h));
      const int si = static_cast<int>(std::lround(s));
      if (std::abs(h - hi) > 1e-12 || std::abs(s - si) > 1e-12)
        throw std::invalid_argument(
            "bessel_det route requires integer s and h");
      abs_moment = painleve::even_moment_via_besseldet(si, hi);
    }

    MomentEstimate scaled = abs_moment;
    scaled.value = factor * abs_moment.value;
    scaled.abs_error = factor * abs_moment.abs_error;
    json j = result_json("limit", config, scaled, route);
    j["abs_moment"] = finite_or_null(abs_moment.value);
    j["factor"] = factor;
    if (!std::isfinite(abs_moment.abs_error))
      j["dispersion"] = factor * ensemble::dispersion_proxy(abs_moment);
    j["zeta_prediction"] =
        exact_moments::zeta_prediction(s, h, abs_moment.value);
    emit_json(j, output);
    return 0;
  }
};

// ---- kernel ----------------------------------------------------------------

struct KernelCmd {
  double s = 0.0;
  double x = std::numeric_limits<double>::quiet_NaN();
  double y = std::numeric_limits<double>::quiet_NaN();
  bool moments = false;
  bool spectrum = false;
  double h = 1.0;
  double R = 50.0;
  double eps = 1e-2;
  int nodes = 700;
  std::string output;

  int run() const {
    json config{{"s", s}, {"threads", max_threads()}};
    MomentEstimate est;
    est.method = Method::kernel;
    std::string route;
    json extra = json::object();

    if (moments) {
      config["h"] = h;
      config["R"] = R;
      const limit_kernel::TailBulk tb = limit_kernel::moment_integrals(s, h, R);
      est.value = tb.tail;
      est.abs_error = tb.tail_error;
      route = "diagonal_moments";
      extra = {{"tail", tb.tail},
               {"tail_error", tb.tail_error},
               {"bulk", tb.bulk},
               {"bulk_error", tb.bulk_error}};
    } else if (spectrum) {
      config["eps"] = eps;
      config["R"] = R;
      config["nodes"] = nodes;
      const limit_kernel::NystromOperator op =
          limit_kernel::nystrom_operator(s, eps, R, nodes);
      const auto n = static_cast<Eigen::Index>(op.nodes.size());
      Eigen::Map<const Eigen::MatrixXd> m(op.sym.data(), n, n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                        Eigen::EigenvaluesOnly);
      est.value = es.eigenvalues().maxCoeff();
      est.abs_error = 0.0;
      route = "nystrom_spectrum";
      extra = {{"eig_min", es.eigenvalues().minCoeff()},
               {"eig_max", es.eigenvalues().maxCoeff()},
               {"dim", static_cast<long>(n)},
               {"trace", m.trace()}};
    } else if (std::isfinite(x) && std::isfinite(y)) {
      config["x"] = x;
      config["y"] = y;
      est.value = limit_kernel::kernel_eval(s, x, y);
      est.abs_error = 1e-12 * std::abs(est.value);
      route = "pointwise";
    } else if (std::isfinite(x)) {
      config["x"] = x;
      est.value = limit_kernel::kernel_diagonal(s, x);
      est.abs_error = 1e-13 * std::abs(est.value);
      route = "diagonal";
    } else {
      throw std::invalid_argument(
          "kernel: give --x [--y], or --moments, or --spectrum");
    }

    json j = result_json("kernel", config, est, route);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    emit_json(j, output);
    return 0;
  }
};

// ---- fredholm ---------------------------------------------------------------

struct FredholmCmd {
  double s = 0.0;
  double t = 0.0;
  double R = 30.0;
  int nodes = 2600;
  double eps = 0.0;  // 0 = extrapolate over the eps schedule
  std::string scan;  // "a:b:step"
  std::string output;

  static std::vector<double> parse_scan(const std::string& spec) {
    double a = 0.0, b = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
        step <= 0.0 || b < a)
      throw std::invalid_argument("scan spec must be a:b:step with step > 0");
    std::vector<double> ts;
    for (double v = a; v <= b + 1e-12; v += step) ts.push_back(v);
    return ts;
  }

  int run() const {
    json config{{"s", s},       {"R", R},
                {"nodes", nodes}, {"eps", eps},
                {"threads", max_threads()}};
    if (!scan.empty()) {
      config["scan"] = scan;
      std::ostringstream os;
      os << csv_header_comment(config) << "t,re_phi,im_phi,spread\n";
      bool all_converged = true;
      for (double tv : parse_scan(scan)) {
        const limit_kernel::FredholmChar fc =
            limit_kernel::fredholm_char_extrapolated(s, tv, R, nodes);
        all_converged = all_converged && fc.converged;
        char line[160];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", tv,
                      fc.value.real(), fc.value.imag(), fc.spread);
        os << line;
      }
      write_text(output, os.str());
      return all_converged ? 0 : 3;
    }

    config["t"] = t;
    MomentEstimate est;
    est.method = Method::kernel;
    bool converged = true;
    std::complex<double> phi;
    if (eps > 0.0) {
      phi = limit_kernel::fredholm_char_function(s, t, eps, R, nodes);
      est.abs_error = 0.0;
    } else {
      const limit_kernel::FredholmChar fc =
          limit_kernel::fredholm_char_extrapolated(s, t, R, nodes);
      phi = fc.value;
      est.abs_error = fc.spread;
      converged = fc.converged;
    }
    est.value = phi.real();
    json j = result_json("fredholm", config, est, "fredholm_det");
    j["im_phi"] = phi.imag();
    j["converged"] = converged;
    emit_json(j, output);
    return converged ? 0 : 3;
  }
};

// ---- painleve ---------------------------------------------------------------

struct PainleveCmd {
  double s = 0.0;
  int h = 0;           // > 0: even moment
  std::string route = "series";
  double t_end = 0.0;  // > 0: emit the continuation table
  double t_start = 0.05;
  double tol = 1e-9;
  int K = 24;
  int N = 0;  // > 0: finite-N relation residual
  std::vector<double> t_grid{0.1, 0.25, 0.5, 0.75, 1.0};
  double fd_step = 1e-3;
  int order = 24;
  std::string output;

  int run() const {
    json config{{"s", s}, {"K", K}, {"threads", max_threads()}};

    if (t_end > 0.0) {
      config["t_start"] = t_start;
      config["t_end"] = t_end;
      config["tol"] = tol;
      const PowerSeries tau = painleve::sigma_piii_series(s, K);
      const auto table =
          painleve::integrate_sigma(s, tau, t_start, t_end, tol);
      std::ostringstream os;
      os << csv_header_comment(config) << "t,xi,residual\n";
      for (const auto& p : table) {
        char line[128];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.t, p.value,
                      p.residual);
        os << line;
      }
      write_text(output, os.str());
      return 0;
    }

    if (N > 0) {
      config["N"] = N;
      config["t_grid"] = t_grid;
      config["fd_step"] = fd_step;
      config["order"] = order;
      const double res = painleve::finite_N_residual(
          static_cast<int>(std::lround(s)), N, t_grid, fd_step, order);
      MomentEstimate est;
      est.value = res;
      est.abs_error = 0.0;
      est.method = Method::painleve;
      json j = result_json("painleve", config, est, "finite_N_relation");
      emit_json(j, output);
      return 0;
    }

    if (h > 0) {
      config["h"] = h;
      config["route"] = route;
      MomentEstimate est;
      if (route == "series") {
        est = painleve::even_moment_via_series(s, h);
      } else if (route == "bessel_det") {
        const int si = static_cast<int>(std::lround(s));
        if (std::abs(s - si) > 1e-12)
          throw std::invalid_argument("bessel_det route requires integer s");
        est = painleve::even_moment_via_besseldet(si, h);
      } else {
        throw std::invalid_argument("route must be series or bessel_det");
      }
      json j = result_json("painleve", config, est, route);
      emit_json(j, output);
      return 0;
    }

    throw std::invalid_argument(
        "painleve: give --h (moment), --t-end (table), or --N (residual)");
  }
};

// ---- verify -----------------------------------------------------------------

struct VerifyCmd {
  std::string level = "fast";
  std::uint64_t seed = 20260817;
  std::string output;

  int run() const {
    const verify::Level lv =
        level == "full" ? verify::Level::full : verify::Level::fast;
    const auto results = verify::run_checks(lv, seed);
    verify::print_report(std::cout, results);
    const bool ok = verify::all_passed(results);
    std::cout << (ok ? "ALL CHECKS PASSED\n" : "CHECKS FAILED\n");

    if (!output.empty()) {
      json config{{"level", level},
                  {"seed", seed},
                  {"threads", max_threads()}};
      int failures = 0;
      json checks = json::array();
      for (const auto& r : results) {
        failures += r.passed ? 0 : 1;
        checks.push_back({{"name", r.name},
                          {"passed", r.passed},
                          {"observed", finite_or_null(r.observed)},
                          {"bound", r.bound},
                          {"seconds", r.seconds},
                          {"detail", r.detail}});
      }
      MomentEstimate est;
      est.value = failures;
      est.abs_error = 0.0;
      json j = result_json("verify", config, est, "cross_check_matrix");
      j["checks"] = checks;
      emit_json(j, output);
    }
    return ok ? 0 : 4;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Joint moments of CUE characteristic polynomials: exact formulas, "
      "quadrature, sampling, kernel and Painleve routes"};
  app.require_subcommand(1);
  // --h is a real option below, so help must not claim the short -h.
  app.set_help_flag("--help", "print help");
  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "worker cap for parallel loops (0 = hardware)")
      ->capture_default_str();
  app.set_config("--config", "",
                 "key=value file with one [subcommand] section per command; "
                 "flags override file values");

  ExactCmd exact;
  auto* c_exact = app.add_subcommand(
      "exact", "closed-form moment at h=0 and its large-N limit");
  c_exact->set_help_flag("--help", "print help");
  c_exact->add_option("--s", exact.s, "exponent s > -1/2")->required();
  c_exact->add_option("--N", exact.N, "matrix size (omit for the limit)");
  c_exact->add_option("--output", exact.output, "write JSON here");

  MomentCmd moment;
  auto* c_moment = app.add_subcommand(
      "moment", "finite-N joint moment via quadrature, mcmc, or cue");
  c_moment->set_help_flag("--help", "print help");
  c_moment->add_option("--s", moment.s, "exponent s > -1/2")->required();
  c_moment->add_option("--h", moment.h, "derivative exponent h")->required();
  c_moment->add_option("--N", moment.N, "matrix size")->required();
  c_moment
      ->add_option("--method", moment.method, "quadrature, mcmc, or cue")
      ->check(CLI::IsMember({"quadrature", "mcmc", "cue"}))
      ->capture_default_str();
  c_moment->add_option("--order", moment.order,
                       "quadrature order per panel (0 = default)");
  moment.chain.attach(c_moment);
  c_moment->add_option("--output", moment.output, "write JSON here");
  c_moment->add_option("--dump-samples", moment.dump_samples,
                       "write the sample stream CSV here");
  c_moment->add_option("--dump-count", moment.dump_count,
                       "rows in the sample stream")
      ->capture_default_str();

  LimitCmd limit;
  auto* c_limit = app.add_subcommand(
      "limit", "large-N limit of the scaled joint moment");
  c_limit->set_help_flag("--help", "print help");
  c_limit->add_option("--s", limit.s, "exponent s")->required();
  c_limit->add_option("--h", limit.h, "derivative exponent h")->required();
  c_limit
      ->add_option("--route", limit.route,
                   "mcmc_extrapolate, kernel_variance, painleve, bessel_det")
      ->check(CLI::IsMember({"mcmc_extrapolate", "kernel_variance", "painleve",
                             "bessel_det"}))
      ->capture_default_str();
  c_limit->add_option("--grid", limit.grid, "matrix sizes for extrapolation")
      ->capture_default_str();
  limit.chain.attach(c_limit);
  c_limit->add_option("--R", limit.R, "kernel window radius")
      ->capture_default_str();
  c_limit->add_option("--nodes", limit.nodes, "kernel quadrature nodes")
      ->capture_default_str();
  c_limit->add_option("--output", limit.output, "write JSON here");

  KernelCmd kernel;
  auto* c_kernel = app.add_subcommand(
      "kernel", "limiting correlation kernel: values, moments, spectrum");
  c_kernel->set_help_flag("--help", "print help");
  c_kernel->add_option("--s", kernel.s, "exponent s > -1/2")->required();
  c_kernel->add_option("--x", kernel.x, "first argument");
  c_kernel->add_option("--y", kernel.y, "second argument");
  c_kernel->add_flag("--moments", kernel.moments,
                     "tail/bulk diagonal integrals");
  c_kernel->add_flag("--spectrum", kernel.spectrum,
                     "Nystrom eigenvalue range");
  c_kernel->add_option("--h", kernel.h, "tail weight exponent")
      ->capture_default_str();
  c_kernel->add_option("--R", kernel.R, "window radius")->capture_default_str();
  c_kernel->add_option("--eps", kernel.eps, "inner cutoff")
      ->capture_default_str();
  c_kernel->add_option("--nodes", kernel.nodes, "quadrature nodes")
      ->capture_default_str();
  c_kernel->add_option("--output", kernel.output, "write JSON here");

  FredholmCmd fredholm;
  auto* c_fredholm = app.add_subcommand(
      "fredholm", "characteristic function of the limiting linear statistic");
  c_fredholm->set_help_flag("--help", "print help");
  c_fredholm->add_option("--s", fredholm.s, "exponent s")->required();
  c_fredholm->add_option("--t", fredholm.t, "evaluation point");
  c_fredholm->add_option("--R", fredholm.R, "window radius")
      ->capture_default_str();
  c_fredholm->add_option("--nodes", fredholm.nodes, "node budget")
      ->capture_default_str();
  c_fredholm->add_option("--eps", fredholm.eps,
                         "fixed inner cutoff (0 = extrapolate)")
      ->capture_default_str();
  c_fredholm->add_option("--scan", fredholm.scan,
                         "emit CSV over t = a:b:step");
  c_fredholm->add_option("--output", fredholm.output, "write result here");

  PainleveCmd painleve_cmd;
  auto* c_painleve = app.add_subcommand(
      "painleve", "sigma-form ODE: moments, continuation table, finite-N "
                  "relation");
  c_painleve->set_help_flag("--help", "print help");
  c_painleve->add_option("--s", painleve_cmd.s, "exponent s")->required();
  c_painleve->add_option("--h", painleve_cmd.h, "even-moment index");
  c_painleve
      ->add_option("--route", painleve_cmd.route, "series or bessel_det")
      ->capture_default_str();
  c_painleve->add_option("--t-end", painleve_cmd.t_end,
                         "emit the continuation table up to here");
  c_painleve->add_option("--t-start", painleve_cmd.t_start,
                         "series-to-ODE handoff point")
      ->capture_default_str();
  c_painleve->add_option("--tol", painleve_cmd.tol, "local ODE tolerance")
      ->capture_default_str();
  c_painleve->add_option("--K", painleve_cmd.K, "series truncation order")
      ->capture_default_str();
  c_painleve->add_option("--N", painleve_cmd.N,
                         "check the finite-N relation at this size");
  c_painleve->add_option("--t-grid", painleve_cmd.t_grid,
                         "grid for the finite-N residual")
      ->capture_default_str();
  c_painleve->add_option("--fd-step", painleve_cmd.fd_step,
                         "stencil step for the residual")
      ->capture_default_str();
  c_painleve->add_option("--order", painleve_cmd.order,
                         "quadrature order for spectral averages")
      ->capture_default_str();
  c_painleve->add_option("--output", painleve_cmd.output, "write result here");

  VerifyCmd verify_cmd;
  auto* c_verify =
      app.add_subcommand("verify", "run the cross-check matrix");
  c_verify->set_help_flag("--help", "print help");
  c_verify->add_option("--level", verify_cmd.level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}))
      ->capture_default_str();
  c_verify->add_option("--seed", verify_cmd.seed, "master seed")
      ->capture_default_str();
  c_verify->add_option("--output", verify_cmd.output,
                       "also write a JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  set_max_threads(threads);

  try {
    if (c_exact->parsed()) return exact.run();
    if (c_moment->parsed()) return moment.run();
    if (c_limit->parsed()) return limit.run();
    if (c_kernel->parsed()) return kernel.run();
    if (c_fredholm->parsed()) return fredholm.run();
    if (c_painleve->parsed()) return painleve_cmd.run();
    if (c_verify->parsed()) return verify_cmd.run();
  } catch (const divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const branch_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
