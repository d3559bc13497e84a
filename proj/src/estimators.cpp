#include "heraldsim/estimators.hpp"

#include "heraldsim/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <numbers>

namespace heraldsim {

namespace {

void require_probability(const Measured& m, const char* name) {
  if (!(m.value >= 0.0 && m.value <= 1.0))
    throw std::domain_error(std::string(name) + " must lie in [0, 1]");
  if (!(m.sigma >= 0.0)) throw std::invalid_argument(std::string(name) + " sigma must be non-negative");
}

Measured counted(double count, double heralds) {
  return {count / heralds, std::sqrt(count) / heralds};
}

double bound_value(double v, double s, double p00, double p11) {
  return std::max(0.0, v * s - 2.0 * std::sqrt(std::max(p00, 0.0) * std::max(p11, 0.0)));
}

}  // namespace

ProbabilityTable make_probability_table(Measured p10, Measured p01, Measured p11) {
  require_probability(p10, "p10");
  require_probability(p01, "p01");
  require_probability(p11, "p11");
  ProbabilityTable t;
  t.p10 = p10;
  t.p01 = p01;
  t.p11 = p11;
  t.p00.value = 1.0 - p10.value - p01.value - p11.value;
  t.p00.sigma = std::sqrt(p10.sigma * p10.sigma + p01.sigma * p01.sigma + p11.sigma * p11.sigma);
  if (t.p00.value < 0.0) {
    if (t.p00.value < -1e-12) throw std::domain_error("p10 + p01 + p11 exceeds one");
    t.p00.value = 0.0;
  }
  return t;
}

ProbabilityTable probabilities_from_counts(const CountRecord& arm_b_blocked,
                                           const CountRecord& arm_a_blocked, Measured p11) {
  if (arm_b_blocked.heralds == 0 || arm_a_blocked.heralds == 0)
    throw std::domain_error("no heralds recorded");
  const auto any_click = [](const CountRecord& r) {
    return static_cast<double>(r.n1_given_h + r.n2_given_h - r.n12_given_h);
  };
  return make_probability_table(counted(any_click(arm_b_blocked), arm_b_blocked.heralds),
                                counted(any_click(arm_a_blocked), arm_a_blocked.heralds), p11);
}

ProbabilityTable probabilities_from_counts(const CountRecord& open, Measured p11) {
  if (open.heralds == 0) throw std::domain_error("no heralds recorded");
  const double heralds = static_cast<double>(open.heralds);
  return make_probability_table(counted(static_cast<double>(open.n1_given_h), heralds),
                                counted(static_cast<double>(open.n2_given_h), heralds), p11);
}

Measured gsi_from_counts(double coincidences, double singles_i, double singles_s, double windows) {
  if (!(coincidences >= 0.0 && singles_i >= 0.0 && singles_s >= 0.0))
    throw std::invalid_argument("counts must be non-negative");
  if (!(windows > 0.0)) throw std::invalid_argument("window count must be positive");
  if (!(singles_i > 0.0 && singles_s > 0.0)) throw std::domain_error("zero singles");
  const double per_count = windows / (singles_i * singles_s);
  if (coincidences == 0.0) return {0.0, per_count};
  const double g = coincidences * per_count;
  return {g, g * std::sqrt(1.0 / coincidences + 1.0 / singles_i + 1.0 / singles_s)};
}

Measured gsi_from_record(const CountRecord& rec) {
  return gsi_from_counts(static_cast<double>(rec.n1_given_h + rec.n2_given_h),
                         static_cast<double>(rec.idler_singles),
                         static_cast<double>(rec.signal_singles), rec.trials);
}

Measured p11_xcorr(Measured p10, Measured p01, Measured gsi) {
  require_probability(p10, "p10");
  require_probability(p01, "p01");
  if (!(gsi.value > 1.0)) throw std::domain_error("g_si must exceed 1");
  if (std::isinf(gsi.value)) return {0.0, 0.0};
  const double d = gsi.value - 1.0;
  const double value = 4.0 * p10.value * p01.value / d;
  const double dp10 = 4.0 * p01.value / d * p10.sigma;
  const double dp01 = 4.0 * p10.value / d * p01.sigma;
  const double dg = value / d * gsi.sigma;
  return {value, std::sqrt(dp10 * dp10 + dp01 * dp01 + dg * dg)};
}

std::string_view to_string(ConcurrenceMethod method) {
  switch (method) {
    case ConcurrenceMethod::xcorr: return "xcorr";
    case ConcurrenceMethod::threefold_mle: return "threefold-mle";
    case ConcurrenceMethod::threefold_ce: return "threefold-ce";
  }
  return "unknown";
}

ConcurrenceEstimate concurrence_bound(Measured visibility, const ProbabilityTable& t,
                                      ConcurrenceMethod method) {
  require_probability(visibility, "visibility");
  for (const Measured* m : {&t.p00, &t.p01, &t.p10, &t.p11}) require_probability(*m, "p_mn");

  const double v = visibility.value;
  const double s = t.p01.value + t.p10.value;
  const double p00 = t.p00.value;
  const double p11 = t.p11.value;

  ConcurrenceEstimate out;
  out.method = method;
  out.value = bound_value(v, s, p00, p11);

  // p00 = 1 - s - p11 is not independent; differentiate through it.
  const double root = std::sqrt(p00 * p11);
  const double d_s = p11 > 0.0 && p00 > 0.0 ? v + std::sqrt(p11 / p00) : v;
  const double sigma_s = std::hypot(t.p01.sigma, t.p10.sigma);
  double term_p11 = 0.0;
  if (t.p11.sigma > 0.0) {
    if (p11 < t.p11.sigma || root == 0.0) {
      const double shifted = v * s - 2.0 * std::sqrt(std::max(p00 - t.p11.sigma, 0.0) * (p11 + t.p11.sigma));
      term_p11 = std::abs(shifted - (v * s - 2.0 * root));
    } else {
      term_p11 = (p00 - p11) / root * t.p11.sigma;
    }
  }
  const double term_s = d_s * sigma_s;
  const double term_v = s * visibility.sigma;
  out.sigma = std::sqrt(term_s * term_s + term_p11 * term_p11 + term_v * term_v);
  return out;
}

double bootstrap_concurrence_sigma(Measured visibility, const ProbabilityTable& t,
                                   std::uint64_t resamples, std::uint64_t seed) {
  if (resamples < 2) throw std::invalid_argument("need at least two bootstrap resamples");
  concurrence_bound(visibility, t);  // input validation

  const auto redraw = [](CounterRng& rng, const Measured& m) {
    if (m.sigma == 0.0 || m.value == 0.0) return m.value;
    const double events = (m.value / m.sigma) * (m.value / m.sigma);
    std::poisson_distribution<std::uint64_t> poisson(events);
    return m.value * static_cast<double>(poisson(rng)) / events;
  };

  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t i = 0; i < resamples; ++i) {
    CounterRng rng(seed, i);
    double v = visibility.value;
    if (visibility.sigma > 0.0) {
      std::normal_distribution<double> normal(visibility.value, visibility.sigma);
      v = std::clamp(normal(rng), 0.0, 1.0);
    }
    const double p10 = redraw(rng, t.p10);
    const double p01 = redraw(rng, t.p01);
    const double p11 = redraw(rng, t.p11);
    const double c = bound_value(v, p10 + p01, 1.0 - p10 - p01 - p11, p11);
    sum += c;
    sum_sq += c * c;
  }
  const double n = static_cast<double>(resamples);
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)));
}

std::string_view to_string(ThreefoldMethod method) {
  return method == ThreefoldMethod::mle ? "mle" : "ce";
}

ThreefoldEstimate threefold_estimate(std::uint64_t n, double heralds, ThreefoldMethod method,
                                     double correction) {
  if (!(heralds > 0.0)) throw std::domain_error("N_H must be positive");
  if (static_cast<double>(n) > heralds) throw std::invalid_argument("n exceeds N_H");
  if (!(correction > 0.0)) throw std::invalid_argument("correction must be positive");
  const double events = static_cast<double>(n) + (method == ThreefoldMethod::ce ? 1.0 : 0.0);
  ThreefoldEstimate out;
  out.method = method;
  out.n = n;
  out.heralds = heralds;
  out.correction = correction;
  out.p11 = {correction * events / heralds, correction * std::sqrt(events) / heralds};
  return out;
}

PosteriorDensity::PosteriorDensity(std::uint64_t n, double heralds) : n_(n), heralds_(heralds) {
  if (!(heralds > 0.0)) throw std::domain_error("N_H must be positive");
}

double PosteriorDensity::log_density(double p) const {
  if (p < 0.0) return -std::numeric_limits<double>::infinity();
  const double k = static_cast<double>(n_);
  if (p == 0.0) return n_ == 0 ? std::log(heralds_) : -std::numeric_limits<double>::infinity();
  const double x = heralds_ * p;
  return std::log(heralds_) - x + k * std::log(x) - std::lgamma(k + 1.0);
}

double PosteriorDensity::operator()(double p) const { return std::exp(log_density(p)); }

double PosteriorDensity::mean() const { return (static_cast<double>(n_) + 1.0) / heralds_; }

double PosteriorDensity::second_moment() const {
  const double k = static_cast<double>(n_);
  return (k + 1.0) * (k + 2.0) / (heralds_ * heralds_);
}

double PosteriorDensity::stddev() const {
  return std::sqrt(static_cast<double>(n_) + 1.0) / heralds_;
}

namespace {

FringeFit fit_one(const std::vector<FringePoint>& scan, double FringePoint::*counts) {
  const Eigen::Index n = static_cast<Eigen::Index>(scan.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FringePoint& pt = scan[static_cast<std::size_t>(i)];
    const double c = pt.*counts;
    if (!(c >= 0.0)) throw std::invalid_argument("fringe counts must be non-negative");
    x(i, 0) = 1.0;
    x(i, 1) = std::cos(pt.phase);
    x(i, 2) = std::sin(pt.phase);
    y(i) = c;
    w(i) = 1.0 / std::max(c, 1.0);
  }
  if (y.sum() == 0.0) throw std::domain_error("fringe scan has no counts");

  const Eigen::MatrixXd normal = x.transpose() * w.asDiagonal() * x;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const Eigen::Vector3d c = ldlt.solve(x.transpose() * w.asDiagonal() * y);
  const Eigen::Matrix3d cov = ldlt.solve(Eigen::MatrixXd::Identity(3, 3));
  if (!(c(0) > 0.0)) throw std::domain_error("fringe offset is not positive");

  const double swing = std::hypot(c(1), c(2));
  FringeFit fit;
  fit.amplitude = c(0);
  fit.phase0 = std::atan2(c(2), c(1));
  fit.visibility.value = std::min(1.0, swing / c(0));

  Eigen::Vector3d grad;
  if (swing > 0.0) {
    grad << -swing / (c(0) * c(0)), c(1) / (c(0) * swing), c(2) / (c(0) * swing);
    fit.visibility.sigma = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
  } else {
    fit.visibility.sigma = std::sqrt(std::max(0.0, cov(1, 1) + cov(2, 2))) / c(0);
  }
  return fit;
}

}  // namespace

FringeFits fit_visibility(const std::vector<FringePoint>& scan) {
  std::set<double> phases;
  for (const auto& pt : scan) {
    if (!std::isfinite(pt.phase)) throw std::invalid_argument("fringe phase must be finite");
    phases.insert(std::remainder(pt.phase, 2.0 * std::numbers::pi));
  }
  if (phases.size() < 4) throw std::domain_error("visibility fit needs at least four distinct phases");
  return {fit_one(scan, &FringePoint::detector1), fit_one(scan, &FringePoint::detector2)};
}

double simple_concurrence(double eta, double visibility, double gsi) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("eta must lie in [0, 1]");
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::domain_error("visibility must lie in [0, 1]");
  if (!(gsi > 1.0)) throw std::domain_error("g_si must exceed 1");
  const double penalty = std::isinf(gsi) ? 0.0 : 2.0 / std::sqrt(gsi - 1.0);
  return std::max(0.0, eta * (visibility - penalty));
}

}  // namespace heraldsim
