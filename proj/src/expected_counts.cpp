#include "heraldsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>

namespace heraldsim {

namespace {

using Joint = JointNumberDistribution<double>;
using Dist = NumberDistribution<double>;

Joint convolve(const Joint& x, const Joint& y) {
  Joint out = Joint::Zero(x.rows() + y.rows() - 1, x.cols() + y.cols() - 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(i, j) == 0.0) continue;
      out.block(i, j, y.rows(), y.cols()) += x(i, j) * y;
    }
  return out;
}

// Photon-number generating functions of the recombining beamsplitter outputs,
// evaluated at (z1, z2).
struct OutputLaw {
  PairRouting pair;
  BeamSplitterCoeffs bs;
  bool fringe = false;
  double fringe_to_1 = 0.5;

  double pair_gf(double z1, double z2) const {
    return pair.both_out1 * z1 * z1 + pair.both_out2 * z2 * z2 + pair.coincidence * z1 * z2 +
           pair.one_out1 * z1 + pair.one_out2 * z2 + pair.none;
  }
  double a_gf(double z1, double z2) const { return bs.loss_a() + bs.at2 * z1 + bs.ar2 * z2; }
  double b_gf(double z1, double z2) const { return bs.loss_b() + bs.br2 * z1 + bs.bt2 * z2; }

  double gf(Eigen::Index m, Eigen::Index k, double z1, double z2) const {
    if (fringe && m + k == 1) {
      const double survive = m == 1 ? bs.at2 + bs.ar2 : bs.bt2 + bs.br2;
      return (1.0 - survive) + survive * (fringe_to_1 * z1 + (1.0 - fringe_to_1) * z2);
    }
    const Eigen::Index pairs = std::min(m, k);
    return std::pow(pair_gf(z1, z2), static_cast<double>(pairs)) *
           std::pow(a_gf(z1, z2), static_cast<double>(m - pairs)) *
           std::pow(b_gf(z1, z2), static_cast<double>(k - pairs));
  }
};

struct ClickSums {
  double c1 = 0, c2 = 0, c12 = 0;
};

ClickSums click_sums(const Joint& arms, const OutputLaw& law, const TrialConfig& cfg) {
  const double miss1 = 1.0 - cfg.detectors[0].efficiency;
  const double miss2 = 1.0 - cfg.detectors[1].efficiency;
  const double quiet1 = 1.0 - cfg.detectors[0].dark_prob;
  const double quiet2 = 1.0 - cfg.detectors[1].dark_prob;
  ClickSums s;
  for (Eigen::Index m = 0; m < arms.rows(); ++m)
    for (Eigen::Index k = 0; k < arms.cols(); ++k) {
      const double w = arms(m, k);
      if (w == 0.0) continue;
      const double no1 = quiet1 * law.gf(m, k, miss1, 1.0);
      const double no2 = quiet2 * law.gf(m, k, 1.0, miss2);
      const double none = quiet1 * quiet2 * law.gf(m, k, miss1, miss2);
      s.c1 += w * (1.0 - no1);
      s.c2 += w * (1.0 - no2);
      s.c12 += w * (1.0 - no1 - no2 + none);
    }
  return s;
}

struct ArmLaws {
  Joint heralded;    // (m, k) at the beamsplitter, weighted by the herald click
  Joint all;         // unconditioned
  double herald = 0;  // P(herald)
};

ArmLaws arm_laws(const TrialConfig& cfg) {
  validate(cfg);
  const double lambda = lambda_of(cfg.source);
  const Eigen::Index n_max = truncation_for(lambda, cfg.truncation_tolerance, cfg.n_max);
  const Dist pairs = thermal(lambda, n_max);
  check_normalized(pairs, cfg.truncation_tolerance);

  const Dist herald_click = click_probabilities(cfg.herald_efficiency, cfg.idler_dark, n_max);
  const Dist heralded_early = pairs.cwiseProduct(herald_click);

  const double to_a = cfg.block == ArmBlock::a ? 0.0 : cfg.signal_transmission * cfg.bs.reflection();
  const double to_b = cfg.block == ArmBlock::b ? 0.0 : cfg.signal_transmission * cfg.bs.transmission();
  const Joint late = split(pairs, to_a * cfg.memories[0].eta_trans, to_b * cfg.memories[1].eta_trans);
  const double echo_a = to_a * cfg.memories[0].eta_echo;
  const double echo_b = to_b * cfg.memories[1].eta_echo;

  ArmLaws out;
  out.heralded = convolve(split(heralded_early, echo_a, echo_b), late);
  out.all = convolve(split(pairs, echo_a, echo_b), late);
  out.herald = heralded_early.sum();
  return out;
}

OutputLaw output_law(const TrialConfig& cfg) {
  OutputLaw law;
  law.pair = pair_routing(cfg.bs);
  law.bs = cfg.bs;
  law.fringe = cfg.fixed_phase.has_value() && cfg.block == ArmBlock::none;
  if (law.fringe) law.fringe_to_1 = 0.5 * (1.0 - cfg.visibility * std::cos(*cfg.fixed_phase));
  return law;
}

}  // namespace

ExpectedCountRecord expected_counts(const TrialConfig& cfg) {
  const ArmLaws arms = arm_laws(cfg);
  const OutputLaw law = output_law(cfg);
  const ClickSums given_h = click_sums(arms.heralded, law, cfg);
  const ClickSums any = click_sums(arms.all, law, cfg);

  const double n = static_cast<double>(cfg.trials);
  ExpectedCountRecord rec;
  rec.heralds = n * arms.herald;
  rec.n1_given_h = n * given_h.c1;
  rec.n2_given_h = n * given_h.c2;
  rec.n12_given_h = n * given_h.c12;
  rec.signal_singles = n * (any.c1 + any.c2);
  rec.idler_singles = rec.heralds;
  rec.trials = n;
  rec.duration_s = n * cfg.window_s;
  return rec;
}

TwoPhotonDiagonal retrieved_two_photon(const TrialConfig& cfg) {
  const ArmLaws arms = arm_laws(cfg);
  if (!(arms.herald > 0.0)) throw std::domain_error("herald probability is zero");
  return {arms.heralded(1, 1) / arms.herald, arms.heralded(2, 0) / arms.herald,
          arms.heralded(0, 2) / arms.herald};
}

}  // namespace heraldsim
