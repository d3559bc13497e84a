#include "heraldsim/optics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace heraldsim {

namespace {

void require_unit(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(what + " must lie in [0, 1]");
}

}  // namespace

double MemoryParams::ratio() const {
  if (!(eta_echo > 0.0))
    throw std::domain_error("eta_trans / eta_echo needs a positive echo efficiency");
  return eta_trans / eta_echo;
}

void validate(const MemoryParams& memory) {
  require_unit(memory.eta_echo, "eta_echo");
  require_unit(memory.eta_trans, "eta_trans");
  if (memory.eta_echo + memory.eta_trans > 1.0 + 1e-12)
    throw std::invalid_argument("eta_echo + eta_trans must not exceed 1");
}

void validate(const BeamSplitterCoeffs& bs) {
  const auto coefficient = [](double c, const char* name) {
    if (!(c > 0.0 && c <= 0.5))
      throw std::invalid_argument(std::string("beamsplitter ") + name + " must lie in (0, 1/2]");
  };
  coefficient(bs.at2, "at2");
  coefficient(bs.ar2, "ar2");
  coefficient(bs.bt2, "bt2");
  coefficient(bs.br2, "br2");
}

void validate(const DetectorParams& detector) {
  require_unit(detector.efficiency, "detector efficiency");
  require_unit(detector.dark_prob, "detector dark-count probability");
}

MemoryMoments memory_moments(double r, const MemoryParams& memory) {
  if (!(r >= 0.0)) throw std::invalid_argument("squeezing parameter must be non-negative");
  validate(memory);
  const double s2 = std::sinh(r) * std::sinh(r);
  const double c2 = std::cosh(r) * std::cosh(r);
  const double retrieved = memory.eta_trans + memory.eta_echo;
  return {retrieved * s2, s2, s2 * (s2 * retrieved + c2 * memory.eta_echo)};
}

double gsi_model(double lambda, double ratio, double eta_dark, double p_c) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::domain_error("lambda must lie in [0, 1)");
  if (!(ratio >= 0.0)) throw std::invalid_argument("eta_trans / eta_echo must be non-negative");
  if (!(eta_dark >= 0.0)) throw std::invalid_argument("eta_dark must be non-negative");
  double noise = 0.0;
  if (eta_dark > 0.0) {
    if (!(p_c > 0.0)) throw std::domain_error("p_c must be positive when eta_dark > 0");
    noise = eta_dark / p_c;
  }
  const double denominator = lambda * (1.0 + ratio) + noise;
  if (denominator == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 + 1.0 / denominator;
}

double p11_theory(double p10, double p01, double alpha, double pump, double ratio,
                  double eta_dark, double p_c) {
  require_unit(p10, "p10");
  require_unit(p01, "p01");
  if (!(alpha >= 0.0 && pump >= 0.0)) throw std::invalid_argument("alpha and pump must be non-negative");
  if (!(ratio >= 0.0)) throw std::invalid_argument("eta_trans / eta_echo must be non-negative");
  require_unit(eta_dark, "eta_dark");
  if (!(p_c > 0.0)) throw std::domain_error("p_c must be positive");
  return 4.0 * p10 * p01 * (alpha * pump * (1.0 + 0.5 * ratio) + eta_dark / p_c);
}

BunchingCoefficients bunching_coefficients(const BeamSplitterCoeffs& bs) {
  if (!(bs.ar2 > 0.0)) throw std::domain_error("a11 needs a nonzero ar2");
  const double alpha_r = std::sqrt(bs.ar2);
  const double amplitude = alpha_r - bs.bt2 / alpha_r;
  return {bs.br2 * amplitude * amplitude, 2.0 * bs.at2 * bs.ar2, 2.0 * bs.bt2 * bs.br2};
}

TwoPhotonDiagonal q_from_q11(double q11, double reflection, double transmission) {
  if (!(q11 >= 0.0)) throw std::invalid_argument("q11 must be non-negative");
  if (!(reflection > 0.0 && transmission > 0.0))
    throw std::domain_error("R and T must both be positive");
  return {q11, q11 * reflection / (2.0 * transmission), q11 * transmission / (2.0 * reflection)};
}

double recombined_p11(const TwoPhotonDiagonal& q, const BeamSplitterCoeffs& bs,
                      const DetectorParams& det1, const DetectorParams& det2) {
  if (q.q11 < 0.0 || q.q20 < 0.0 || q.q02 < 0.0 || q.q11 + q.q20 + q.q02 > 1.0 + 1e-12)
    throw std::invalid_argument("two-photon diagonal must be a sub-probability");
  validate(det1);
  validate(det2);
  const BunchingCoefficients a = bunching_coefficients(bs);
  return (a.a11 * q.q11 + a.a20 * q.q20 + a.a02 * q.q02) * det1.efficiency * det2.efficiency;
}

EffectiveEfficiencies effective_efficiencies(const BeamSplitterCoeffs& bs,
                                             const DetectorParams& det1,
                                             const DetectorParams& det2) {
  validate(det1);
  validate(det2);
  const double eta1 = det1.efficiency;
  const double eta2 = det2.efficiency;
  if (eta1 == 0.0 || eta2 == 0.0) throw std::domain_error("detector efficiencies must be nonzero");

  EffectiveEfficiencies out;
  out.eta_a = bs.at2 * eta1 + bs.ar2 * eta2;
  out.eta_b = bs.br2 * eta1 + bs.bt2 * eta2;

  const BunchingCoefficients a = bunching_coefficients(bs);
  const double rounded_weight = std::round(5.0 * (a.a20 + a.a02)) / 10.0;
  const TwoPhotonDiagonal per_q11 = q_from_q11(1.0, bs.reflection(), bs.transmission());
  const double model_weight = a.a11 + a.a20 * per_q11.q20 + a.a02 * per_q11.q02;

  const double separate = out.eta_a * out.eta_b;
  out.correction = separate / (rounded_weight * eta1 * eta2);
  out.correction_model = separate / (model_weight * eta1 * eta2);
  return out;
}

FringeProbabilities fringe_probabilities(double phase, double visibility, double p_det,
                                         double amp1, double amp2) {
  require_unit(visibility, "visibility");
  require_unit(p_det, "detection probability");
  if (!(amp1 > 0.0 && amp2 > 0.0)) throw std::invalid_argument("fringe amplitudes must be positive");
  const double contrast = visibility * std::cos(phase);
  return {amp1 * p_det * 0.5 * (1.0 - contrast), amp2 * p_det * 0.5 * (1.0 + contrast)};
}

PairRouting pair_routing(const BeamSplitterCoeffs& bs) {
  const double survive_a = bs.at2 + bs.ar2;
  const double survive_b = bs.bt2 + bs.br2;
  const BunchingCoefficients a = bunching_coefficients(bs);
  const double bunched = survive_a * survive_b - a.a11;
  if (bunched < 0.0) throw std::domain_error("a11 exceeds the two-survivor probability");

  const double w1 = bs.at2 * bs.br2;
  const double w2 = bs.ar2 * bs.bt2;
  PairRouting out;
  out.coincidence = a.a11;
  out.both_out1 = bunched * w1 / (w1 + w2);
  out.both_out2 = bunched * w2 / (w1 + w2);
  out.one_out1 = bs.at2 * (1.0 - survive_b) + bs.br2 * (1.0 - survive_a);
  out.one_out2 = bs.ar2 * (1.0 - survive_b) + bs.bt2 * (1.0 - survive_a);
  out.none = (1.0 - survive_a) * (1.0 - survive_b);
  return out;
}

}  // namespace heraldsim
