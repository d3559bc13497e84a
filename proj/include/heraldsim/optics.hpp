#pragma once

// Linear-optics elements and the closed forms built on them: the memory
// beamsplitter ladder, the signal-idler cross-correlation model, and the
// two-photon recombination algebra of the output beamsplitter.

namespace heraldsim {

/// Storage-and-retrieval efficiency and residual transmission of one memory.
struct MemoryParams {
  double eta_echo = 0;
  double eta_trans = 0;

  double ratio() const;  // eta_trans / eta_echo
};

void validate(const MemoryParams& memory);

/// Measured intensity coefficients of a lossy beamsplitter. Mode a exits
/// transmitted with at2 and reflected with ar2; mode b with bt2 and br2.
struct BeamSplitterCoeffs {
  double at2 = 0.5;
  double ar2 = 0.5;
  double bt2 = 0.5;
  double br2 = 0.5;

  double transmission() const { return at2; }  // T
  double reflection() const { return br2; }    // R
  double loss_a() const { return 1.0 - at2 - ar2; }
  double loss_b() const { return 1.0 - bt2 - br2; }
  // A signal photon enters arm A with R and arm B with T, and leaves the
  // second pass with at2 + ar2 or bt2 + br2.
  double throughput() const { return reflection() * (at2 + ar2) + transmission() * (bt2 + br2); }
};

void validate(const BeamSplitterCoeffs& bs);

struct DetectorParams {
  double efficiency = 1;
  double dark_prob = 0;  // per coincidence window
};

void validate(const DetectorParams& detector);

/// Two-photon diagonal of the retrieved fields, per heralding signal.
struct TwoPhotonDiagonal {
  double q11 = 0;
  double q20 = 0;
  double q02 = 0;
};

struct MemoryMoments {
  double mean_signal = 0;   // <d_s^dag d_s>
  double mean_idler = 0;    // <d_i^dag d_i>
  double cross_moment = 0;  // <d_i^dag d_i d_s^dag d_s>
};

/// Heisenberg-picture moments of the memory ladder for squeezing r.
MemoryMoments memory_moments(double r, const MemoryParams& memory);

/// g_si = 1 + 1 / (lambda (1 + ratio) + eta_dark / p_c). Returns +inf when
/// the denominator vanishes.
double gsi_model(double lambda, double ratio, double eta_dark, double p_c);

/// Model threefold probability 4 p10 p01 [alpha P (1 + ratio / 2) + eta_dark / p_c].
double p11_theory(double p10, double p01, double alpha, double pump, double ratio,
                  double eta_dark, double p_c);

struct BunchingCoefficients {
  double a11 = 0;
  double a20 = 0;
  double a02 = 0;
};

/// Coincidence weights of the |11>, |20> and |02> inputs. a11 uses the
/// real-coefficient unitarity relation, so only intensities are needed.
BunchingCoefficients bunching_coefficients(const BeamSplitterCoeffs& bs);

/// q20 = q11 R / 2T and q02 = q11 T / 2R.
TwoPhotonDiagonal q_from_q11(double q11, double reflection, double transmission);

/// (a11 q11 + a20 q20 + a02 q02) eta1 eta2
double recombined_p11(const TwoPhotonDiagonal& q, const BeamSplitterCoeffs& bs,
                      const DetectorParams& det1, const DetectorParams& det2);

struct EffectiveEfficiencies {
  double eta_a = 0;  // at2 eta1 + ar2 eta2
  double eta_b = 0;  // br2 eta1 + bt2 eta2
  // Converts a recombined threefold probability to the q11 eta_a eta_b
  // convention, with a20 ~ a02 taken as their mean rounded to one decimal
  // and q20 + q02 ~ q11.
  double correction = 0;
  // Same conversion with the full weight a11 + a20 R/2T + a02 T/2R.
  double correction_model = 0;
};

EffectiveEfficiencies effective_efficiencies(const BeamSplitterCoeffs& bs,
                                             const DetectorParams& det1,
                                             const DetectorParams& det2);

struct FringeProbabilities {
  double detector1 = 0;
  double detector2 = 0;
};

/// Complementary single-photon fringes,
/// P_k = amp_k p_det (1 + (-1)^k V cos(phase)) / 2.
FringeProbabilities fringe_probabilities(double phase, double visibility, double p_det,
                                         double amp1, double amp2);

/// Output law of one photon from each input arm meeting at the beamsplitter.
/// Coincidence follows a11; bunching splits the remaining two-survivor mass
/// in proportion to 2 at2 br2 and 2 ar2 bt2; single survivors route by
/// their own intensities.
struct PairRouting {
  double both_out1 = 0;
  double both_out2 = 0;
  double coincidence = 0;
  double one_out1 = 0;
  double one_out2 = 0;
  double none = 0;
};

PairRouting pair_routing(const BeamSplitterCoeffs& bs);

}  // namespace heraldsim
