#include "heraldsim/montecarlo.hpp"

#include "heraldsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace heraldsim {

namespace {

void require_unit(double p, const std::string& field) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(field + " must lie in [0, 1]");
}

// Per-photon probabilities resolved once per run.
struct TrialModel {
  double lambda = 0;
  double herald_efficiency = 0;
  double idler_dark = 0;
  double early_a = 0, early_b = 0;  // early signal photon stored in A/B and retrieved
  double late_a = 0, late_b = 0;    // late signal photon transmitted through A/B
  double a_to_1 = 0, a_to_2 = 0;    // unpaired arm-A photon at the beamsplitter
  double b_to_1 = 0, b_to_2 = 0;
  PairRouting pair;
  bool fringe = false;
  double fringe_to_1 = 0.5;  // given survival, single photon in fixed-phase mode
  double eta1 = 0, eta2 = 0;
  double dark1 = 0, dark2 = 0;

  explicit TrialModel(const TrialConfig& cfg) {
    lambda = lambda_of(cfg.source);
    herald_efficiency = cfg.herald_efficiency;
    idler_dark = cfg.idler_dark;
    const double to_a = cfg.block == ArmBlock::a ? 0.0 : cfg.signal_transmission * cfg.bs.reflection();
    const double to_b = cfg.block == ArmBlock::b ? 0.0 : cfg.signal_transmission * cfg.bs.transmission();
    early_a = to_a * cfg.memories[0].eta_echo;
    early_b = to_b * cfg.memories[1].eta_echo;
    late_a = to_a * cfg.memories[0].eta_trans;
    late_b = to_b * cfg.memories[1].eta_trans;
    a_to_1 = cfg.bs.at2;
    a_to_2 = cfg.bs.ar2;
    b_to_1 = cfg.bs.br2;
    b_to_2 = cfg.bs.bt2;
    pair = pair_routing(cfg.bs);
    fringe = cfg.fixed_phase.has_value() && cfg.block == ArmBlock::none;
    if (fringe) fringe_to_1 = 0.5 * (1.0 - cfg.visibility * std::cos(*cfg.fixed_phase));
    eta1 = cfg.detectors[0].efficiency;
    eta2 = cfg.detectors[1].efficiency;
    dark1 = cfg.detectors[0].dark_prob;
    dark2 = cfg.detectors[1].dark_prob;
  }
};

struct Tally {
  std::uint64_t heralds = 0, n1 = 0, n2 = 0, n12 = 0, singles = 0;

  Tally& operator+=(const Tally& o) {
    heralds += o.heralds;
    n1 += o.n1;
    n2 += o.n2;
    n12 += o.n12;
    singles += o.singles;
    return *this;
  }
};

unsigned geometric(CounterRng& rng, double lambda) {
  const double u = rng.uniform_open();
  unsigned n = 0;
  double tail = lambda;  // P(N > n)
  while (u < tail) {
    ++n;
    tail *= lambda;
  }
  return n;
}

void route_single(CounterRng& rng, double to_1, double to_2, unsigned& x1, unsigned& x2) {
  const double u = rng.uniform();
  if (u < to_1)
    ++x1;
  else if (u < to_1 + to_2)
    ++x2;
}

void route_pair(CounterRng& rng, const PairRouting& p, unsigned& x1, unsigned& x2) {
  double u = rng.uniform();
  if ((u -= p.both_out1) < 0) { x1 += 2; return; }
  if ((u -= p.both_out2) < 0) { x2 += 2; return; }
  if ((u -= p.coincidence) < 0) { ++x1; ++x2; return; }
  if ((u -= p.one_out1) < 0) { ++x1; return; }
  if ((u -= p.one_out2) < 0) { ++x2; return; }
}

bool threshold_click(CounterRng& rng, unsigned photons, double eta, double dark) {
  bool click = dark > 0.0 && rng.uniform() < dark;
  for (unsigned i = 0; i < photons; ++i) click = (rng.uniform() < eta) || click;
  return click;
}

void one_trial(const TrialModel& m, CounterRng& rng, Tally& t) {
  const unsigned early = geometric(rng, m.lambda);
  const unsigned late = geometric(rng, m.lambda);

  bool herald = m.idler_dark > 0.0 && rng.uniform() < m.idler_dark;
  for (unsigned i = 0; i < early; ++i) herald = (rng.uniform() < m.herald_efficiency) || herald;

  unsigned in_a = 0, in_b = 0;
  for (unsigned i = 0; i < early; ++i) route_single(rng, m.early_a, m.early_b, in_a, in_b);
  for (unsigned i = 0; i < late; ++i) route_single(rng, m.late_a, m.late_b, in_a, in_b);

  unsigned x1 = 0, x2 = 0;
  if (m.fringe && in_a + in_b == 1) {
    const double survive = in_a == 1 ? m.a_to_1 + m.a_to_2 : m.b_to_1 + m.b_to_2;
    if (rng.uniform() < survive) {
      if (rng.uniform() < m.fringe_to_1)
        ++x1;
      else
        ++x2;
    }
  } else {
    const unsigned pairs = std::min(in_a, in_b);
    for (unsigned i = 0; i < pairs; ++i) route_pair(rng, m.pair, x1, x2);
    for (unsigned i = pairs; i < in_a; ++i) route_single(rng, m.a_to_1, m.a_to_2, x1, x2);
    for (unsigned i = pairs; i < in_b; ++i) route_single(rng, m.b_to_1, m.b_to_2, x1, x2);
  }

  const bool c1 = threshold_click(rng, x1, m.eta1, m.dark1);
  const bool c2 = threshold_click(rng, x2, m.eta2, m.dark2);
  t.singles += static_cast<std::uint64_t>(c1) + static_cast<std::uint64_t>(c2);
  if (herald) {
    ++t.heralds;
    t.n1 += c1;
    t.n2 += c2;
    t.n12 += c1 && c2;
  }
}

// Splits [0, n) into contiguous blocks, one per worker, and reduces in block
// order. Integer reductions make the result independent of the split.
template <typename Acc, typename Body>
Acc parallel_reduce(std::uint64_t n, unsigned workers, Body body) {
  workers = std::max(1u, workers);
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(n, 1)));
  std::vector<Acc> partial(workers);
  const auto block = [&](unsigned w) {
    const std::uint64_t begin = n / workers * w + std::min<std::uint64_t>(w, n % workers);
    const std::uint64_t end = begin + n / workers + (w < n % workers ? 1 : 0);
    for (std::uint64_t i = begin; i < end; ++i) body(i, partial[w]);
  };
  if (workers == 1) {
    block(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(block, w);
    for (auto& th : pool) th.join();
  }
  Acc total{};
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace

void validate(const TrialConfig& cfg) {
  lambda_of(cfg.source);
  require_unit(cfg.herald_efficiency, "herald_efficiency");
  if (!(cfg.idler_dark >= 0.0 && cfg.idler_dark < 1.0))
    throw std::invalid_argument("idler_dark must lie in [0, 1)");
  require_unit(cfg.signal_transmission, "signal_transmission");
  for (const auto& memory : cfg.memories) validate(memory);
  validate(cfg.bs);
  for (const auto& detector : cfg.detectors) validate(detector);
  require_unit(cfg.visibility, "visibility");
  if (cfg.fixed_phase && !std::isfinite(*cfg.fixed_phase))
    throw std::invalid_argument("phase must be finite");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (cfg.n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  if (!(cfg.truncation_tolerance > 0.0 && cfg.truncation_tolerance < 1.0))
    throw std::invalid_argument("truncation tolerance must lie in (0, 1)");
}

unsigned default_workers() {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("HERALDSIM_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(cap, &end, 10);
    if (end != cap && value >= 1) workers = std::min<unsigned>(workers, static_cast<unsigned>(value));
  }
  return workers;
}

CountRecord run_trials(const TrialConfig& cfg, unsigned workers) {
  validate(cfg);
  const TrialModel model(cfg);
  if (workers == 0) workers = default_workers();

  const Tally tally = parallel_reduce<Tally>(cfg.trials, workers, [&](std::uint64_t i, Tally& t) {
    CounterRng rng(cfg.seed, i);
    one_trial(model, rng, t);
  });

  CountRecord rec;
  rec.heralds = tally.heralds;
  rec.n1_given_h = tally.n1;
  rec.n2_given_h = tally.n2;
  rec.n12_given_h = tally.n12;
  rec.signal_singles = tally.singles;
  rec.idler_singles = tally.heralds;
  rec.trials = static_cast<double>(cfg.trials);
  rec.duration_s = rec.trials * cfg.window_s;
  return rec;
}

namespace {

struct MomentSums {
  std::uint64_t n = 0, y = 0, x = 0, yy = 0, xx = 0, xy = 0;

  MomentSums& operator+=(const MomentSums& o) {
    n += o.n;
    y += o.y;
    x += o.x;
    yy += o.yy;
    xx += o.xx;
    xy += o.xy;
    return *this;
  }
};

}  // namespace

SampledMoment sampled_thermal_g2(double lambda, std::uint64_t samples, std::uint64_t seed,
                                 unsigned workers) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::domain_error("lambda must lie in (0, 1)");
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  if (workers == 0) workers = default_workers();

  const MomentSums s = parallel_reduce<MomentSums>(samples, workers, [&](std::uint64_t i, MomentSums& acc) {
    CounterRng rng(seed, i);
    const std::uint64_t y = geometric(rng, lambda);
    const std::uint64_t x = y * (y > 0 ? y - 1 : 0);
    ++acc.n;
    acc.y += y;
    acc.x += x;
    acc.yy += y * y;
    acc.xx += x * x;
    acc.xy += x * y;
  });

  const double n = static_cast<double>(s.n);
  const double ey = s.y / n, ex = s.x / n;
  if (!(ey > 0.0)) throw std::domain_error("no photons sampled");
  const double vy = s.yy / n - ey * ey;
  const double vx = s.xx / n - ex * ex;
  const double cxy = s.xy / n - ex * ey;
  // Delta method for E[X] / E[Y]^2.
  const double gx = 1.0 / (ey * ey);
  const double gy = -2.0 * ex / (ey * ey * ey);
  const double var = (gx * gx * vx + gy * gy * vy + 2.0 * gx * gy * cxy) / n;
  return {ex / (ey * ey), std::sqrt(std::max(var, 0.0))};
}

}  // namespace heraldsim
