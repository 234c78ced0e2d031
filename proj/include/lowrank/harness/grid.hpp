#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "lowrank/datagen/generators.hpp"
#include "lowrank/harness/config.hpp"
#include "lowrank/harness/csv.hpp"
#include "lowrank/solvers/driver.hpp"
#include "lowrank/solvers/init.hpp"

namespace lowrank {

/// Worker count: LOWRANK_THREADS when set (a positive integer), otherwise the
/// hardware concurrency; never more than `tasks`.
inline int worker_count(std::size_t tasks) {
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("LOWRANK_THREADS"); env != nullptr && *env != '\0') {
    const std::string_view text(env);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
      throw ArgumentError("LOWRANK_THREADS must be a positive integer");
    }
    workers = value;
  }
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(tasks, 1)));
}

/// Runs body(i) for i < count on `workers` threads; the first exception is
/// rethrown after all workers stop.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace grid_detail {

// Sub-streams of an instance seed.
inline constexpr std::uint64_t kTruthStream = 0;
inline constexpr std::uint64_t kSamplingStream = 1;
inline constexpr std::uint64_t kCorruptionStream = 2;
inline constexpr std::uint64_t kNoiseStream = 3;
// Child of the base seed reserved for sensing operators (one per replicate).
inline constexpr std::uint64_t kOperatorStream = ~std::uint64_t{0};

template <typename Scalar>
struct Prepared {
  ProblemInstance<Scalar> problem;
  FactorPair<Scalar> init;
  std::optional<double> radius;
};

inline Prepared<double> prepare_real(const ExperimentConfig& cfg, double kappa, std::uint64_t seed,
                                     const std::shared_ptr<const GaussianSensing>& op) {
  const auto truth = make_ground_truth(cfg.n1, cfg.n2, cfg.r, kappa, split_seed(seed, kTruthStream));
  const RealMatrix xs = truth.matrix();
  NoiseSpec noise;
  noise.snr_db = cfg.snr_db;
  noise.seed = split_seed(seed, kNoiseStream);
  auto noisy = [&](const RealMatrix& x) { return cfg.snr_db ? add_noise<double>(x, noise) : x; };

  Prepared<double> out;
  out.problem.n1 = cfg.n1;
  out.problem.n2 = cfg.n2;
  out.problem.truth = truth;
  switch (cfg.problem) {
    case ProblemKind::factorization:
      out.problem.data = problems::Factorization<double>{noisy(xs)};
      break;
    case ProblemKind::sensing: {
      RealVector y = op->apply(xs);
      if (cfg.snr_db) {
        // SNR measured against ||X*||_F with the n1 n2 normalization of the
        // matrix problems, noise placed on the m measurements.
        const double sigma = resolve_sigma_w(noise, xs.norm(), cfg.n1, cfg.n2);
        y += gaussian_noise<double>(y.size(), sigma, noise.seed);
      }
      out.problem.data = problems::Sensing{op, std::move(y)};
      break;
    }
    case ProblemKind::rpca: {
      const RealMatrix s = make_sparse_corruption(cfg.n1, cfg.n2, cfg.alpha, split_seed(seed, kCorruptionStream));
      out.problem.data = problems::Rpca{noisy(RealMatrix(xs + s)), cfg.alpha};
      break;
    }
    case ProblemKind::completion: {
      auto mask = std::make_shared<BernoulliMask>(cfg.n1, cfg.n2, cfg.p, split_seed(seed, kSamplingStream));
      RealMatrix observed = mask_project(*mask, noisy(xs));
      out.problem.data = problems::Completion{std::move(mask), std::move(observed), cfg.p};
      break;
    }
    default:
      throw ArgumentError("unsupported problem for a real grid");
  }

  if (cfg.problem == ProblemKind::sensing && cfg.warm_start_steps > 0) {
    const auto& s = out.problem.as<problems::Sensing>();
    const RealMatrix x0 = pgd_warm_start(*op, s.y, cfg.r, cfg.warm_start_steps);
    out.init = balanced_factors(top_r_svd(x0, cfg.r));
  } else {
    InitOptions opts;
    opts.projection = cfg.projection;
    auto init = spectral_init(out.problem, cfg.r, opts);
    out.init = std::move(init.factors);
    out.radius = init.radius;
  }
  return out;
}

inline Prepared<Complex> prepare_hankel(const ExperimentConfig& cfg, double kappa, std::uint64_t seed) {
  const auto h = make_hankel_ground_truth(cfg.n1, cfg.r, kappa, split_seed(seed, kTruthStream));
  NoiseSpec noise;
  noise.snr_db = cfg.snr_db;
  noise.seed = split_seed(seed, kNoiseStream);
  noise.structure = NoiseStructure::hankel;
  const ComplexMatrix y = cfg.snr_db ? add_noise<Complex>(h.X, noise) : h.X;
  const HankelSubset subset = sample_hankel_subset(cfg.n1, cfg.p, split_seed(seed, kSamplingStream));
  Prepared<Complex> out;
  out.problem.n1 = out.problem.n2 = cfg.n1;
  out.problem.truth = h.truth;
  ComplexMatrix observed = hankel_project<Complex>(y, subset);
  out.problem.data = problems::Hankel{subset, std::move(observed), cfg.p};
  out.init = spectral_init(out.problem, cfg.r).factors;
  return out;
}

template <typename Scalar>
std::vector<CsvRow> run_cell(const ExperimentConfig& cfg, const Prepared<Scalar>& prep, Algorithm algo, double kappa,
                             std::uint64_t seed, std::vector<std::string>& warnings) {
  SolverConfig sc;
  sc.algorithm = algo;
  sc.eta = cfg.eta;
  sc.max_iters = cfg.max_iters;
  sc.tol = cfg.tol;
  sc.divergence_threshold = cfg.divergence_threshold;
  sc.track_dist = cfg.track_dist;
  if (algo == Algorithm::scaledgd) sc.projection_radius = prep.radius;
  if (cfg.gd_sigma == GdSigmaSource::truth) sc.gd_sigma1 = prep.problem.truth->sigma(0);
  const auto trace = run_solver(prep.problem, prep.init, sc);
  warnings = trace.warnings;
  std::vector<CsvRow> rows;
  rows.reserve(trace.rows.size());
  for (const auto& t : trace.rows) {
    CsvRow row;
    row.problem = to_string(cfg.problem);
    row.algo = to_string(algo);
    row.kappa = kappa;
    row.seed = seed;
    row.iter = t.iter;
    row.rel_error = t.rel_error;
    row.dist = t.dist;
    row.elapsed_s = cfg.timing == TimingMode::wall ? t.elapsed_s : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace grid_detail

/// Runs every (kappa, algo, replicate) cell. The instance seed of replicate s
/// at kappa index k is split(base_seed, k * seeds + s) and is shared by all
/// algorithms; sensing replicates share one operator across kappa. Rows come
/// back sorted by (kappa, algo, seed, iter). Solver warnings go to `log`.
inline std::vector<CsvRow> run_grid(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  using namespace grid_detail;
  const auto kappa_count = static_cast<std::uint64_t>(cfg.kappas.size());
  const auto seeds = static_cast<std::uint64_t>(cfg.seeds);
  const std::size_t algos = cfg.algorithms.size();
  std::vector<std::vector<CsvRow>> cell_rows(kappa_count * seeds * algos);
  std::vector<std::vector<std::string>> cell_warnings(cell_rows.size());
  const bool complex_field = cfg.problem == ProblemKind::hankel;

  for (std::uint64_t s = 0; s < seeds; ++s) {
    std::shared_ptr<const GaussianSensing> op;
    if (cfg.problem == ProblemKind::sensing) {
      op = std::make_shared<GaussianSensing>(cfg.measurements(), cfg.n1, cfg.n2,
                                             split_seed(split_seed(cfg.base_seed, kOperatorStream), s));
    }
    std::vector<std::uint64_t> inst_seed(kappa_count);
    std::vector<Prepared<double>> real(complex_field ? 0 : kappa_count);
    std::vector<Prepared<Complex>> cplx(complex_field ? kappa_count : 0);
    const int workers = worker_count(kappa_count * algos);
    parallel_for(kappa_count, workers, [&](std::size_t k) {
      inst_seed[k] = split_seed(cfg.base_seed, k * seeds + s);
      if (complex_field) {
        cplx[k] = prepare_hankel(cfg, cfg.kappas[k], inst_seed[k]);
      } else {
        real[k] = prepare_real(cfg, cfg.kappas[k], inst_seed[k], op);
      }
    });
    parallel_for(kappa_count * algos, workers, [&](std::size_t task) {
      const std::size_t k = task / algos, a = task % algos;
      const std::size_t slot = (k * seeds + s) * algos + a;
      if (complex_field) {
        cell_rows[slot] = run_cell(cfg, cplx[k], cfg.algorithms[a], cfg.kappas[k], inst_seed[k], cell_warnings[slot]);
      } else {
        cell_rows[slot] = run_cell(cfg, real[k], cfg.algorithms[a], cfg.kappas[k], inst_seed[k], cell_warnings[slot]);
      }
    });
  }

  std::vector<CsvRow> rows;
  for (std::size_t c = 0; c < cell_rows.size(); ++c) {
    if (log) {
      for (const auto& w : cell_warnings[c]) *log << "warning: " << w << '\n';
    }
    for (auto& row : cell_rows[c]) rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    return std::tie(a.kappa, a.algo, a.seed, a.iter) < std::tie(b.kappa, b.algo, b.seed, b.iter);
  });
  return rows;
}

}  // namespace lowrank
