#include "pla/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "pla/constellation.hpp"
#include "pla/errors.hpp"
#include "pla/optimize.hpp"

namespace pla {
namespace {

struct BlockCounts {
  std::uint64_t trials = 0;
  std::uint64_t message_errors = 0;
  std::uint64_t message_correct = 0;
  std::uint64_t tag_errors_conditional = 0;
  std::uint64_t tag_errors = 0;
};

}  // namespace

MessageConstellation sweep_constellation(const SweepOptions& opts, double snr_db) {
  SystemConfig sys;
  sys.antennas = opts.antennas;
  sys.sigma2 = opts.sigma2;
  sys.constellation_size = opts.constellation_size;
  sys.delta = opts.delta;
  sys.message_power = std::pow(10.0, snr_db / 10.0) * opts.sigma2;
  return design_constellation(sys);
}

namespace {

TagEmbedding optimized_embedding(const SweepOptions& opts,
                                 const MessageConstellation& base) {
  EmbeddingProblem p;
  p.base = base;
  p.antennas = opts.antennas;
  p.delta = opts.delta;
  if (opts.tag_budget) {
    p.power_budget = *opts.tag_budget;
  } else {
    // Twice the largest tag power reachable inside the box.
    double cap = 0.0;
    for (double a : base.levels) cap += a * (base.ratio - 1.0);
    p.power_budget = cap / base.size();
  }
  const SolveResult r = solve_embedding(p);
  if (r.status == SolveStatus::infeasible) {
    throw InfeasibleError("no feasible embedding: " + r.detail, tag_free_bound(p));
  }
  if (r.status != SolveStatus::optimal) {
    throw SolverError("embedding solve stopped early: " + r.detail);
  }
  return build_embedding(base, r.k_opt);
}

}  // namespace

TagEmbedding sweep_embedding(const SweepOptions& opts, double snr_db) {
  return optimized_embedding(opts, sweep_constellation(opts, snr_db));
}

void run_blocks(std::uint64_t blocks, int workers,
                const std::function<void(std::uint64_t)>& work) {
  const auto n_threads = static_cast<std::uint64_t>(std::max(1, workers));
  if (n_threads == 1 || blocks <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) work(b);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  const auto spawn = std::min(n_threads, blocks);
  pool.reserve(spawn);
  for (std::uint64_t t = 0; t < spawn; ++t) {
    pool.emplace_back([&] {
      for (std::uint64_t b = next++; b < blocks; b = next++) work(b);
    });
  }
  for (auto& th : pool) th.join();
}

SerTriple simulate_ser(const TagEmbedding& emb, const SimConfig& cfg) {
  if (emb.size() == 0) throw std::invalid_argument("simulate_ser: empty embedding");
  const std::uint64_t blocks = (cfg.trials + kSimBlock - 1) / kSimBlock;
  std::vector<BlockCounts> counts(blocks);
  const int symbols = static_cast<int>(emb.size());

  run_blocks(blocks, cfg.workers, [&](std::uint64_t b) {
    RngStream rng(cfg.master_seed, cfg.stream_base + b);
    EnergySampler sampler(cfg.antennas);
    std::uniform_int_distribution<int> pick(0, 2 * symbols - 1);
    BlockCounts c;
    c.trials = std::min(kSimBlock, cfg.trials - b * kSimBlock);
    for (std::uint64_t t = 0; t < c.trials; ++t) {
      const int draw = pick(rng);
      const auto i = static_cast<std::size_t>(draw >> 1);
      const int bit = draw & 1;
      const double mean = bit ? emb.a2[i] : emb.a1[i];
      const double energy =
          cfg.full_vector
              ? sample_received_energy_full(mean - cfg.sigma2, cfg.sigma2,
                                            cfg.antennas, rng)
              : sampler(mean, rng);
      const Detection d = detect(energy, emb);
      const bool tag_wrong = d.tag_bit != bit;
      if (d.message != i) {
        ++c.message_errors;
      } else {
        ++c.message_correct;
        if (tag_wrong) ++c.tag_errors_conditional;
      }
      if (tag_wrong) ++c.tag_errors;
    }
    counts[b] = c;
  });

  BlockCounts total;
  for (const auto& c : counts) {
    total.trials += c.trials;
    total.message_errors += c.message_errors;
    total.message_correct += c.message_correct;
    total.tag_errors_conditional += c.tag_errors_conditional;
    total.tag_errors += c.tag_errors;
  }
  SerTriple out;
  out.message = make_estimate(total.message_errors, total.trials);
  out.tag_conditional =
      make_estimate(total.tag_errors_conditional, total.message_correct);
  out.tag_unconditional = make_estimate(total.tag_errors, total.trials);
  return out;
}

double match_uniform_power(const MessageConstellation& base, int antennas,
                           double target_p_em) {
  const double t_max = base.levels.front() * (base.ratio - 1.0);
  auto p_em = [&](double t) {
    return message_ser_embedded(uniform_embedding(base, t), antennas);
  };
  double lo = 0.0;
  double hi = t_max * (1.0 - 1e-12);
  if (!(p_em(lo) <= target_p_em)) {
    throw std::domain_error("target message SER is below the tag-free value");
  }
  if (p_em(hi) <= target_p_em) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * t_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p_em(mid) <= target_p_em ? lo : hi) = mid;
  }
  return lo;
}

std::vector<SweepRow> reproduce_snr_sweep(const SweepOptions& opts) {
  const MessageConstellation ref_base =
      sweep_constellation(opts, opts.reference_snr_db);
  const TagEmbedding ref = optimized_embedding(opts, ref_base);
  const double uniform_t = match_uniform_power(
      ref_base, opts.antennas, message_ser_embedded(ref, opts.antennas));

  std::vector<SweepRow> rows;
  for (std::size_t r = 0; r < opts.snr_db.size(); ++r) {
    SweepRow row;
    row.snr_db = opts.snr_db[r];
    row.message_snr = std::pow(10.0, row.snr_db / 10.0);
    const MessageConstellation base = sweep_constellation(opts, row.snr_db);
    const TagEmbedding emb = optimized_embedding(opts, base);
    row.k = emb.k;
    const ErrorReport rep = analyze(emb, opts.antennas);
    row.p_em = rep.p_em;
    row.p_et = rep.p_et;
    row.p_em_upper = rep.p_em_upper;

    SimConfig sim = opts.sim;
    sim.antennas = opts.antennas;
    sim.sigma2 = opts.sigma2;
    sim.stream_base = static_cast<std::uint64_t>(2 * r) << 40;
    row.empirical = simulate_ser(emb, sim);

    row.uniform_tag_power = uniform_t;
    const TagEmbedding uni = uniform_embedding(base, uniform_t);
    row.uniform_valid = uni.all_valid();
    if (row.uniform_valid) {
      const ErrorReport u = analyze(uni, opts.antennas);
      row.uniform_p_em = u.p_em;
      row.uniform_p_et = u.p_et;
      sim.stream_base = static_cast<std::uint64_t>(2 * r + 1) << 40;
      row.uniform_empirical = simulate_ser(uni, sim);
    } else {
      row.uniform_p_em = std::nan("");
      row.uniform_p_et = std::nan("");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pla
