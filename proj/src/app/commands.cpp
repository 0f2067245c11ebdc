#include "pla/app/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fmt/format.h>
#include <ostream>

#include "pla/app/json_text.hpp"
#include "pla/errors.hpp"
#include "pla/version.hpp"

namespace pla::app {
namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class Run {
 public:
  Run(std::string command, const RunConfig& cfg, const RunContext& ctx)
      : command_(std::move(command)), cfg_(cfg), ctx_(ctx),
        started_(Clock::now()), started_wall_(std::time(nullptr)) {
    std::filesystem::create_directories(ctx.out_dir);
  }

  void write(const std::string& name, const std::string& content) {
    write_file(ctx_.out_dir / name, content);
    outputs_.push_back(name);
  }

  void warn(const std::string& msg) {
    if (ctx_.log) *ctx_.log << "warning: " << msg << "\n";
  }

  int finish(int code) {
    ojson m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["exit_code"] = code;
    m["master_seed"] = cfg_.sim.master_seed;
    m["config"] = config_to_json(cfg_);
    if (cfg_.system.message_power) {
      const double snr = cfg_.system.message_snr();
      m["message_snr"] = {{"linear", snr}, {"db", 10.0 * std::log10(snr)}};
    }
    const SolverOptions& s = cfg_.allocation.solver;
    m["solver"] = {{"method", "log-barrier Newton"},
                   {"initial_t", s.initial_t},
                   {"barrier_growth", s.barrier_growth},
                   {"gap_tolerance", s.gap_tolerance},
                   {"centering_tolerance", s.centering_tolerance}};
    m["keyed_hash"] = kKeyedHashName;
    m["sampling_path"] = cfg_.sim.full_vector ? "full_vector" : "direct_chi_squared";
    m["outputs"] = outputs_;
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&started_wall_));
    m["started_at_utc"] = stamp;
    m["wall_clock_seconds"] =
        std::chrono::duration<double>(Clock::now() - started_).count();
    write_file(ctx_.out_dir / "manifest.json", to_text(m));
    return code;
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  const RunContext& ctx_;
  Clock::time_point started_;
  std::time_t started_wall_;
  std::vector<std::string> outputs_;
};

std::string f17(double x) { return format_double(x); }

std::string etot_tag(double e) { return fmt::format("{:g}", e); }

ojson estimate_json(const SerEstimate& e) {
  return {{"errors", e.errors}, {"trials", e.trials}, {"rate", e.rate},
          {"wilson95", {e.lo, e.hi}}};
}

SystemConfig with_total(const RunConfig& cfg, double total) {
  SystemConfig sys = cfg.system;
  sys.total_power = total;
  sys.message_power.reset();
  return sys;
}

ojson solve_json(const SolveResult& r) {
  return {{"status", to_string(r.status)},
          {"k_opt", r.k_opt},
          {"objective", r.objective},
          {"kkt_residual", r.kkt_residual},
          {"iterations", r.iterations},
          {"power_slack", r.power_slack},
          {"ser_bound_slack", r.ser_bound_slack},
          {"duality_gap", r.duality_gap},
          {"detail", r.detail}};
}

}  // namespace

int run_design(const RunConfig& cfg, const RunContext& ctx) {
  Run run("design", cfg, ctx);
  const int n = cfg.system.antennas;
  const MessageConstellation base = design_constellation(cfg.system);
  const double log_r = std::log(base.ratio);
  std::vector<double> k;
  if (cfg.k) {
    k = *cfg.k;
  } else {
    k.assign(base.size(), cfg.tag_ratio * log_r);
  }
  TagEmbedding emb;
  try {
    emb = build_embedding(base, k);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("embedding.k", e.what());
  }
  const ErrorReport rep = analyze(emb, n);

  ojson j;
  const double snr = cfg.system.message_snr();
  j["system"] = {{"antennas", n},
                 {"noise_variance", cfg.system.sigma2},
                 {"constellation_size", cfg.system.constellation_size},
                 {"message_power", *cfg.system.message_power},
                 {"message_snr", snr},
                 {"message_snr_db", 10.0 * std::log10(snr)}};
  j["constellation"] = {{"ratio", base.ratio},
                        {"log_ratio", log_r},
                        {"powers", base.powers},
                        {"levels", base.levels},
                        {"thresholds", base.thresholds},
                        {"average_power", base.average_power()},
                        {"message_ser", message_ser_analytic(base, n)}};
  std::vector<double> r;
  for (double ki : emb.k) r.push_back(std::exp(ki));
  j["embedding"] = {{"k", emb.k},
                    {"tag_ratio", cfg.k ? ojson(nullptr) : ojson(cfg.tag_ratio)},
                    {"r", r},
                    {"a1", emb.a1},
                    {"a2", emb.a2},
                    {"b_prime", emb.b_prime},
                    {"c", emb.c},
                    {"tag_power", tag_power(emb)},
                    {"tag_power_from_amplitudes", tag_power_from_amplitudes(emb)}};
  j["errors"] = {{"p_em", rep.p_em}, {"p_et", rep.p_et}, {"p_em_upper", rep.p_em_upper}};
  run.write("design.json", to_text(j));
  return run.finish(kExitOk);
}

int run_optimize(const RunConfig& cfg, const RunContext& ctx) {
  Run run("optimize", cfg, ctx);
  ojson j;
  j["delta"] = cfg.system.delta;
  j["antennas"] = cfg.system.antennas;
  j["constellation_size"] = cfg.system.constellation_size;
  j["runs"] = ojson::array();
  bool infeasible = false;
  bool solver_failed = false;
  for (double total : cfg.total_powers) {
    const SystemConfig sys = with_total(cfg, total);
    ojson entry;
    entry["total_power"] = total;
    try {
      const AllocationResult a = allocate_power(sys, cfg.allocation);
      const std::string csv = "h_alpha_etot_" + etot_tag(total) + ".csv";
      std::string text = csv_line({"alpha", "tag_ser", "message_ser_upper", "feasible"});
      for (const auto& s : a.samples) {
        text += csv_line({f17(s.alpha), f17(s.tag_ser), f17(s.message_ser_upper),
                          s.feasible ? "1" : "0"});
      }
      run.write(csv, text);
      for (const auto& w : a.warnings) run.warn(fmt::format("E_tot = {}: {}", total, w));
      entry["status"] = "feasible";
      entry["alpha0"] = a.alpha0;
      entry["alpha_star"] = a.alpha_star;
      entry["h_star"] = a.h_star;
      entry["h_alpha0"] = a.samples.front().tag_ser;
      entry["h_one"] = a.samples.back().tag_ser;
      entry["message_power"] = a.alpha_star * total;
      entry["tag_budget"] = (1.0 - a.alpha_star) * total;
      entry["unimodal"] = a.unimodal;
      entry["warnings"] = a.warnings;
      entry["solve"] = solve_json(a.best);
      entry["csv"] = csv;
      if (a.best.status == SolveStatus::max_iter) solver_failed = true;
    } catch (const InfeasibleError& e) {
      infeasible = true;
      entry["status"] = "infeasible";
      entry["reason"] = "delta unreachable even at alpha = 1";
      entry["detail"] = e.what();
      entry["best_achievable_bound"] = e.best_achievable_bound();
      run.warn(fmt::format("E_tot = {}: {}", total, e.what()));
    }
    j["runs"].push_back(entry);
  }
  run.write("optimize.json", to_text(j));
  if (infeasible) return run.finish(kExitInfeasible);
  return run.finish(solver_failed ? kExitSolver : kExitOk);
}

int run_tradeoff(const RunConfig& cfg, const RunContext& ctx) {
  Run run("tradeoff", cfg, ctx);
  ojson j;
  j["deltas"] = cfg.deltas;
  j["runs"] = ojson::array();
  bool any_feasible = false;
  for (double total : cfg.total_powers) {
    const SystemConfig sys = with_total(cfg, total);
    const auto curve = tradeoff_curve(sys, cfg.deltas, cfg.allocation);
    const std::string csv = "tradeoff_etot_" + etot_tag(total) + ".csv";
    std::string text = csv_line({"delta", "min_tag_ser", "alpha_star"});
    ojson points = ojson::array();
    for (const auto& p : curve) {
      ojson pt = {{"delta", p.delta}, {"feasible", p.feasible}};
      if (p.feasible) {
        any_feasible = true;
        text += csv_line({f17(p.delta), f17(p.min_tag_ser), f17(p.alpha_star)});
        pt["min_tag_ser"] = p.min_tag_ser;
        pt["alpha_star"] = p.alpha_star;
      } else {
        pt["best_achievable_bound"] = p.best_achievable_bound;
        run.warn(fmt::format("E_tot = {}, delta = {}: infeasible (best bound {:.6g})",
                             total, p.delta, p.best_achievable_bound));
      }
      points.push_back(pt);
    }
    run.write(csv, text);
    j["runs"].push_back({{"total_power", total}, {"csv", csv}, {"points", points}});
  }
  run.write("tradeoff.json", to_text(j));
  return run.finish(any_feasible ? kExitOk : kExitInfeasible);
}

int run_simulate(const RunConfig& cfg, const RunContext& ctx) {
  Run run("simulate", cfg, ctx);
  SweepOptions opts;
  opts.antennas = cfg.system.antennas;
  opts.sigma2 = cfg.system.sigma2;
  opts.constellation_size = cfg.system.constellation_size;
  opts.delta = cfg.system.delta;
  opts.snr_db = cfg.snr_db;
  opts.tag_budget = cfg.tag_budget;
  opts.reference_snr_db = cfg.reference_snr_db;
  opts.sim = cfg.sim;

  const auto rows = reproduce_snr_sweep(opts);
  std::string text = csv_line(
      {"snr_db", "message_snr", "p_em_analytic", "p_em_empirical", "p_em_lo", "p_em_hi",
       "p_et_analytic", "p_et_empirical", "p_et_lo", "p_et_hi", "p_et_unconditional",
       "uniform_tag_power", "uniform_p_em_analytic", "uniform_p_et_analytic",
       "uniform_p_et_empirical", "uniform_p_et_lo", "uniform_p_et_hi"});
  double smallest_rate = 1.0;
  for (const auto& r : rows) {
    const auto& e = r.empirical;
    const double nan = std::nan("");
    const SerEstimate* u = r.uniform_empirical ? &r.uniform_empirical->tag_conditional : nullptr;
    text += csv_line({f17(r.snr_db), f17(r.message_snr), f17(r.p_em),
                      f17(e.message.rate), f17(e.message.lo), f17(e.message.hi),
                      f17(r.p_et), f17(e.tag_conditional.rate), f17(e.tag_conditional.lo),
                      f17(e.tag_conditional.hi), f17(e.tag_unconditional.rate),
                      f17(r.uniform_tag_power), f17(r.uniform_p_em), f17(r.uniform_p_et),
                      f17(u ? u->rate : nan), f17(u ? u->lo : nan), f17(u ? u->hi : nan)});
    for (double p : {r.p_em, r.p_et}) {
      if (p > 0.0) smallest_rate = std::min(smallest_rate, p);
    }
  }
  run.write("snr_sweep.csv", text);
  if (static_cast<double>(cfg.sim.trials) < 30.0 / smallest_rate) {
    run.warn(fmt::format("{} trials give fewer than 30 expected errors at rate {:.3g}",
                         cfg.sim.trials, smallest_rate));
  }

  // Authentication trials on the reference-SNR embedding.
  const TagEmbedding emb = sweep_embedding(opts, cfg.reference_snr_db);
  SimConfig ref_sim = cfg.sim;
  ref_sim.antennas = cfg.system.antennas;
  ref_sim.sigma2 = cfg.system.sigma2;
  ref_sim.stream_base = std::uint64_t{1} << 61;
  const SerTriple ref = simulate_ser(emb, ref_sim);

  AuthTrialConfig auth;
  auth.master_seed = cfg.sim.master_seed;
  auth.workers = cfg.sim.workers;
  auth.channel = {cfg.system.antennas, cfg.system.sigma2, cfg.auth.noiseless};
  auth.key = parse_hex(cfg.auth.key_hex, "simulate.auth.key_hex");
  auth.packets = cfg.auth.packets;
  auth.symbols_per_packet = cfg.auth.symbols_per_packet;
  const AuthTrialSummary legit = run_legitimate_trials(emb, auth);
  auth.packets = cfg.auth.forgery_packets;
  auth.symbols_per_packet = cfg.auth.forgery_symbols;
  const AuthTrialSummary forged = run_forgery_trials(emb, auth);

  const double per_symbol =
      (1.0 - ref.message.rate) * (1.0 - ref.tag_conditional.rate);
  const double predicted = std::pow(per_symbol, cfg.auth.symbols_per_packet);
  const double forged_expected = std::ldexp(1.0, -cfg.auth.forgery_symbols);
  auto z_score = [](const AuthTrialSummary& s, double p) {
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(s.packets));
    return sd > 0.0 ? (s.acceptance.rate - p) / sd : 0.0;
  };
  auto summary = [](const AuthTrialSummary& s) {
    return ojson{{"packets", s.packets},
                 {"accepted", s.accepted},
                 {"message_corrupted", s.message_corrupted},
                 {"tag_mismatch", s.tag_mismatch},
                 {"acceptance", estimate_json(s.acceptance)}};
  };

  ojson j;
  j["trials_per_point"] = cfg.sim.trials;
  j["master_seed"] = cfg.sim.master_seed;
  j["delta"] = cfg.system.delta;
  j["reference_snr_db"] = cfg.reference_snr_db;
  j["uniform_tag_power"] = rows.empty() ? 0.0 : rows.front().uniform_tag_power;
  j["rows"] = ojson::array();
  for (const auto& r : rows) {
    ojson row = {{"snr_db", r.snr_db},
                 {"k", r.k},
                 {"p_em", r.p_em},
                 {"p_et", r.p_et},
                 {"p_em_upper", r.p_em_upper},
                 {"empirical_p_em", estimate_json(r.empirical.message)},
                 {"empirical_p_et", estimate_json(r.empirical.tag_conditional)},
                 {"empirical_p_et_unconditional", estimate_json(r.empirical.tag_unconditional)},
                 {"uniform_valid", r.uniform_valid}};
    if (r.uniform_empirical) {
      row["uniform_p_em"] = r.uniform_p_em;
      row["uniform_p_et"] = r.uniform_p_et;
      row["uniform_empirical_p_et"] = estimate_json(r.uniform_empirical->tag_conditional);
    }
    j["rows"].push_back(row);
  }
  ojson a;
  a["keyed_hash"] = kKeyedHashName;
  a["embedding_k"] = emb.k;
  a["reference_rates"] = {{"message", estimate_json(ref.message)},
                          {"tag_conditional", estimate_json(ref.tag_conditional)}};
  a["legitimate"] = summary(legit);
  a["legitimate"]["symbols_per_packet"] = cfg.auth.symbols_per_packet;
  a["legitimate"]["predicted_acceptance"] = predicted;
  a["legitimate"]["z_score"] = z_score(legit, predicted);
  a["forgery"] = summary(forged);
  a["forgery"]["symbols_per_packet"] = cfg.auth.forgery_symbols;
  a["forgery"]["expected_acceptance"] = forged_expected;
  a["forgery"]["z_score"] = z_score(forged, forged_expected);
  j["authentication"] = a;
  run.write("simulate.json", to_text(j));
  return run.finish(kExitOk);
}

}  // namespace pla::app
