// Acceptance checks for the scaling simulator: prints one PASS/FAIL line per
// criterion and exits nonzero if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nfvscale/harness.hpp"

using namespace nfvs;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::string line = "[acceptance] " + name + ": " + (ok ? "PASS" : "FAIL");
  if (!detail.empty()) line += " (" + detail + ")";
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) fields.push_back(cell);
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

RunMetrics drive_static(const RunConfig& cfg, ThresholdPair tp) {
  SimDriver d(cfg);
  StaticProvider prov(tp, cfg.num_types(), cfg.threshold_margin);
  auto obs = d.initial_observations();
  auto feats = d.features_of(obs);
  while (!d.done()) {
    const auto res = d.run_cycle(prov.decide(obs, feats));
    obs = res.obs;
    feats = res.features;
  }
  return d.finish();
}

// ---- conservation across the scenario grid --------------------------------

RunConfig grid_config(TrafficPattern pattern, PolicyKind kind, std::uint64_t seed, Tick horizon) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.cycle_len = 60;
  cfg.scenario.pattern = pattern;
  cfg.scenario.horizon = horizon;
  cfg.scenario.base_rate = 80.0;
  cfg.scenario.period = 300;
  cfg.scenario.seed = seed;
  if (pattern == TrafficPattern::SpikyPeriodic) {
    cfg.scenario.spike_count = 3;
    cfg.scenario.spike_magnitude = 5.0;
  }
  if (pattern == TrafficPattern::Aperiodic) cfg.scenario.noise_level = 0.4;
  VnfTypeConfig t;
  t.profile.base_capacity = 50.0;
  t.profile.max_queue_len = 60;
  t.initial_instances = 1;
  cfg.vnf_types = {t, t};
  cfg.pool.max_vms = 8;
  cfg.pool.initial_idle = 1;
  cfg.pool.boot_delay = 5;
  cfg.policy.kind = kind;
  cfg.finalize();
  return cfg;
}

void check_conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const TrafficPattern patterns[] = {TrafficPattern::FlatPeriodic, TrafficPattern::SpikyPeriodic,
                                     TrafficPattern::Aperiodic};
  const PolicyKind kinds[] = {PolicyKind::Static, PolicyKind::Proportional};
  std::string bad;
  for (TrafficPattern p : patterns)
    for (PolicyKind k : kinds)
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const RunConfig cfg = grid_config(p, k, seed, 3600);
        const RunOutputs out = run(cfg, std::nullopt);
        const auto& m = out.metrics;
        if (m.generated != m.processed + m.dropped + m.residual) {
          bad = std::string(to_string(p)) + "/" + to_string(k) + "/seed " + std::to_string(seed) +
                ": " + std::to_string(m.generated) + " != " + std::to_string(m.processed) + "+" +
                std::to_string(m.dropped) + "+" + std::to_string(m.residual);
          break;
        }
        if (m.generated <= 0) {
          bad = "no traffic generated";
          break;
        }
      }
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_budget = secs < 60.0;
  report("C1 packet conservation across the scenario grid", bad.empty() && in_budget,
         bad.empty() ? "18 runs, " + std::to_string(secs).substr(0, 5) + "s" : bad);
}

// ---- gradients vs central finite differences -------------------------------

double max_rel_fd_error(DenseNet& net, std::vector<double> x, const std::vector<double>& up) {
  auto loss = [&]() {
    const auto y = net.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += up[i] * y[i];
    return s;
  };
  const auto bw = net.backward(x, up);
  const double eps = 1e-5;
  double worst = 0.0;
  auto probe = [&](double& slot, double g) {
    const double saved = slot;
    slot = saved + eps;
    const double fp = loss();
    slot = saved - eps;
    const double fm = loss();
    slot = saved;
    const double fd = (fp - fm) / (2.0 * eps);
    worst = std::max(worst, std::abs(fd - g) / std::max({1.0, std::abs(fd), std::abs(g)}));
  };
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    for (std::size_t i = 0; i < net.weights()[l].size(); ++i)
      probe(net.weights()[l][i], bw.grad.w[l][i]);
    for (std::size_t i = 0; i < net.biases()[l].size(); ++i)
      probe(net.biases()[l][i], bw.grad.b[l][i]);
  }
  for (std::size_t j = 0; j < x.size(); ++j) probe(x[j], bw.input_grad[j]);
  return worst;
}

// Smallest |pre-activation| across the hidden layers: central differences are
// only meaningful away from the rectifier's corner, so inputs that put any
// hidden unit within the probe's reach of it get redrawn.
double min_hidden_margin(const DenseNet& net, const std::vector<int>& sizes,
                         const std::vector<double>& x) {
  double margin = 1e300;
  std::vector<double> a = x;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto in = static_cast<std::size_t>(sizes[l]);
    const auto out = static_cast<std::size_t>(sizes[l + 1]);
    const bool last = l + 2 == sizes.size();
    std::vector<double> next(out);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = net.biases()[l][r];
      for (std::size_t c = 0; c < in; ++c) acc += net.weights()[l][r * in + c] * a[c];
      if (last) {
        next[r] = acc;
      } else {
        margin = std::min(margin, std::abs(acc));
        next[r] = acc > 0.0 ? acc : 0.0;
      }
    }
    a = std::move(next);
  }
  return margin;
}

void check_gradients() {
  Rng rng(777);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<int> sizes{1 + static_cast<int>(rng.uniform_int(0, 5))};
    const int hidden_layers = static_cast<int>(rng.uniform_int(0, 2));
    for (int h = 0; h < hidden_layers; ++h)
      sizes.push_back(1 + static_cast<int>(rng.uniform_int(0, 7)));
    sizes.push_back(1 + static_cast<int>(rng.uniform_int(0, 2)));
    DenseNet net(sizes, k % 2 == 0 ? OutputActivation::Tanh : OutputActivation::Linear, rng);
    std::vector<double> x(static_cast<std::size_t>(sizes.front()));
    for (int draw = 0; draw < 500; ++draw) {
      for (auto& v : x) v = rng.uniform(-0.9, 0.9);
      if (min_hidden_margin(net, sizes, x) > 1e-3) break;
    }
    std::vector<double> up(static_cast<std::size_t>(sizes.back()));
    for (auto& v : up) v = rng.uniform(-1.0, 1.0);
    worst = std::max(worst, max_rel_fd_error(net, x, up));
  }
  report("C2 backward pass matches finite differences", worst < 1e-4,
         "max relative error " + std::to_string(worst));
}

// ---- pool partition invariant under fuzzed decisions ------------------------

std::optional<std::string> partition_violation(const World& w, const ScalingEngine& e) {
  const auto& q = e.queues();
  std::set<int> idle_set;
  for (const auto& [vm, at] : q.idle) {
    (void)at;
    if (!idle_set.insert(vm).second) return "vm listed twice in the idle queue";
  }
  for (int vm : q.running)
    if (idle_set.count(vm)) return "vm tracked as both running and idle";
  int n_run = 0, n_idle = 0;
  for (const auto& slot : w.vms()) {
    const bool in_run = q.running.count(slot.vm_id) > 0;
    const bool in_idle = idle_set.count(slot.vm_id) > 0;
    switch (slot.state) {
      case VmState::Running:
      case VmState::Draining:
        if (!in_run || in_idle) return "working vm " + std::to_string(slot.vm_id) + " mistracked";
        ++n_run;
        break;
      case VmState::Idle:
        if (!in_idle || in_run) return "idle vm " + std::to_string(slot.vm_id) + " mistracked";
        ++n_idle;
        break;
      default:
        if (in_run || in_idle)
          return "unpowered vm " + std::to_string(slot.vm_id) + " still tracked";
    }
  }
  if (static_cast<int>(q.running.size()) != n_run) return "running count mismatch";
  if (static_cast<int>(q.idle.size()) != n_idle) return "idle count mismatch";
  return std::nullopt;
}

void check_partition_fuzz() {
  SimConfig sc;
  sc.boot_delay = 2;
  sc.max_vms = 10;
  sc.hosts_per_rack = 3;
  VnfProfile prof;
  prof.base_capacity = 30.0;
  prof.max_queue_len = 40;
  sc.profiles = {prof, prof};
  World w(sc);
  for (int type = 0; type < 2; ++type)
    for (int k = 0; k < 2; ++k) w.deploy_instance(type);
  w.warm_idle_vm();
  w.warm_idle_vm();

  EnergyConfig energy;
  energy.min_idle = 0;
  energy.max_idle = 6;
  ScalingEngine engine(energy);
  engine.sync_from_world(w);

  std::vector<FlowSpec> flows;
  for (int i = 0; i < 8; ++i) {
    FlowSpec f;
    f.flow_id = i;
    f.vnf_type = i % 2;
    f.arrival_tick = 0;
    f.duration = 20000;
    f.rate.assign(20000, 12.0);
    flows.push_back(f);
  }
  for (const auto& f : flows) w.register_flow(f);
  const auto rates = [](int) { return 12.0; };
  const ThresholdPair tp{0.7, 0.2};

  Rng rng(4242);
  std::string bad;
  for (int op = 0; op < 10000 && bad.empty(); ++op) {
    const int r = static_cast<int>(rng.uniform_int(0, 99));
    if (r < 45) {
      std::vector<std::pair<int, int>> inputs;
      for (const auto& f : flows)
        if (rng.uniform(0.0, 1.0) < 0.5)
          inputs.emplace_back(f.flow_id, static_cast<int>(rng.uniform_int(0, 25)));
      engine.observe_events(w.step(inputs));
    } else if (r < 60) {
      const int type = static_cast<int>(rng.uniform_int(0, 1));
      engine.scale_out(w, type, engine.busiest_instance(w, type), tp, rates, w.now(),
                       DecisionOrigin::Cycle);
    } else if (r < 72) {
      engine.scale_in(w, static_cast<int>(rng.uniform_int(0, 1)), tp, rates, w.now());
    } else if (r < 82) {
      engine.resize_idle_pool(w, static_cast<int>(rng.uniform_int(0, 5)), w.now(), 1.0);
    } else if (r < 92) {
      engine.retry_deferred(w, rates, w.now());
    } else {
      engine.observe_events(w.step({}));
    }
    if (auto v = partition_violation(w, engine))
      bad = "op " + std::to_string(op) + ": " + *v;
  }
  report("C3 pool partition invariant under 10000 fuzzed operations", bad.empty(), bad);
}

// ---- tuned idle count vs brute force ----------------------------------------

void check_tuned_idle() {
  Rng rng(999);
  std::string bad;
  for (int k = 0; k < 1000 && bad.empty(); ++k) {
    EnergyRatioInputs in;
    in.v_total = rng.uniform(0.0, 20000.0);
    in.n_run = static_cast<int>(rng.uniform_int(0, 40));
    in.n_idle = static_cast<int>(rng.uniform_int(0, 40));
    if (in.n_run + in.n_idle == 0) in.n_idle = 1;
    in.h = rng.uniform(0.5, 0.95);
    const Tick ts[] = {30, 60, 120};
    in.t = ts[rng.uniform_int(0, 2)];
    const double ideal = rng.uniform(0.1, 80.0);

    const double measured = energy_ratio(in);
    const int tuned = tuned_idle_count(measured, ideal, in.n_run, in.n_idle);
    const double real = tuned_idle_real(measured, ideal, in.n_run, in.n_idle);

    auto ratio_with_idle = [&](double idle) {
      return in.v_total /
             ((static_cast<double>(in.n_run) + idle) * in.h * static_cast<double>(in.t));
    };
    const int scan_end = std::max(2, static_cast<int>(std::ceil(std::max(0.0, real))) + 2);
    int best = 0;
    double best_err = -1.0;
    for (int n = 0; n <= scan_end; ++n) {
      const double g = in.n_run + n > 0 ? ratio_with_idle(n) : 0.0;
      const double err = std::abs(g - ideal);
      if (best_err < 0.0 || err < best_err) {
        best = n;
        best_err = err;
      }
    }
    if (std::abs(tuned - best) > 1) {
      bad = "tuple " + std::to_string(k) + ": tuned " + std::to_string(tuned) +
            " vs brute force " + std::to_string(best);
      break;
    }
    if (real >= 0.0 && in.v_total > 0.0) {
      const double back = ratio_with_idle(real);
      if (std::abs(back - ideal) > 1e-9 * std::max(1.0, std::abs(ideal))) {
        bad = "tuple " + std::to_string(k) + ": pre-rounding identity off by " +
              std::to_string(std::abs(back - ideal));
        break;
      }
    }
  }
  report("C4 tuned idle count matches brute-force search on 1000 tuples", bad.empty(), bad);
}

// ---- emergency reaction vs cycle boundary -----------------------------------

RunConfig burst_config(bool enforcement_on) {
  RunConfig cfg;
  cfg.seed = 31;
  cfg.cycle_len = 60;
  cfg.scenario.pattern = TrafficPattern::SpikyPeriodic;
  cfg.scenario.horizon = 240;
  cfg.scenario.base_rate = 25.0;
  cfg.scenario.period = 200;  // burst width: 20 ticks
  cfg.scenario.spike_count = 1;
  cfg.scenario.spike_magnitude = 10.0;
  cfg.scenario.spike_offsets = {170};
  cfg.scenario.noise_level = 0.0;
  cfg.scenario.seed = 31;
  VnfTypeConfig t;
  t.profile.base_capacity = 50.0;
  t.profile.max_queue_len = 300;
  t.initial_instances = 1;
  cfg.vnf_types = {t};
  cfg.pool.max_vms = 4;
  cfg.pool.initial_idle = 1;
  cfg.pool.boot_delay = 3;
  cfg.sla.enabled = enforcement_on;
  cfg.sla.max_loss_rate = 0.05;
  cfg.sla.max_queue_frac = 0.9;
  cfg.sla.consecutive_ticks = 1;
  cfg.energy.max_idle = 1;
  cfg.finalize();
  return cfg;
}

struct BurstTrace {
  std::vector<std::vector<std::string>> decisions;
  std::vector<std::vector<std::string>> alarms;
};

BurstTrace run_burst(bool enforcement_on) {
  const RunConfig cfg = burst_config(enforcement_on);
  SimDriver d(cfg);
  StaticProvider prov(ThresholdPair{0.8, 0.2}, 1);
  auto obs = d.initial_observations();
  auto feats = d.features_of(obs);
  while (!d.done()) {
    const auto res = d.run_cycle(prov.decide(obs, feats));
    obs = res.obs;
    feats = res.features;
  }
  BurstTrace tr;
  tr.decisions = csv_rows(d.decisions_csv());
  tr.alarms = csv_rows(d.alarms_csv());
  return tr;
}

void check_emergency_timing() {
  const BurstTrace on = run_burst(true);
  std::string bad;

  if (on.alarms.empty()) {
    bad = "no alarm raised under the burst";
  } else {
    const long t_alarm = std::stol(on.alarms.front().at(0));
    long t_emergency = -1;
    for (const auto& row : on.decisions) {
      if (row.at(2) == "scale_out" && row.at(3) == "emergency") {
        t_emergency = std::stol(row.at(0));
        break;
      }
    }
    if (t_alarm < 170 || t_alarm > 172) {
      bad = "alarm at tick " + std::to_string(t_alarm) + ", expected the burst window";
    } else if (t_emergency < 0) {
      bad = "no emergency scale-out logged";
    } else if (t_emergency - t_alarm < 0 || t_emergency - t_alarm > 1) {
      bad = "emergency at tick " + std::to_string(t_emergency) + " vs breach at " +
            std::to_string(t_alarm);
    }
  }

  if (bad.empty()) {
    const BurstTrace off = run_burst(false);
    if (!off.alarms.empty()) {
      bad = "alarms logged with enforcement disabled";
    } else {
      long t_first = -1;
      std::string origin;
      for (const auto& row : off.decisions) {
        if (row.at(2) == "scale_out" || row.at(2) == "scale_in") {
          t_first = std::stol(row.at(0));
          origin = row.at(3);
          break;
        }
      }
      if (t_first != 180 || origin != "cycle")
        bad = "first reactive decision at tick " + std::to_string(t_first) + " origin " + origin +
              ", expected the 180 boundary";
    }
  }
  report("C5 emergency path reacts within a tick, reactive path at the boundary", bad.empty(),
         bad);
}

// ---- learned policy vs static baseline --------------------------------------

RunConfig learning_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.cycle_len = 60;
  cfg.scenario.pattern = TrafficPattern::FlatPeriodic;
  cfg.scenario.horizon = 600;
  cfg.scenario.base_rate = 120.0;
  cfg.scenario.period = 60;
  cfg.scenario.noise_level = 0.05;
  cfg.scenario.seed = seed;
  VnfTypeConfig t;
  t.profile.base_capacity = 140.0;
  t.profile.max_queue_len = 300;
  t.initial_instances = 1;
  cfg.vnf_types = {t, t};
  cfg.pool.max_vms = 12;
  cfg.pool.initial_idle = 2;
  cfg.pool.boot_delay = 10;
  cfg.sla.enabled = false;
  cfg.energy.min_idle = 2;
  cfg.energy.max_idle = 2;
  cfg.agent.actor_hidden = {32, 32};
  cfg.agent.critic_hidden = {32, 32};
  cfg.agent.batch_size = 32;
  cfg.agent.buffer_capacity = 4000;
  cfg.finalize();
  return cfg;
}

void check_learning(const fs::path& tmp) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t train_seeds[] = {21, 22, 23, 24, 25};
  const std::uint64_t held_out[] = {91, 92, 93};

  std::vector<double> dd_alpha, dd_loss;
  std::string bad;
  for (std::uint64_t seed : train_seeds) {
    const RunConfig cfg = learning_config(seed);
    const TrainOutputs tr = train(cfg, 200, tmp / ("c6_seed" + std::to_string(seed)));
    for (std::uint64_t held : held_out) {
      RunConfig ev = cfg;
      ev.scenario.seed = held;
      SimDriver d(ev);
      DdpgAgent agent(cfg.agent);
      std::ifstream in(tr.best_checkpoint);
      if (!in) {
        bad = "missing checkpoint for seed " + std::to_string(seed);
        break;
      }
      agent.load(in);
      const EpisodeResult ep = run_episode(d, agent, false, false);
      dd_alpha.push_back(ep.metrics.alpha);
      dd_loss.push_back(ep.metrics.packet_loss_rate);
    }
    if (!bad.empty()) break;
  }

  std::vector<double> st_alpha, st_loss;
  if (bad.empty()) {
    for (std::uint64_t held : held_out) {
      RunConfig ev = learning_config(train_seeds[0]);
      ev.scenario.seed = held;
      const RunMetrics m = drive_static(ev, ThresholdPair{0.8, 0.2});
      st_alpha.push_back(m.alpha);
      st_loss.push_back(m.packet_loss_rate);
    }
  }

  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = bad.empty();
  std::string detail = bad;
  if (ok) {
    const double da = median(dd_alpha), sa = median(st_alpha);
    const double dl = median(dd_loss), sl = median(st_loss);
    ok = da <= sa + 1e-12 && dl <= sl + 1e-12 && secs < 1800.0;
    detail = "alpha " + std::to_string(da) + " vs " + std::to_string(sa) + ", loss " +
             std::to_string(dl) + " vs " + std::to_string(sl) + ", " +
             std::to_string(secs).substr(0, 6) + "s";
  }
  report("C6 trained policy matches or beats the static baseline", ok, detail);
}

// ---- bitwise determinism -----------------------------------------------------

void check_determinism(const fs::path& tmp) {
  RunConfig cfg = grid_config(TrafficPattern::SpikyPeriodic, PolicyKind::Static, 7, 1200);
  run(cfg, tmp / "c7_a");
  run(cfg, tmp / "c7_b");
  std::string bad;
  for (const char* name : {"metrics.csv", "ticks.csv", "decisions.csv", "alarms.csv"}) {
    const std::string a = read_file(tmp / "c7_a" / name);
    const std::string b = read_file(tmp / "c7_b" / name);
    if (a.empty() || a != b) {
      bad = std::string(name) + (a.empty() ? " missing" : " differs between reruns");
      break;
    }
  }
  report("C7 reruns reproduce bitwise-identical outputs", bad.empty(), bad);
}

// ---- reward monotonicity and symmetry ----------------------------------------

void check_reward_properties() {
  Rng rng(31337);
  std::string bad;
  for (int k = 0; k < 1000 && bad.empty(); ++k) {
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 4));
    std::vector<VnfCycleAggregate> agg(static_cast<std::size_t>(n));
    for (auto& a : agg) {
      a.processed = rng.uniform(0.0, 500.0);
      a.dropped = rng.uniform(0.0, 100.0);
      a.mean_queue = rng.uniform(0.0, 50.0);
    }
    const double r = compute_reward(agg);
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    const double delta = rng.uniform(0.1, 10.0);

    auto up = agg;
    up[i].processed += delta;
    if (!(compute_reward(up) > r)) {
      bad = "reward not increasing in served volume";
      break;
    }
    auto dropped = agg;
    dropped[i].dropped += delta;
    if (!(compute_reward(dropped) < r)) {
      bad = "reward not decreasing in dropped volume";
      break;
    }
    auto queued = agg;
    queued[i].mean_queue += delta;
    if (!(compute_reward(queued) < r)) {
      bad = "reward not decreasing in standing queue";
      break;
    }

    auto perm = agg;
    for (std::size_t j = perm.size(); j > 1; --j) {
      const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j) - 1));
      std::swap(perm[j - 1], perm[pick]);
    }
    if (std::abs(compute_reward(perm) - r) > 1e-12) {
      bad = "reward changed under reordering";
      break;
    }
  }
  report("C8 reward monotonicity and permutation invariance on 1000 sets", bad.empty(), bad);
}

}  // namespace

int main() {
  const fs::path tmp = "acceptance_tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  try {
    check_conservation();
  } catch (const std::exception& e) {
    report("C1 packet conservation across the scenario grid", false, e.what());
  }
  try {
    check_gradients();
  } catch (const std::exception& e) {
    report("C2 backward pass matches finite differences", false, e.what());
  }
  try {
    check_partition_fuzz();
  } catch (const std::exception& e) {
    report("C3 pool partition invariant under 10000 fuzzed operations", false, e.what());
  }
  try {
    check_tuned_idle();
  } catch (const std::exception& e) {
    report("C4 tuned idle count matches brute-force search on 1000 tuples", false, e.what());
  }
  try {
    check_emergency_timing();
  } catch (const std::exception& e) {
    report("C5 emergency path reacts within a tick, reactive path at the boundary", false,
           e.what());
  }
  try {
    check_learning(tmp);
  } catch (const std::exception& e) {
    report("C6 trained policy matches or beats the static baseline", false, e.what());
  }
  try {
    check_determinism(tmp);
  } catch (const std::exception& e) {
    report("C7 reruns reproduce bitwise-identical outputs", false, e.what());
  }
  try {
    check_reward_properties();
  } catch (const std::exception& e) {
    report("C8 reward monotonicity and permutation invariance on 1000 sets", false, e.what());
  }

  fs::remove_all(tmp);
  std::printf("[acceptance] %d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
