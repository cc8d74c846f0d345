#include "acl/runner.hpp"

#include "acl/composite.hpp"
#include "acl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <thread>

namespace acl {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  f << std::setprecision(17);
  return f;
}

void write_json(const std::filesystem::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

json report(const RunConfig& cfg, json results, double total_seconds, json extra_timings = json::object()) {
  extra_timings["total_seconds"] = total_seconds;
  return {{"schema_version", kSchemaVersion}, {"config", config_to_json(cfg)}, {"results", std::move(results)}, {"timings", std::move(extra_timings)}};
}

void write_plan_csv(const std::filesystem::path& p, const LevelPlan& plan) {
  auto f = open_out(p);
  f << "t,h,k,m,M,w2_next,B\n";
  for (auto it = plan.levels.rbegin(); it != plan.levels.rend(); ++it) {
    f << it->t << ',' << it->h << ',' << it->k << ',' << it->m << ',' << it->M << ',' << it->w2_next << ',' << it->B << '\n';
  }
}

void write_samples_csv(const std::filesystem::path& p, const SampleSet& s) {
  auto f = open_out(p);
  for (Index k = 0; k < s.dim(); ++k) f << (k ? "," : "") << "theta_" << k;
  f << '\n';
  for (Index j = 0; j < s.count(); ++j) {
    for (Index k = 0; k < s.dim(); ++k) f << (k ? "," : "") << s.points(j, k);
    f << '\n';
  }
}

json task_data_json(const Task& task) {
  json obs = json::array();
  for (const auto& x : task.observations) obs.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  json cov = json::array();
  for (Index r = 0; r < task.base_cov.rows(); ++r) {
    const Vector row = task.base_cov.row(r);
    cov.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  return {{"theta_true", std::vector<double>(task.theta_true.data(), task.theta_true.data() + task.theta_true.size())},
          {"observations", obs},
          {"likelihood_cov", cov}};
}

Index single_n(const RunConfig& cfg, const char* cmd) {
  if (cfg.n_list.size() != 1) {
    throw std::invalid_argument(std::string(cmd) + " takes a single observation count; use sweep for several");
  }
  return cfg.n_list.front();
}

std::string cell_status(const CellResult& r) { return r.ok ? "ok" : "failed"; }

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

TuningConfig tuning_config(const RunConfig& cfg, Index n, std::uint64_t seed) {
  TuningConfig tc;
  tc.gamma = cfg.gamma;
  tc.omega = cfg.resolved_omega();
  tc.eps_dsm = compose_dsm_error(cfg.eps_dsm_prior, cfg.eps_dsm_post, n, Method::geffner);
  tc.T = cfg.T;
  tc.seed = seed;
  return tc;
}

Task build_task(const RunConfig& cfg, Index n, std::uint64_t run_seed) {
  return make_task(cfg.task, n, cfg.data_seed_for(run_seed));
}

std::uint64_t reference_seed(std::uint64_t run_seed) { return mix64(run_seed ^ 0x7265666572656e63ULL); }

CellResult run_cell(const RunConfig& cfg, const Task& task, Method method, std::uint64_t seed, bool sample, int workers,
                    SampleSet* samples_out) {
  const auto t0 = Clock::now();
  CellResult r;
  r.n = task.n();
  r.method = method;
  r.seed = seed;
  try {
    const TuningConfig tc = tuning_config(cfg, task.n(), seed);
    LevelPlan p = plan(task, method, tc, cfg.schedule);
    r.total_steps = p.total_steps();
    r.global_bound = global_bound(p);
    r.plan = std::move(p);
    if (sample) {
      SamplerOptions so;
      so.workers = workers;
      const auto field = make_composite(task, method, cfg.schedule);
      SampleSet s = annealed_sample(*r.plan, field, cfg.chains, seed, so);
      const SampleSet ref = exact_posterior_sample(task, cfg.reference_samples, reference_seed(seed), cfg.task.component_cap);
      r.w2 = empirical_w2(s, ref, cfg.w2_cap, seed);
      if (samples_out) *samples_out = std::move(s);
    }
    r.ok = true;
  } catch (const TuningError& e) {
    r.error = e.what();
    r.failed_level = e.level();
  } catch (const SamplerError& e) {
    r.error = e.what();
    r.failed_level = e.level();
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

json plan_to_json(const LevelPlan& plan) {
  json levels = json::array();
  for (std::size_t p = 0; p < plan.levels.size(); ++p) {
    const auto& l = plan.levels[p];
    levels.push_back({{"p", p}, {"t", l.t}, {"h", l.h}, {"k", l.k}, {"m", l.m}, {"M", l.M}, {"w2_next", l.w2_next}, {"B", l.B}});
  }
  return {{"method", std::string(to_string(plan.method))},
          {"dim", plan.dim},
          {"proxy", plan.proxy},
          {"gamma", plan.config.gamma},
          {"omega", plan.config.omega},
          {"eps_dsm", plan.config.eps_dsm},
          {"T", plan.config.T},
          {"t_end", plan.t_end},
          {"total_steps", plan.total_steps()},
          {"levels", levels}};
}

json cell_to_json(const CellResult& r) {
  json j = {{"n", r.n},
            {"method", std::string(to_string(r.method))},
            {"seed", r.seed},
            {"status", cell_status(r)},
            {"feasible", r.plan.has_value()},
            {"seconds", r.seconds}};
  if (!r.ok) {
    j["error"] = r.error;
    j["level"] = r.failed_level >= 0 ? json(r.failed_level) : json(nullptr);
  }
  if (r.plan) {
    j["total_steps"] = r.total_steps;
    j["global_bound"] = r.global_bound;
    j["plan"] = plan_to_json(*r.plan);
  }
  if (r.w2) {
    j["final_w2"] = r.w2->value;
    j["w2"] = {{"method", std::string(to_string(r.w2->method))},
               {"size_a", r.w2->size_a},
               {"size_b", r.w2->size_b},
               {"subsample_seed", r.w2->subsample_seed ? json(*r.w2->subsample_seed) : json(nullptr)}};
  }
  return j;
}

int cmd_tune(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  const Index n = single_n(cfg, "tune");
  const Task task = build_task(cfg, n, cfg.seed);
  json results = json::object();
  results["task"] = task_data_json(task);
  int code = 0;
  for (Method m : cfg.methods) {
    CellResult r = run_cell(cfg, task, m, cfg.seed, false, cfg.workers);
    if (r.plan) write_plan_csv(out_path(cfg, "plan_" + std::string(to_string(m)) + ".csv"), *r.plan);
    if (!r.ok) {
      code = 1;
      std::cerr << "tune " << to_string(m) << ": " << r.error << '\n';
    }
    results[std::string(to_string(m))] = cell_to_json(r);
  }
  write_json(out_path(cfg, "tune_summary.json"), report(cfg, results, seconds_since(t0)));
  return code;
}

int cmd_sample(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  const Index n = single_n(cfg, "sample");
  const Task task = build_task(cfg, n, cfg.seed);
  json results = json::object();
  results["task"] = task_data_json(task);
  results["reference_seed"] = reference_seed(cfg.seed);
  int code = 0;
  for (Method m : cfg.methods) {
    SampleSet samples;
    CellResult r = run_cell(cfg, task, m, cfg.seed, true, cfg.workers, &samples);
    if (r.ok && cfg.dump_samples) write_samples_csv(out_path(cfg, "samples_" + std::string(to_string(m)) + ".csv"), samples);
    if (!r.ok) {
      code = 1;
      std::cerr << "sample " << to_string(m) << ": " << r.error << '\n';
    }
    results[std::string(to_string(m))] = cell_to_json(r);
  }
  write_json(out_path(cfg, "sample_report.json"), report(cfg, results, seconds_since(t0)));
  return code;
}

int cmd_sweep(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  const Index n_max = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());

  struct Cell {
    Index n;
    Method method;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Index n : cfg.n_list) {
    for (Method m : cfg.methods) {
      for (std::uint64_t s : cfg.seeds) cells.push_back({n, m, s});
    }
  }

  std::map<std::uint64_t, Task> base;
  std::map<std::uint64_t, std::string> base_error;
  for (std::uint64_t s : cfg.seeds) {
    try {
      base.emplace(s, build_task(cfg, n_max, s));
    } catch (const std::exception& e) {
      base_error.emplace(s, e.what());
    }
  }

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cells.size()) return;
      const Cell& cell = cells[c];
      auto it = base.find(cell.seed);
      if (it == base.end()) {
        CellResult r;
        r.n = cell.n;
        r.method = cell.method;
        r.seed = cell.seed;
        r.error = base_error[cell.seed];
        results[c] = std::move(r);
        continue;
      }
      const Task task = with_first_observations(it->second, cell.n);
      results[c] = run_cell(cfg, task, cell.method, cell.seed, cfg.sweep_sample, 1);
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(cells.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  int code = 0;
  {
    auto f = open_out(out_path(cfg, "sweep_raw.csv"));
    f << "n,method,seed,status,total_steps,global_bound,final_w2,seconds,error\n";
    for (const auto& r : results) {
      f << r.n << ',' << to_string(r.method) << ',' << r.seed << ',' << cell_status(r) << ',';
      if (r.plan) f << r.total_steps << ',' << r.global_bound;
      else f << ',';
      f << ',';
      if (r.w2) f << r.w2->value;
      f << ',' << r.seconds << ',' << (r.ok ? "" : csv_quote(r.error)) << '\n';
      if (!r.ok) code = 1;
    }
  }
  {
    auto f = open_out(out_path(cfg, "sweep_levels.csv"));
    f << "n,method,seed,p,t,h,k,m,M,w2_next,B\n";
    for (const auto& r : results) {
      if (!r.plan) continue;
      for (std::size_t p = 0; p < r.plan->levels.size(); ++p) {
        const auto& l = r.plan->levels[p];
        f << r.n << ',' << to_string(r.method) << ',' << r.seed << ',' << p << ',' << l.t << ',' << l.h << ',' << l.k << ','
          << l.m << ',' << l.M << ',' << l.w2_next << ',' << l.B << '\n';
      }
    }
  }

  json summary = json::array();
  {
    auto f = open_out(out_path(cfg, "sweep_summary.csv"));
    f << "n,method,cells,ok,mean_total_steps,std_total_steps,mean_final_w2,std_final_w2,max_final_w2\n";
    for (Index n : cfg.n_list) {
      for (Method m : cfg.methods) {
        std::vector<double> steps, w2s;
        std::size_t total = 0;
        for (const auto& r : results) {
          if (r.n != n || r.method != m) continue;
          ++total;
          if (!r.ok) continue;
          steps.push_back(static_cast<double>(r.total_steps));
          if (r.w2) w2s.push_back(r.w2->value);
        }
        auto mean_std = [](const std::vector<double>& x) -> std::pair<double, double> {
          if (x.empty()) return {std::nan(""), std::nan("")};
          double mu = 0.0;
          for (double v : x) mu += v;
          mu /= static_cast<double>(x.size());
          double var = 0.0;
          for (double v : x) var += (v - mu) * (v - mu);
          return {mu, std::sqrt(var / static_cast<double>(x.size()))};
        };
        const auto [ms, ss] = mean_std(steps);
        const auto [mw, sw] = mean_std(w2s);
        const double mx = w2s.empty() ? std::nan("") : *std::max_element(w2s.begin(), w2s.end());
        f << n << ',' << to_string(m) << ',' << total << ',' << steps.size() << ',' << ms << ',' << ss << ',';
        if (!w2s.empty()) f << mw << ',' << sw << ',' << mx;
        else f << ",,";
        f << '\n';
        json row = {{"n", n}, {"method", std::string(to_string(m))}, {"cells", total}, {"ok", steps.size()}};
        if (!steps.empty()) {
          row["mean_total_steps"] = ms;
          row["std_total_steps"] = ss;
        }
        if (!w2s.empty()) {
          row["mean_final_w2"] = mw;
          row["std_final_w2"] = sw;
          row["max_final_w2"] = mx;
        }
        summary.push_back(row);
      }
    }
  }

  json cell_json = json::array();
  for (const auto& r : results) cell_json.push_back(cell_to_json(r));
  json tasks = json::object();
  for (const auto& [s, t] : base) tasks[std::to_string(s)] = task_data_json(t);
  double cell_seconds = 0.0;
  for (const auto& r : results) cell_seconds += r.seconds;
  json res = {{"cells", cell_json}, {"summary", summary}, {"tasks", tasks}};
  write_json(out_path(cfg, "sweep_report.json"), report(cfg, res, seconds_since(t0), {{"cell_seconds_sum", cell_seconds}}));
  return code;
}

}  // namespace acl
