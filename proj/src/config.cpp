#include "acl/config.hpp"

#include "acl/tuner.hpp"

#include <fstream>
#include <stdexcept>

namespace acl {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (obj.contains(key) && !obj.at(key).is_null()) dst = obj.at(key).get<T>();
}

Vector vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json vec_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("unknown config field '" + where + it.key() + "'");
  }
}

}  // namespace

std::vector<Method> methods_from_string(std::string_view s) {
  if (s == "both") return {Method::geffner, Method::linhart};
  return {method_from_string(s)};
}

double RunConfig::resolved_omega() const { return omega.value_or(default_omega(task.dim)); }

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw std::invalid_argument("unsupported schema_version " + std::to_string(schema_version));
  }
  task.validate();
  if (n_list.empty()) throw std::invalid_argument("task.n_list must not be empty");
  for (Index n : n_list) {
    if (n < 1) throw std::invalid_argument("observation counts must be >= 1");
  }
  if (methods.empty()) throw std::invalid_argument("no method selected");
  TuningConfig tc;
  tc.gamma = gamma;
  tc.omega = resolved_omega();
  tc.T = T;
  tc.validate();
  if (!(eps_dsm_prior >= 0.0 && eps_dsm_post >= 0.0)) throw std::invalid_argument("eps_dsm values must be nonnegative");
  schedule.validate();
  if (chains < 1) throw std::invalid_argument("sampling.chains must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("sampling.seeds must not be empty");
  if (reference_samples < 1) throw std::invalid_argument("sampling.reference_samples must be >= 1");
  if (w2_cap < 1) throw std::invalid_argument("sampling.w2_cap must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j, {"schema_version", "task", "method", "tuning", "schedule", "sampling", "output", "workers"}, "");
  RunConfig c;
  read(j, "schema_version", c.schema_version);
  read(j, "workers", c.workers);
  if (j.contains("method")) c.methods = methods_from_string(j.at("method").get<std::string>());

  if (j.contains("task")) {
    const json& t = j.at("task");
    reject_unknown(t, {"kind", "dim", "n", "n_list", "data_seed", "likelihood", "prior", "gmm_likelihood", "component_cap"}, "task.");
    if (t.contains("kind")) c.task.kind = task_kind_from_string(t.at("kind").get<std::string>());
    read(t, "dim", c.task.dim);
    if (t.contains("n") && t.contains("n_list")) throw std::invalid_argument("give task.n or task.n_list, not both");
    if (t.contains("n")) c.n_list = {t.at("n").get<Index>()};
    if (t.contains("n_list")) c.n_list = t.at("n_list").get<std::vector<Index>>();
    if (t.contains("data_seed") && !t.at("data_seed").is_null()) c.data_seed = t.at("data_seed").get<std::uint64_t>();
    read(t, "component_cap", c.task.component_cap);
    if (t.contains("likelihood")) {
      const json& l = t.at("likelihood");
      reject_unknown(l, {"eig_lo", "eig_hi", "random_rotation"}, "task.likelihood.");
      read(l, "eig_lo", c.task.lik_eig_lo);
      read(l, "eig_hi", c.task.lik_eig_hi);
      read(l, "random_rotation", c.task.lik_random_rotation);
    }
    if (t.contains("prior")) {
      const json& p = t.at("prior");
      reject_unknown(p, {"means", "scales", "weights"}, "task.prior.");
      if (p.contains("means") && !p.at("means").is_null()) {
        c.task.prior_means.clear();
        for (const auto& m : p.at("means")) c.task.prior_means.push_back(vec_from_json(m));
      }
      read(p, "scales", c.task.prior_scales);
      read(p, "weights", c.task.prior_weights);
    }
    if (t.contains("gmm_likelihood")) {
      const json& g = t.at("gmm_likelihood");
      reject_unknown(g, {"diag_lo", "diag_hi", "factors", "weights"}, "task.gmm_likelihood.");
      read(g, "diag_lo", c.task.gmm_lik_diag_lo);
      read(g, "diag_hi", c.task.gmm_lik_diag_hi);
      read(g, "factors", c.task.gmm_lik_factors);
      read(g, "weights", c.task.gmm_lik_weights);
    }
  }
  if (j.contains("tuning")) {
    const json& t = j.at("tuning");
    reject_unknown(t, {"gamma", "omega", "eps_dsm_prior", "eps_dsm_post", "T"}, "tuning.");
    read(t, "gamma", c.gamma);
    if (t.contains("omega") && !t.at("omega").is_null()) c.omega = t.at("omega").get<double>();
    read(t, "eps_dsm_prior", c.eps_dsm_prior);
    read(t, "eps_dsm_post", c.eps_dsm_post);
    read(t, "T", c.T);
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    reject_unknown(s, {"beta_min", "beta_max", "t_floor"}, "schedule.");
    read(s, "beta_min", c.schedule.beta_min);
    read(s, "beta_max", c.schedule.beta_max);
    read(s, "t_floor", c.schedule.t_floor);
  }
  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    reject_unknown(s, {"chains", "seed", "seeds", "reference_samples", "w2_cap", "sweep_sample"}, "sampling.");
    read(s, "chains", c.chains);
    read(s, "seed", c.seed);
    c.seeds = {c.seed};
    read(s, "seeds", c.seeds);
    read(s, "reference_samples", c.reference_samples);
    read(s, "w2_cap", c.w2_cap);
    read(s, "sweep_sample", c.sweep_sample);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"directory", "dump_samples"}, "output.");
    read(o, "directory", c.out_dir);
    read(o, "dump_samples", c.dump_samples);
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json means = json::array();
  std::vector<Vector> pm = c.task.prior_means;
  if (pm.empty() && c.task.kind == TaskKind::gmm_prior) pm = {Vector::Zero(c.task.dim), Vector::Ones(c.task.dim)};
  for (const auto& m : pm) means.push_back(vec_to_json(m));
  std::string method = c.methods.size() == 2 ? "both" : std::string(to_string(c.methods.front()));
  json j = {
      {"schema_version", c.schema_version},
      {"task",
       {{"kind", std::string(to_string(c.task.kind))},
        {"dim", c.task.dim},
        {"n_list", c.n_list},
        {"data_seed", c.data_seed ? json(*c.data_seed) : json(nullptr)},
        {"component_cap", c.task.component_cap},
        {"likelihood", {{"eig_lo", c.task.lik_eig_lo}, {"eig_hi", c.task.lik_eig_hi}, {"random_rotation", c.task.lik_random_rotation}}},
        {"prior", {{"means", means}, {"scales", c.task.prior_scales}, {"weights", c.task.prior_weights}}},
        {"gmm_likelihood",
         {{"diag_lo", c.task.gmm_lik_diag_lo},
          {"diag_hi", c.task.gmm_lik_diag_hi},
          {"factors", c.task.gmm_lik_factors},
          {"weights", c.task.gmm_lik_weights}}}}},
      {"method", method},
      {"tuning",
       {{"gamma", c.gamma},
        {"omega", c.resolved_omega()},
        {"eps_dsm_prior", c.eps_dsm_prior},
        {"eps_dsm_post", c.eps_dsm_post},
        {"T", c.T}}},
      {"schedule", {{"beta_min", c.schedule.beta_min}, {"beta_max", c.schedule.beta_max}, {"t_floor", c.schedule.t_floor}}},
      {"sampling",
       {{"chains", c.chains},
        {"seed", c.seed},
        {"seeds", c.seeds},
        {"reference_samples", c.reference_samples},
        {"w2_cap", c.w2_cap},
        {"sweep_sample", c.sweep_sample}}},
      {"output", {{"directory", c.out_dir}, {"dump_samples", c.dump_samples}}},
      {"workers", c.workers},
  };
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace acl
