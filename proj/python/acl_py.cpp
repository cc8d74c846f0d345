#include "acl/composite.hpp"
#include "acl/config.hpp"
#include "acl/metrics.hpp"
#include "acl/runner.hpp"
#include "acl/sampler.hpp"
#include "acl/theory.hpp"
#include "acl/tuner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace acl;

namespace {

GaussianDist to_dist(const Vector& mean, const Matrix& cov) { return {mean, cov}; }

// Task fields that are easier to consume as arrays.
PointMatrix observations_array(const Task& t) {
  PointMatrix out(t.n(), t.dim);
  for (Index i = 0; i < t.n(); ++i) out.row(i) = t.observations[static_cast<std::size_t>(i)].transpose();
  return out;
}

PointMatrix sample_task(const Task& task, Method method, const LevelPlan& plan, Index count, std::uint64_t seed,
                        int workers, const Schedule& s) {
  SamplerOptions opts;
  opts.workers = workers;
  py::gil_scoped_release release;
  return annealed_sample(plan, make_composite(task, method, s), count, seed, opts).points;
}

}  // namespace

PYBIND11_MODULE(_acl, m) {
  m.doc() = "Annealed Langevin sampling of multi-observation posteriors with compositional scores";

  py::register_exception<TuningError>(m, "TuningError", PyExc_RuntimeError);
  py::register_exception<SamplerError>(m, "SamplerError", PyExc_RuntimeError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);

  py::enum_<Method>(m, "Method").value("geffner", Method::geffner).value("linhart", Method::linhart);
  py::enum_<TaskKind>(m, "TaskKind")
      .value("gaussian", TaskKind::gaussian)
      .value("gmm_prior", TaskKind::gmm_prior)
      .value("gmm_likelihood", TaskKind::gmm_likelihood);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def(py::init([](double bmin, double bmax, double t_floor) {
             Schedule s{bmin, bmax, t_floor};
             s.validate();
             return s;
           }),
           py::arg("beta_min") = 0.1, py::arg("beta_max") = 20.0, py::arg("t_floor") = 1e-5)
      .def_readwrite("beta_min", &Schedule::beta_min)
      .def_readwrite("beta_max", &Schedule::beta_max)
      .def_readwrite("t_floor", &Schedule::t_floor);
  m.def("alpha", &alpha, py::arg("schedule"), py::arg("t"));
  m.def("v", &v, py::arg("schedule"), py::arg("t"));
  m.def("level_times", [](const Schedule& s, int T) { return levels(s, T).times; }, py::arg("schedule"), py::arg("T"));

  py::class_<TaskParams>(m, "TaskParams")
      .def(py::init<>())
      .def_readwrite("kind", &TaskParams::kind)
      .def_readwrite("dim", &TaskParams::dim)
      .def_readwrite("lik_eig_lo", &TaskParams::lik_eig_lo)
      .def_readwrite("lik_eig_hi", &TaskParams::lik_eig_hi)
      .def_readwrite("lik_random_rotation", &TaskParams::lik_random_rotation)
      .def_readwrite("prior_means", &TaskParams::prior_means)
      .def_readwrite("prior_scales", &TaskParams::prior_scales)
      .def_readwrite("prior_weights", &TaskParams::prior_weights)
      .def_readwrite("gmm_lik_diag_lo", &TaskParams::gmm_lik_diag_lo)
      .def_readwrite("gmm_lik_diag_hi", &TaskParams::gmm_lik_diag_hi)
      .def_readwrite("gmm_lik_factors", &TaskParams::gmm_lik_factors)
      .def_readwrite("gmm_lik_weights", &TaskParams::gmm_lik_weights)
      .def_readwrite("component_cap", &TaskParams::component_cap);

  py::class_<Task>(m, "Task")
      .def_readonly("kind", &Task::kind)
      .def_readonly("dim", &Task::dim)
      .def_readonly("theta_true", &Task::theta_true)
      .def_readonly("base_cov", &Task::base_cov)
      .def_property_readonly("n", &Task::n)
      .def_property_readonly("observations", &observations_array);
  m.def("make_task", &make_task, py::arg("params"), py::arg("n"), py::arg("data_seed"));
  m.def("with_first_observations", &with_first_observations, py::arg("task"), py::arg("n"));
  m.def("prior_score", &prior_score, py::arg("task"), py::arg("schedule"), py::arg("theta"), py::arg("t"));
  m.def("individual_posterior_score", &individual_posterior_score, py::arg("task"), py::arg("schedule"), py::arg("i"),
        py::arg("theta"), py::arg("t"));
  m.def(
      "posterior_moments",
      [](const Task& task, std::optional<Index> i) {
        auto pm = posterior_moments(task, i);
        return py::make_tuple(pm.mean, pm.cov);
      },
      py::arg("task"), py::arg("i") = py::none());
  m.def(
      "exact_posterior_sample",
      [](const Task& task, Index count, std::uint64_t seed) { return exact_posterior_sample(task, count, seed).points; },
      py::arg("task"), py::arg("count"), py::arg("seed"));

  m.def(
      "composite_score",
      [](const Task& task, Method method, const Vector& theta, double t, const Schedule& s) {
        return (*make_composite(task, method, s))(theta, t);
      },
      py::arg("task"), py::arg("method"), py::arg("theta"), py::arg("t"), py::arg("schedule") = Schedule{});
  m.def("compose_dsm_error", &compose_dsm_error, py::arg("eps_prior"), py::arg("eps_post"), py::arg("n"), py::arg("method"));

  m.def(
      "bridging_moments",
      [](const Task& task, Method method, double t, const Schedule& s) {
        auto g = bridging_moments(task, method, t, s);
        return py::make_tuple(g.mean, g.cov);
      },
      py::arg("task"), py::arg("method"), py::arg("t"), py::arg("schedule") = Schedule{});
  m.def(
      "gaussian_constants",
      [](double smin, double smax, Index n, double t, Method method, const Schedule& s) {
        auto c = gaussian_constants(smin, smax, n, t, method, s);
        return py::make_tuple(c.m, c.M);
      },
      py::arg("sigma_min"), py::arg("sigma_max"), py::arg("n"), py::arg("t"), py::arg("method"),
      py::arg("schedule") = Schedule{});
  m.def("constant_gap", &constant_gap, py::arg("sigma"), py::arg("n"), py::arg("t"), py::arg("schedule") = Schedule{});
  m.def(
      "gaussian_w2",
      [](const Vector& ma, const Matrix& ca, const Vector& mb, const Matrix& cb) {
        return gaussian_w2(to_dist(ma, ca), to_dist(mb, cb));
      },
      py::arg("mean_a"), py::arg("cov_a"), py::arg("mean_b"), py::arg("cov_b"));
  m.def("propagate_smoothness", &propagate_smoothness, py::arg("L"), py::arg("t"), py::arg("schedule") = Schedule{});

  py::class_<TuningConfig>(m, "TuningConfig")
      .def(py::init([](double gamma, double omega, double eps_dsm, int T) {
             TuningConfig c{gamma, omega, eps_dsm, T, 0};
             c.validate();
             return c;
           }),
           py::arg("gamma") = 0.5, py::arg("omega") = 0.5, py::arg("eps_dsm") = 0.0, py::arg("T") = 10)
      .def_readwrite("gamma", &TuningConfig::gamma)
      .def_readwrite("omega", &TuningConfig::omega)
      .def_readwrite("eps_dsm", &TuningConfig::eps_dsm)
      .def_readwrite("T", &TuningConfig::T);
  m.def("default_omega", &default_omega, py::arg("dim"));

  py::class_<LevelRecord>(m, "LevelRecord")
      .def_readonly("t", &LevelRecord::t)
      .def_readonly("h", &LevelRecord::h)
      .def_readonly("k", &LevelRecord::k)
      .def_readonly("m", &LevelRecord::m)
      .def_readonly("M", &LevelRecord::M)
      .def_readonly("w2_next", &LevelRecord::w2_next)
      .def_readonly("B", &LevelRecord::B)
      .def("__repr__", [](const LevelRecord& r) {
        return "LevelRecord(t=" + std::to_string(r.t) + ", h=" + std::to_string(r.h) + ", k=" + std::to_string(r.k) + ")";
      });
  py::class_<LevelPlan>(m, "LevelPlan")
      .def_readonly("method", &LevelPlan::method)
      .def_readonly("dim", &LevelPlan::dim)
      .def_readonly("proxy", &LevelPlan::proxy)
      .def_readonly("levels", &LevelPlan::levels)
      .def_property_readonly("total_steps", &LevelPlan::total_steps)
      .def("__len__", &LevelPlan::size);

  m.def("choose_step", &choose_step, py::arg("m"), py::arg("M"), py::arg("config"), py::arg("dim"));
  m.def("choose_steps", &choose_steps, py::arg("m"), py::arg("h"), py::arg("w2_next"), py::arg("config"));
  m.def("bias_term", &bias_term, py::arg("m"), py::arg("M"), py::arg("h"), py::arg("dim"), py::arg("eps"));
  m.def("global_bound", &global_bound, py::arg("plan"));
  m.def("plan", &plan, py::arg("task"), py::arg("method"), py::arg("config") = TuningConfig{},
        py::arg("schedule") = Schedule{});

  m.def("annealed_sample", &sample_task, py::arg("task"), py::arg("method"), py::arg("plan"), py::arg("count"),
        py::arg("seed"), py::arg("workers") = 1, py::arg("schedule") = Schedule{},
        "Run the tuned annealed Langevin sampler with the task's analytic composite score; returns count x dim.");

  m.def(
      "empirical_w2",
      [](const PointMatrix& a, const PointMatrix& b, Index cap, std::uint64_t seed) {
        py::gil_scoped_release release;
        return empirical_w2(a, b, cap, seed).value;
      },
      py::arg("a"), py::arg("b"), py::arg("cap") = 1024, py::arg("seed") = 0);
  m.def(
      "sliced_w2",
      [](const PointMatrix& a, const PointMatrix& b, int projections, std::uint64_t seed) {
        return sliced_w2(a, b, projections, seed).value;
      },
      py::arg("a"), py::arg("b"), py::arg("projections") = 64, py::arg("seed") = 0);

  // CLI commands on a JSON config document.
  auto run = [](int (*cmd)(const RunConfig&)) {
    return [cmd](const std::string& config_json, const std::string& out_dir) {
      RunConfig cfg = config_from_json(nlohmann::json::parse(config_json));
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      py::gil_scoped_release release;
      return cmd(cfg);
    };
  };
  m.def("tune", run(&cmd_tune), py::arg("config_json"), py::arg("out_dir") = "");
  m.def("sample", run(&cmd_sample), py::arg("config_json"), py::arg("out_dir") = "");
  m.def("sweep", run(&cmd_sweep), py::arg("config_json"), py::arg("out_dir") = "");
  m.def(
      "resolved_config",
      [](const std::string& config_json) { return config_to_json(config_from_json(nlohmann::json::parse(config_json))).dump(); },
      py::arg("config_json"));
}
