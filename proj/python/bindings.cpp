#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "accsim/accel.hpp"
#include "accsim/datagen.hpp"
#include "accsim/error.hpp"
#include "accsim/experiment.hpp"
#include "accsim/network.hpp"

namespace py = pybind11;
using namespace accsim;

namespace {

/// nlohmann::json to a Python object through the json module.
py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

/// Trajectory as a dict of equally long lists, one per column.
py::dict trajectory_dict(const Trajectory& traj) {
  py::list k, t, comms, gap, consensus, tracking, g_plus_e, P_k;
  for (const auto& r : traj) {
    k.append(r.k);
    t.append(r.t);
    comms.append(r.comms);
    gap.append(r.gap);
    consensus.append(r.consensus);
    tracking.append(r.tracking);
    g_plus_e.append(r.g_plus_e);
    P_k.append(r.P_k);
  }
  py::dict d;
  d["k"] = k;
  d["t"] = t;
  d["comms"] = comms;
  d["gap"] = gap;
  d["consensus_err"] = consensus;
  d["tracking_err"] = tracking;
  d["g_plus_e"] = g_plus_e;
  d["P_k"] = P_k;
  return d;
}

SurrogateKind mode_of(const std::string& name) { return surrogate_kind_from_string(name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decentralized optimization simulator: SONATA inner loop with an accelerated outer loop";

  static py::exception<Error> error(m, "AccsimError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<Regularizer>(m, "Regularizer")
      .def_static("zero", &Regularizer::zero)
      .def_static("l1", &Regularizer::l1, py::arg("weight"))
      .def_static("box", &Regularizer::box, py::arg("lo"), py::arg("hi"))
      .def("value", &Regularizer::value)
      .def("prox", &Regularizer::prox, py::arg("x"), py::arg("step"));

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def_static(
          "from_samples",
          [](const std::string& loss, const std::vector<Matrix>& features, const std::vector<Vector>& labels,
             double lambda, const Regularizer& reg) {
            if (features.size() != labels.size())
              throw Error(ErrorKind::InvalidInput, "features and labels must have one entry per agent");
            std::vector<AgentData> agents(features.size());
            for (std::size_t i = 0; i < agents.size(); ++i) agents[i] = {features[i], labels[i]};
            return ProblemSpec::from_samples(loss_kind_from_string(loss), std::move(agents), lambda, reg);
          },
          py::arg("loss"), py::arg("features"), py::arg("labels"), py::arg("lambda_"),
          py::arg("reg") = Regularizer::zero())
      .def_property_readonly("agents", &ProblemSpec::agents)
      .def_property_readonly("samples_per_agent", &ProblemSpec::samples_per_agent)
      .def_property_readonly("dim", &ProblemSpec::dim)
      .def_property_readonly("loss", [](const ProblemSpec& p) { return std::string(to_string(p.loss())); })
      .def_property_readonly("lambda_", &ProblemSpec::lambda)
      .def("objective", [](const ProblemSpec& p, const Vector& x) { return objective_value(p, x); })
      .def("average_grad", [](const ProblemSpec& p, const Vector& x) { return average_grad(p, x); })
      .def("local_grad", [](const ProblemSpec& p, std::size_t i, const Vector& x) { return local_grad(p, i, x); });

  m.def(
      "gen_ridge",
      [](std::size_t agents, std::size_t n, std::size_t d, std::uint64_t seed, double mu0, double L0, double lambda,
         double noise_std) {
        SyntheticRidgeConfig cfg;
        cfg.m = agents;
        cfg.n = n;
        cfg.d = d;
        cfg.seed = seed;
        cfg.mu0 = mu0;
        cfg.L0 = L0;
        cfg.lambda = lambda;
        cfg.noise_std = noise_std;
        auto inst = gen_ridge_instance(cfg);
        return py::make_tuple(std::move(inst.problem), inst.x_true, inst.sigma);
      },
      py::arg("m"), py::arg("n"), py::arg("d"), py::arg("seed") = 0, py::arg("mu0") = 1.0, py::arg("L0") = 1000.0,
      py::arg("lambda_") = 0.0, py::arg("noise_std") = SyntheticRidgeConfig{}.noise_std,
      "Synthetic ridge instance; returns (problem, x_true, sigma).");

  m.def(
      "load_libsvm",
      [](const std::string& path, std::size_t agents, const std::string& loss, double lambda,
         std::optional<std::size_t> limit, std::optional<std::uint64_t> seed) {
        LibsvmOptions opts;
        opts.m = agents;
        opts.loss = loss_kind_from_string(loss);
        opts.lambda = lambda;
        opts.limit = limit;
        opts.seed = seed;
        return load_libsvm(path, opts);
      },
      py::arg("path"), py::arg("m"), py::arg("loss") = "logistic", py::arg("lambda_") = 1e-3,
      py::arg("limit") = std::nullopt, py::arg("seed") = std::nullopt);

  py::class_<Constants>(m, "Constants")
      .def(py::init<>())
      .def_readwrite("mu_hat", &Constants::mu_hat)
      .def_readwrite("L_hat", &Constants::L_hat)
      .def_readwrite("Lmx_hat", &Constants::Lmx_hat)
      .def_readwrite("beta_hat", &Constants::beta_hat)
      .def_property_readonly("kappa_hat", &Constants::kappa_hat);
  m.def("estimate_constants", &estimate_constants, py::arg("problem"));

  m.def(
      "centralized_solve",
      [](const ProblemSpec& p) {
        const auto o = centralized_solve(p);
        return py::make_tuple(o.x_star, o.u_star);
      },
      py::arg("problem"), "Returns (x_star, u_star).");

  py::class_<Graph>(m, "Graph")
      .def(py::init<std::size_t, std::vector<Graph::Edge>>(), py::arg("m"), py::arg("edges"))
      .def_property_readonly("nodes", &Graph::nodes)
      .def_property_readonly("edges", &Graph::edges)
      .def("connected", &Graph::connected);
  m.def("erdos_renyi", &erdos_renyi, py::arg("m"), py::arg("p"), py::arg("seed"));
  m.def("line_graph", &line_graph, py::arg("m"));
  m.def("star_graph", &star_graph, py::arg("m"));
  m.def("complete_graph", &complete_graph, py::arg("m"));

  py::class_<GossipMatrix>(m, "GossipMatrix")
      .def_static("from_matrix", &GossipMatrix::from_matrix, py::arg("W"), py::arg("rounds_per_application") = 1)
      .def_readonly("W", &GossipMatrix::W)
      .def_readonly("rho", &GossipMatrix::rho)
      .def_readonly("rounds_per_application", &GossipMatrix::rounds_per_application)
      .def_property_readonly("nodes", &GossipMatrix::nodes);
  m.def("metropolis_hastings", &metropolis_hastings, py::arg("graph"));
  m.def("exact_averaging", &exact_averaging, py::arg("m"));
  m.def("chebyshev_accelerate", &chebyshev_accelerate, py::arg("base"), py::arg("M"));
  m.def("chebyshev_rho_bound", &chebyshev_rho_bound, py::arg("base_rho"), py::arg("M"));
  m.def("accelerate_to_target", &accelerate_to_target, py::arg("base"), py::arg("target_rho"));

  py::class_<AccelParams>(m, "AccelParams")
      .def_readonly("delta", &AccelParams::delta)
      .def_readonly("alpha", &AccelParams::alpha)
      .def_readonly("mu", &AccelParams::mu)
      .def_readonly("T", &AccelParams::T)
      .def_readonly("c_seq", &AccelParams::c_seq)
      .def_property_readonly("mode", [](const AccelParams& p) { return std::string(to_string(p.surrogate.kind)); })
      .def_property_readonly("extrapolation", &AccelParams::extrapolation);
  m.def(
      "tune",
      [](const Constants& c, const std::string& mode, double c_seq, const std::string& rule) {
        return tune(c, mode_of(mode), c_seq, t_rule_from_string(rule));
      },
      py::arg("constants"), py::arg("mode"), py::arg("c_seq") = 0.5, py::arg("rule") = "standard");
  m.def(
      "make_params",
      [](const Constants& c, const std::string& mode, double delta, std::size_t T, double c_seq) {
        return make_params(c, mode_of(mode), delta, T, c_seq);
      },
      py::arg("constants"), py::arg("mode"), py::arg("delta"), py::arg("T"), py::arg("c_seq") = 0.5);
  m.def("admissible_rho",
        [](const Constants& c, const std::string& mode) { return admissible_rho(c, mode_of(mode)); },
        py::arg("constants"), py::arg("mode"));

  m.def(
      "acc_sonata_run",
      [](const ProblemSpec& p, const AccelParams& params, const GossipMatrix& W, std::size_t K,
         std::optional<double> target_gap, bool potentials, bool half_duplex) {
        AccelOptions opts;
        opts.K_max = K;
        opts.target_gap = target_gap;
        opts.potentials = potentials;
        opts.half_duplex = half_duplex;
        AccelResult res;
        {
          py::gil_scoped_release release;
          res = acc_sonata_run(p, params, W, K, opts);
        }
        py::dict out;
        out["trajectory"] = trajectory_dict(res.trajectory);
        out["x"] = res.final_states.x;
        out["comms"] = res.comms;
        out["outer_iterations"] = res.outer_iterations;
        out["reached_target"] = res.reached_target;
        out["x_star"] = res.oracle.x_star;
        out["u_star"] = res.oracle.u_star;
        out["max_tracking_residual"] = res.max_tracking_residual;
        out["outer_potentials"] = res.outer_potentials;
        return out;
      },
      py::arg("problem"), py::arg("params"), py::arg("W"), py::arg("K"), py::arg("target_gap") = std::nullopt,
      py::arg("potentials") = false, py::arg("half_duplex") = false,
      "Runs ACC-SONATA for K outer iterations (or until target_gap) and returns a result dict.");

  m.def(
      "run_experiment",
      [](const py::object& config) {
        const auto out = run_experiment(parse_config(from_python(config)));
        py::dict d;
        d["trajectory"] = trajectory_dict(out.result.trajectory);
        d["metadata"] = to_python(out.metadata);
        return d;
      },
      py::arg("config"), "Runs a JSON-style config dict; returns the trajectory and metadata.");

  m.def(
      "lowerbound_check",
      [](double rho, std::size_t rounds, std::size_t d, double mu, double beta, std::size_t max_m) {
        LowerBoundOptions opts;
        opts.rho_target = rho;
        opts.rounds = rounds;
        opts.d = d;
        opts.mu = mu;
        opts.beta = beta;
        opts.max_m = max_m;
        return to_python(lowerbound_check(opts).to_json());
      },
      py::arg("rho") = LowerBoundOptions{}.rho_target, py::arg("rounds") = LowerBoundOptions{}.rounds,
      py::arg("d") = LowerBoundOptions{}.d, py::arg("mu") = LowerBoundOptions{}.mu,
      py::arg("beta") = LowerBoundOptions{}.beta, py::arg("max_m") = LowerBoundOptions{}.max_m);
}
