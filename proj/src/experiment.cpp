#include "accsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "accsim/error.hpp"

namespace accsim {

using nlohmann::json;

namespace {

/// Typed, path-aware access to one JSON object of the config.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("", "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : node_.items()) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end())
        fail(key, "unknown field");
    }
  }

  bool has(const char* key) const { return node_.contains(key) && !node_.at(key).is_null(); }

  Section child(const char* key) const { return Section(node_.at(key), path_ + "/" + key); }

  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  double number(const char* key) const {
    require(key);
    const auto& v = node_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  std::optional<double> opt_number(const char* key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }
  std::size_t count(const char* key, std::size_t fallback) const { return has(key) ? count(key) : fallback; }
  std::size_t count(const char* key) const {
    require(key);
    const auto& v = node_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(key, "expected a non-negative integer");
    return v.get<std::size_t>();
  }
  std::optional<std::size_t> opt_count(const char* key) const {
    return has(key) ? std::optional<std::size_t>(count(key)) : std::nullopt;
  }
  std::uint64_t u64(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::string text(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }
  std::string text(const char* key) const {
    require(key);
    const auto& v = node_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  template <class F>
  auto convert(const char* key, F&& f) const {
    try {
      return f();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      fail(key, e.what());
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    const std::string where = key.empty() ? (path_.empty() ? "/" : path_) : path_ + "/" + key;
    throw Error(ErrorKind::ConfigError, where + ": " + why);
  }

 private:
  void require(const char* key) const {
    if (!has(key)) fail(key, "missing required field");
  }

  const json& node_;
  std::string path_;
};

Regularizer parse_regularizer(const Section& s) {
  s.allow({"kind", "weight", "lo", "hi"});
  const auto kind = s.text("kind", "zero");
  return s.convert("kind", [&] {
    if (kind == "zero") return Regularizer::zero();
    if (kind == "l1") return Regularizer::l1(s.number("weight"));
    if (kind == "box") return Regularizer::box(s.number("lo"), s.number("hi"));
    s.fail("kind", "expected zero, l1 or box");
  });
}

json regularizer_to_json(const Regularizer& r) {
  switch (r.kind) {
    case Regularizer::Kind::Zero: return {{"kind", "zero"}};
    case Regularizer::Kind::L1: return {{"kind", "l1"}, {"weight", r.weight}};
    case Regularizer::Kind::Box: return {{"kind", "box"}, {"lo", r.lo}, {"hi", r.hi}};
  }
  return {};
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  const Section root(doc, "");
  root.allow({"seed", "problem", "topology", "algorithm", "diagnostics", "output"});
  cfg.seed = root.u64("seed", 0);

  if (!root.has("problem")) root.fail("problem", "missing required field");
  {
    const auto prob = root.child("problem");
    prob.allow({"synthetic", "libsvm", "regularizer"});
    const bool synth = prob.has("synthetic"), lib = prob.has("libsvm");
    if (synth == lib) prob.fail("", "exactly one of 'synthetic' or 'libsvm' is required");
    if (prob.has("regularizer")) cfg.problem.reg = parse_regularizer(prob.child("regularizer"));
    if (synth) {
      const auto s = prob.child("synthetic");
      s.allow({"m", "n", "d", "mu0", "L0", "lambda", "noise_std"});
      auto& c = cfg.problem.synthetic;
      c.m = s.count("m", c.m);
      c.n = s.count("n", c.n);
      c.d = s.count("d", c.d);
      c.mu0 = s.number("mu0", c.mu0);
      c.L0 = s.number("L0", c.L0);
      c.lambda = s.number("lambda", c.lambda);
      c.noise_std = s.number("noise_std", c.noise_std);
      s.convert("", [&] { c.validate(); return 0; });
    } else {
      cfg.problem.source = ProblemConfig::Source::Libsvm;
      const auto s = prob.child("libsvm");
      s.allow({"path", "m", "limit", "shuffle", "loss", "lambda", "positive_label"});
      cfg.problem.libsvm_path = s.text("path");
      if (!std::filesystem::exists(cfg.problem.libsvm_path)) s.fail("path", "file does not exist");
      auto& o = cfg.problem.libsvm;
      o.m = s.count("m");
      o.limit = s.opt_count("limit");
      if (s.flag("shuffle", true)) o.seed = cfg.seed;
      o.loss = s.convert("loss", [&] { return loss_kind_from_string(s.text("loss", "logistic")); });
      o.lambda = s.number("lambda", o.lambda);
      o.positive_label = s.opt_number("positive_label");
    }
  }

  if (root.has("topology")) {
    const auto t = root.child("topology");
    t.allow({"kind", "p", "target_rho", "half_duplex"});
    auto& c = cfg.topology;
    c.kind = t.text("kind", c.kind);
    if (c.kind != "erdos_renyi" && c.kind != "line" && c.kind != "star" && c.kind != "complete" &&
        c.kind != "exact_average")
      t.fail("kind", "expected erdos_renyi, line, star, complete or exact_average");
    c.p = t.number("p", c.p);
    c.target_rho = t.opt_number("target_rho");
    if (c.target_rho && !(*c.target_rho >= 0.0 && *c.target_rho < 1.0)) t.fail("target_rho", "expected a value in [0, 1)");
    c.half_duplex = t.flag("half_duplex", c.half_duplex);
  }

  if (root.has("algorithm")) {
    const auto a = root.child("algorithm");
    a.allow({"mode", "delta", "alpha", "T", "K", "K_max", "c_seq", "target_gap", "T_rule", "mu",
             "average_initial_tracking"});
    auto& c = cfg.algorithm;
    c.mode = a.convert("mode", [&] { return surrogate_kind_from_string(a.text("mode", "F")); });
    c.delta = a.opt_number("delta");
    c.alpha = a.opt_number("alpha");
    c.T = a.opt_count("T");
    c.K = a.opt_count("K");
    c.K_max = a.count("K_max", c.K_max);
    c.c_seq = a.number("c_seq", c.c_seq);
    if (!(c.c_seq > 0.0 && c.c_seq < 1.0)) a.fail("c_seq", "expected a value in (0, 1)");
    c.target_gap = a.number("target_gap", c.target_gap);
    c.t_rule = a.convert("T_rule", [&] { return t_rule_from_string(a.text("T_rule", "standard")); });
    c.mu = a.opt_number("mu");
    if (c.mu && !(*c.mu > 0.0)) a.fail("mu", "expected a positive value");
    if (c.delta && !(*c.delta >= 0.0)) a.fail("delta", "expected a non-negative value");
    if (c.alpha && !(*c.alpha > 0.0 && *c.alpha <= 1.0)) a.fail("alpha", "expected a value in (0, 1]");
    c.average_initial_tracking = a.flag("average_initial_tracking", false);
  }

  if (root.has("diagnostics")) {
    const auto d = root.child("diagnostics");
    d.allow({"potentials"});
    cfg.potentials = d.flag("potentials", false);
  }

  if (root.has("output")) {
    const auto o = root.child("output");
    o.allow({"dir", "prefix"});
    cfg.output_dir = o.text("dir", cfg.output_dir);
    cfg.output_prefix = o.text("prefix", cfg.output_prefix);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, path + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  json prob;
  if (cfg.problem.source == ProblemConfig::Source::Synthetic) {
    const auto& s = cfg.problem.synthetic;
    prob["synthetic"] = {{"m", s.m}, {"n", s.n}, {"d", s.d}, {"mu0", s.mu0}, {"L0", s.L0},
                         {"lambda", s.lambda}, {"noise_std", s.noise_std}};
  } else {
    const auto& o = cfg.problem.libsvm;
    json l = {{"path", cfg.problem.libsvm_path}, {"m", o.m}, {"shuffle", o.seed.has_value()},
              {"loss", to_string(o.loss)}, {"lambda", o.lambda}};
    l["limit"] = o.limit ? json(*o.limit) : json(nullptr);
    l["positive_label"] = o.positive_label ? json(*o.positive_label) : json(nullptr);
    prob["libsvm"] = l;
  }
  prob["regularizer"] = regularizer_to_json(cfg.problem.reg);
  j["problem"] = prob;
  const auto& t = cfg.topology;
  j["topology"] = {{"kind", t.kind}, {"p", t.p}, {"half_duplex", t.half_duplex}};
  j["topology"]["target_rho"] = t.target_rho ? json(*t.target_rho) : json(nullptr);
  const auto& a = cfg.algorithm;
  json alg = {{"mode", to_string(a.mode)}, {"K_max", a.K_max}, {"c_seq", a.c_seq},
              {"target_gap", a.target_gap}, {"T_rule", to_string(a.t_rule)},
              {"average_initial_tracking", a.average_initial_tracking}};
  alg["delta"] = a.delta ? json(*a.delta) : json(nullptr);
  alg["alpha"] = a.alpha ? json(*a.alpha) : json(nullptr);
  alg["T"] = a.T ? json(*a.T) : json(nullptr);
  alg["K"] = a.K ? json(*a.K) : json(nullptr);
  alg["mu"] = a.mu ? json(*a.mu) : json(nullptr);
  j["algorithm"] = alg;
  j["diagnostics"] = {{"potentials", cfg.potentials}};
  j["output"] = {{"dir", cfg.output_dir}, {"prefix", cfg.output_prefix}};
  return j;
}

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("ACCSIM_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

ProblemSpec build_problem(const ProblemConfig& cfg, std::uint64_t seed) {
  if (cfg.source == ProblemConfig::Source::Synthetic) {
    auto s = cfg.synthetic;
    s.seed = seed;
    auto inst = gen_ridge_instance(s);
    if (cfg.reg.kind == Regularizer::Kind::Zero) return std::move(inst.problem);
    std::vector<AgentData> agents;
    for (std::size_t i = 0; i < inst.problem.agents(); ++i) agents.push_back(inst.problem.data(i));
    return ProblemSpec::from_samples(LossKind::QuadraticRidge, std::move(agents), s.lambda, cfg.reg);
  }
  auto opts = cfg.libsvm;
  opts.reg = cfg.reg;
  return load_libsvm(cfg.libsvm_path, opts);
}

GossipMatrix build_gossip(const TopologyConfig& cfg, std::size_t m, std::uint64_t seed) {
  GossipMatrix base;
  if (cfg.kind == "exact_average" || m == 1) {
    base = exact_averaging(m);
  } else if (cfg.kind == "erdos_renyi") {
    base = metropolis_hastings(erdos_renyi(m, cfg.p, seed));
  } else if (cfg.kind == "line") {
    base = metropolis_hastings(line_graph(m));
  } else if (cfg.kind == "star") {
    base = metropolis_hastings(star_graph(m));
  } else if (cfg.kind == "complete") {
    base = metropolis_hastings(complete_graph(m));
  } else {
    throw Error(ErrorKind::ConfigError, "/topology/kind: unknown topology '" + cfg.kind + "'");
  }
  if (cfg.target_rho && base.rho > *cfg.target_rho) return accelerate_to_target(base, *cfg.target_rho);
  return base;
}

AccelParams resolve_params(const AlgorithmConfig& cfg, Constants c) {
  if (cfg.mu) c.mu_hat = *cfg.mu;
  AccelParams p;
  if (cfg.delta) {
    const std::size_t T = cfg.T ? *cfg.T : inner_iterations(c, cfg.mode, cfg.t_rule);
    p = make_params(c, cfg.mode, *cfg.delta, T, cfg.c_seq);
  } else {
    p = tune(c, cfg.mode, cfg.c_seq, cfg.t_rule);
    if (cfg.T) p.T = *cfg.T;
  }
  if (cfg.alpha) p.alpha = *cfg.alpha;
  return p;
}

json constants_to_json(const Constants& c) {
  return {{"mu_hat", c.mu_hat}, {"L_hat", c.L_hat}, {"Lmx_hat", c.Lmx_hat}, {"beta_hat", c.beta_hat},
          {"kappa_hat", c.kappa_hat()}, {"beta_over_mu", c.beta_hat / c.mu_hat}};
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  const ProblemSpec problem = build_problem(cfg.problem, cfg.seed);
  RunOutput out;
  out.constants = estimate_constants(problem);
  out.params = resolve_params(cfg.algorithm, out.constants);
  out.gossip = build_gossip(cfg.topology, problem.agents(), cfg.seed);

  AccelOptions opts;
  opts.potentials = cfg.potentials;
  opts.half_duplex = cfg.topology.half_duplex;
  opts.average_initial_tracking = cfg.algorithm.average_initial_tracking;
  Constants used = out.constants;
  if (cfg.algorithm.mu) used.mu_hat = *cfg.algorithm.mu;
  opts.constants = used;
  std::size_t K = cfg.algorithm.K_max;
  if (cfg.algorithm.K) {
    K = *cfg.algorithm.K;
  } else {
    opts.target_gap = cfg.algorithm.target_gap;
  }
  out.result = acc_sonata_run(problem, out.params, out.gossip, K, opts);

  json meta;
  meta["schema"] = "trajectory/v1";
  meta["columns"] = cfg.potentials
                        ? json::array({"k", "t", "comms", "gap", "consensus_err", "tracking_err", "g_plus_e", "P_k"})
                        : json::array({"k", "t", "comms", "gap", "consensus_err", "tracking_err"});
  meta["config"] = config_to_json(cfg);
  meta["problem"] = {{"m", problem.agents()}, {"n", problem.samples_per_agent()}, {"d", problem.dim()},
                     {"loss", to_string(problem.loss())}, {"lambda", problem.lambda()}};
  meta["constants"] = constants_to_json(out.constants);
  meta["params"] = {{"mode", to_string(out.params.surrogate.kind)},
                    {"delta", out.params.delta},
                    {"alpha", out.params.alpha},
                    {"mu", out.params.mu},
                    {"T", out.params.T},
                    {"K", K},
                    {"stop_at_target", !cfg.algorithm.K.has_value()},
                    {"c_seq", out.params.c_seq},
                    {"surrogate_beta", out.params.surrogate.beta},
                    {"surrogate_L", out.params.surrogate.L_surr},
                    {"subproblem_tol", out.params.surrogate.subproblem_tol},
                    {"max_inner_iters", out.params.surrogate.max_inner_iters},
                    {"extrapolation", out.params.extrapolation()}};
  meta["network"] = {{"kind", cfg.topology.kind},
                     {"m", out.gossip.nodes()},
                     {"rho", out.gossip.rho},
                     {"rounds_per_application", out.gossip.rounds_per_application},
                     {"half_duplex", cfg.topology.half_duplex}};
  if (cfg.potentials) {
    const auto pc = potential_constants(used, out.params.surrogate.kind, out.params.delta, out.params.alpha,
                                        out.params.c_seq);
    meta["potentials"] = {{"c_x", pc.c_x}, {"c_y", pc.c_y}, {"contraction", pc.contraction},
                          {"rho_bound", pc.rho_bound}, {"c1", pc.c1}, {"c2", pc.c2}};
  }
  const auto reached = comms_to_accuracy(out.result.trajectory, cfg.algorithm.target_gap);
  meta["outcome"] = {{"u_star", out.result.oracle.u_star},
                     {"outer_iterations", out.result.outer_iterations},
                     {"comms", out.result.comms},
                     {"final_gap", out.result.trajectory.back().gap},
                     {"comms_to_target", reached ? json(*reached) : json(nullptr)},
                     {"max_tracking_residual", out.result.max_tracking_residual},
                     {"unconverged_subproblems", out.result.unconverged_subproblems},
                     {"max_subproblem_iters", out.result.max_subproblem_iters}};
  out.metadata = std::move(meta);
  return out;
}

std::string trajectory_csv(const Trajectory& traj, bool potentials) {
  std::ostringstream os;
  os << "k,t,comms,gap,consensus_err,tracking_err";
  if (potentials) os << ",g_plus_e,P_k";
  os << '\n';
  for (const auto& r : traj) {
    os << r.k << ',' << r.t << ',' << r.comms << ',' << fmt(r.gap) << ',' << fmt(r.consensus) << ','
       << fmt(r.tracking);
    if (potentials) os << ',' << fmt(r.g_plus_e) << ',' << fmt(r.P_k);
    os << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
  out << content;
}

}  // namespace

std::string run_to_files(const ExperimentConfig& cfg, const std::string& output_dir) {
  const auto out = run_experiment(cfg);
  std::filesystem::create_directories(output_dir);
  const auto csv = std::filesystem::path(output_dir) / (cfg.output_prefix + ".csv");
  const auto meta = std::filesystem::path(output_dir) / (cfg.output_prefix + ".meta.json");
  write_file(csv, trajectory_csv(out.result.trajectory, cfg.potentials));
  write_file(meta, out.metadata.dump(2) + "\n");
  return csv.string();
}

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::Samples: return "samples";
    case SweepAxis::BetaOverMu: return "beta_over_mu";
    case SweepAxis::Kappa: return "kappa";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "samples") return SweepAxis::Samples;
  if (name == "beta_over_mu") return SweepAxis::BetaOverMu;
  if (name == "kappa") return SweepAxis::Kappa;
  throw Error(ErrorKind::InvalidInput, "sweep axis must be samples, beta_over_mu or kappa");
}

namespace {

double measured_beta_over_mu(const SyntheticRidgeConfig& cfg) {
  const auto c = estimate_constants(gen_ridge(cfg));
  return c.beta_hat / c.mu_hat;
}

}  // namespace

std::size_t samples_for_beta_over_mu(SyntheticRidgeConfig cfg, double target, std::size_t n_min,
                                     std::size_t n_max) {
  if (!(target > 0.0)) throw Error(ErrorKind::InvalidInput, "target beta/mu must be positive");
  n_min = std::max(n_min, cfg.d);
  // beta_hat/mu_hat shrinks roughly like 1/sqrt(n); bisect on log n over that trend.
  auto eval = [&](std::size_t n) {
    cfg.n = n;
    return measured_beta_over_mu(cfg);
  };
  std::size_t lo = n_min, hi = n_max;
  double f_lo = eval(lo);
  if (f_lo <= target) return lo;
  double f_hi = eval(hi);
  if (f_hi >= target) return hi;
  while (hi - lo > 1 && static_cast<double>(hi) / static_cast<double>(lo) > 1.01) {
    const auto mid = static_cast<std::size_t>(std::round(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi))));
    if (mid <= lo || mid >= hi) break;
    const double f = eval(mid);
    if (f > target) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
      f_hi = f;
    }
  }
  return std::abs(std::log(f_lo / target)) <= std::abs(std::log(f_hi / target)) ? lo : hi;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts) {
  if (cfg.problem.source != ProblemConfig::Source::Synthetic)
    throw Error(ErrorKind::ConfigError, "/problem: sweeps require a synthetic problem");
  if (opts.points.empty()) throw Error(ErrorKind::InvalidInput, "sweep needs at least one point");
  const auto& base_cfg = cfg.problem.synthetic;
  const GossipMatrix gossip = build_gossip(cfg.topology, base_cfg.m, cfg.seed);

  std::vector<SweepRow> rows;
  for (const double point : opts.points) {
    SyntheticRidgeConfig s = base_cfg;
    s.seed = cfg.seed;
    switch (opts.axis) {
      case SweepAxis::Samples:
        if (!(point >= 1.0)) throw Error(ErrorKind::InvalidInput, "sample counts must be >= 1");
        s.n = static_cast<std::size_t>(point);
        break;
      case SweepAxis::BetaOverMu:
        s.n = samples_for_beta_over_mu(s, point, opts.n_min, opts.n_max);
        break;
      case SweepAxis::Kappa:
        if (!(point >= 0.0)) throw Error(ErrorKind::InvalidInput, "lambda values must be >= 0");
        s.lambda = point;
        s.n = samples_for_beta_over_mu(s, opts.hold_beta_over_mu, opts.n_min, opts.n_max);
        break;
    }
    ProblemConfig pc = cfg.problem;
    pc.synthetic = s;
    const ProblemSpec problem = build_problem(pc, cfg.seed);
    const Constants c = estimate_constants(problem);
    const Oracle oracle = centralized_solve(problem);

    SweepRow row;
    row.axis_value = point;
    row.n = s.n;
    row.lambda = s.lambda;
    row.beta_over_mu = c.beta_hat / c.mu_hat;
    row.kappa = c.kappa_hat();
    for (const auto& variant : opts.variants) {
      AlgorithmConfig ac = cfg.algorithm;
      std::size_t K = ac.K_max;
      if (variant == "F" || variant == "L") {
        ac.mode = surrogate_kind_from_string(variant);
      } else if (variant == "sonata-F" || variant == "sonata-L") {
        // Plain SONATA: delta = 0, one inner iteration per outer step.
        ac.mode = surrogate_kind_from_string(variant.substr(7));
        ac.delta = 0.0;
        ac.T = 1;
        K = ac.K_max * 10;
      } else {
        throw Error(ErrorKind::InvalidInput, "unknown sweep variant '" + variant + "'");
      }
      const AccelParams params = resolve_params(ac, c);
      AccelOptions ao;
      ao.target_gap = opts.eps;
      ao.oracle = oracle;
      ao.half_duplex = cfg.topology.half_duplex;
      const auto res = acc_sonata_run(problem, params, gossip, K, ao);
      row.comms.push_back(comms_to_accuracy(res.trajectory, opts.eps));
      row.T.push_back(params.T);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const SweepOptions& opts) {
  std::ostringstream os;
  os << "axis,axis_value,n,lambda,beta_over_mu,kappa";
  for (const auto& v : opts.variants) os << ",T_" << v << ",comms_" << v;
  os << '\n';
  for (const auto& r : rows) {
    os << to_string(opts.axis) << ',' << fmt(r.axis_value) << ',' << r.n << ',' << fmt(r.lambda) << ','
       << fmt(r.beta_over_mu) << ',' << fmt(r.kappa);
    for (std::size_t j = 0; j < r.comms.size(); ++j) {
      os << ',' << r.T[j] << ',';
      if (r.comms[j]) os << *r.comms[j]; else os << "NA";
    }
    os << '\n';
  }
  return os.str();
}

json LowerBoundReport::to_json() const {
  json sup = json::array();
  for (const auto& s : support) sup.push_back({{"comms", s.comms}, {"max_index", s.max_index}, {"bound", s.bound}});
  json j = {{"rho_target", rho_target},
            {"rho_achieved", rho_achieved},
            {"nodes", nodes},
            {"m_index", m_index},
            {"a", a},
            {"cut_distance", cut_distance},
            {"cut_bound", cut_bound},
            {"cut_bound_holds", cut_bound_holds},
            {"T", T},
            {"K", K},
            {"support_invariant_holds", support_invariant_holds},
            {"final_gap", final_gap},
            {"support", sup}};
  j["comms_to_target"] = comms_to_target ? json(*comms_to_target) : json(nullptr);
  return j;
}

namespace {

/// Largest 1-based index of a nonzero entry over the given rows; 0 when all zero.
std::size_t max_support(const Matrix& M, std::size_t rows) {
  std::size_t best = 0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(rows); ++i)
    for (Eigen::Index j = M.cols() - 1; j >= 0; --j)
      if (M(i, j) != 0.0) {
        best = std::max(best, static_cast<std::size_t>(j + 1));
        break;
      }
  return best;
}

}  // namespace

LowerBoundReport lowerbound_check(const LowerBoundOptions& opts) {
  const auto lg = line_gossip_for_rho(opts.rho_target, opts.max_m);
  const std::size_t nodes = lg.gossip.nodes();
  const auto groups = hard_instance_groups(nodes);
  const ProblemSpec problem = hard_instance(opts.mu, opts.beta, nodes, opts.d);
  const Constants c = estimate_constants(problem);
  const AccelParams params = tune(c, SurrogateKind::F);

  LowerBoundReport rep;
  rep.rho_target = opts.rho_target;
  rep.rho_achieved = lg.gossip.rho;
  rep.nodes = nodes;
  rep.m_index = lg.m_index;
  rep.a = lg.a;
  rep.cut_distance = cut_distance(lg.graph, groups);
  rep.cut_bound = 4.0 / 25.0 * std::sqrt(1.0 / (1.0 - lg.gossip.rho));
  rep.cut_bound_holds = lg.m_index < 3 || static_cast<double>(rep.cut_distance) >= rep.cut_bound;
  rep.T = params.T;
  // Two rounds per inner iteration.
  rep.K = std::max<std::size_t>(1, (opts.rounds + 2 * params.T - 1) / (2 * params.T));

  auto record = [&](std::size_t comms, const Matrix& x, const Matrix& y, const Matrix& z) {
    SupportSample s;
    s.comms = comms;
    s.max_index = std::max({max_support(x, groups.left_end), max_support(y, groups.left_end),
                            max_support(z, groups.left_end)});
    s.bound = 2 + comms / rep.cut_distance;
    if (s.max_index > s.bound) rep.support_invariant_holds = false;
    rep.support.push_back(s);
  };
  const Matrix zero = Matrix::Zero(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(opts.d));
  record(0, zero, ShiftedProblem::unshifted(problem).local_grads(zero), zero);

  // Each inner iteration is two half-duplex rounds: x is exchanged first, then
  // y. After the first round agents hold the new x and the y they started with,
  // so both rounds are sampled.
  Matrix held_y = ShiftedProblem::unshifted(problem).local_grads(zero);
  Matrix held_z = zero;
  AccelOptions ao;
  ao.half_duplex = true;
  ao.on_inner = [&](const InnerEvent& ev) {
    const Matrix& z = ev.shifted->centers;
    if (ev.t == 1) held_y += params.delta * (held_z - z);  // warm restart of the tracking variable
    if (ev.comms - 1 <= opts.rounds) record(ev.comms - 1, ev.states->x, held_y, z);
    if (ev.comms <= opts.rounds) record(ev.comms, ev.states->x, ev.states->y, z);
    held_y = ev.states->y;
    held_z = z;
  };
  const auto res = acc_sonata_run(problem, params, lg.gossip, rep.K, ao);
  rep.comms_to_target = comms_to_accuracy(res.trajectory, opts.target_gap);
  rep.final_gap = res.trajectory.back().gap;
  return rep;
}

}  // namespace accsim
