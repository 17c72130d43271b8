#include "accsim/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "accsim/error.hpp"
#include "accsim/rng.hpp"

namespace accsim {

void SyntheticRidgeConfig::validate() const {
  if (m < 1) throw Error(ErrorKind::InvalidInput, "m must be >= 1");
  if (n < 1) throw Error(ErrorKind::InvalidInput, "n must be >= 1");
  if (d < 1) throw Error(ErrorKind::InvalidInput, "d must be >= 1");
  if (!(mu0 > 0.0) || !(mu0 <= L0) || !std::isfinite(L0))
    throw Error(ErrorKind::InvalidInput, "requires 0 < mu0 <= L0");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidInput, "lambda must be >= 0");
  if (!(noise_std >= 0.0)) throw Error(ErrorKind::InvalidInput, "noise_std must be >= 0");
}

namespace {

Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  // Fill row by row so the draw order is independent of Eigen's storage order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) g(r, c) = normal(rng);
  return g;
}

}  // namespace

RidgeInstance gen_ridge_instance(const SyntheticRidgeConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const auto n = static_cast<Eigen::Index>(cfg.n);

  auto cov_rng = make_stream(cfg.seed, stream::kCovariance, cfg.d);
  const Matrix g = gaussian_matrix(cov_rng, d, d);
  const Matrix u = Eigen::HouseholderQR<Matrix>(g).householderQ();
  std::uniform_real_distribution<double> unif(cfg.mu0, cfg.L0);
  Vector eig(d);
  for (Eigen::Index j = 0; j < d; ++j) eig(j) = unif(cov_rng);
  Matrix sigma = u * eig.asDiagonal() * u.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  const Matrix sigma_half = u * eig.cwiseSqrt().asDiagonal() * u.transpose();

  auto truth_rng = make_stream(cfg.seed, stream::kGroundTruth, cfg.d);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x_true(d);
  for (Eigen::Index j = 0; j < d; ++j) x_true(j) = 5.0 + normal(truth_rng);

  std::vector<AgentData> agents;
  agents.reserve(cfg.m);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    auto rng = make_stream(cfg.seed, stream::kAgentBase + i, cfg.d);
    AgentData a;
    a.features = gaussian_matrix(rng, n, d) * sigma_half;
    Vector noise(n);
    for (Eigen::Index j = 0; j < n; ++j) noise(j) = cfg.noise_std * normal(rng);
    a.labels = a.features * x_true + noise;
    agents.push_back(std::move(a));
  }
  return {ProblemSpec::from_samples(LossKind::QuadraticRidge, std::move(agents), cfg.lambda),
          std::move(x_true), std::move(sigma)};
}

ProblemSpec gen_ridge(const SyntheticRidgeConfig& cfg) { return gen_ridge_instance(cfg).problem; }

LibsvmData parse_libsvm(std::istream& in) {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<double> labels;
  std::size_t d = 0;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;  // blank line
    std::size_t used = 0;
    double label = 0.0;
    try {
      label = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("bad label '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(label)) fail("bad label '" + tok + "'");
    std::vector<std::pair<std::size_t, double>> feats;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        fail("expected index:value, got '" + tok + "'");
      const std::string idx_s = tok.substr(0, colon);
      const std::string val_s = tok.substr(colon + 1);
      if (!std::all_of(idx_s.begin(), idx_s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        fail("bad feature index '" + idx_s + "'");
      std::size_t idx = 0;
      double val = 0.0;
      try {
        idx = std::stoul(idx_s);
        val = std::stod(val_s, &used);
      } catch (const std::exception&) {
        fail("bad feature '" + tok + "'");
      }
      if (used != val_s.size() || !std::isfinite(val)) fail("bad feature value '" + val_s + "'");
      if (idx == 0) fail("feature indices are 1-based");
      d = std::max(d, idx);
      feats.emplace_back(idx - 1, val);
    }
    rows.push_back(std::move(feats));
    labels.push_back(label);
  }
  LibsvmData out;
  out.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  out.labels = Vector::Map(labels.data(), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [j, v] : rows[r])
      out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
  return out;
}

LibsvmData read_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open '" + path + "'");
  return parse_libsvm(in);
}

ProblemSpec shard_libsvm(LibsvmData data, const LibsvmOptions& opts) {
  if (opts.m < 1) throw Error(ErrorKind::InvalidInput, "m must be >= 1");
  auto total = static_cast<std::size_t>(data.labels.size());
  if (opts.limit) total = std::min(total, *opts.limit);
  if (total < opts.m)
    throw Error(ErrorKind::InsufficientData, std::to_string(total) + " samples for " +
                                                 std::to_string(opts.m) + " agents");

  std::vector<Eigen::Index> order(total);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (opts.seed) {
    auto rng = make_stream(*opts.seed, stream::kShuffle);
    std::shuffle(order.begin(), order.end(), rng);
  }

  Vector labels = data.labels;
  if (opts.loss != LossKind::QuadraticRidge) {
    std::set<double> distinct(labels.data(), labels.data() + labels.size());
    double positive = 0.0;
    if (opts.positive_label) {
      positive = *opts.positive_label;
    } else if (distinct.size() <= 2) {
      positive = *distinct.rbegin();
    } else {
      throw Error(ErrorKind::InvalidInput,
                  "more than two distinct labels; set positive_label for one-vs-rest");
    }
    for (Eigen::Index j = 0; j < labels.size(); ++j) labels(j) = labels(j) == positive ? 1.0 : -1.0;
  }

  const std::size_t k = total / opts.m;
  std::vector<AgentData> agents(opts.m);
  for (std::size_t i = 0; i < opts.m; ++i) {
    auto& a = agents[i];
    a.features.resize(static_cast<Eigen::Index>(k), data.features.cols());
    a.labels.resize(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const auto src = order[i * k + j];
      a.features.row(static_cast<Eigen::Index>(j)) = data.features.row(src);
      a.labels(static_cast<Eigen::Index>(j)) = labels(src);
    }
  }
  return ProblemSpec::from_samples(opts.loss, std::move(agents), opts.lambda, opts.reg);
}

ProblemSpec load_libsvm(const std::string& path, const LibsvmOptions& opts) {
  return shard_libsvm(read_libsvm_file(path), opts);
}

}  // namespace accsim
