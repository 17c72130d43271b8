#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>

#include "accsim/problems.hpp"

namespace accsim {

/// Synthetic ridge-regression instance: rows of A_i ~ N(0, Sigma) with the
/// eigenvalues of Sigma uniform in [mu0, L0], b_i = A_i x_true + noise.
struct SyntheticRidgeConfig {
  std::size_t m = 30;
  std::size_t n = 1000;
  std::size_t d = 20;
  double mu0 = 1.0;
  double L0 = 1000.0;
  double lambda = 0.0;
  double noise_std = 0.31622776601683794;  // sqrt(0.1)
  std::uint64_t seed = 0;

  void validate() const;
};

/// Problem plus the generator's latent quantities, for tests and diagnostics.
struct RidgeInstance {
  ProblemSpec problem;
  Vector x_true;    // planted regression vector
  Matrix sigma;     // population covariance of the rows
};

/// Sigma and x_true depend only on (seed, d, mu0, L0), so sweeping n or m at a
/// fixed seed keeps the population model fixed. Agent i draws from its own stream.
RidgeInstance gen_ridge_instance(const SyntheticRidgeConfig& cfg);
ProblemSpec gen_ridge(const SyntheticRidgeConfig& cfg);

/// Parsed LIBSVM rows in file order; features densified to d = max index seen.
struct LibsvmData {
  Matrix features;
  Vector labels;  // raw labels as written in the file
};

LibsvmData parse_libsvm(std::istream& in);
LibsvmData read_libsvm_file(const std::string& path);

/// Options for sharding a LIBSVM dataset over agents.
struct LibsvmOptions {
  std::size_t m = 1;
  std::optional<std::size_t> limit;         // keep only the first `limit` samples
  std::optional<std::uint64_t> seed;        // shuffle with this seed; file order if unset
  LossKind loss = LossKind::Logistic;
  double lambda = 1e-3;
  std::optional<double> positive_label;     // maps to +1; default: the larger of two labels
  Regularizer reg = Regularizer::zero();
};

/// Caps, shuffles and splits the samples into m equal shards (the remainder is
/// dropped). Classification losses map labels to {-1, +1}.
ProblemSpec load_libsvm(const std::string& path, const LibsvmOptions& opts);
ProblemSpec shard_libsvm(LibsvmData data, const LibsvmOptions& opts);

}  // namespace accsim
