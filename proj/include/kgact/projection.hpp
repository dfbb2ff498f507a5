// Copyright 2026 The kgact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KGACT_PROJECTION_HPP_
#define KGACT_PROJECTION_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kgact {

struct TrainingPair {
  std::vector<double> features;
  std::vector<double> target;
};

// Linear map from visual features to the concept embedding space:
// psi(f) = W^T f + b.
struct ProjectionModel {
  Eigen::MatrixXd weights;  // feature_dim x output_dim
  Eigen::VectorXd bias;     // output_dim
  double mu = 0.0;          // ridge strength actually used
  int iterations = 0;       // refinement iteration that produced the model
  double training_mse = 0.0;
  std::vector<std::string> warnings;

  std::size_t feature_dim() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(weights.cols()); }

  Eigen::VectorXd apply(std::span<const double> features) const;
  // Mean over samples and output components of the squared error.
  double mse(std::span<const TrainingPair> pairs) const;
};

inline constexpr double kSingularFallbackMu = 1e-6;

// Closed-form minimizer of
//
//   (1/n) sum_i |W^T f_i + b - t_i|^2 + mu |W|_F^2
//
// with an unpenalized bias, via (Xc^T Xc + n mu I) W = Xc^T Yc on centered
// data. A singular system at mu = 0 is retried with kSingularFallbackMu and
// a warning.
ProjectionModel train_projection(std::span<const TrainingPair> pairs,
                                 double mu);

inline constexpr std::uint32_t kModelMagic = 0x4d50474bu;  // "KGPM"

// Little-endian u32 magic, u32 feature_dim, u32 output_dim, f64 mu, then
// row-major f64 weights and the f64 bias.
void save_projection(const std::filesystem::path& path,
                     const ProjectionModel& model);
ProjectionModel load_projection(const std::filesystem::path& path);

}  // namespace kgact

#endif  // KGACT_PROJECTION_HPP_
