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

#include "kgact/projection.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "kgact/error.hpp"

namespace kgact {

Eigen::VectorXd ProjectionModel::apply(std::span<const double> features) const {
  if (features.size() != feature_dim()) {
    throw ContractError("feature dimension " + std::to_string(features.size()) +
                        " does not match model dimension " +
                        std::to_string(feature_dim()));
  }
  const Eigen::Map<const Eigen::VectorXd> f(features.data(),
                                            static_cast<Eigen::Index>(features.size()));
  return weights.transpose() * f + bias;
}

double ProjectionModel::mse(std::span<const TrainingPair> pairs) const {
  if (pairs.empty()) throw ContractError("mse over an empty sample");
  double sum = 0.0;
  for (const auto& pair : pairs) {
    const Eigen::Map<const Eigen::VectorXd> t(
        pair.target.data(), static_cast<Eigen::Index>(pair.target.size()));
    if (pair.target.size() != output_dim()) {
      throw ContractError("target dimension does not match model");
    }
    sum += (apply(pair.features) - t).squaredNorm();
  }
  return sum / (static_cast<double>(pairs.size()) *
                static_cast<double>(output_dim()));
}

ProjectionModel train_projection(std::span<const TrainingPair> pairs,
                                 double mu) {
  if (pairs.empty()) throw DataError("train_projection: no training pairs");
  if (!std::isfinite(mu) || mu < 0.0) {
    throw ContractError("train_projection: mu must be finite and >= 0");
  }
  const auto n = static_cast<Eigen::Index>(pairs.size());
  const auto d = static_cast<Eigen::Index>(pairs.front().features.size());
  const auto k = static_cast<Eigen::Index>(pairs.front().target.size());
  if (d == 0 || k == 0) throw DataError("train_projection: empty vectors");

  Eigen::MatrixXd x(n, d);
  Eigen::MatrixXd y(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    if (p.features.size() != static_cast<std::size_t>(d) ||
        p.target.size() != static_cast<std::size_t>(k)) {
      throw DataError("train_projection: inconsistent pair dimensions");
    }
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = p.features[j];
    for (Eigen::Index j = 0; j < k; ++j) y(i, j) = p.target[j];
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw DataError("train_projection: non-finite training data");
  }

  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::RowVectorXd y_mean = y.colwise().mean();
  x.rowwise() -= x_mean;
  y.rowwise() -= y_mean;

  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::MatrixXd rhs = x.transpose() * y;

  ProjectionModel model;
  model.mu = mu;
  if (mu == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    if (qr.rank() < d) {
      model.mu = kSingularFallbackMu;
      model.warnings.push_back(
          "normal equations are singular at mu = 0; using mu = 1e-6");
    }
  }

  Eigen::MatrixXd system = gram;
  system.diagonal().array() += static_cast<double>(n) * model.mu;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  if (ldlt.info() != Eigen::Success) {
    throw DataError("train_projection: factorization failed");
  }
  model.weights = ldlt.solve(rhs);
  model.bias = (y_mean - x_mean * model.weights).transpose();
  if (!model.weights.allFinite() || !model.bias.allFinite()) {
    throw DataError("train_projection: solution is not finite");
  }
  model.training_mse = model.mse(pairs);
  return model;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ParseError("truncated projection model");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::ifstream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw ParseError("truncated projection model");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void save_projection(const std::filesystem::path& path,
                     const ProjectionModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  put_u32(out, kModelMagic);
  put_u32(out, static_cast<std::uint32_t>(model.feature_dim()));
  put_u32(out, static_cast<std::uint32_t>(model.output_dim()));
  put_f64(out, model.mu);
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
      put_f64(out, model.weights(r, c));
    }
  }
  for (Eigen::Index c = 0; c < model.bias.size(); ++c) put_f64(out, model.bias(c));
}

ProjectionModel load_projection(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open projection model " + path.string());
  if (get_u32(in) != kModelMagic) {
    throw ParseError(path.string() + ": bad projection model magic");
  }
  const auto d = get_u32(in);
  const auto k = get_u32(in);
  if (d == 0 || k == 0) throw ParseError(path.string() + ": zero dimension");
  ProjectionModel model;
  model.mu = get_f64(in);
  model.weights.resize(d, k);
  model.bias.resize(k);
  for (std::uint32_t r = 0; r < d; ++r) {
    for (std::uint32_t c = 0; c < k; ++c) model.weights(r, c) = get_f64(in);
  }
  for (std::uint32_t c = 0; c < k; ++c) model.bias(c) = get_f64(in);
  if (!model.weights.allFinite() || !model.bias.allFinite()) {
    throw DataError(path.string() + ": non-finite model parameters");
  }
  return model;
}

}  // namespace kgact
