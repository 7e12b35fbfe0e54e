// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dar/errors.hpp"

namespace dar {

namespace {

constexpr double kZeroNormThreshold = 1e-12;
constexpr double kWeightSumTolerance = 1e-9;

double sum_squares(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return s;
}

void require_same_dim(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch, "embedding dims differ",
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

Embedding::Embedding(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "embedding must have dim >= 1");
  }
  for (float x : values_) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::InvalidArgument, "embedding has non-finite component");
    }
  }
}

Embedding Embedding::from_doubles(std::span<const double> values) {
  std::vector<float> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [](double x) { return static_cast<float>(x); });
  return Embedding(std::move(out));
}

double Embedding::norm() const noexcept { return std::sqrt(sum_squares(values_)); }

FusionWeights FusionWeights::make(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fusion weights must lie in [0, 1]");
  }
  if (std::abs(alpha + beta - 1.0) > kWeightSumTolerance) {
    throw Error(ErrorCode::InvalidArgument, "fusion weights must sum to 1");
  }
  return FusionWeights{alpha, beta};
}

WeightSchedule::WeightSchedule(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty() || steps_.front().turn != 0) {
    throw Error(ErrorCode::InvalidArgument, "weight schedule must start at turn 0");
  }
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    steps_[i].weights = FusionWeights::make(steps_[i].weights.alpha, steps_[i].weights.beta);
    if (i > 0 && steps_[i].turn <= steps_[i - 1].turn) {
      throw Error(ErrorCode::InvalidArgument,
                  "weight schedule thresholds must be strictly increasing");
    }
  }
}

WeightSchedule WeightSchedule::standard() {
  return WeightSchedule({{0, {0.7, 0.3}}, {3, {0.5, 0.5}}});
}

FusionWeights WeightSchedule::at(unsigned turn) const {
  auto it = std::upper_bound(steps_.begin(), steps_.end(), turn,
                             [](unsigned t, const Step& s) { return t < s.turn; });
  return std::prev(it)->weights;
}

std::string_view to_string(Aggregation a) {
  return a == Aggregation::Sum ? "sum" : "mean";
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "sum") return Aggregation::Sum;
  if (s == "mean") return Aggregation::Mean;
  throw Error(ErrorCode::InvalidArgument, "unknown aggregation", std::string(s));
}

Embedding l2_normalize(const Embedding& e) {
  const double n = e.norm();
  if (e.empty() || n < kZeroNormThreshold) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  }
  std::vector<double> out(e.dim());
  for (std::size_t i = 0; i < e.dim(); ++i) out[i] = static_cast<double>(e[i]) / n;
  return Embedding::from_doubles(out);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  require_same_dim(a, b);
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kZeroNormThreshold || nb < kZeroNormThreshold) {
    throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  }
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

Embedding fuse(const Embedding& text, std::span<const Embedding> images,
               FusionWeights w, Aggregation aggregation) {
  for (const auto& img : images) require_same_dim(text, img);

  const std::size_t d = text.dim();
  std::vector<double> visual(d, 0.0);
  for (const auto& img : images) {
    for (std::size_t i = 0; i < d; ++i) visual[i] += static_cast<double>(img[i]);
  }
  if (aggregation == Aggregation::Mean && !images.empty()) {
    const double k = static_cast<double>(images.size());
    for (auto& v : visual) v /= k;
  }

  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = images.empty() ? w.alpha * static_cast<double>(text[i])
                            : w.alpha * static_cast<double>(text[i]) + w.beta * visual[i];
  }
  return Embedding::from_doubles(out);
}

}  // namespace dar
