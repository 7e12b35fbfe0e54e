// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Embedding arithmetic shared by the index, the session engine and the
// evaluation harness. Values are stored as 32-bit floats; every reduction
// (dot products, norms, fusion sums) is accumulated in double.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dar {

/// Fixed-dimension real vector in the shared text/image space.
/// Construction rejects empty and non-finite input, so any non-default
/// Embedding satisfies the invariants.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<float> values);
  Embedding(std::initializer_list<float> values)
      : Embedding(std::vector<float>(values)) {}

  /// Rounds each component to float.
  static Embedding from_doubles(std::span<const double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  double norm() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

struct FusionWeights {
  double alpha = 1.0;  // text
  double beta = 0.0;   // generated images

  /// Throws InvalidArgument unless both lie in [0,1] and sum to 1 (+-1e-9).
  static FusionWeights make(double alpha, double beta);

  friend bool operator==(const FusionWeights&, const FusionWeights&) = default;
};

/// Turn-indexed fusion weights. Lookup returns the weights attached to the
/// greatest threshold <= turn.
class WeightSchedule {
 public:
  struct Step {
    unsigned turn = 0;
    FusionWeights weights;
  };

  /// Thresholds must be strictly increasing and start at 0.
  explicit WeightSchedule(std::vector<Step> steps);

  /// (0.7, 0.3) for turns 0-2, (0.5, 0.5) from turn 3 on.
  static WeightSchedule standard();

  FusionWeights at(unsigned turn) const;
  const std::vector<Step>& steps() const noexcept { return steps_; }

 private:
  std::vector<Step> steps_;
};

enum class Aggregation { Sum, Mean };

std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view s);

/// Throws ZeroVector when the norm is below 1e-12.
Embedding l2_normalize(const Embedding& e);

/// Throws DimMismatch or ZeroVector. The result is clamped to [-1, 1].
double cosine_similarity(const Embedding& a, const Embedding& b);

/// alpha * text + beta * (sum of images), or beta * mean of images for
/// Aggregation::Mean. With no images the result is alpha * text.
Embedding fuse(const Embedding& text, std::span<const Embedding> images,
               FusionWeights w, Aggregation aggregation = Aggregation::Sum);

inline FusionWeights schedule_weights(const WeightSchedule& s, unsigned turn) {
  return s.at(turn);
}

}  // namespace dar
