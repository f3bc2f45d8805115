#pragma once

#include "gorereg/correspondence.hpp"
#include "gorereg/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace gorereg {

enum class RansacModel { rotation, rigid };

/// Minimal sample size: 2 for rotation, 3 for rigid.
int minimal_sample_size(RansacModel model);

struct RansacConfig {
  double confidence = 0.99;
  RansacModel model = RansacModel::rigid;
  std::size_t max_trials = 1'000'000;
  std::uint64_t seed = 0;
  /// Run exactly max_trials trials (no adaptive stop).
  bool fixed_trials = false;
};

struct RansacResult {
  RigidTransform model;  // translation is zero for the rotation model
  IndexSet consensus;    // original indices
  std::size_t trials_used = 0;
  /// Trial that produced the returned model.
  std::size_t best_trial = 0;
};

/// ceil(log(1 - rho) / log(1 - (1 - eta)^m)), clamped to [1, cap].
std::size_t required_trials(double eta, int m, double rho, std::size_t cap = 1'000'000);

/// Orthogonal Procrustes: maximizes sum <R x_i, y_i>. Rank-1 cross-covariance
/// (all x_i parallel) returns the minimal rotation between the dominant
/// directions; an all-zero one throws DegenerateError.
Rotation fit_rotation_least_squares(std::span<const Correspondence> corrs);

/// Centroid alignment followed by the rotation fit. Needs three non-collinear
/// source points.
RigidTransform fit_rigid_least_squares(std::span<const Correspondence> corrs);

/// Euclidean consensus |R x + t - y| <= xi (inclusive, kDistTol slack).
IndexSet euclidean_consensus(const RigidTransform& t, std::span<const Correspondence> corrs,
                             double xi);

RansacResult ransac(std::span<const Correspondence> corrs, double xi, const RansacConfig& cfg);

}  // namespace gorereg
