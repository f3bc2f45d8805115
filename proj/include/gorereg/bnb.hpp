#pragma once

#include "gorereg/correspondence.hpp"
#include "gorereg/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace gorereg {

/// Cube [c - h, c + h]^3 of axis-angle vectors. Every rotation in it lies
/// within sqrt(3) h of the center rotation.
struct RotationBox {
  Vec3 center = Vec3::Zero();
  double half_width = kPi;
  std::size_t upper = 0;

  double uncertainty_radius() const;
};

struct BnbOptions {
  /// Boxes whose bound does not exceed this are discarded.
  std::size_t init_lower = 0;
  /// Seconds; unlimited when empty.
  std::optional<double> time_budget;
  /// Order equal-bound boxes randomly instead of by insertion.
  std::optional<std::uint64_t> tie_break_seed;
  /// Boxes below this half-width are not split. Their bound still enters
  /// upper_bound, so a gap there clears `optimal`.
  double min_half_width = 1e-12;
};

struct BnbResult {
  Rotation best_rotation;
  std::size_t best_consensus = 0;
  /// Certified bound on the maximum consensus: max(best, init_lower) joined
  /// with the bounds of boxes left unsplit at the resolution floor.
  std::size_t upper_bound = 0;
  /// The search finished within budget and upper_bound does not exceed
  /// max(best_consensus, init_lower).
  bool optimal = false;
  std::size_t nodes_expanded = 0;
  double elapsed = 0.0;
};

/// Best-first maximum-consensus rotation search over the axis-angle cube
/// [-pi, pi]^3 with per-match angular thresholds.
BnbResult bnb_rotation_consensus(std::span<const AngularCorrespondence> corrs,
                                 const BnbOptions& options = {});

}  // namespace gorereg
