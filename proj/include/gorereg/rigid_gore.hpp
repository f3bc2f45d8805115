#pragma once

// Guaranteed outlier removal for 6-DoF rigid registration.
//
// Forcing match k to be an inlier and re-centering both clouds on (x_k, y_k)
// turns the subproblem into a rotation search at threshold 2 xi whose value
// bounds the rigid one. That rotation search is first reduced with rotational
// GORE and, when this is not enough to reject k, solved by branch and bound.

#include "gorereg/correspondence.hpp"
#include "gorereg/geom.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gorereg {

struct RigidGoreConfig {
  double xi = 0.5;
  bool use_bnb = true;
  /// Per-subproblem BnB budget in seconds; unlimited when empty.
  std::optional<double> bnb_time_budget;
  bool parallel = false;
};

struct RigidSubproblemBound {
  std::size_t p_hat = 0;
  Rotation r_tilde;
  std::size_t step1_bound = 0;     // |H'_k| + unconditional + 1
  std::size_t unconditional = 0;   // shifted pairs any rotation aligns
  std::size_t impossible = 0;      // shifted pairs no rotation aligns
  bool used_bnb = false;
  bool bnb_exhausted = false;
};

struct RigidGoreVisit {
  std::size_t index = 0;
  std::size_t p_hat = 0;
  std::size_t step1_bound = 0;
  std::size_t lower_bound = 0;  // l at the rejection test
  bool used_bnb = false;
  bool bnb_exhausted = false;
  bool removed = false;
};

struct RigidGoreOutcome {
  IndexSet surviving;
  RigidTransform best_transform;
  std::size_t lower_bound = 0;
  std::size_t removed_count = 0;
  std::vector<RigidGoreVisit> visits;
};

/// (x_i - x_k, y_i - y_k) for every i != k. `k` is a position in `corrs`.
CorrespondenceSet shift_about(std::span<const Correspondence> corrs, std::size_t k);

/// Upper bound on the consensus of any rigid transform keeping corrs[k]
/// within xi. `l` is the current lower bound; it only decides whether the
/// BnB step is needed and how hard it must work.
RigidSubproblemBound rigid_subproblem_bound(std::size_t k, std::span<const Correspondence> corrs,
                                            const RigidGoreConfig& cfg, std::size_t l);

/// (R, y_k - R x_k).
RigidTransform lift_candidate(const Rotation& r_tilde, const Correspondence& corr_k);

/// Original indices with |R x_i + t - y_i| <= xi.
IndexSet consensus_rigid(const RigidTransform& t, std::span<const Correspondence> corrs,
                         double xi);

RigidGoreOutcome gore_rigid(std::span<const Correspondence> corrs, const RigidGoreConfig& cfg);

}  // namespace gorereg
