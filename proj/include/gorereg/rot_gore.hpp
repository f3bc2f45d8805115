#pragma once

// Guaranteed outlier removal for rotational registration.
//
// Every correspondence k is tested by bounding the best consensus any rotation
// can reach while keeping k aligned. Feasible rotations are written R = A B
// where B moves x_k into the cap S_{eps_k}(y_k) and A spins about B x_k. Each
// other match i then becomes an interval of spin angles, and interval stabbing
// gives the bound. A match whose bound falls below the best consensus seen so
// far cannot belong to any maximum consensus set and is dropped.

#include "gorereg/correspondence.hpp"
#include "gorereg/geom.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace gorereg {

/// Largest eps_k for which the Jordan linearization of the interval bound is
/// valid: 2 pi sin(eps/2) + eps <= pi/2 holds up to pi / (2 pi + 2).
inline constexpr double kMaxLinearizedEps = kPi / (2.0 * kPi + 2.0);

struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double theta) const { return lo <= theta && theta <= hi; }
};

/// Union of at most two closed sub-intervals of [-pi, pi].
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(AngleInterval a) : parts_{a, {}}, size_(1) {}
  IntervalSet(AngleInterval a, AngleInterval b) : parts_{a, b}, size_(2) {}

  static IntervalSet full() { return IntervalSet({-kPi, kPi}); }

  std::size_t size() const { return size_; }
  const AngleInterval& operator[](std::size_t i) const { return parts_[i]; }
  const AngleInterval* begin() const { return parts_.data(); }
  const AngleInterval* end() const { return parts_.data() + size_; }

  bool contains(double theta) const;
  bool is_full() const;

 private:
  std::array<AngleInterval, 2> parts_{};
  std::size_t size_ = 0;
};

/// arccos of (|x|^2 + |y|^2 - xi^2) / (2 |x| |y|), or pi when that ratio is
/// <= -1. Throws InputError when the ratio exceeds 1 (norms differ by more
/// than xi, which norm_prefilter should have caught).
double angular_threshold(const Vec3& x, const Vec3& y, double xi);
double angular_threshold_from_norms(double norm_x, double norm_y, double xi);

struct NormSplit {
  IndexSet kept;     // positions into the input
  IndexSet removed;  // positions into the input
};

/// Removes pairs with | |x| - |y| | > xi; no rotation can align them.
NormSplit norm_prefilter(std::span<const Correspondence> corrs, double xi);

/// Normalizes the kept pairs and attaches their angular thresholds. Pairs
/// with a zero vector are only representable when both norms are <= xi; they
/// are then kept with epsilon = pi and an arbitrary direction.
std::vector<AngularCorrespondence> to_angular(std::span<const Correspondence> corrs,
                                              double xi);

/// 2 |theta| sin(eps_k / 2) + eps_k.
double delta_bound(double theta, double eps_k);

struct BoundaryVectors {
  Vec3 p_near;
  Vec3 a_near;
  Vec3 p_far;
  Vec3 a_far;
};

/// Closest and farthest point pairs of S_{eps_k}(bx) and S_{eps_k}(y_k).
/// Throws DegenerateError when bx and y_k are parallel.
BoundaryVectors boundary_vectors(const Vec3& bx, const Vec3& y_k, double eps_k);

/// Inclination band (about y_k) that contains every point of L_k(x_i).
AngleInterval inclination_band(const Vec3& bx, const Vec3& y_k, double eps_k);

/// True when S_{eps_i}(y_i) misses the band of L_k(x_i), so match i cannot be
/// aligned by any rotation that keeps k aligned.
bool region_prune_test(const AngularCorrespondence& corr_i, const Vec3& bx,
                       const Vec3& y_k, double eps_k);

/// Offset s in [0, pi/2] beyond which sin(s) > (c0 + c1 s) is guaranteed,
/// found with a two-chord lower bound of sin (breakpoint pi/4). Returns
/// nullopt when the line is not crossed before pi/2.
std::optional<double> linearized_crossing(double c0, double c1);

/// Upper bound on the largest s in [0, pi/2] with
/// sin(s) <= sin(delta(base + s)) / sin(psi), using sin t <= t on the right
/// side. Used for both interval extensions (alpha with base |theta_i - gamma|,
/// beta with base theta_i + gamma).
std::optional<double> side_extension(double base, double eps_k, double psi);

/// Sound over-estimate of the spin angles theta for which some
/// u in S_{eps_k}(y_k), p in S_{eps_k}(bx) give angle(A_{theta,u} p, y_i) <= eps_i.
/// Degenerate configurations return [-pi, pi].
IntervalSet theta_interval(const AngularCorrespondence& corr_i, const Vec3& bx,
                           const Vec3& y_k, double eps_k);

struct StabResult {
  std::size_t max_count = 0;
  double witness = 0.0;
};

/// Max number of closed intervals sharing a point, with the smallest point
/// attaining it. Starts sort before ends at equal coordinates.
StabResult interval_stab(std::span<const AngleInterval> intervals);

struct SubproblemBound {
  std::size_t p_hat = 0;
  Rotation r_tilde;
};

bool is_angular_inlier(const Rotation& r, const AngularCorrespondence& c);
std::size_t angular_consensus_size(const Rotation& r,
                                   std::span<const AngularCorrespondence> corrs);
IndexSet angular_consensus(const Rotation& r, std::span<const AngularCorrespondence> corrs);

/// Upper bound on the consensus of any rotation keeping corrs[k] aligned,
/// and the rotation at the stabbing witness. `k` is a position in `corrs`.
SubproblemBound rot_upper_bound(std::size_t k, std::span<const AngularCorrespondence> corrs);

struct RotGoreOptions {
  /// Warm start, e.g. from a RANSAC run. l starts at the consensus size of
  /// this rotation on the input.
  std::optional<Rotation> initial_rotation;
  /// Stop as soon as fewer than this many matches survive. The partial
  /// survivor set is still a superset of every maximum consensus set.
  std::optional<std::size_t> stop_below;
  /// Evaluate bounds for several pending k at once on a shared snapshot.
  bool parallel = false;
  unsigned threads = 0;
};

struct RotGoreVisit {
  std::size_t index = 0;  // original index of k
  std::size_t p_hat = 0;
  std::size_t lower_bound = 0;  // l after the update for this k
  bool removed = false;
};

struct RotGoreOutcome {
  IndexSet surviving;  // original indices, ascending
  Rotation best_rotation;
  std::size_t lower_bound = 0;
  std::map<std::size_t, std::size_t> per_k_upper_bounds;
  std::vector<RotGoreVisit> visits;
  bool stopped_early = false;
};

/// Rotational GORE over already-angular correspondences. Visits k in
/// ascending original index; after an improvement the pending set is reset to
/// the survivors outside the new consensus that were not visited yet.
RotGoreOutcome gore_rotation(std::span<const AngularCorrespondence> corrs,
                             const RotGoreOptions& options = {});

}  // namespace gorereg
