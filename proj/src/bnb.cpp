#include "gorereg/bnb.hpp"

#include "gorereg/rot_gore.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <random>
#include <vector>

namespace gorereg {

namespace {

struct Node {
  Vec3 center;
  int depth;
  std::size_t upper;
  std::uint64_t key;  // tie-break, smaller first
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.upper != b.upper) return a.upper < b.upper;
    return a.key > b.key;
  }
};

const double kSqrt3 = std::sqrt(3.0);

}  // namespace

double RotationBox::uncertainty_radius() const { return kSqrt3 * half_width; }

BnbResult bnb_rotation_consensus(std::span<const AngularCorrespondence> corrs,
                                 const BnbOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const std::size_t n = corrs.size();

  std::vector<double> cos_inlier(n);
  for (std::size_t i = 0; i < n; ++i) {
    cos_inlier[i] = std::cos(std::min(kPi, corrs[i].epsilon + kAngleTol));
  }
  // cos_upper[d][i]: threshold for boxes of half-width pi / 2^d.
  std::vector<std::vector<double>> cos_upper;
  auto thresholds_at = [&](int depth) -> const std::vector<double>& {
    while (static_cast<int>(cos_upper.size()) <= depth) {
      const double r = kSqrt3 * std::ldexp(kPi, -static_cast<int>(cos_upper.size()));
      std::vector<double> t(n);
      for (std::size_t i = 0; i < n; ++i) {
        t[i] = std::cos(std::min(kPi, corrs[i].epsilon + kAngleTol + r));
      }
      cos_upper.push_back(std::move(t));
    }
    return cos_upper[static_cast<std::size_t>(depth)];
  };

  BnbResult result;
  result.best_consensus = angular_consensus_size(result.best_rotation, corrs);
  std::size_t incumbent = std::max(result.best_consensus, options.init_lower);
  std::size_t terminal_upper = 0;

  std::mt19937_64 tie_rng(options.tie_break_seed.value_or(0));
  std::uint64_t seq = 0;
  auto next_key = [&]() -> std::uint64_t {
    return options.tie_break_seed ? tie_rng() : seq++;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
  if (n > incumbent) queue.push({Vec3::Zero(), 0, n, next_key()});

  bool exhausted = false;
  while (!queue.empty()) {
    if (options.time_budget &&
        std::chrono::duration<double>(Clock::now() - start).count() > *options.time_budget) {
      exhausted = true;
      break;
    }
    const Node node = queue.top();
    queue.pop();
    if (node.upper <= incumbent) break;  // every remaining box is dominated
    ++result.nodes_expanded;

    const double half_width = std::ldexp(kPi, -node.depth);
    if (half_width < options.min_half_width) {
      terminal_upper = std::max(terminal_upper, node.upper);
      continue;
    }
    const int child_depth = node.depth + 1;
    const double child_hw = half_width / 2.0;
    const std::vector<double>& cos_up = thresholds_at(child_depth);
    for (int octant = 0; octant < 8; ++octant) {
      const Vec3 center = node.center + child_hw * Vec3(octant & 1 ? 1.0 : -1.0,
                                                        octant & 2 ? 1.0 : -1.0,
                                                        octant & 4 ? 1.0 : -1.0);
      // Boxes entirely outside the pi-ball only repeat rotations found inside it.
      if (center.norm() - kSqrt3 * child_hw > kPi) continue;
      const Mat3 r = Rotation::from_rotation_vector(center).matrix();
      std::size_t lower = 0;
      std::size_t upper = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (r * corrs[i].x).dot(corrs[i].y);
        if (d >= cos_up[i]) {
          ++upper;
          if (d >= cos_inlier[i]) ++lower;
        }
      }
      if (lower > result.best_consensus) {
        const Rotation rot = Rotation::from_rotation_vector(center);
        const std::size_t exact = angular_consensus_size(rot, corrs);
        if (exact > result.best_consensus) {
          result.best_consensus = exact;
          result.best_rotation = rot;
          incumbent = std::max(incumbent, exact);
        }
      }
      if (upper > incumbent) queue.push({center, child_depth, upper, next_key()});
    }
  }

  if (exhausted) {
    std::size_t open_upper = 0;
    while (!queue.empty()) {
      open_upper = std::max(open_upper, queue.top().upper);
      queue.pop();
    }
    terminal_upper = std::max(terminal_upper, open_upper);
  }
  const std::size_t certified = std::max(result.best_consensus, options.init_lower);
  result.upper_bound = std::max(certified, terminal_upper);
  result.optimal = !exhausted && result.upper_bound == certified;
  result.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace gorereg
