#include "gorereg/rigid_gore.hpp"

#include "gorereg/baselines.hpp"
#include "gorereg/bnb.hpp"
#include "gorereg/rot_gore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

namespace gorereg {

namespace {

struct ShiftedProblem {
  std::vector<AngularCorrespondence> angular;
  std::size_t unconditional = 0;
  std::size_t impossible = 0;
};

// Half-angle form of arccos((a^2 + b^2 - tau^2) / (2ab)); stays accurate when
// one norm is much smaller than the other.
double shifted_threshold(double nx, double ny, double tau) {
  const double d = nx - ny;
  const double s = (tau * tau - d * d) / (4.0 * nx * ny);
  return 2.0 * std::asin(std::sqrt(std::clamp(s, 0.0, 1.0)));
}

ShiftedProblem classify_shifted(std::span<const Correspondence> corrs, std::size_t k, double xi) {
  const double tau = 2.0 * (xi + kDistTol);
  ShiftedProblem out;
  const Correspondence& ck = corrs[k];
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (i == k) continue;
    const Vec3 x = corrs[i].x - ck.x;
    const Vec3 y = corrs[i].y - ck.y;
    const double nx = x.norm();
    const double ny = y.norm();
    if (std::abs(nx - ny) > tau) {
      ++out.impossible;
    } else if (nx + ny <= tau) {
      ++out.unconditional;
    } else {
      out.angular.push_back({x / nx, y / ny, shifted_threshold(nx, ny, tau), corrs[i].index});
    }
  }
  return out;
}

std::size_t count_rigid(const RigidTransform& t, std::span<const Correspondence> corrs,
                        double xi) {
  const double limit = (xi + kDistTol) * (xi + kDistTol);
  const Mat3& r = t.rotation.matrix();
  std::size_t count = 0;
  for (const auto& c : corrs) {
    if ((r * c.x + t.translation - c.y).squaredNorm() <= limit) ++count;
  }
  return count;
}

// The lifted candidate solves the 2 xi relaxation, so its residuals can reach
// 2 xi. A least-squares refit on that neighbourhood is kept when it has the
// larger consensus at xi.
RigidTransform refine_candidate(const RigidTransform& lifted, std::span<const Correspondence> corrs,
                                double xi) {
  const double wide = (2.0 * xi + kDistTol) * (2.0 * xi + kDistTol);
  CorrespondenceSet near;
  for (const auto& c : corrs) {
    if ((lifted.apply(c.x) - c.y).squaredNorm() <= wide) near.push_back(c);
  }
  if (near.size() < 3) return lifted;
  RigidTransform refit;
  try {
    refit = fit_rigid_least_squares(near);
  } catch (const DegenerateError&) {
    return lifted;
  }
  return count_rigid(refit, corrs, xi) > count_rigid(lifted, corrs, xi) ? refit : lifted;
}

}  // namespace

CorrespondenceSet shift_about(std::span<const Correspondence> corrs, std::size_t k) {
  if (k >= corrs.size()) throw InputError("shift_about: k out of range");
  CorrespondenceSet out;
  out.reserve(corrs.size() - 1);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (i == k) continue;
    out.push_back({corrs[i].x - corrs[k].x, corrs[i].y - corrs[k].y, corrs[i].index});
  }
  return out;
}

RigidSubproblemBound rigid_subproblem_bound(std::size_t k, std::span<const Correspondence> corrs,
                                            const RigidGoreConfig& cfg, std::size_t l) {
  if (k >= corrs.size()) throw InputError("rigid_subproblem_bound: k out of range");
  if (!(cfg.xi > 0.0)) throw InputError("rigid_subproblem_bound: xi must be positive");

  const ShiftedProblem sub = classify_shifted(corrs, k, cfg.xi);
  const std::size_t fixed = sub.unconditional + 1;

  // |H'_k| + fixed < l rejects k, so GORE may stop once it drops below that.
  RotGoreOptions inner;
  if (l > fixed) inner.stop_below = l - fixed;
  const RotGoreOutcome step1 = gore_rotation(sub.angular, inner);

  RigidSubproblemBound out;
  out.unconditional = sub.unconditional;
  out.impossible = sub.impossible;
  out.step1_bound = step1.surviving.size() + fixed;
  out.p_hat = out.step1_bound;
  out.r_tilde = step1.best_rotation;
  if (out.step1_bound < l || !cfg.use_bnb) return out;

  std::vector<AngularCorrespondence> reduced;
  reduced.reserve(step1.surviving.size());
  {
    std::size_t s = 0;
    std::vector<AngularCorrespondence> by_index(sub.angular.begin(), sub.angular.end());
    std::sort(by_index.begin(), by_index.end(),
              [](const auto& a, const auto& b) { return a.index < b.index; });
    for (const auto& c : by_index) {
      if (s < step1.surviving.size() && step1.surviving[s] == c.index) {
        reduced.push_back(c);
        ++s;
      }
    }
  }

  // BnB only has to tell whether the optimum reaches l - fixed.
  BnbOptions bo;
  bo.init_lower = l >= fixed + 1 ? l - fixed - 1 : 0;
  bo.time_budget = cfg.bnb_time_budget;
  const BnbResult bnb = bnb_rotation_consensus(reduced, bo);
  out.used_bnb = true;
  out.bnb_exhausted = !bnb.optimal;
  out.p_hat = std::min(out.step1_bound, bnb.upper_bound + fixed);
  if (bnb.best_consensus > step1.lower_bound) out.r_tilde = bnb.best_rotation;
  return out;
}

RigidTransform lift_candidate(const Rotation& r_tilde, const Correspondence& corr_k) {
  return {r_tilde, corr_k.y - r_tilde * corr_k.x};
}

IndexSet consensus_rigid(const RigidTransform& t, std::span<const Correspondence> corrs,
                         double xi) {
  const double limit = (xi + kDistTol) * (xi + kDistTol);
  IndexSet out;
  for (const auto& c : corrs) {
    if ((t.apply(c.x) - c.y).squaredNorm() <= limit) out.push_back(c.index);
  }
  return out;
}

RigidGoreOutcome gore_rigid(std::span<const Correspondence> corrs, const RigidGoreConfig& cfg) {
  if (!(cfg.xi > 0.0)) throw InputError("gore_rigid: xi must be positive");
  RigidGoreOutcome out;
  const std::size_t n = corrs.size();
  if (n == 0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corrs[a].index < corrs[b].index; });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  std::vector<char> alive(n, 1);
  std::vector<char> visited(n, 0);
  std::set<std::size_t> pending_ranks;
  for (std::size_t r = 0; r < n; ++r) pending_ranks.insert(r);

  std::size_t l = 0;
  RigidTransform best;
  {
    const RigidTransform identity;
    l = count_rigid(identity, corrs, cfg.xi);
  }

  unsigned threads = 1;
  if (cfg.parallel) threads = std::max(1u, std::thread::hardware_concurrency());

  CorrespondenceSet members;
  std::vector<std::size_t> member_pos(n);
  std::vector<std::size_t> batch;
  std::vector<RigidSubproblemBound> bounds(threads);

  while (!pending_ranks.empty()) {
    batch.clear();
    while (batch.size() < threads && !pending_ranks.empty()) {
      batch.push_back(order[*pending_ranks.begin()]);
      pending_ranks.erase(pending_ranks.begin());
    }
    members.clear();
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t pos = order[r];
      if (!alive[pos]) continue;
      member_pos[pos] = members.size();
      members.push_back(corrs[pos]);
    }
    const std::size_t l_snapshot = l;
    if (batch.size() == 1) {
      bounds[0] = rigid_subproblem_bound(member_pos[batch[0]], members, cfg, l_snapshot);
    } else {
      std::vector<std::jthread> workers;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        workers.emplace_back([&, b] {
          bounds[b] = rigid_subproblem_bound(member_pos[batch[b]], members, cfg, l_snapshot);
        });
      }
    }

    for (std::size_t b = 0; b < batch.size(); ++b) {
      const std::size_t k = batch[b];
      visited[k] = 1;
      const RigidSubproblemBound& bound = bounds[b];
      RigidTransform candidate = refine_candidate(lift_candidate(bound.r_tilde, corrs[k]), corrs,
                                                  cfg.xi);

      const double limit = (cfg.xi + kDistTol) * (cfg.xi + kDistTol);
      std::vector<char> in_consensus(n, 0);
      std::size_t count = 0;
      for (std::size_t pos = 0; pos < n; ++pos) {
        if ((candidate.apply(corrs[pos].x) - corrs[pos].y).squaredNorm() <= limit) {
          in_consensus[pos] = 1;
          ++count;
        }
      }
      if (count > l) {
        l = count;
        best = candidate;
        pending_ranks.clear();
        for (std::size_t pos = 0; pos < n; ++pos) {
          if (alive[pos] && !in_consensus[pos] && !visited[pos]) pending_ranks.insert(rank[pos]);
        }
      }

      RigidGoreVisit visit;
      visit.index = corrs[k].index;
      visit.p_hat = bound.p_hat;
      visit.step1_bound = bound.step1_bound;
      visit.lower_bound = l;
      visit.used_bnb = bound.used_bnb;
      visit.bnb_exhausted = bound.bnb_exhausted;
      if (bound.p_hat < l) {
        alive[k] = 0;
        ++out.removed_count;
        visit.removed = true;
      }
      out.visits.push_back(visit);
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    if (alive[order[r]]) out.surviving.push_back(corrs[order[r]].index);
  }
  out.best_transform = best;
  out.lower_bound = l;
  return out;
}

}  // namespace gorereg
