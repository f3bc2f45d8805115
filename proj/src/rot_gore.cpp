#include "gorereg/rot_gore.hpp"

#include "gorereg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>
#include <utility>

namespace gorereg {

namespace {

// Chord slopes of sin on [0, pi/4] and [pi/4, pi/2].
const double kSinQuarter = std::sin(kPi / 4.0);
const double kChordSlope1 = kSinQuarter / (kPi / 4.0);
const double kChordSlope2 = (1.0 - kSinQuarter) / (kPi / 4.0);

// Absorbs rounding in the chord construction; the result only needs to be an
// over-estimate.
constexpr double kCrossingSlack = 1e-12;

struct PoleContext {
  Vec3 pole;
  TangentFrame frame;
  double eps_k;
};

PoleContext make_pole_context(const Vec3& y_k, double eps_k) {
  return {y_k, tangent_frame(y_k), eps_k};
}

IntervalSet interval_from_geometry(double psi_b, double phi_b, double psi_y, double phi_y,
                                   double eps_i, double eps_k) {
  if (eps_k > kMaxLinearizedEps || eps_i >= kPi) return IntervalSet::full();
  // The pole may lie in L_k(x_i).
  if (psi_b <= 2.0 * eps_k + eps_i) return IntervalSet::full();
  // Some delta-cap along the circle could reach a pole.
  if (delta_bound(kPi, eps_k) >= std::min(psi_b, kPi - psi_b)) return IntervalSet::full();
  // S_{eps_i}(y_i) contains a pole: no bounding meridians.
  if (eps_i >= std::min(psi_y, kPi - psi_y)) return IntervalSet::full();

  const double gamma = std::asin(std::min(1.0, std::sin(eps_i) / std::sin(psi_y)));
  const double theta_i = wrap_angle(phi_y - phi_b);
  const double t = std::abs(theta_i);

  const auto beta = side_extension(t + gamma, eps_k, psi_b);
  const auto alpha = side_extension(std::abs(t - gamma), eps_k, psi_b);
  if (!alpha || !beta) return IntervalSet::full();

  double lo = t - gamma - *alpha;
  double hi = t + gamma + *beta;
  if (hi - lo >= 2.0 * kPi) return IntervalSet::full();
  if (theta_i < 0.0) {
    std::swap(lo, hi);
    lo = -lo;
    hi = -hi;
  }
  if (hi > kPi) return IntervalSet({lo, kPi}, {-kPi, hi - 2.0 * kPi});
  if (lo < -kPi) return IntervalSet({-kPi, hi}, {lo + 2.0 * kPi, kPi});
  return IntervalSet({lo, hi});
}

bool prune_from_inclinations(double psi_b, double psi_y, double eps_i, double eps_k) {
  const double lo = std::max(0.0, psi_b - 3.0 * eps_k);
  const double hi = std::min(kPi, psi_b + 3.0 * eps_k);
  return psi_y + eps_i < lo || psi_y - eps_i > hi;
}

// Appends the intervals of one match (or nothing if it is pruned).
void append_intervals(const PoleContext& ctx, const Vec3& bx, const AngularCorrespondence& ci,
                      double eps_i, std::vector<AngleInterval>& out) {
  if (eps_i >= kPi) {
    out.push_back({-kPi, kPi});
    return;
  }
  const Vec3 pb(bx.dot(ctx.frame.e1), bx.dot(ctx.frame.e2), bx.dot(ctx.frame.pole));
  const Vec3 py(ci.y.dot(ctx.frame.e1), ci.y.dot(ctx.frame.e2), ci.y.dot(ctx.frame.pole));
  const double rb = std::sqrt(pb(0) * pb(0) + pb(1) * pb(1));
  const double ry = std::sqrt(py(0) * py(0) + py(1) * py(1));
  const double psi_b = std::atan2(rb, pb(2));
  const double psi_y = std::atan2(ry, py(2));
  if (prune_from_inclinations(psi_b, psi_y, eps_i, ctx.eps_k)) return;
  const double phi_b = rb > 0.0 ? std::atan2(pb(1), pb(0)) : 0.0;
  const double phi_y = ry > 0.0 ? std::atan2(py(1), py(0)) : 0.0;
  const IntervalSet set = interval_from_geometry(psi_b, phi_b, psi_y, phi_y, eps_i, ctx.eps_k);
  for (const auto& part : set) out.push_back(part);
}

double slackened(double eps) { return std::min(kPi, eps + kAngleTol); }

// Bound for corrs[k] against the members listed in `members` (positions).
SubproblemBound bound_over(std::size_t k, std::span<const AngularCorrespondence> corrs,
                           std::span<const std::size_t> members,
                           std::vector<AngleInterval>& scratch) {
  const AngularCorrespondence& ck = corrs[k];
  const Rotation bhat = minimal_geodesic_rotation(ck.x, ck.y);
  const PoleContext ctx = make_pole_context(ck.y, slackened(ck.epsilon));

  scratch.clear();
  for (std::size_t pos : members) {
    if (pos == k) continue;
    const AngularCorrespondence& ci = corrs[pos];
    append_intervals(ctx, bhat * ci.x, ci, slackened(ci.epsilon), scratch);
  }
  const StabResult stab = interval_stab(scratch);
  SubproblemBound out;
  out.p_hat = stab.max_count + 1;
  out.r_tilde = rotation_from_axis_angle(ck.y.normalized(), stab.witness) * bhat;
  return out;
}

}  // namespace

bool IntervalSet::contains(double theta) const {
  return std::any_of(begin(), end(), [&](const AngleInterval& a) { return a.contains(theta); });
}

bool IntervalSet::is_full() const {
  return std::any_of(begin(), end(),
                     [](const AngleInterval& a) { return a.lo <= -kPi && a.hi >= kPi; });
}

double angular_threshold_from_norms(double nx, double ny, double xi) {
  if (!(nx > 0.0) || !(ny > 0.0)) throw InputError("angular_threshold: zero-norm vector");
  const double lambda = (nx * nx + ny * ny - xi * xi) / (2.0 * nx * ny);
  if (lambda <= -1.0) return kPi;
  if (lambda > 1.0) {
    // Rounding can push lambda just above 1 when | |x| - |y| | == xi.
    if (lambda - 1.0 <= 1e-12) return 0.0;
    throw InputError("angular_threshold: norms differ by more than xi (prefilter not applied)");
  }
  return std::acos(lambda);
}

double angular_threshold(const Vec3& x, const Vec3& y, double xi) {
  return angular_threshold_from_norms(x.norm(), y.norm(), xi);
}

NormSplit norm_prefilter(std::span<const Correspondence> corrs, double xi) {
  if (!(xi > 0.0)) throw InputError("norm_prefilter: xi must be positive");
  NormSplit out;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (std::abs(corrs[i].x.norm() - corrs[i].y.norm()) > xi) {
      out.removed.push_back(i);
    } else {
      out.kept.push_back(i);
    }
  }
  return out;
}

std::vector<AngularCorrespondence> to_angular(std::span<const Correspondence> corrs, double xi) {
  std::vector<AngularCorrespondence> out;
  out.reserve(corrs.size());
  for (const auto& c : corrs) {
    const double nx = c.x.norm();
    const double ny = c.y.norm();
    if (std::abs(nx - ny) > xi) {
      throw InputError("to_angular: correspondence fails the norm prefilter");
    }
    AngularCorrespondence a;
    a.index = c.index;
    if (nx == 0.0 || ny == 0.0) {
      a.x = nx == 0.0 ? Vec3::UnitZ() : Vec3(c.x / nx);
      a.y = ny == 0.0 ? Vec3::UnitZ() : Vec3(c.y / ny);
      a.epsilon = kPi;
    } else {
      a.x = c.x / nx;
      a.y = c.y / ny;
      a.epsilon = angular_threshold_from_norms(nx, ny, xi);
    }
    out.push_back(a);
  }
  return out;
}

double delta_bound(double theta, double eps_k) {
  return 2.0 * std::abs(theta) * std::sin(eps_k / 2.0) + eps_k;
}

BoundaryVectors boundary_vectors(const Vec3& bx, const Vec3& y_k, double eps_k) {
  const Vec3 c = bx.cross(y_k);
  const double s = c.norm();
  if (s < 1e-12) throw DegenerateError("boundary_vectors: bx is parallel to y_k");
  const Vec3 toward = c / s;  // rotating bx about this moves it toward y_k
  const Rotation r_toward = rotation_from_axis_angle(toward, eps_k);
  const Rotation r_away = rotation_from_axis_angle(-toward, eps_k);
  return {r_toward * bx, r_away * y_k, r_away * bx, r_toward * y_k};
}

AngleInterval inclination_band(const Vec3& bx, const Vec3& y_k, double eps_k) {
  const double psi_b = angle_between(bx, y_k);
  return {std::max(0.0, psi_b - 3.0 * eps_k), std::min(kPi, psi_b + 3.0 * eps_k)};
}

bool region_prune_test(const AngularCorrespondence& corr_i, const Vec3& bx, const Vec3& y_k,
                       double eps_k) {
  return prune_from_inclinations(angle_between(bx, y_k), angle_between(corr_i.y, y_k),
                                 corr_i.epsilon, eps_k);
}

std::optional<double> linearized_crossing(double c0, double c1) {
  // g(s) = chord(s) - c1 s is concave with g(0) = 0 <= c0; the admissible
  // offsets {g <= c0} form [0, s*] iff g(pi/2) > c0.
  if (!(1.0 - c1 * kPi / 2.0 > c0)) return std::nullopt;
  const double g_quarter = kSinQuarter - c1 * kPi / 4.0;
  double s;
  if (g_quarter > c0) {
    s = c0 / (kChordSlope1 - c1);
  } else {
    s = kPi / 4.0 + (c0 - g_quarter) / (kChordSlope2 - c1);
  }
  return std::min(kPi / 2.0, s + kCrossingSlack);
}

std::optional<double> side_extension(double base, double eps_k, double psi) {
  const double sin_psi = std::sin(psi);
  if (!(sin_psi > 0.0)) return std::nullopt;
  const double slope = 2.0 * std::sin(eps_k / 2.0);
  const double c0 = (slope * base + eps_k) / sin_psi;
  const double c1 = slope / sin_psi;
  return linearized_crossing(c0, c1);
}

IntervalSet theta_interval(const AngularCorrespondence& corr_i, const Vec3& bx, const Vec3& y_k,
                           double eps_k) {
  const TangentFrame frame = tangent_frame(y_k);
  const SphericalCoords cb = spherical_coords(bx, frame);
  const SphericalCoords cy = spherical_coords(corr_i.y, frame);
  return interval_from_geometry(cb.inclination, cb.azimuth, cy.inclination, cy.azimuth,
                                corr_i.epsilon, eps_k);
}

StabResult interval_stab(std::span<const AngleInterval> intervals) {
  if (intervals.empty()) return {};
  // (coordinate, 0 = start / 1 = end)
  std::vector<std::pair<double, int>> events;
  events.reserve(2 * intervals.size());
  for (const auto& iv : intervals) {
    events.emplace_back(iv.lo, 0);
    events.emplace_back(iv.hi, 1);
  }
  std::sort(events.begin(), events.end());
  StabResult best;
  std::size_t open = 0;
  for (const auto& [x, kind] : events) {
    if (kind == 0) {
      ++open;
      if (open > best.max_count) {
        best.max_count = open;
        best.witness = x;
      }
    } else {
      --open;
    }
  }
  return best;
}

bool is_angular_inlier(const Rotation& r, const AngularCorrespondence& c) {
  return angle_between(r * c.x, c.y) <= c.epsilon + kAngleTol;
}

std::size_t angular_consensus_size(const Rotation& r,
                                   std::span<const AngularCorrespondence> corrs) {
  return static_cast<std::size_t>(std::count_if(
      corrs.begin(), corrs.end(), [&](const auto& c) { return is_angular_inlier(r, c); }));
}

IndexSet angular_consensus(const Rotation& r, std::span<const AngularCorrespondence> corrs) {
  IndexSet out;
  for (const auto& c : corrs) {
    if (is_angular_inlier(r, c)) out.push_back(c.index);
  }
  return out;
}

SubproblemBound rot_upper_bound(std::size_t k, std::span<const AngularCorrespondence> corrs) {
  if (k >= corrs.size()) throw InputError("rot_upper_bound: k out of range");
  std::vector<std::size_t> members(corrs.size());
  std::iota(members.begin(), members.end(), std::size_t{0});
  std::vector<AngleInterval> scratch;
  return bound_over(k, corrs, members, scratch);
}

RotGoreOutcome gore_rotation(std::span<const AngularCorrespondence> corrs,
                             const RotGoreOptions& options) {
  RotGoreOutcome out;
  const std::size_t n = corrs.size();
  if (n == 0) return out;

  // Positions ordered by original index.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corrs[a].index < corrs[b].index; });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  std::vector<char> alive(n, 1);
  std::vector<char> visited(n, 0);
  std::size_t alive_count = n;
  // Pending positions keyed by rank so iteration follows the original index.
  std::set<std::size_t> pending_ranks;
  for (std::size_t r = 0; r < n; ++r) pending_ranks.insert(r);

  std::size_t l = 0;
  Rotation best;
  if (options.initial_rotation) {
    best = *options.initial_rotation;
    l = angular_consensus_size(best, corrs);
  }

  unsigned threads = 1;
  if (options.parallel) {
    threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  }

  // angle(R x, y) <= t  <=>  (R x . y) sin t - |R x cross y| cos t >= 0 for t in (0, pi).
  std::vector<std::pair<double, double>> cos_sin(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = slackened(corrs[i].epsilon);
    cos_sin[i] = t >= kPi ? std::pair{-2.0, 0.0} : std::pair{std::cos(t), std::sin(t)};
  }
  auto inlier = [&](const Mat3& r, std::size_t i) {
    if (cos_sin[i].first < -1.0) return true;
    const Vec3 rx = r * corrs[i].x;
    return rx.dot(corrs[i].y) * cos_sin[i].second - rx.cross(corrs[i].y).norm() * cos_sin[i].first >=
           0.0;
  };

  std::vector<std::size_t> members;
  std::vector<std::vector<AngleInterval>> scratch(threads);
  std::vector<SubproblemBound> bounds(threads);
  std::vector<std::size_t> batch;

  auto alive_members = [&] {
    members.clear();
    for (std::size_t r = 0; r < n; ++r) {
      if (alive[order[r]]) members.push_back(order[r]);
    }
  };

  while (!pending_ranks.empty()) {
    batch.clear();
    while (batch.size() < threads && !pending_ranks.empty()) {
      batch.push_back(order[*pending_ranks.begin()]);
      pending_ranks.erase(pending_ranks.begin());
    }
    alive_members();
    if (batch.size() == 1) {
      bounds[0] = bound_over(batch[0], corrs, members, scratch[0]);
    } else {
      std::vector<std::jthread> workers;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        workers.emplace_back([&, b] { bounds[b] = bound_over(batch[b], corrs, members, scratch[b]); });
      }
    }

    for (std::size_t b = 0; b < batch.size(); ++b) {
      const std::size_t k = batch[b];
      visited[k] = 1;
      const SubproblemBound& bound = bounds[b];

      // The witness only keeps k inside the widened cap, so pairs within
      // eps_i + 2 eps_k of it are refitted; the refit is kept if it does better.
      Rotation candidate = bound.r_tilde;
      IndexSet consensus_pos;
      auto collect = [&](const Rotation& r) {
        IndexSet pos_set;
        const Mat3& rm = r.matrix();
        for (std::size_t pos = 0; pos < n; ++pos) {
          if (inlier(rm, pos)) pos_set.push_back(pos);
        }
        return pos_set;
      };
      consensus_pos = collect(candidate);
      {
        const double widen = 2.0 * corrs[k].epsilon;
        CorrespondenceSet near;
        for (std::size_t pos = 0; pos < n; ++pos) {
          const double reach = std::min(kPi, slackened(corrs[pos].epsilon) + widen);
          if (angle_between(candidate * corrs[pos].x, corrs[pos].y) <= reach) {
            near.push_back({corrs[pos].x, corrs[pos].y, pos});
          }
        }
        if (near.size() > consensus_pos.size() && near.size() >= 2) {
          try {
            const Rotation refit = fit_rotation_least_squares(near);
            IndexSet refit_pos = collect(refit);
            if (refit_pos.size() > consensus_pos.size()) {
              candidate = refit;
              consensus_pos = std::move(refit_pos);
            }
          } catch (const DegenerateError&) {
          }
        }
      }
      if (consensus_pos.size() > l) {
        l = consensus_pos.size();
        best = candidate;
        std::vector<char> in_consensus(n, 0);
        for (std::size_t pos : consensus_pos) in_consensus[pos] = 1;
        pending_ranks.clear();
        for (std::size_t pos = 0; pos < n; ++pos) {
          if (alive[pos] && !in_consensus[pos] && !visited[pos]) pending_ranks.insert(rank[pos]);
        }
      }
      RotGoreVisit visit{corrs[k].index, bound.p_hat, l, false};
      if (bound.p_hat < l) {
        alive[k] = 0;
        --alive_count;
        visit.removed = true;
      }
      out.per_k_upper_bounds[corrs[k].index] = bound.p_hat;
      out.visits.push_back(visit);
    }

    if (options.stop_below && alive_count < *options.stop_below) {
      out.stopped_early = true;
      break;
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    if (alive[order[r]]) out.surviving.push_back(corrs[order[r]].index);
  }
  out.best_rotation = best;
  out.lower_bound = l;
  return out;
}

}  // namespace gorereg
