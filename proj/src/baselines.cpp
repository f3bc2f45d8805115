#include "gorereg/baselines.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace gorereg {

namespace {

constexpr double kRankTol = 1e-12;
constexpr double kCollinearTol = 1e-9;

// Unbiased draw in [0, bound) that does not depend on the standard library's
// distribution implementation.
std::size_t draw_below(std::mt19937_64& rng, std::size_t bound) {
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % b);
}

bool nearly_parallel(const Vec3& a, const Vec3& b) {
  const double scale = a.norm() * b.norm();
  return scale == 0.0 || a.cross(b).norm() <= kCollinearTol * scale;
}

bool collinear_triplet(const Vec3& a, const Vec3& b, const Vec3& c) {
  return nearly_parallel(b - a, c - a);
}

std::size_t count_consensus(const RigidTransform& t, std::span<const Correspondence> corrs,
                            double xi) {
  const double limit = (xi + kDistTol) * (xi + kDistTol);
  const Mat3& r = t.rotation.matrix();
  std::size_t count = 0;
  for (const auto& c : corrs) {
    if ((r * c.x + t.translation - c.y).squaredNorm() <= limit) ++count;
  }
  return count;
}

}  // namespace

int minimal_sample_size(RansacModel model) { return model == RansacModel::rotation ? 2 : 3; }

std::size_t required_trials(double eta, int m, double rho, std::size_t cap) {
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("required_trials: confidence must be in (0, 1)");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("required_trials: eta must be in [0, 1]");
  const double good = std::pow(1.0 - eta, m);
  if (good >= 1.0) return 1;
  if (good <= 0.0) return cap;
  const double trials = std::ceil(std::log(1.0 - rho) / std::log1p(-good));
  if (!(trials < static_cast<double>(cap))) return cap;
  return std::max<std::size_t>(1, static_cast<std::size_t>(trials));
}

Rotation fit_rotation_least_squares(std::span<const Correspondence> corrs) {
  Mat3 h = Mat3::Zero();
  for (const auto& c : corrs) h += c.x * c.y.transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s(0) > 0.0)) throw DegenerateError("rotation fit: zero cross-covariance");
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if (s(1) <= kRankTol * s(0)) {
    return minimal_geodesic_rotation(u.col(0), v.col(0));
  }
  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Mat3 r = v * d * u.transpose();
  // Re-orthonormalize against accumulated rounding.
  Eigen::JacobiSVD<Mat3> clean(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = clean.matrixU() * clean.matrixV().transpose();
  return Rotation::from_matrix(r);
}

RigidTransform fit_rigid_least_squares(std::span<const Correspondence> corrs) {
  if (corrs.size() < 3) throw DegenerateError("rigid fit: need at least three correspondences");
  Vec3 cx = Vec3::Zero();
  Vec3 cy = Vec3::Zero();
  for (const auto& c : corrs) {
    cx += c.x;
    cy += c.y;
  }
  cx /= static_cast<double>(corrs.size());
  cy /= static_cast<double>(corrs.size());

  Mat3 spread = Mat3::Zero();
  std::vector<Correspondence> centered;
  centered.reserve(corrs.size());
  for (const auto& c : corrs) {
    const Vec3 dx = c.x - cx;
    spread += dx * dx.transpose();
    centered.push_back({dx, c.y - cy, c.index});
  }
  Eigen::JacobiSVD<Mat3> sv(spread);
  const Vec3 s = sv.singularValues();
  if (!(s(0) > 0.0) || s(1) <= kRankTol * s(0)) {
    throw DegenerateError("rigid fit: source points are collinear");
  }
  const Rotation r = fit_rotation_least_squares(centered);
  return {r, cy - r * cx};
}

IndexSet euclidean_consensus(const RigidTransform& t, std::span<const Correspondence> corrs,
                             double xi) {
  const double limit = (xi + kDistTol) * (xi + kDistTol);
  IndexSet out;
  for (const auto& c : corrs) {
    if ((t.apply(c.x) - c.y).squaredNorm() <= limit) out.push_back(c.index);
  }
  return out;
}

RansacResult ransac(std::span<const Correspondence> corrs, double xi, const RansacConfig& cfg) {
  const int m = minimal_sample_size(cfg.model);
  const std::size_t n = corrs.size();
  if (n < static_cast<std::size_t>(m)) throw InputError("ransac: fewer correspondences than the minimal sample");
  if (!(xi >= 0.0)) throw InputError("ransac: xi must be non-negative");
  if (cfg.max_trials == 0) throw InputError("ransac: max_trials must be positive");

  std::mt19937_64 rng(cfg.seed);
  RansacResult out;
  std::size_t best = 0;
  bool have_model = false;
  const std::size_t cap = cfg.max_trials;
  std::size_t needed = cfg.fixed_trials ? cap : required_trials(0.999, m, cfg.confidence, cap);
  const std::size_t max_draws = cap * 10 + 1000;

  std::size_t draws = 0;
  std::array<std::size_t, 3> pick{};
  std::array<Correspondence, 3> sample;
  while (out.trials_used < needed && draws < max_draws) {
    ++draws;
    for (int j = 0; j < m; ++j) {
      bool fresh;
      do {
        pick[j] = draw_below(rng, n);
        fresh = std::find(pick.begin(), pick.begin() + j, pick[j]) == pick.begin() + j;
      } while (!fresh);
      sample[j] = corrs[pick[j]];
    }

    RigidTransform model;
    if (cfg.model == RansacModel::rotation) {
      if (nearly_parallel(sample[0].x, sample[1].x) || nearly_parallel(sample[0].y, sample[1].y)) {
        continue;
      }
      try {
        model.rotation = fit_rotation_least_squares(std::span(sample.data(), 2));
      } catch (const DegenerateError&) {
        continue;
      }
    } else {
      if (collinear_triplet(sample[0].x, sample[1].x, sample[2].x) ||
          collinear_triplet(sample[0].y, sample[1].y, sample[2].y)) {
        continue;
      }
      try {
        model = fit_rigid_least_squares(std::span(sample.data(), 3));
      } catch (const DegenerateError&) {
        continue;
      }
    }
    ++out.trials_used;

    const std::size_t count = count_consensus(model, corrs, xi);
    if (!have_model || count > best) {
      have_model = true;
      best = count;
      out.model = model;
      out.best_trial = out.trials_used;
      if (!cfg.fixed_trials) {
        const double eta_hat = 1.0 - static_cast<double>(best) / static_cast<double>(n);
        needed = required_trials(eta_hat, m, cfg.confidence, cap);
      }
    }
  }
  out.consensus = euclidean_consensus(out.model, corrs, xi);
  return out;
}

}  // namespace gorereg
