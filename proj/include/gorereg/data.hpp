#pragma once

#include "gorereg/correspondence.hpp"
#include "gorereg/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace gorereg {

enum class ProblemMode { rotation, rigid };

enum class NoiseModel {
  on_sphere,  // perturbations of length exactly xi
  in_ball,    // perturbations uniform in the ball of radius xi
};

struct SyntheticSpec {
  std::size_t n = 100;
  double eta = 0.0;
  double xi = 0.5;
  double ball_radius = 100.0;
  ProblemMode mode = ProblemMode::rotation;
  NoiseModel noise = NoiseModel::on_sphere;
  std::uint64_t seed = 0;
};

struct Instance {
  CorrespondenceSet correspondences;
  std::optional<RigidTransform> ground_truth;
  std::optional<IndexSet> planted_inliers;  // ascending
  std::optional<double> xi;
};

/// Points uniform in the solid ball, Y = R0 X (+ t0 in rigid mode) plus noise,
/// and floor(eta n) pairs replaced by independently rotated copies of x_i.
/// Outliers that happen to agree with the ground truth are redrawn.
Instance generate(const SyntheticSpec& spec);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Fails with std::runtime_error when the file cannot be opened and with
/// ParseError on malformed content.
Instance read_correspondences(const std::filesystem::path& path);
Instance parse_correspondences(const std::string& text);

void write_correspondences(const std::filesystem::path& path, const Instance& instance);
std::string format_correspondences(const Instance& instance);

/// Shortest text that round-trips, using 17 significant digits.
std::string format_double(double v);

struct MetricsReport {
  std::size_t consensus_size = 0;
  std::size_t surviving_size = 0;
  std::optional<double> rmse;
  std::optional<double> angular_error_deg;
  std::optional<double> translation_error;
  std::optional<double> precision;
  std::optional<double> recall;
  double runtime = 0.0;
};

/// Metrics of an estimate against the instance's ground truth. `consensus`
/// and `surviving` hold original indices. Fields needing data the instance
/// lacks are left empty.
MetricsReport evaluate(const RigidTransform& estimate, const IndexSet& consensus,
                       const IndexSet& surviving, const Instance& instance, double elapsed);

}  // namespace gorereg
