#pragma once

// Registration pipelines combining GORE, RANSAC and BnB.

#include "gorereg/data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gorereg {

enum class Method { gore, ransac, bnb, gore_ransac, gore_bnb, rgore_bnb, gore_abnb };

std::optional<Method> parse_method(std::string_view name);
std::string_view method_name(Method m);
std::optional<ProblemMode> parse_problem(std::string_view name);
std::string_view problem_name(ProblemMode p);

/// False for methods that need a 6-DoF BnB, which is not provided.
bool method_supports(Method m, ProblemMode p);

struct PipelineOptions {
  Method method = Method::gore;
  ProblemMode problem = ProblemMode::rotation;
  /// Overrides the threshold stored with the instance.
  std::optional<double> xi;
  std::uint64_t seed = 0;
  /// Budget in seconds for each BnB search of the pipeline.
  std::optional<double> timeout;
  bool use_bnb = true;
  double confidence = 0.99;
  std::size_t max_trials = 1'000'000;
};

struct RunRecord {
  Method method = Method::gore;
  std::size_t n = 0;
  double xi = 0.0;
  RigidTransform transform;
  IndexSet consensus;  // original indices
  IndexSet surviving;  // original indices; all of them for non-GORE methods
  std::size_t lower_bound = 0;
  /// Empty for methods that make no optimality claim.
  std::optional<bool> optimal;
  MetricsReport metrics;
};

/// Threshold in effect: the override if set, else the instance's. Throws
/// InputError when neither is available.
double effective_xi(const Instance& instance, const PipelineOptions& options);

/// Runs one pipeline. Consensus is measured under the inlier test of the
/// problem: angular for rotation (after normalization), Euclidean for rigid.
RunRecord run_pipeline(const Instance& instance, const PipelineOptions& options);

}  // namespace gorereg
