#pragma once

#include "gorereg/geom.hpp"

#include <cstddef>
#include <vector>

namespace gorereg {

/// A putative match x -> y in scene units. `index` is the identity of the
/// pair in the original input and is preserved by every filtering step.
struct Correspondence {
  Vec3 x = Vec3::Zero();
  Vec3 y = Vec3::Zero();
  std::size_t index = 0;
};

using CorrespondenceSet = std::vector<Correspondence>;

/// Unit-norm match with its own angular inlier threshold (radians).
struct AngularCorrespondence {
  Vec3 x = Vec3::UnitZ();
  Vec3 y = Vec3::UnitZ();
  double epsilon = 0.0;
  std::size_t index = 0;
};

using IndexSet = std::vector<std::size_t>;

}  // namespace gorereg
