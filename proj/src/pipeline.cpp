#include "gorereg/pipeline.hpp"

#include "gorereg/baselines.hpp"
#include "gorereg/bnb.hpp"
#include "gorereg/rigid_gore.hpp"
#include "gorereg/rot_gore.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <utility>

namespace gorereg {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethodNames{{
    {Method::gore, "gore"},
    {Method::ransac, "ransac"},
    {Method::bnb, "bnb"},
    {Method::gore_ransac, "gore+ransac"},
    {Method::gore_bnb, "gore+bnb"},
    {Method::rgore_bnb, "rgore+bnb"},
    {Method::gore_abnb, "gore+abnb"},
}};

struct Estimate {
  RigidTransform transform;
  IndexSet surviving;
  std::size_t lower_bound = 0;
  std::optional<bool> optimal;
};

CorrespondenceSet subset_by_index(const CorrespondenceSet& all, const IndexSet& indices) {
  CorrespondenceSet out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    const auto it = std::find_if(all.begin(), all.end(),
                                 [&](const Correspondence& c) { return c.index == idx; });
    if (it != all.end()) out.push_back(*it);
  }
  return out;
}

std::vector<AngularCorrespondence> subset_by_index(const std::vector<AngularCorrespondence>& all,
                                                   const IndexSet& indices) {
  std::vector<AngularCorrespondence> out;
  out.reserve(indices.size());
  std::size_t j = 0;
  for (const auto& c : all) {
    while (j < indices.size() && indices[j] < c.index) ++j;
    if (j < indices.size() && indices[j] == c.index) out.push_back(c);
  }
  return out;
}

RansacConfig ransac_config(const PipelineOptions& o, RansacModel model) {
  RansacConfig cfg;
  cfg.confidence = o.confidence;
  cfg.model = model;
  cfg.max_trials = o.max_trials;
  cfg.seed = o.seed;
  return cfg;
}

IndexSet all_indices(const CorrespondenceSet& corrs) {
  IndexSet out;
  out.reserve(corrs.size());
  for (const auto& c : corrs) out.push_back(c.index);
  std::sort(out.begin(), out.end());
  return out;
}

Rotation bnb_refine(const std::vector<AngularCorrespondence>& corrs, const Rotation& fallback,
                    std::size_t l, const PipelineOptions& o, std::optional<bool>& optimal) {
  BnbOptions bo;
  bo.init_lower = l;
  bo.time_budget = o.timeout;
  const BnbResult r = bnb_rotation_consensus(corrs, bo);
  optimal = r.optimal;
  return r.best_consensus > l ? r.best_rotation : fallback;
}

Estimate run_rotation(const Instance& inst, const PipelineOptions& o, double xi,
                      const std::vector<AngularCorrespondence>& angular) {
  Estimate e;
  const CorrespondenceSet& corrs = inst.correspondences;
  switch (o.method) {
    case Method::ransac: {
      const RansacResult r = ransac(corrs, xi, ransac_config(o, RansacModel::rotation));
      e.transform = r.model;
      e.surviving = all_indices(corrs);
      e.lower_bound = angular_consensus_size(r.model.rotation, angular);
      return e;
    }
    case Method::bnb: {
      BnbOptions bo;
      bo.time_budget = o.timeout;
      const BnbResult r = bnb_rotation_consensus(angular, bo);
      e.transform.rotation = r.best_rotation;
      e.surviving = all_indices(corrs);
      e.lower_bound = r.best_consensus;
      e.optimal = r.optimal;
      return e;
    }
    default:
      break;
  }

  RotGoreOptions go;
  if (o.method == Method::rgore_bnb && corrs.size() >= 2) {
    go.initial_rotation = ransac(corrs, xi, ransac_config(o, RansacModel::rotation)).model.rotation;
  }
  const RotGoreOutcome g = gore_rotation(angular, go);
  e.surviving = g.surviving;
  e.lower_bound = g.lower_bound;
  e.transform.rotation = g.best_rotation;

  switch (o.method) {
    case Method::gore_ransac: {
      const CorrespondenceSet kept = subset_by_index(corrs, g.surviving);
      if (kept.size() >= 2) {
        const RansacResult r = ransac(kept, xi, ransac_config(o, RansacModel::rotation));
        e.transform = r.model;
      }
      break;
    }
    case Method::gore_bnb:
    case Method::rgore_bnb:
      e.transform.rotation = bnb_refine(subset_by_index(angular, g.surviving), g.best_rotation,
                                        g.lower_bound, o, e.optimal);
      break;
    case Method::gore_abnb:
      e.transform.rotation = bnb_refine(angular, g.best_rotation, g.lower_bound, o, e.optimal);
      break;
    default:
      break;
  }
  if (e.optimal) e.lower_bound = angular_consensus_size(e.transform.rotation, angular);
  return e;
}

Estimate run_rigid(const Instance& inst, const PipelineOptions& o, double xi) {
  Estimate e;
  const CorrespondenceSet& corrs = inst.correspondences;
  if (o.method == Method::ransac) {
    const RansacResult r = ransac(corrs, xi, ransac_config(o, RansacModel::rigid));
    e.transform = r.model;
    e.surviving = all_indices(corrs);
    e.lower_bound = r.consensus.size();
    return e;
  }
  RigidGoreConfig cfg;
  cfg.xi = xi;
  cfg.use_bnb = o.use_bnb;
  cfg.bnb_time_budget = o.timeout;
  const RigidGoreOutcome g = gore_rigid(corrs, cfg);
  e.transform = g.best_transform;
  e.surviving = g.surviving;
  e.lower_bound = g.lower_bound;
  if (o.method == Method::gore_ransac) {
    const CorrespondenceSet kept = subset_by_index(corrs, g.surviving);
    if (kept.size() >= 3) e.transform = ransac(kept, xi, ransac_config(o, RansacModel::rigid)).model;
  }
  return e;
}

}  // namespace

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [m, s] : kMethodNames) {
    if (s == name) return m;
  }
  return std::nullopt;
}

std::string_view method_name(Method m) {
  for (const auto& [mm, s] : kMethodNames) {
    if (mm == m) return s;
  }
  return "unknown";
}

std::optional<ProblemMode> parse_problem(std::string_view name) {
  if (name == "rotation") return ProblemMode::rotation;
  if (name == "rigid") return ProblemMode::rigid;
  return std::nullopt;
}

std::string_view problem_name(ProblemMode p) {
  return p == ProblemMode::rotation ? "rotation" : "rigid";
}

bool method_supports(Method m, ProblemMode p) {
  if (p == ProblemMode::rotation) return true;
  return m == Method::gore || m == Method::ransac || m == Method::gore_ransac;
}

double effective_xi(const Instance& inst, const PipelineOptions& o) {
  const std::optional<double> xi = o.xi ? o.xi : inst.xi;
  if (!xi) throw InputError("no inlier threshold: the input has no xi header and none was given");
  if (!(*xi > 0.0)) throw InputError("xi must be positive");
  return *xi;
}

RunRecord run_pipeline(const Instance& inst, const PipelineOptions& o) {
  if (!method_supports(o.method, o.problem)) {
    throw InputError("method '" + std::string(method_name(o.method)) +
                     "' needs a 6-DoF BnB and is only available for --problem rotation");
  }
  const double xi = effective_xi(inst, o);
  if (inst.correspondences.empty()) throw InputError("input has no correspondences");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  RunRecord rec;
  rec.method = o.method;
  rec.n = inst.correspondences.size();
  rec.xi = xi;

  Estimate e;
  if (o.problem == ProblemMode::rotation) {
    const NormSplit split = norm_prefilter(inst.correspondences, xi);
    CorrespondenceSet kept;
    kept.reserve(split.kept.size());
    for (std::size_t pos : split.kept) kept.push_back(inst.correspondences[pos]);
    std::vector<AngularCorrespondence> angular = to_angular(kept, xi);
    std::sort(angular.begin(), angular.end(),
              [](const auto& a, const auto& b) { return a.index < b.index; });
    e = run_rotation(inst, o, xi, angular);
    rec.consensus = angular_consensus(e.transform.rotation, angular);
  } else {
    e = run_rigid(inst, o, xi);
    rec.consensus = consensus_rigid(e.transform, inst.correspondences, xi);
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  std::sort(rec.consensus.begin(), rec.consensus.end());

  rec.transform = e.transform;
  rec.surviving = std::move(e.surviving);
  rec.lower_bound = e.lower_bound;
  rec.optimal = e.optimal;
  rec.metrics = evaluate(rec.transform, rec.consensus, rec.surviving, inst, elapsed);
  return rec;
}

}  // namespace gorereg
