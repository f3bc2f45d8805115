#include "gorereg/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>
#include <vector>

namespace gorereg {

namespace {

constexpr int kMaxOutlierRedraws = 1000;

// Sampling built only from integer draws, +-*/ and sqrt so that instances are
// reproducible across standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }

  std::size_t below(std::size_t bound) {
    const std::uint64_t b = bound;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % b;
    std::uint64_t v;
    do {
      v = rng_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % b);
  }

  Vec3 in_unit_ball() {
    for (;;) {
      const Vec3 p(symmetric(), symmetric(), symmetric());
      if (p.squaredNorm() <= 1.0) return p;
    }
  }

  Vec3 direction() {
    for (;;) {
      const Vec3 p(symmetric(), symmetric(), symmetric());
      const double s = p.squaredNorm();
      if (s <= 1.0 && s > 1e-12) return p / std::sqrt(s);
    }
  }

  Rotation rotation() {
    for (;;) {
      const double w = symmetric(), x = symmetric(), y = symmetric(), z = symmetric();
      const double s = w * w + x * x + y * y + z * z;
      if (s > 1.0 || s < 1e-12) continue;
      const double inv = 1.0 / std::sqrt(s);
      const Eigen::Quaterniond q(w * inv, x * inv, y * inv, z * inv);
      return Rotation::from_matrix(q.toRotationMatrix());
    }
  }

 private:
  std::mt19937_64 rng_;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw ParseError(line, "invalid number '" + std::string(token) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view token, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "invalid index '" + std::string(token) + "'");
  }
  return v;
}

// Parses "key=v1 v2 ..." groups of a truth comment.
RigidTransform parse_truth(std::string_view body, std::size_t line) {
  const auto r_pos = body.find("R=");
  const auto t_pos = body.find("t=");
  if (r_pos == std::string_view::npos || t_pos == std::string_view::npos || t_pos < r_pos) {
    throw ParseError(line, "truth comment needs R=<9 values> t=<3 values>");
  }
  const auto r_tokens = split_ws(body.substr(r_pos + 2, t_pos - r_pos - 2));
  const auto t_tokens = split_ws(body.substr(t_pos + 2));
  if (r_tokens.size() != 9 || t_tokens.size() != 3) {
    throw ParseError(line, "truth comment needs R=<9 values> t=<3 values>");
  }
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = parse_double(r_tokens[i], line);
  Vec3 t;
  for (int i = 0; i < 3; ++i) t(i) = parse_double(t_tokens[i], line);
  try {
    return {Rotation::from_matrix(m), t};
  } catch (const InputError&) {
    throw ParseError(line, "truth rotation is not orthonormal");
  }
}

void parse_comment(std::string_view body, std::size_t line, Instance& inst) {
  body = trim(body);
  if (body.starts_with("xi=")) {
    const double xi = parse_double(trim(body.substr(3)), line);
    if (!(xi > 0.0)) throw ParseError(line, "xi must be positive");
    inst.xi = xi;
  } else if (body.starts_with("truth")) {
    inst.ground_truth = parse_truth(body.substr(5), line);
  } else if (body.starts_with("inliers=")) {
    IndexSet idx;
    std::string_view rest = trim(body.substr(8));
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      idx.push_back(parse_index(trim(rest.substr(0, comma)), line));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    std::sort(idx.begin(), idx.end());
    inst.planted_inliers = std::move(idx);
  }
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

Instance generate(const SyntheticSpec& spec) {
  if (spec.n == 0) throw InputError("generate: n must be at least 1");
  if (!(spec.eta >= 0.0 && spec.eta < 1.0)) throw InputError("generate: eta must be in [0, 1)");
  if (!(spec.xi > 0.0)) throw InputError("generate: xi must be positive");
  if (!(spec.ball_radius > 0.0)) throw InputError("generate: ball_radius must be positive");

  Sampler s(spec.seed);
  const Rotation r0 = s.rotation();
  Vec3 t0 = Vec3::Zero();
  if (spec.mode == ProblemMode::rigid) {
    const double half = spec.ball_radius / 2.0;
    t0 = Vec3(half * s.symmetric(), half * s.symmetric(), half * s.symmetric());
  }
  const RigidTransform truth{r0, t0};

  const auto n_out = static_cast<std::size_t>(std::floor(spec.eta * static_cast<double>(spec.n)));
  std::vector<std::size_t> perm(spec.n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_out; ++i) std::swap(perm[i], perm[i + s.below(spec.n - i)]);
  std::vector<char> is_outlier(spec.n, 0);
  for (std::size_t i = 0; i < n_out; ++i) is_outlier[perm[i]] = 1;

  const double agree = (spec.xi + kDistTol) * (spec.xi + kDistTol);
  Instance inst;
  inst.xi = spec.xi;
  inst.ground_truth = truth;
  inst.correspondences.resize(spec.n);
  IndexSet inliers;
  for (std::size_t i = 0; i < spec.n; ++i) {
    Correspondence& c = inst.correspondences[i];
    c.index = i;
    c.x = spec.ball_radius * s.in_unit_ball();
    if (!is_outlier[i]) {
      const Vec3 noise =
          spec.xi * (spec.noise == NoiseModel::on_sphere ? s.direction() : s.in_unit_ball());
      c.y = truth.apply(c.x) + noise;
      inliers.push_back(i);
      continue;
    }
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxOutlierRedraws) {
        c.x = spec.ball_radius * s.in_unit_ball();
        attempt = 0;
      }
      c.y = s.rotation() * c.x + t0;
      if ((truth.apply(c.x) - c.y).squaredNorm() > agree) break;
    }
  }
  inst.planted_inliers = std::move(inliers);
  return inst;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string format_correspondences(const Instance& inst) {
  std::ostringstream os;
  if (inst.xi) os << "# xi=" << format_double(*inst.xi) << '\n';
  for (const auto& c : inst.correspondences) {
    os << format_double(c.x(0)) << ' ' << format_double(c.x(1)) << ' ' << format_double(c.x(2))
       << ' ' << format_double(c.y(0)) << ' ' << format_double(c.y(1)) << ' '
       << format_double(c.y(2)) << '\n';
  }
  if (inst.ground_truth) {
    const Mat3& m = inst.ground_truth->rotation.matrix();
    os << "# truth R=";
    for (int i = 0; i < 9; ++i) os << (i ? " " : "") << format_double(m(i / 3, i % 3));
    const Vec3& t = inst.ground_truth->translation;
    os << " t=" << format_double(t(0)) << ' ' << format_double(t(1)) << ' '
       << format_double(t(2)) << '\n';
  }
  if (inst.planted_inliers) {
    os << "# inliers=";
    for (std::size_t i = 0; i < inst.planted_inliers->size(); ++i) {
      os << (i ? "," : "") << (*inst.planted_inliers)[i];
    }
    os << '\n';
  }
  return os.str();
}

void write_correspondences(const std::filesystem::path& path, const Instance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << format_correspondences(inst);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Instance parse_correspondences(const std::string& text) {
  Instance inst;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const std::string_view raw(text.data() + pos,
                               (end == std::string::npos ? text.size() : end) - pos);
    ++line_no;
    pos = end == std::string::npos ? text.size() + 1 : end + 1;

    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_comment(line.substr(1), line_no, inst);
      continue;
    }
    const auto tokens = split_ws(line);
    if (tokens.size() != 6) {
      throw ParseError(line_no, "expected 6 values, found " + std::to_string(tokens.size()));
    }
    Correspondence c;
    for (int i = 0; i < 3; ++i) c.x(i) = parse_double(tokens[i], line_no);
    for (int i = 0; i < 3; ++i) c.y(i) = parse_double(tokens[3 + i], line_no);
    c.index = inst.correspondences.size();
    inst.correspondences.push_back(c);
  }
  if (inst.planted_inliers) {
    for (std::size_t i : *inst.planted_inliers) {
      if (i >= inst.correspondences.size()) {
        throw ParseError(line_no, "inlier index " + std::to_string(i) + " out of range");
      }
    }
  }
  return inst;
}

Instance read_correspondences(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_correspondences(ss.str());
}

MetricsReport evaluate(const RigidTransform& estimate, const IndexSet& consensus,
                       const IndexSet& surviving, const Instance& inst, double elapsed) {
  MetricsReport m;
  m.consensus_size = consensus.size();
  m.surviving_size = surviving.size();
  m.runtime = elapsed;

  if (inst.ground_truth) {
    const RigidTransform& gt = *inst.ground_truth;
    m.angular_error_deg = rotation_distance(estimate.rotation, gt.rotation) * 180.0 / kPi;
    m.translation_error = (estimate.translation - gt.translation).norm();
    if (!consensus.empty()) {
      double sum = 0.0;
      for (std::size_t idx : consensus) {
        const Vec3& x = inst.correspondences.at(idx).x;
        sum += (estimate.apply(x) - gt.apply(x)).squaredNorm();
      }
      m.rmse = std::sqrt(sum / static_cast<double>(consensus.size()));
    }
  }
  if (inst.planted_inliers) {
    const IndexSet& truth = *inst.planted_inliers;
    IndexSet kept(surviving);
    std::sort(kept.begin(), kept.end());
    IndexSet both;
    std::set_intersection(kept.begin(), kept.end(), truth.begin(), truth.end(),
                          std::back_inserter(both));
    if (!kept.empty()) m.precision = static_cast<double>(both.size()) / kept.size();
    if (!truth.empty()) m.recall = static_cast<double>(both.size()) / truth.size();
  }
  return m;
}

}  // namespace gorereg
