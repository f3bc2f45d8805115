// gorereg: generate instances, run registration pipelines, benchmark them.

#include "gorereg/gorereg.h"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string count(double v) { return std::to_string(static_cast<unsigned long long>(v)); }

int exit_code_for(gorereg_status s) {
  return s == GOREREG_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
}

int report_failure(gorereg_status s) {
  std::cerr << "gorereg: " << gorereg_status_string(s) << ": " << gorereg_last_error() << '\n';
  return exit_code_for(s);
}

struct RecordFields {
  std::string method;
  std::map<gorereg_field, std::optional<double>> values;
};

RecordFields collect(const gorereg_report* r) {
  RecordFields f;
  f.method = gorereg_method_to_string(gorereg_report_method(r));
  for (int i = GOREREG_FIELD_CONSENSUS; i <= GOREREG_FIELD_XI; ++i) {
    double v = 0.0;
    const auto field = static_cast<gorereg_field>(i);
    f.values[field] = gorereg_report_field(r, field, &v) ? std::optional<double>(v) : std::nullopt;
  }
  return f;
}

std::string field_text(const RecordFields& f, gorereg_field field) {
  const auto& v = f.values.at(field);
  if (!v) return "na";
  switch (field) {
    case GOREREG_FIELD_CONSENSUS:
    case GOREREG_FIELD_SURVIVING:
    case GOREREG_FIELD_LOWER_BOUND:
    case GOREREG_FIELD_N:
      return count(*v);
    case GOREREG_FIELD_OPTIMAL:
      return *v != 0.0 ? "true" : "false";
    default:
      return num(*v);
  }
}

void print_record(std::ostream& os, const RecordFields& f) {
  os << "method=" << f.method << '\n';
  os << "n=" << field_text(f, GOREREG_FIELD_N) << '\n';
  os << "xi=" << field_text(f, GOREREG_FIELD_XI) << '\n';
  os << "consensus=" << field_text(f, GOREREG_FIELD_CONSENSUS) << '\n';
  os << "surviving=" << field_text(f, GOREREG_FIELD_SURVIVING) << '\n';
  os << "lower_bound=" << field_text(f, GOREREG_FIELD_LOWER_BOUND) << '\n';
  os << "rmse=" << field_text(f, GOREREG_FIELD_RMSE) << '\n';
  os << "ang_err_deg=" << field_text(f, GOREREG_FIELD_ANG_ERR_DEG) << '\n';
  os << "tr_err=" << field_text(f, GOREREG_FIELD_TR_ERR) << '\n';
  os << "precision=" << field_text(f, GOREREG_FIELD_PRECISION) << '\n';
  os << "recall=" << field_text(f, GOREREG_FIELD_RECALL) << '\n';
  os << "time_s=" << field_text(f, GOREREG_FIELD_TIME_S) << '\n';
  os << "optimal=" << field_text(f, GOREREG_FIELD_OPTIMAL) << '\n';
}

struct RunFlags {
  std::string method = "gore";
  std::string problem = "rotation";
  std::optional<double> xi;
  std::uint64_t seed = 0;
  std::optional<double> timeout;
  std::string use_bnb = "on";
  double confidence = 0.99;
  std::size_t max_trials = 1'000'000;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool single_method) {
  if (single_method) {
    cmd->add_option("--method", f.method, "gore, ransac, bnb, gore+ransac, gore+bnb, rgore+bnb, gore+abnb")
        ->capture_default_str();
  }
  cmd->add_option("--problem", f.problem, "rotation or rigid")
      ->check(CLI::IsMember({"rotation", "rigid"}))
      ->capture_default_str();
  cmd->add_option("--xi", f.xi, "inlier threshold; overrides the file header")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--timeout", f.timeout, "seconds per BnB search")->check(CLI::PositiveNumber);
  cmd->add_option("--use-bnb", f.use_bnb, "BnB step of rigid GORE")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_option("--confidence", f.confidence, "RANSAC confidence")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--max-trials", f.max_trials, "RANSAC trial cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// Fills everything except the method; returns a non-zero exit code on error.
int build_options(const RunFlags& f, gorereg_run_options& o) {
  o = gorereg_run_options_default();
  gorereg_status s = gorereg_mode_from_string(f.problem.c_str(), &o.problem);
  if (s != GOREREG_OK) return report_failure(s);
  if (f.xi) o.xi = *f.xi;
  o.seed = f.seed;
  if (f.timeout) o.timeout = *f.timeout;
  o.use_bnb = f.use_bnb == "on";
  if (!(f.confidence > 0.0 && f.confidence < 1.0)) {
    std::cerr << "gorereg: --confidence must be in (0, 1)\n";
    return kExitUsage;
  }
  o.confidence = f.confidence;
  o.max_trials = f.max_trials;
  return kExitOk;
}

struct GenFlags {
  std::string mode = "rotation";
  std::size_t n = 100;
  double eta = 0.0;
  std::uint64_t seed = 0;
  double xi = 0.5;
  double radius = 100.0;
  std::string noise = "on-sphere";
  std::string out;
};

gorereg_gen_spec gen_spec(const GenFlags& g) {
  gorereg_gen_spec s = gorereg_gen_spec_default();
  s.n = g.n;
  s.eta = g.eta;
  s.seed = g.seed;
  s.xi = g.xi;
  s.ball_radius = g.radius;
  s.mode = g.mode == "rigid" ? GOREREG_RIGID : GOREREG_ROTATION;
  s.noise = g.noise == "in-ball" ? GOREREG_NOISE_IN_BALL : GOREREG_NOISE_ON_SPHERE;
  return s;
}

int cmd_gen(const GenFlags& g) {
  if (!(g.eta >= 0.0 && g.eta < 1.0)) {
    std::cerr << "gorereg: --eta must be in [0, 1)\n";
    return kExitUsage;
  }
  const gorereg_gen_spec spec = gen_spec(g);
  gorereg_instance* inst = nullptr;
  gorereg_status s = gorereg_generate(&spec, &inst);
  if (s != GOREREG_OK) return report_failure(s);
  s = gorereg_write(inst, g.out.c_str());
  gorereg_instance_destroy(inst);
  if (s != GOREREG_OK) return report_failure(s);
  return kExitOk;
}

int cmd_run(const RunFlags& f, const std::string& input) {
  gorereg_run_options o;
  if (int rc = build_options(f, o); rc != kExitOk) return rc;
  gorereg_status s = gorereg_method_from_string(f.method.c_str(), &o.method);
  if (s != GOREREG_OK) return report_failure(s);

  gorereg_instance* inst = nullptr;
  s = gorereg_read(input.c_str(), &inst);
  if (s != GOREREG_OK) return report_failure(s);
  gorereg_report* rep = nullptr;
  s = gorereg_run(inst, &o, &rep);
  gorereg_instance_destroy(inst);
  if (s != GOREREG_OK) return report_failure(s);
  print_record(std::cout, collect(rep));
  gorereg_report_destroy(rep);
  return kExitOk;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct BenchFlags {
  std::vector<std::size_t> ns{100};
  std::vector<double> etas{0.0};
  std::vector<std::string> methods{"gore"};
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  std::string mode;
  std::string noise = "on-sphere";
  double xi = 0.5;
};

struct BenchJob {
  std::size_t n;
  double eta;
  std::string method;
  std::uint64_t seed;
  std::optional<RecordFields> fields;
  std::string error;
};

unsigned bench_threads() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GOREREG_THREADS")) {
    unsigned cap = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && ptr == s.data() + s.size() && cap > 0) threads = std::min(threads, cap);
  }
  return threads;
}

int cmd_bench(const BenchFlags& b, const RunFlags& f) {
  gorereg_run_options base;
  if (int rc = build_options(f, base); rc != kExitOk) return rc;
  for (double eta : b.etas) {
    if (!(eta >= 0.0 && eta < 1.0)) {
      std::cerr << "gorereg: every --eta must be in [0, 1)\n";
      return kExitUsage;
    }
  }
  std::vector<gorereg_method> methods;
  for (const auto& m : b.methods) {
    gorereg_method id;
    const gorereg_status s = gorereg_method_from_string(m.c_str(), &id);
    if (s != GOREREG_OK) return report_failure(s);
    methods.push_back(id);
  }

  std::vector<BenchJob> jobs;
  for (std::size_t n : b.ns) {
    for (double eta : b.etas) {
      for (const auto& m : b.methods) {
        for (std::size_t s = 0; s < b.seeds; ++s) jobs.push_back({n, eta, m, b.seed + s, {}, {}});
      }
    }
  }

  GenFlags g;
  g.mode = b.mode.empty() ? f.problem : b.mode;
  g.noise = b.noise;
  g.xi = b.xi;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      BenchJob& job = jobs[j];
      GenFlags gj = g;
      gj.n = job.n;
      gj.eta = job.eta;
      gj.seed = job.seed;
      const gorereg_gen_spec spec = gen_spec(gj);
      gorereg_instance* inst = nullptr;
      gorereg_status s = gorereg_generate(&spec, &inst);
      if (s != GOREREG_OK) {
        job.error = gorereg_last_error();
        continue;
      }
      gorereg_run_options o = base;
      gorereg_method_from_string(job.method.c_str(), &o.method);
      o.seed = job.seed;
      gorereg_report* rep = nullptr;
      s = gorereg_run(inst, &o, &rep);
      gorereg_instance_destroy(inst);
      if (s != GOREREG_OK) {
        job.error = gorereg_last_error();
        continue;
      }
      job.fields = collect(rep);
      gorereg_report_destroy(rep);
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned t = std::min<std::size_t>(bench_threads(), std::max<std::size_t>(jobs.size(), 1));
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
  }

  bool first = true;
  auto separator = [&] {
    if (!first) std::cout << "---\n";
    first = false;
  };
  for (const auto& job : jobs) {
    separator();
    std::cout << "block=run\n" << "eta=" << num(job.eta) << '\n' << "seed=" << job.seed << '\n';
    if (job.fields) {
      print_record(std::cout, *job.fields);
    } else {
      std::cout << "method=" << job.method << '\n' << "n=" << job.n << '\n'
                << "error=" << job.error << '\n';
    }
  }

  std::size_t i = 0;
  while (i < jobs.size()) {
    std::size_t j = i;
    std::vector<double> cons, time, ang;
    std::size_t failures = 0;
    for (; j < jobs.size() && jobs[j].n == jobs[i].n && jobs[j].eta == jobs[i].eta &&
           jobs[j].method == jobs[i].method;
         ++j) {
      if (!jobs[j].fields) {
        ++failures;
        continue;
      }
      const auto& v = jobs[j].fields->values;
      cons.push_back(*v.at(GOREREG_FIELD_CONSENSUS));
      time.push_back(*v.at(GOREREG_FIELD_TIME_S));
      if (const auto& a = v.at(GOREREG_FIELD_ANG_ERR_DEG)) ang.push_back(*a);
    }
    separator();
    std::cout << "block=median\n"
              << "method=" << jobs[i].method << '\n'
              << "n=" << jobs[i].n << '\n'
              << "eta=" << num(jobs[i].eta) << '\n'
              << "runs=" << (j - i - failures) << '\n'
              << "failures=" << failures << '\n'
              << "consensus=" << (cons.empty() ? "na" : num(median(cons))) << '\n'
              << "time_s=" << (time.empty() ? "na" : num(median(time))) << '\n'
              << "ang_err_deg=" << (ang.empty() ? "na" : num(median(ang))) << '\n';
    i = j;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guaranteed outlier removal for point cloud registration"};
  app.require_subcommand(1);

  GenFlags gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "write a synthetic instance");
  gen_cmd->add_option("--mode", gen.mode, "rotation or rigid")
      ->check(CLI::IsMember({"rotation", "rigid"}))
      ->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "number of correspondences")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--eta", gen.eta, "outlier rate in [0, 1)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  gen_cmd->add_option("--xi", gen.xi, "noise magnitude and inlier threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--radius", gen.radius, "radius of the point ball")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "on-sphere or in-ball")
      ->check(CLI::IsMember({"on-sphere", "in-ball"}))
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output file")->required();

  RunFlags run;
  std::string input;
  CLI::App* run_cmd = app.add_subcommand("run", "run one pipeline on a correspondence file");
  add_run_flags(run_cmd, run, true);
  run_cmd->add_option("--seed", run.seed, "random seed")->capture_default_str();
  run_cmd->add_option("input", input, "correspondence file")->required();

  BenchFlags bench;
  RunFlags bench_run;
  CLI::App* bench_cmd = app.add_subcommand("bench", "run a matrix of synthetic experiments");
  add_run_flags(bench_cmd, bench_run, false);
  bench_cmd->add_option("--n", bench.ns, "instance sizes")->delimiter(',')->check(CLI::PositiveNumber);
  bench_cmd->add_option("--eta", bench.etas, "outlier rates")->delimiter(',');
  bench_cmd->add_option("--methods", bench.methods, "pipelines")->delimiter(',');
  bench_cmd->add_option("--seeds", bench.seeds, "instances per cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "first seed")->capture_default_str();
  bench_cmd->add_option("--mode", bench.mode, "generator mode; defaults to --problem")
      ->check(CLI::IsMember({"rotation", "rigid"}));
  bench_cmd->add_option("--noise", bench.noise, "on-sphere or in-ball")
      ->check(CLI::IsMember({"on-sphere", "in-ball"}))
      ->capture_default_str();
  bench_cmd->add_option("--gen-xi", bench.xi, "generator noise magnitude")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (*gen_cmd) return cmd_gen(gen);
  if (*run_cmd) return cmd_run(run, input);
  return cmd_bench(bench, bench_run);
}
