#include "gorereg/gorereg.h"

#include "gorereg/data.hpp"
#include "gorereg/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <new>
#include <string>

struct gorereg_instance {
  gorereg::Instance inst;
};

struct gorereg_report {
  gorereg::RunRecord rec;
};

namespace {

thread_local std::string g_last_error;

gorereg_status fail(gorereg_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
gorereg_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const gorereg::ParseError& e) {
    return fail(GOREREG_PARSE_ERROR, e.what());
  } catch (const gorereg::InputError& e) {
    return fail(GOREREG_INVALID_ARGUMENT, e.what());
  } catch (const gorereg::DegenerateError& e) {
    return fail(GOREREG_DEGENERATE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GOREREG_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(GOREREG_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(GOREREG_INTERNAL_ERROR, "unknown error");
  }
}

gorereg::ProblemMode to_mode(gorereg_mode m) {
  return m == GOREREG_RIGID ? gorereg::ProblemMode::rigid : gorereg::ProblemMode::rotation;
}

}  // namespace

extern "C" {

gorereg_gen_spec gorereg_gen_spec_default(void) {
  const gorereg::SyntheticSpec d;
  return {d.n, d.eta, d.xi, d.ball_radius, GOREREG_ROTATION, GOREREG_NOISE_ON_SPHERE, d.seed};
}

gorereg_run_options gorereg_run_options_default(void) {
  const gorereg::PipelineOptions d;
  return {GOREREG_METHOD_GORE, GOREREG_ROTATION, 0.0,          d.seed,
          0.0,                 d.use_bnb ? 1 : 0, d.confidence, d.max_trials};
}

gorereg_status gorereg_generate(const gorereg_gen_spec* spec, gorereg_instance** out) {
  if (!spec || !out) return fail(GOREREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    gorereg::SyntheticSpec s;
    s.n = spec->n;
    s.eta = spec->eta;
    s.xi = spec->xi;
    s.ball_radius = spec->ball_radius;
    s.mode = to_mode(spec->mode);
    s.noise = spec->noise == GOREREG_NOISE_IN_BALL ? gorereg::NoiseModel::in_ball
                                                   : gorereg::NoiseModel::on_sphere;
    s.seed = spec->seed;
    *out = new gorereg_instance{gorereg::generate(s)};
    return GOREREG_OK;
  });
}

gorereg_status gorereg_read(const char* path, gorereg_instance** out) {
  if (!path || !out) return fail(GOREREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    gorereg::Instance inst;
    try {
      inst = gorereg::read_correspondences(path);
    } catch (const gorereg::ParseError&) {
      throw;
    } catch (const std::runtime_error& e) {
      return fail(GOREREG_IO_ERROR, e.what());
    }
    *out = new gorereg_instance{std::move(inst)};
    return GOREREG_OK;
  });
}

gorereg_status gorereg_write(const gorereg_instance* inst, const char* path) {
  if (!inst || !path) return fail(GOREREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    try {
      gorereg::write_correspondences(path, inst->inst);
    } catch (const std::runtime_error& e) {
      return fail(GOREREG_IO_ERROR, e.what());
    }
    return GOREREG_OK;
  });
}

gorereg_status gorereg_instance_create(const double* x, const double* y, size_t n, double xi,
                                       gorereg_instance** out) {
  if (!out || (n > 0 && (!x || !y))) return fail(GOREREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    gorereg::Instance inst;
    inst.correspondences.resize(n);
    for (size_t i = 0; i < n; ++i) {
      auto& c = inst.correspondences[i];
      c.x = gorereg::Vec3(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
      c.y = gorereg::Vec3(y[3 * i], y[3 * i + 1], y[3 * i + 2]);
      c.index = i;
      if (!c.x.allFinite() || !c.y.allFinite()) {
        return fail(GOREREG_INVALID_ARGUMENT, "non-finite coordinate in row " + std::to_string(i));
      }
    }
    if (xi > 0.0) inst.xi = xi;
    *out = new gorereg_instance{std::move(inst)};
    return GOREREG_OK;
  });
}

void gorereg_instance_destroy(gorereg_instance* inst) { delete inst; }

size_t gorereg_instance_size(const gorereg_instance* inst) {
  return inst ? inst->inst.correspondences.size() : 0;
}

double gorereg_instance_xi(const gorereg_instance* inst) {
  return inst && inst->inst.xi ? *inst->inst.xi : 0.0;
}

int gorereg_instance_has_truth(const gorereg_instance* inst) {
  return inst && inst->inst.ground_truth ? 1 : 0;
}

gorereg_status gorereg_method_from_string(const char* name, gorereg_method* out) {
  if (!name || !out) return fail(GOREREG_INVALID_ARGUMENT, "null argument");
  const auto m = gorereg::parse_method(name);
  if (!m) return fail(GOREREG_INVALID_ARGUMENT, std::string("unknown method '") + name + "'");
  *out = static_cast<gorereg_method>(*m);
  return GOREREG_OK;
}

const char* gorereg_method_to_string(gorereg_method method) {
  if (method < GOREREG_METHOD_GORE || method > GOREREG_METHOD_GORE_ABNB) return "unknown";
  return gorereg::method_name(static_cast<gorereg::Method>(method)).data();
}

gorereg_status gorereg_mode_from_string(const char* name, gorereg_mode* out) {
  if (!name || !out) return fail(GOREREG_INVALID_ARGUMENT, "null argument");
  const auto p = gorereg::parse_problem(name);
  if (!p) return fail(GOREREG_INVALID_ARGUMENT, std::string("unknown problem '") + name + "'");
  *out = *p == gorereg::ProblemMode::rigid ? GOREREG_RIGID : GOREREG_ROTATION;
  return GOREREG_OK;
}

gorereg_status gorereg_run(const gorereg_instance* inst, const gorereg_run_options* options,
                           gorereg_report** out) {
  if (!inst || !options || !out) return fail(GOREREG_INVALID_ARGUMENT, "null argument");
  if (options->method < GOREREG_METHOD_GORE || options->method > GOREREG_METHOD_GORE_ABNB) {
    return fail(GOREREG_INVALID_ARGUMENT, "unknown method");
  }
  return guarded([&] {
    gorereg::PipelineOptions o;
    o.method = static_cast<gorereg::Method>(options->method);
    o.problem = to_mode(options->problem);
    if (options->xi > 0.0) o.xi = options->xi;
    o.seed = options->seed;
    if (options->timeout > 0.0) o.timeout = options->timeout;
    o.use_bnb = options->use_bnb != 0;
    o.confidence = options->confidence;
    o.max_trials = options->max_trials;
    *out = new gorereg_report{gorereg::run_pipeline(inst->inst, o)};
    return GOREREG_OK;
  });
}

void gorereg_report_destroy(gorereg_report* report) { delete report; }

gorereg_method gorereg_report_method(const gorereg_report* report) {
  return report ? static_cast<gorereg_method>(report->rec.method) : GOREREG_METHOD_GORE;
}

int gorereg_report_field(const gorereg_report* report, gorereg_field field, double* value) {
  if (!report || !value) return 0;
  const gorereg::RunRecord& r = report->rec;
  const gorereg::MetricsReport& m = r.metrics;
  auto put = [&](double v) {
    *value = v;
    return 1;
  };
  auto put_opt = [&](const std::optional<double>& v) { return v ? put(*v) : 0; };
  switch (field) {
    case GOREREG_FIELD_CONSENSUS: return put(static_cast<double>(m.consensus_size));
    case GOREREG_FIELD_SURVIVING: return put(static_cast<double>(m.surviving_size));
    case GOREREG_FIELD_LOWER_BOUND: return put(static_cast<double>(r.lower_bound));
    case GOREREG_FIELD_RMSE: return put_opt(m.rmse);
    case GOREREG_FIELD_ANG_ERR_DEG: return put_opt(m.angular_error_deg);
    case GOREREG_FIELD_TR_ERR: return put_opt(m.translation_error);
    case GOREREG_FIELD_PRECISION: return put_opt(m.precision);
    case GOREREG_FIELD_RECALL: return put_opt(m.recall);
    case GOREREG_FIELD_TIME_S: return put(m.runtime);
    case GOREREG_FIELD_OPTIMAL: return r.optimal ? put(*r.optimal ? 1.0 : 0.0) : 0;
    case GOREREG_FIELD_N: return put(static_cast<double>(r.n));
    case GOREREG_FIELD_XI: return put(r.xi);
  }
  return 0;
}

size_t gorereg_report_surviving(const gorereg_report* report, size_t* indices, size_t capacity) {
  if (!report) return 0;
  const auto& s = report->rec.surviving;
  if (indices) std::copy_n(s.begin(), std::min(capacity, s.size()), indices);
  return s.size();
}

void gorereg_report_transform(const gorereg_report* report, double rotation[9],
                              double translation[3]) {
  if (!report) return;
  const auto& t = report->rec.transform;
  for (int i = 0; i < 9; ++i) rotation[i] = t.rotation.matrix()(i / 3, i % 3);
  for (int i = 0; i < 3; ++i) translation[i] = t.translation(i);
}

const char* gorereg_last_error(void) { return g_last_error.c_str(); }

const char* gorereg_status_string(gorereg_status status) {
  switch (status) {
    case GOREREG_OK: return "ok";
    case GOREREG_INVALID_ARGUMENT: return "invalid argument";
    case GOREREG_IO_ERROR: return "i/o error";
    case GOREREG_PARSE_ERROR: return "parse error";
    case GOREREG_DEGENERATE: return "degenerate input";
    case GOREREG_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

}  // extern "C"
