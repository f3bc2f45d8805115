/* C interface to the gorereg registration library. */
#ifndef GOREREG_GOREREG_H
#define GOREREG_GOREREG_H

#include <stddef.h>
#include <stdint.h>

#if defined(GOREREG_BUILDING_LIBRARY)
#define GOREREG_API __attribute__((visibility("default")))
#else
#define GOREREG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gorereg_status {
  GOREREG_OK = 0,
  GOREREG_INVALID_ARGUMENT = 1, /* bad value, unsupported combination */
  GOREREG_IO_ERROR = 2,         /* file cannot be opened or written */
  GOREREG_PARSE_ERROR = 3,      /* malformed correspondence file */
  GOREREG_DEGENERATE = 4,       /* geometry admits no answer */
  GOREREG_INTERNAL_ERROR = 5
} gorereg_status;

typedef struct gorereg_instance gorereg_instance;
typedef struct gorereg_report gorereg_report;

typedef enum gorereg_mode { GOREREG_ROTATION = 0, GOREREG_RIGID = 1 } gorereg_mode;

typedef enum gorereg_noise { GOREREG_NOISE_ON_SPHERE = 0, GOREREG_NOISE_IN_BALL = 1 } gorereg_noise;

typedef enum gorereg_method {
  GOREREG_METHOD_GORE = 0,
  GOREREG_METHOD_RANSAC = 1,
  GOREREG_METHOD_BNB = 2,
  GOREREG_METHOD_GORE_RANSAC = 3,
  GOREREG_METHOD_GORE_BNB = 4,
  GOREREG_METHOD_RGORE_BNB = 5,
  GOREREG_METHOD_GORE_ABNB = 6
} gorereg_method;

typedef struct gorereg_gen_spec {
  size_t n;
  double eta;
  double xi;
  double ball_radius;
  gorereg_mode mode;
  gorereg_noise noise;
  uint64_t seed;
} gorereg_gen_spec;

typedef struct gorereg_run_options {
  gorereg_method method;
  gorereg_mode problem;
  double xi;      /* <= 0: use the instance's threshold */
  uint64_t seed;
  double timeout; /* seconds per BnB search; <= 0: unlimited */
  int use_bnb;    /* rigid GORE step 2 */
  double confidence;
  size_t max_trials;
} gorereg_run_options;

/* Field of a report; values that do not apply are reported as absent. */
typedef enum gorereg_field {
  GOREREG_FIELD_CONSENSUS = 0,
  GOREREG_FIELD_SURVIVING = 1,
  GOREREG_FIELD_LOWER_BOUND = 2,
  GOREREG_FIELD_RMSE = 3,
  GOREREG_FIELD_ANG_ERR_DEG = 4,
  GOREREG_FIELD_TR_ERR = 5,
  GOREREG_FIELD_PRECISION = 6,
  GOREREG_FIELD_RECALL = 7,
  GOREREG_FIELD_TIME_S = 8,
  GOREREG_FIELD_OPTIMAL = 9,
  GOREREG_FIELD_N = 10,
  GOREREG_FIELD_XI = 11
} gorereg_field;

GOREREG_API gorereg_gen_spec gorereg_gen_spec_default(void);
GOREREG_API gorereg_run_options gorereg_run_options_default(void);

GOREREG_API gorereg_status gorereg_generate(const gorereg_gen_spec* spec, gorereg_instance** out);
GOREREG_API gorereg_status gorereg_read(const char* path, gorereg_instance** out);
GOREREG_API gorereg_status gorereg_write(const gorereg_instance* inst, const char* path);

/* Builds an instance from n rows of x (3 values) and y (3 values). */
GOREREG_API gorereg_status gorereg_instance_create(const double* x, const double* y, size_t n,
                                                   double xi, gorereg_instance** out);
GOREREG_API void gorereg_instance_destroy(gorereg_instance* inst);
GOREREG_API size_t gorereg_instance_size(const gorereg_instance* inst);
/* 0 when the instance carries no threshold. */
GOREREG_API double gorereg_instance_xi(const gorereg_instance* inst);
GOREREG_API int gorereg_instance_has_truth(const gorereg_instance* inst);

GOREREG_API gorereg_status gorereg_method_from_string(const char* name, gorereg_method* out);
GOREREG_API const char* gorereg_method_to_string(gorereg_method method);
GOREREG_API gorereg_status gorereg_mode_from_string(const char* name, gorereg_mode* out);

GOREREG_API gorereg_status gorereg_run(const gorereg_instance* inst,
                                       const gorereg_run_options* options,
                                       gorereg_report** out);
GOREREG_API void gorereg_report_destroy(gorereg_report* report);
GOREREG_API gorereg_method gorereg_report_method(const gorereg_report* report);
/* Returns 1 and stores the value when the field is present, 0 otherwise.
   GOREREG_FIELD_OPTIMAL yields 0.0 or 1.0. */
GOREREG_API int gorereg_report_field(const gorereg_report* report, gorereg_field field,
                                     double* value);
/* Copies up to `capacity` surviving indices; returns the total count. */
GOREREG_API size_t gorereg_report_surviving(const gorereg_report* report, size_t* indices,
                                            size_t capacity);
/* Row-major 3x3 rotation and translation of the estimate. */
GOREREG_API void gorereg_report_transform(const gorereg_report* report, double rotation[9],
                                          double translation[3]);

/* Message of the last failure on the calling thread. */
GOREREG_API const char* gorereg_last_error(void);
GOREREG_API const char* gorereg_status_string(gorereg_status status);

#ifdef __cplusplus
}
#endif

#endif /* GOREREG_GOREREG_H */
