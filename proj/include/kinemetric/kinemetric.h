#ifndef KINEMETRIC_H
#define KINEMETRIC_H

/* C interface to libkinemetric.
 *
 * Every function returns a km_status. On failure a message is available from
 * km_last_error() until the next call on the same thread. Strings returned
 * through char** are owned by the caller and released with km_free_string.
 * Angles are degrees, 0 at full knee extension. Points are {x, y, z},
 * quaternions {w, x, y, z} and must be unit length within 1e-6. Side: 0 left,
 * 1 right. */

#include <stddef.h>

#if defined(_WIN32)
#define KM_API __declspec(dllexport)
#else
#define KM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum km_status {
  KM_OK = 0,
  KM_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad enum, buffer too small */
  KM_ERR_INPUT = 2,            /* malformed data or configuration, unreadable file */
  KM_ERR_DEGENERATE = 3,       /* analysis undefined for the data (zero variance, too few samples) */
  KM_ERR_INTERNAL = 4
} km_status;

typedef enum km_angle_method { KM_METHOD_CROSS = 0, KM_METHOD_COSINE = 1 } km_angle_method;

KM_API const char* km_version(void);
KM_API const char* km_last_error(void);
KM_API void km_free_string(char* s);

/* ---- geometry ---------------------------------------------------------- */

KM_API km_status km_angle_cross(const double hip[3], const double knee[3], const double ankle[3], double* out_deg);
KM_API km_status km_angle_cosine(const double hip[3], const double knee[3], const double ankle[3], double* out_deg);
KM_API km_status km_to_canonical(double raw_deg, km_angle_method method, double* out_deg);
KM_API km_status km_relative_quaternion(const double thigh[4], const double shank[4], double out[4]);
/* sequence is one of "XYZ", "XZY", "YXZ", "YZX", "ZXY", "ZYX"; flexion_index is 1-based. */
KM_API km_status km_quat_to_flexion(const double q[4], const char* sequence, int flexion_index, int sign,
                                    double* out_deg, int* gimbal_warning);

/* ---- signal ------------------------------------------------------------ */

KM_API km_status km_savgol(const double* values, size_t n, int window, int order, double* out);
/* Writes up to `capacity` samples; *out_n always receives the full length. */
KM_API km_status km_resample(const double* values, size_t n, double rate, double target_rate, double* out,
                             size_t capacity, size_t* out_n);
KM_API km_status km_align(const double* reference, size_t n_reference, const double* target, size_t n_target,
                          int max_lag, int* lag, double* peak_correlation);

/* ---- statistics -------------------------------------------------------- */

typedef struct km_bland_altman {
  double bias;
  double sd_diff;
  double loa_low;
  double loa_high;
  size_t n;
} km_bland_altman;

KM_API km_status km_bland_altman_stats(const double* a, const double* b, size_t n, km_bland_altman* out);
KM_API km_status km_mae(const double* y, const double* y_hat, size_t n, double* out);
KM_API km_status km_mse_signed(const double* y, const double* y_hat, size_t n, double* out);
KM_API km_status km_pearson(const double* x, const double* y, size_t n, double* out);
KM_API km_status km_paired_t_test(const double* x, const double* y, size_t n, double* t, int* df, double* p);
KM_API km_status km_t_cdf(double t, int df, double* out);

/* ---- run configuration -------------------------------------------------- */

typedef struct km_config km_config;

KM_API km_status km_config_new(km_config** out);
/* Keys missing from the JSON keep their defaults. */
KM_API km_status km_config_from_json(const char* json, km_config** out);
KM_API km_status km_config_to_json(const km_config* config, char** out_json);
KM_API void km_config_free(km_config* config);

/* ---- parsed capture files ----------------------------------------------- */

typedef struct km_capture km_capture;

KM_API km_status km_capture_parse_markers(const char* bytes, size_t len, const km_config* config, km_capture** out);
KM_API km_status km_capture_parse_imu(const char* bytes, size_t len, km_capture** out);
KM_API km_status km_capture_parse_pose(const char* bytes, size_t len, const km_config* config, km_capture** out);
KM_API km_status km_capture_rate(const km_capture* capture, double* out_rate);
KM_API km_status km_capture_frames(const km_capture* capture, size_t* out_frames);
/* Knee flexion at native rate with the configured smoothing. Same buffer
 * contract as km_resample. */
KM_API km_status km_capture_knee_angles(const km_capture* capture, const km_config* config, int side, double* out,
                                        size_t capacity, size_t* out_n);
KM_API void km_capture_free(km_capture* capture);

/* ---- batch commands ------------------------------------------------------ */

typedef struct km_summary {
  size_t trials;
  size_t files_written;
} km_summary;

/* summary may be NULL; angles_dir may be NULL or "" to compute angles from the manifest's files. */
KM_API km_status km_cmd_angles(const km_config* config, const char* manifest, const char* out_dir, km_summary* summary);
KM_API km_status km_cmd_compare(const km_config* config, const char* manifest, const char* out_dir,
                                const char* angles_dir, km_summary* summary);
KM_API km_status km_cmd_population(const km_config* config, const char* manifest, const char* out_dir,
                                   const char* angles_dir, km_summary* summary);
/* request_json: {"profile": {...} | null, "population": {...}}; see README. */
KM_API km_status km_cmd_synth(const char* request_json, const char* out_dir, km_summary* summary);

#ifdef __cplusplus
}
#endif

#endif
