/*
 * Copyright 2026 The twinarm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the twinarm library. All functions return a ta_status;
 * on failure ta_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * ta_string_free. Handles are released with their _free function. */

#ifndef TWINARM_TWINARM_H
#define TWINARM_TWINARM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TA_API __declspec(dllexport)
#else
#define TA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ta_status {
  TA_OK = 0,
  TA_ERR_PARSE = 1,
  TA_ERR_VALIDATION = 2,
  TA_ERR_DIMENSION = 3,
  TA_ERR_DEGENERATE = 4,
  TA_ERR_NON_FINITE = 5,
  TA_ERR_IO = 6,
  TA_ERR_VERSION_MISMATCH = 7,
  TA_ERR_MODEL_MISMATCH = 8,
  TA_ERR_UNKNOWN_TYPE = 9,
  TA_ERR_PROTOCOL = 10,
  TA_ERR_BIND = 11,
  TA_ERR_INVALID_ARGUMENT = 12,
  TA_ERR_EMPTY = 13,
  TA_ERR_INTERNAL = 99
} ta_status;

typedef struct ta_model ta_model;
typedef struct ta_config ta_config;
typedef struct ta_server ta_server;
typedef struct ta_trajectory ta_trajectory;

typedef enum ta_feedback { TA_FEEDBACK_FROM_CONFIG = -1, TA_FEEDBACK_NONE = 0, TA_FEEDBACK_LIVE = 1 } ta_feedback;

TA_API const char* ta_version(void);
TA_API const char* ta_status_string(ta_status status);
/* Message of the last failure on this thread ("" when none). */
TA_API const char* ta_last_error(void);
TA_API void ta_string_free(char* s);

/* -- models ------------------------------------------------------------- */

/* `source` is a file path, or "builtin:NAME" for a bundled model. */
TA_API ta_status ta_model_load(const char* source, ta_model** out);
TA_API ta_status ta_model_load_json(const char* document, ta_model** out);
TA_API void ta_model_free(ta_model* model);
TA_API ta_status ta_model_dof(const ta_model* model, size_t* out);
TA_API ta_status ta_model_hash(const ta_model* model, char** out);
/* End-effector pose in the model base frame: position[3], quaternion[4] (w, x, y, z). */
TA_API ta_status ta_model_ee_pose(const ta_model* model, const double* q, size_t n, double position[3],
                                  double quaternion[4]);
/* 6 x n world Jacobian, row-major, rows (vx, vy, vz, wx, wy, wz). */
TA_API ta_status ta_model_jacobian(const ta_model* model, const double* q, size_t n, double* out);
TA_API ta_status ta_model_manipulability(const ta_model* model, const double* q, size_t n, double* out);

/* -- session configuration ---------------------------------------------- */

/* NULL or "" selects the bundled dual-arm setup. */
TA_API ta_status ta_config_load(const char* path, ta_config** out);
TA_API void ta_config_free(ta_config* config);

/* -- server --------------------------------------------------------------- */

/* `bind` is "HOST:PORT"; port 0 picks a free port. */
TA_API ta_status ta_server_create(const ta_config* config, const char* bind, ta_feedback feedback, ta_server** out);
TA_API ta_status ta_server_start(ta_server* server);
TA_API ta_status ta_server_port(const ta_server* server, uint16_t* out);
/* Blocks until ta_server_stop or SIGINT/SIGTERM. */
TA_API ta_status ta_server_run(ta_server* server);
TA_API ta_status ta_server_stop(ta_server* server);
TA_API void ta_server_free(ta_server* server);

/* -- synthetic streams ---------------------------------------------------- */

TA_API ta_status ta_synth_to_file(const char* script_path, const char* out_path, size_t* frames);
TA_API ta_status ta_synth_connect(const char* script_path, const char* address, size_t* frames);

/* -- trajectories --------------------------------------------------------- */

TA_API ta_status ta_trajectory_load(const char* path, const ta_config* config, ta_trajectory** out);
TA_API void ta_trajectory_free(ta_trajectory* trajectory);
TA_API ta_status ta_trajectory_sample_count(const ta_trajectory* trajectory, size_t* out);
/* `passed` is 1 when every check passes; `report` is a printable summary. */
TA_API ta_status ta_trajectory_validate(const ta_trajectory* trajectory, const ta_config* config, int* passed,
                                        char** report);
/* Kinematic replay in-process; `report` receives the fidelity summary as JSON. */
TA_API ta_status ta_trajectory_replay(const ta_trajectory* trajectory, const ta_config* config, double speed,
                                      char** report);
/* Replay on a running server at `address`; the server streams robot_state. */
TA_API ta_status ta_trajectory_replay_remote(const ta_trajectory* trajectory, const char* address, double speed,
                                             char** report);

/* -- calibration ---------------------------------------------------------- */

/* `config_path` is a model document or a session config (first arm). */
TA_API ta_status ta_calibrate(const char* config_path, size_t samples, uint64_t seed, char** report);

#ifdef __cplusplus
}
#endif

#endif /* TWINARM_TWINARM_H */
