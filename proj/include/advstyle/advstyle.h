/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 advstyle contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the advstyle toolkit: adversarial style augmentation for
 * domain-generalized segmentation at toy scale, with training, offline
 * augmentation, dataset style analysis, gradient checking, and a two-domain
 * benchmark. Handles are opaque; every call reports through status codes and
 * advstyle_last_error(). */

#ifndef ADVSTYLE_ADVSTYLE_H
#define ADVSTYLE_ADVSTYLE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum advstyle_status {
  ADVSTYLE_OK = 0,
  ADVSTYLE_FAILURE = 1,          /* computation or check failure */
  ADVSTYLE_INVALID_ARGUMENT = 2, /* unknown key, bad value, or misuse */
} advstyle_status;

const char* advstyle_version(void);

/* Message of the most recent failing call on this thread; empty otherwise. */
const char* advstyle_last_error(void);

/* Flat key = value option set with built-in defaults. Keys and value syntax
 * match the config-file format; setting an unknown key or malformed value
 * fails with ADVSTYLE_INVALID_ARGUMENT. */
typedef struct advstyle_options advstyle_options;

advstyle_options* advstyle_options_create(void);
/* Benchmark-protocol defaults (smaller model and images). */
advstyle_options* advstyle_options_create_bench(void);
void advstyle_options_destroy(advstyle_options* opts);

advstyle_status advstyle_options_set(advstyle_options* opts, const char* key, const char* value);
advstyle_status advstyle_options_load_file(advstyle_options* opts, const char* path);
/* Copies the current value into buf (NUL-terminated, truncating). */
advstyle_status advstyle_options_get(const advstyle_options* opts, const char* key, char* buf,
                                     size_t buf_len);

/* Each run writes run_manifest.cfg into out_dir before any computation; the
 * manifest reloads as a config file and reproduces the run bit for bit. */

/* Train on the configured synthetic source domain; writes checkpoints and
 * train_log.csv. */
advstyle_status advstyle_train(const advstyle_options* opts, const char* out_dir);

/* Train every augmentation policy under the shared protocol and evaluate
 * source/target mIoU; writes results.csv, runs.csv, and per-run artifacts. */
advstyle_status advstyle_bench(const advstyle_options* opts, const char* out_dir);

/* Write the configured "source" or "target" domain to disk as PPM/PGM pairs
 * plus manifest.txt. */
advstyle_status advstyle_generate(const advstyle_options* opts, const char* domain,
                                  const char* out_dir);

/* Apply one augmentation strategy (advstyle, advpixel, randstyle, mixstyle,
 * crossstyle) to every PPM/PGM pair in input_dir. Adversarial strategies
 * need the augment.checkpoint option. Writes images plus provenance.csv. */
advstyle_status advstyle_augment(const advstyle_options* opts, const char* strategy,
                                 const char* input_dir, const char* out_dir);

/* Per-directory style tables, histogram features, and the pairwise KL
 * matrix. */
advstyle_status advstyle_analyze(const advstyle_options* opts, const char* const* input_dirs,
                                 size_t num_dirs, const char* out_dir);

/* Finite-difference check of every differentiable op in 64-bit; the report
 * (one line per op) is copied into `report`. inject_fault corrupts one
 * adjoint on purpose to verify the failure path. Returns ADVSTYLE_FAILURE
 * when any op fails. */
advstyle_status advstyle_gradcheck(int inject_fault, char* report, size_t report_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ADVSTYLE_ADVSTYLE_H */
