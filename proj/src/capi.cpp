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

#include "advstyle/advstyle.h"

#include <cstring>
#include <stdexcept>
#include <string>

#include "core/commands.hpp"
#include "core/common.hpp"
#include "core/config.hpp"

namespace {

thread_local std::string t_last_error;

advstyle_status run_guarded(const char* what, const std::function<void()>& body) {
  try {
    body();
    t_last_error.clear();
    return ADVSTYLE_OK;
  } catch (const std::invalid_argument& e) {
    t_last_error = std::string(what) + ": " + e.what();
    return ADVSTYLE_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    t_last_error = std::string(what) + ": " + e.what();
    return ADVSTYLE_FAILURE;
  } catch (...) {
    t_last_error = std::string(what) + ": unknown error";
    return ADVSTYLE_FAILURE;
  }
}

void copy_out(const std::string& text, char* buf, size_t buf_len) {
  if (!buf || buf_len == 0) return;
  const size_t n = std::min(text.size(), buf_len - 1);
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
}

advstyle::Options& unwrap(advstyle_options* opts) {
  return *reinterpret_cast<advstyle::Options*>(opts);
}

const advstyle::Options& unwrap(const advstyle_options* opts) {
  return *reinterpret_cast<const advstyle::Options*>(opts);
}

}  // namespace

extern "C" {

const char* advstyle_version(void) { return advstyle::kVersionString; }

const char* advstyle_last_error(void) { return t_last_error.c_str(); }

advstyle_options* advstyle_options_create(void) {
  return reinterpret_cast<advstyle_options*>(new advstyle::Options());
}

advstyle_options* advstyle_options_create_bench(void) {
  return reinterpret_cast<advstyle_options*>(
      new advstyle::Options(advstyle::Options::bench_defaults()));
}

void advstyle_options_destroy(advstyle_options* opts) {
  delete reinterpret_cast<advstyle::Options*>(opts);
}

advstyle_status advstyle_options_set(advstyle_options* opts, const char* key,
                                     const char* value) {
  if (!opts || !key || !value) {
    t_last_error = "options_set: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("options_set", [&] { unwrap(opts).set(key, value); });
}

advstyle_status advstyle_options_load_file(advstyle_options* opts, const char* path) {
  if (!opts || !path) {
    t_last_error = "options_load_file: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("options_load_file", [&] { unwrap(opts).load_file(path); });
}

advstyle_status advstyle_options_get(const advstyle_options* opts, const char* key, char* buf,
                                     size_t buf_len) {
  if (!opts || !key || !buf) {
    t_last_error = "options_get: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("options_get", [&] { copy_out(unwrap(opts).get(key), buf, buf_len); });
}

advstyle_status advstyle_train(const advstyle_options* opts, const char* out_dir) {
  if (!opts || !out_dir) {
    t_last_error = "train: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("train", [&] { advstyle::cmd_train(unwrap(opts), out_dir); });
}

advstyle_status advstyle_bench(const advstyle_options* opts, const char* out_dir) {
  if (!opts || !out_dir) {
    t_last_error = "bench: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("bench", [&] { advstyle::cmd_bench(unwrap(opts), out_dir); });
}

advstyle_status advstyle_generate(const advstyle_options* opts, const char* domain,
                                  const char* out_dir) {
  if (!opts || !domain || !out_dir) {
    t_last_error = "generate: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("generate",
                     [&] { advstyle::cmd_generate(unwrap(opts), domain, out_dir); });
}

advstyle_status advstyle_augment(const advstyle_options* opts, const char* strategy,
                                 const char* input_dir, const char* out_dir) {
  if (!opts || !strategy || !input_dir || !out_dir) {
    t_last_error = "augment: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("augment",
                     [&] { advstyle::cmd_augment(unwrap(opts), strategy, input_dir, out_dir); });
}

advstyle_status advstyle_analyze(const advstyle_options* opts, const char* const* input_dirs,
                                 size_t num_dirs, const char* out_dir) {
  if (!opts || !input_dirs || !out_dir) {
    t_last_error = "analyze: null argument";
    return ADVSTYLE_INVALID_ARGUMENT;
  }
  return run_guarded("analyze", [&] {
    std::vector<std::string> dirs;
    for (size_t i = 0; i < num_dirs; ++i) dirs.emplace_back(input_dirs[i]);
    advstyle::cmd_analyze(unwrap(opts), dirs, out_dir);
  });
}

advstyle_status advstyle_gradcheck(int inject_fault, char* report, size_t report_len) {
  advstyle::GradcheckOutcome outcome;
  const advstyle_status st =
      run_guarded("gradcheck", [&] { outcome = advstyle::cmd_gradcheck(inject_fault != 0); });
  if (st != ADVSTYLE_OK) return st;
  copy_out(outcome.report, report, report_len);
  if (!outcome.pass) {
    t_last_error = "gradcheck: failures detected";
    return ADVSTYLE_FAILURE;
  }
  return ADVSTYLE_OK;
}

}  // extern "C"
