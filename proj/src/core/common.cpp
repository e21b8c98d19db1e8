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

#include "core/common.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace advstyle {

namespace {

std::size_t initial_max_threads() {
  if (const char* env = std::getenv("ADVSTYLE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::size_t>(v);
  }
  std::size_t hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::atomic<std::size_t> g_max_threads{0};

// Persistent worker pool. Tasks hand out contiguous chunks through an atomic
// cursor; every chunk's writes are owned by its indices, so claim order never
// affects results.
class ThreadPool {
 public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  void for_range(std::size_t begin, std::size_t end, std::size_t min_grain,
                 const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return;
    const std::size_t cap = max_threads();
    if (cap <= 1 || workers_.empty() || n <= min_grain || !busy_.try_lock()) {
      body(begin, end);
      return;
    }
    const std::size_t parts = std::min(cap, workers_.size() + 1) * 4;
    chunk_ = std::max<std::size_t>({min_grain, (n + parts - 1) / parts, 1});
    cursor_.store(begin, std::memory_order_relaxed);
    end_ = end;
    body_ = &body;
    {
      std::lock_guard<std::mutex> g(m_);
      ++generation_;
      active_ = workers_.size();
    }
    cv_.notify_all();
    drain();
    std::unique_lock<std::mutex> g(m_);
    done_cv_.wait(g, [&] { return active_ == 0; });
    body_ = nullptr;
    busy_.unlock();
  }

 private:
  ThreadPool() {
    std::size_t n = initial_max_threads();
    for (std::size_t i = 1; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> g(m_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      std::unique_lock<std::mutex> g(m_);
      cv_.wait(g, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      g.unlock();
      drain();
      g.lock();
      if (--active_ == 0) done_cv_.notify_all();
    }
  }

  void drain() {
    for (;;) {
      std::size_t b = cursor_.fetch_add(chunk_, std::memory_order_relaxed);
      if (b >= end_) return;
      (*body_)(b, std::min(end_, b + chunk_));
    }
  }

  std::vector<std::thread> workers_;
  std::mutex busy_;  // held for the duration of one for_range
  std::mutex m_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::uint64_t generation_ = 0;
  std::size_t active_ = 0;
  bool stop_ = false;

  std::atomic<std::size_t> cursor_{0};
  std::size_t end_ = 0;
  std::size_t chunk_ = 1;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
};

}  // namespace

std::size_t max_threads() {
  std::size_t v = g_max_threads.load(std::memory_order_relaxed);
  if (v == 0) {
    v = initial_max_threads();
    g_max_threads.store(v, std::memory_order_relaxed);
  }
  return v;
}

void set_max_threads(std::size_t n) {
  g_max_threads.store(n > 0 ? n : 1, std::memory_order_relaxed);
}

void parallel_for(std::size_t begin, std::size_t end, std::size_t min_grain,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  ThreadPool::instance().for_range(begin, end, min_grain, body);
}

}  // namespace advstyle
