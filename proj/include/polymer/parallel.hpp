// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace polymer {

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks pull
/// indices from a shared counter; results must be stored by index so that
/// the outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace polymer
