#pragma once

#include <cstdint>
#include <functional>

#include "cvqit/core.hpp"

namespace cvqit {

// hardware concurrency, capped by CVQIT_THREADS when set
int worker_count();

// runs body(i) for i in [0, n); iterations must be independent
void parallel_for(int n, const std::function<void(int)>& body);

// independent reproducible stream for chunk `index` of a run seeded by `seed`
Rng stream_rng(std::uint64_t seed, std::uint64_t index);

}  // namespace cvqit
