#pragma once
#include <functional>

namespace horo {

// Runs body(0..count-1) on up to `threads` workers in contiguous chunks.
// threads <= 0 means hardware concurrency; the partition never affects
// results because callers write to index-addressed slots only.
void parallel_for(int threads, int count, const std::function<void(int)>& body);

}  // namespace horo
