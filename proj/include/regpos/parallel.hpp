#pragma once

#include <functional>

namespace regpos {

/// Worker count used by the Monte Carlo loops. Results never depend on it.
void set_threads(int n);
int threads();

/// Calls body(i) for i in [0, count). Indices are split into contiguous chunks, one per
/// worker; callers write into per-index slots and reduce in index order.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace regpos
