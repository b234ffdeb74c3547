#pragma once

namespace slk {

// 0 selects every available core. Results never depend on this setting:
// parallel loops only write per-row outputs and reductions run serially.
void set_thread_count(int threads);
int thread_count();

}  // namespace slk
