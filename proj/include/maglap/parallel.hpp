#pragma once

namespace maglap {

// Execution policy for the data-parallel kernels (grid maps, per-index report
// batches, scans). Parallel uses OpenMP worksharing; Serial is the reference
// implementation the equivalence tests compare against.
enum class Exec { Serial, Parallel };

void set_max_threads(int n);
int max_threads();

}  // namespace maglap
