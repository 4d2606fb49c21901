#pragma once

namespace cggm {

// Execution policy for the data-parallel kernels. Serial runs the same work
// decomposition sequentially and must produce bitwise-identical results;
// tests and the benchmark target rely on that.
enum class Exec { Serial, Parallel };

}  // namespace cggm
