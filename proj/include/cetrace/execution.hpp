#pragma once

namespace cetrace {

/// Selects the OpenMP kernel or its serial reference. Both produce identical
/// results; the serial path exists for testing and benchmarking.
enum class Execution { kSerial, kParallel };

}  // namespace cetrace
