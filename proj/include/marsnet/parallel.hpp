#pragma once

#include <cstddef>

namespace marsnet {

/// Which kernel variant to run. Serial is the reference path kept for testing;
/// Parallel gives the same results independent of thread count.
enum class Execution { Serial, Parallel };

/// Threads OpenMP would use (1 when built without OpenMP).
std::size_t max_threads() noexcept;
void set_threads(std::size_t n) noexcept;

}  // namespace marsnet
