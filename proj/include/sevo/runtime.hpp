#pragma once

#include <cstddef>
#include <functional>

namespace sevo {

/// Cooperative cancellation, polled by long-running loops (solver runs,
/// sweeps). Set from a signal handler; async-signal-safe.
void request_cancel() noexcept;
void reset_cancel() noexcept;
bool cancel_requested() noexcept;

/// Upper bound on worker threads used by sweeps. 0 means hardware concurrency.
void set_max_threads(std::size_t n) noexcept;
std::size_t max_threads() noexcept;

/// Runs body(i) for i in [0, count) on up to max_threads() workers. The first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sevo
