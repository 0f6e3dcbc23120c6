#pragma once

namespace mmill {

/// Thread count to hand to an OpenMP region: `requested` when positive,
/// otherwise the runtime default.
int resolve_threads(int requested) noexcept;

/// Number of hardware threads the OpenMP runtime reports.
int available_threads() noexcept;

}  // namespace mmill
