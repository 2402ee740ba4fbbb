#pragma once

#include <cstddef>
#include <functional>

namespace modechoice {

/// Runs body(begin, end) over [0, n) split into fixed-size blocks. Block
/// boundaries depend only on n and block_size, never on the worker count, so
/// callers that reduce per-block results in block order get identical output
/// for any number of workers. Exceptions from workers are rethrown.
void parallel_blocks(std::size_t n, std::size_t block_size, unsigned workers,
                     const std::function<void(std::size_t block, std::size_t begin,
                                              std::size_t end)>& body);

inline std::size_t block_count(std::size_t n, std::size_t block_size) noexcept {
  return (n + block_size - 1) / block_size;
}

}  // namespace modechoice
