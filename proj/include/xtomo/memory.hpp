#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace xtomo::memory {

// Process-wide accounting of array storage allocated through
// TrackedAllocator. Used by the bench verb to report peak array memory.
void note_alloc(std::size_t bytes) noexcept;
void note_free(std::size_t bytes) noexcept;
std::size_t current_bytes() noexcept;
std::size_t peak_bytes() noexcept;
/// Resets the peak to the current level.
void reset_peak() noexcept;

template <class T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <class U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    T* p = std::allocator<T>{}.allocate(n);
    note_alloc(n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    note_free(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <class U>
  bool operator==(const TrackedAllocator<U>&) const noexcept { return true; }
};

template <class T>
using tracked_vector = std::vector<T, TrackedAllocator<T>>;

}  // namespace xtomo::memory
