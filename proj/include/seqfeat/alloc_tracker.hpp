#pragma once

#include <cstddef>

namespace seqfeat::alloc {

// Process-wide heap accounting through replaced global operator new/delete.
// Counts bytes obtained via new/delete only (not raw malloc).

std::size_t live_bytes() noexcept;
std::size_t total_allocated_bytes() noexcept;
std::size_t allocation_count() noexcept;

/// High-watermark of live bytes above the level at construction.
class HighWatermark {
public:
    HighWatermark() noexcept;
    std::size_t peak_extra_bytes() const noexcept;

private:
    std::size_t baseline_;
};

/// Bytes and allocations requested since construction.
class AllocationCounter {
public:
    AllocationCounter() noexcept;
    std::size_t bytes() const noexcept;
    std::size_t count() const noexcept;

private:
    std::size_t bytes0_;
    std::size_t count0_;
};

} // namespace seqfeat::alloc
