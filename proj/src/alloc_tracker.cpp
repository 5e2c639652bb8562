#include "seqfeat/alloc_tracker.hpp"

#include <atomic>
#include <cstdlib>
#include <new>

#include <malloc.h>

namespace seqfeat::alloc {

namespace {

std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};
std::atomic<std::size_t> g_total{0};
std::atomic<std::size_t> g_count{0};

void on_alloc(void* p) noexcept {
    if (p == nullptr) {
        return;
    }
    const std::size_t n = malloc_usable_size(p);
    const std::size_t live = g_live.fetch_add(n, std::memory_order_relaxed) + n;
    g_total.fetch_add(n, std::memory_order_relaxed);
    g_count.fetch_add(1, std::memory_order_relaxed);
    std::size_t peak = g_peak.load(std::memory_order_relaxed);
    while (live > peak && !g_peak.compare_exchange_weak(peak, live, std::memory_order_relaxed)) {
    }
}

void on_free(void* p) noexcept {
    if (p != nullptr) {
        g_live.fetch_sub(malloc_usable_size(p), std::memory_order_relaxed);
    }
}

void* allocate(std::size_t n) {
    void* p = std::malloc(n == 0 ? 1 : n);
    if (p == nullptr) {
        throw std::bad_alloc();
    }
    on_alloc(p);
    return p;
}

void* allocate_aligned(std::size_t n, std::align_val_t align) {
    const auto a = static_cast<std::size_t>(align);
    const std::size_t rounded = ((n == 0 ? 1 : n) + a - 1) / a * a;
    void* p = std::aligned_alloc(a, rounded);
    if (p == nullptr) {
        throw std::bad_alloc();
    }
    on_alloc(p);
    return p;
}

void release(void* p) noexcept {
    on_free(p);
    std::free(p);
}

} // namespace

std::size_t live_bytes() noexcept { return g_live.load(); }
std::size_t total_allocated_bytes() noexcept { return g_total.load(); }
std::size_t allocation_count() noexcept { return g_count.load(); }

HighWatermark::HighWatermark() noexcept : baseline_(g_live.load()) { g_peak.store(baseline_); }

std::size_t HighWatermark::peak_extra_bytes() const noexcept {
    const std::size_t peak = g_peak.load();
    return peak > baseline_ ? peak - baseline_ : 0;
}

AllocationCounter::AllocationCounter() noexcept : bytes0_(g_total.load()), count0_(g_count.load()) {}
std::size_t AllocationCounter::bytes() const noexcept { return g_total.load() - bytes0_; }
std::size_t AllocationCounter::count() const noexcept { return g_count.load() - count0_; }

} // namespace seqfeat::alloc

// NOLINTBEGIN(misc-new-delete-overloads)
void* operator new(std::size_t n) { return seqfeat::alloc::allocate(n); }
void* operator new[](std::size_t n) { return seqfeat::alloc::allocate(n); }
void* operator new(std::size_t n, const std::nothrow_t&) noexcept {
    try {
        return seqfeat::alloc::allocate(n);
    } catch (...) {
        return nullptr;
    }
}
void* operator new[](std::size_t n, const std::nothrow_t&) noexcept {
    try {
        return seqfeat::alloc::allocate(n);
    } catch (...) {
        return nullptr;
    }
}
void* operator new(std::size_t n, std::align_val_t a) { return seqfeat::alloc::allocate_aligned(n, a); }
void* operator new[](std::size_t n, std::align_val_t a) { return seqfeat::alloc::allocate_aligned(n, a); }
void operator delete(void* p) noexcept { seqfeat::alloc::release(p); }
void operator delete[](void* p) noexcept { seqfeat::alloc::release(p); }
void operator delete(void* p, std::size_t) noexcept { seqfeat::alloc::release(p); }
void operator delete[](void* p, std::size_t) noexcept { seqfeat::alloc::release(p); }
void operator delete(void* p, std::align_val_t) noexcept { seqfeat::alloc::release(p); }
void operator delete[](void* p, std::align_val_t) noexcept { seqfeat::alloc::release(p); }
void operator delete(void* p, std::size_t, std::align_val_t) noexcept { seqfeat::alloc::release(p); }
void operator delete[](void* p, std::size_t, std::align_val_t) noexcept { seqfeat::alloc::release(p); }
// NOLINTEND(misc-new-delete-overloads)
