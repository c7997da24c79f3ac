/*
 Copyright 2026 The tscvx Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Counting wrappers over the glibc allocator entry points.

#include "tscvx/memtrack.hpp"

#include <atomic>
#include <cerrno>
#include <cstddef>

#include <malloc.h>

extern "C" {
void* __libc_malloc(std::size_t);
void __libc_free(void*);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
}

namespace {

std::atomic<std::int64_t> g_current{0};
std::atomic<std::int64_t> g_peak{0};

void track(void* p) {
    if (!p) return;
    const auto n = static_cast<std::int64_t>(malloc_usable_size(p));
    const std::int64_t now = g_current.fetch_add(n, std::memory_order_relaxed) + n;
    std::int64_t peak = g_peak.load(std::memory_order_relaxed);
    while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
}

void untrack(void* p) {
    if (p) g_current.fetch_sub(static_cast<std::int64_t>(malloc_usable_size(p)), std::memory_order_relaxed);
}

}  // namespace

extern "C" {

void* malloc(std::size_t n) {
    void* p = __libc_malloc(n);
    track(p);
    return p;
}

void free(void* p) {
    untrack(p);
    __libc_free(p);
}

void* calloc(std::size_t n, std::size_t size) {
    void* p = __libc_calloc(n, size);
    track(p);
    return p;
}

void* realloc(void* old, std::size_t n) {
    const auto before = old ? static_cast<std::int64_t>(malloc_usable_size(old)) : 0;
    void* p = __libc_realloc(old, n);
    if (p) {
        g_current.fetch_sub(before, std::memory_order_relaxed);
        track(p);
    } else if (n == 0) {
        g_current.fetch_sub(before, std::memory_order_relaxed);
    }
    return p;
}

void* memalign(std::size_t align, std::size_t n) {
    void* p = __libc_memalign(align, n);
    track(p);
    return p;
}

void* aligned_alloc(std::size_t align, std::size_t n) { return memalign(align, n); }

int posix_memalign(void** out, std::size_t align, std::size_t n) {
    if (align < sizeof(void*) || (align & (align - 1)) != 0) return EINVAL;
    void* p = memalign(align, n);
    if (!p && n != 0) return ENOMEM;
    *out = p;
    return 0;
}

}  // extern "C"

namespace tscvx::memtrack {

std::int64_t current_bytes() { return g_current.load(std::memory_order_relaxed); }

PeakScope::PeakScope() : base_(current_bytes()) { g_peak.store(base_, std::memory_order_relaxed); }

std::int64_t PeakScope::peak_bytes() const { return g_peak.load(std::memory_order_relaxed) - base_; }

}  // namespace tscvx::memtrack
