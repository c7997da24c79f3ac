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

#ifndef TSCVX_MEMTRACK_HPP
#define TSCVX_MEMTRACK_HPP

#include <cstdint>

namespace tscvx::memtrack {

/// Heap bytes currently allocated through malloc and friends (usable sizes).
std::int64_t current_bytes();

/// Allocator high-water mark above the level at construction.
class PeakScope {
public:
    PeakScope();
    [[nodiscard]] std::int64_t peak_bytes() const;

private:
    std::int64_t base_;
};

}  // namespace tscvx::memtrack

#endif  // TSCVX_MEMTRACK_HPP
