/*
 Copyright 2026 The jfboc Authors

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

#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace jfboc {

/// Gradient buffers of large networks are a few hundred kilobytes each and are
/// allocated once per engine call. With glibc's default trimming every such
/// allocation returns pages to the kernel and faults them back in. Executables
/// call this once at startup; it is a no-op on other C libraries.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_TOP_PAD, 16 << 20);
#endif
}

}  // namespace jfboc
