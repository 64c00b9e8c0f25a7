#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace vvclab::tools {

/// Keeps the 128 KiB layer temporaries on the heap instead of fresh mappings.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

}  // namespace vvclab::tools
