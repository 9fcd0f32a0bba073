#include "ggrf/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace ggrf {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GGRF_THREADS")) {
    unsigned value = 0;
    const auto* end = env + std::strlen(env);
    if (auto [ptr, ec] = std::from_chars(env, end, value); ec == std::errc{} && ptr == end && value > 0) {
      return value;
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ggrf
