#include "crpmap/parallel.hpp"

#include <cstdlib>
#include <string>

namespace crpmap {

std::size_t default_jobs() {
  if (const char* env = std::getenv("CRPMAP_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace crpmap
