#include "epictrl/parallel.hpp"

#include <cstdlib>
#include <string>

namespace epictrl {

unsigned thread_limit() {
  if (const char* env = std::getenv("EPICTRL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // Unparseable values fall through to the default.
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace epictrl
