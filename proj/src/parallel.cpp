#include "fmie/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace fmie {

namespace {
std::atomic<unsigned> g_override{0};
}

void set_default_threads(unsigned threads) { g_override.store(threads); }

unsigned default_threads() {
  if (const unsigned o = g_override.load(); o > 0) return o;
  if (const char* env = std::getenv("FMIE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace fmie
