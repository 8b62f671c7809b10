#include "vup/parallel.hpp"

#include <atomic>

namespace vup {

namespace {
std::atomic<unsigned> g_default_threads{1};
}

void set_default_threads(unsigned threads) {
    g_default_threads.store(std::max(1u, threads), std::memory_order_relaxed);
}

unsigned default_threads() { return g_default_threads.load(std::memory_order_relaxed); }

}  // namespace vup
