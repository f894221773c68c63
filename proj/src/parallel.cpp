#include "ldplab/parallel.hpp"

#include <atomic>

namespace ldplab {

namespace {
std::atomic<std::size_t> g_threads{1};
}

std::size_t worker_threads() noexcept {
    const std::size_t n = g_threads.load();
    if (n != 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

void set_worker_threads(std::size_t n) noexcept { g_threads.store(n); }

}  // namespace ldplab
