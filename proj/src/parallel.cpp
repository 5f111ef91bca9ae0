#include "stormreach/parallel.hpp"

#include <atomic>

namespace stormreach {
namespace {
std::atomic<int> g_threads{1};
}

int worker_threads() { return g_threads.load(); }
void set_worker_threads(int n) { g_threads.store(std::max(1, n)); }

}  // namespace stormreach
