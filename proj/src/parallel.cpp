#include "dpprig/parallel.hpp"

namespace dpprig {
namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned count) { g_threads = std::max(1u, count); }

unsigned thread_count() { return g_threads; }

}  // namespace dpprig
