#include "casclab/parallel.hpp"

#include <algorithm>

namespace casclab {

namespace {
int g_threads = 1;
}

void set_threads(int count) { g_threads = std::max(1, count); }

int threads() { return g_threads; }

}  // namespace casclab
