#include "scg/parallel.hpp"

#include <cstdlib>
#include <string>

namespace scg {

namespace {
std::atomic<int> override_workers{0};
}

int worker_count()
{
    if (const int w = override_workers.load(); w > 0) return w;
    if (const char* env = std::getenv("SCG_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w > 0) return w;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_worker_count(int workers) { override_workers = workers > 0 ? workers : 0; }

}  // namespace scg
