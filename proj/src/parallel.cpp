#include "bml/parallel.hpp"

#include <cstdlib>
#include <string>

namespace bml {

std::size_t worker_count() {
    std::size_t requested = 0;
    if (const char* env = std::getenv("BML_THREADS")) {
        try {
            requested = static_cast<std::size_t>(std::stoul(env));
        } catch (...) {
            requested = 0;
        }
    }
    if (requested == 0) requested = std::thread::hardware_concurrency();
    return requested == 0 ? 1 : requested;
}

}  // namespace bml
