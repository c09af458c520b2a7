#include "hortonlab/campaign.hpp"

#include <cstdlib>
#include <string>

namespace hortonlab {

int worker_count() {
    const char* env = std::getenv("HORTONLAB_WORKERS");
    if (!env || !*env) return 1;
    try {
        const int w = std::stoi(env);
        return w > 0 ? w : 1;
    } catch (...) {
        return 1;
    }
}

}  // namespace hortonlab
