#include "wavop/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>
#include <thread>

namespace wavop {

int configured_threads()
{
    if (const char* env = std::getenv(kThreadsEnv)) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

void set_threads(int n)
{
    omp_set_num_threads(n > 0 ? n : configured_threads());
}

int current_threads()
{
    return omp_get_max_threads();
}

} // namespace wavop
