#pragma once

#include <exception>
#include <mutex>

namespace wavop {

// Name of the environment variable that fixes the worker count.
inline constexpr const char* kThreadsEnv = "WAVOP_THREADS";

// Worker count from WAVOP_THREADS, else the hardware concurrency.
int configured_threads();

// Pin the OpenMP worker count. Values < 1 fall back to configured_threads().
void set_threads(int n);

int current_threads();

// Exceptions must not leave an OpenMP region. Loop bodies run through run(); the first
// exception is kept and rethrown after the region.
class ExceptionGuard {
public:
    template <class F>
    void run(F&& f)
    {
        try {
            f();
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu_);
            if (!first_) first_ = std::current_exception();
        }
    }
    void rethrow() const
    {
        if (first_) std::rethrow_exception(first_);
    }

private:
    std::mutex mu_;
    std::exception_ptr first_;
};

} // namespace wavop
