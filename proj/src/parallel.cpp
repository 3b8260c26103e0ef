#include "nsrl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace nsrl {

namespace {

std::atomic<int> override_threads{0};

int env_threads()
{
    static const int value = [] {
        const char* raw = std::getenv("NSRL_THREADS");
        if (raw == nullptr) return 1;
        try {
            const int v = std::stoi(raw);
            return v > 0 ? v : 1;
        } catch (...) {
            return 1;
        }
    }();
    return value;
}

} // namespace

int thread_count()
{
    const int o = override_threads.load(std::memory_order_relaxed);
    return o > 0 ? o : env_threads();
}

void set_thread_count(int n) { override_threads.store(n > 0 ? n : 0, std::memory_order_relaxed); }

double pairwise_sum(std::span<const double> values)
{
    constexpr std::size_t leaf = 64;
    if (values.size() <= leaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

} // namespace nsrl
