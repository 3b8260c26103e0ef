#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace nsrl {

// Worker count for pointwise loops. Read once from NSRL_THREADS (default 1).
int thread_count();

// Override for tests; 0 restores the environment value.
void set_thread_count(int n);

// Runs body(begin, end) over disjoint chunks of [0, n). Only use for loops whose
// iterations write disjoint outputs, so results do not depend on the chunking.
template <class Body>
void parallel_for(std::size_t n, Body&& body)
{
    constexpr std::size_t min_chunk = 1u << 15;
    const std::size_t workers = static_cast<std::size_t>(thread_count());
    if (workers <= 1 || n < 2 * min_chunk) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunks = std::min(workers, n / min_chunk);
    const std::size_t step = (n + chunks - 1) / chunks;
    std::vector<std::jthread> pool;
    pool.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) {
        const std::size_t b = c * step;
        const std::size_t e = std::min(n, b + step);
        if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
    }
    body(std::size_t{0}, std::min(n, step));
}

// Fixed-order pairwise summation; identical result for identical input.
double pairwise_sum(std::span<const double> values);

} // namespace nsrl
