#include "tracker/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tracker {

int max_threads() {
    if (const char* env = std::getenv("TRACKER_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed >= 1) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_blocks(int count, int block_size, const std::function<void(int, int)>& body) {
    if (count <= 0) return;
    const int blocks = (count + block_size - 1) / block_size;
    const int workers = std::min(max_threads(), blocks);
    if (workers <= 1) {
        for (int b = 0; b < blocks; ++b)
            body(b * block_size, std::min(count, (b + 1) * block_size));
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int b = next.fetch_add(1); b < blocks; b = next.fetch_add(1))
                body(b * block_size, std::min(count, (b + 1) * block_size));
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace tracker
