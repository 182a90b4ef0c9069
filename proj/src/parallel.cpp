#include "ddpmlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace ddpmlab {
namespace {

using Fn = std::function<void(std::size_t, std::size_t)>;

thread_local bool t_in_worker = false;

// Persistent fork-join pool. Chunks are claimed via an atomic cursor; each
// chunk writes disjoint output, so scheduling order never changes results.
class Pool {
public:
    explicit Pool(std::size_t helpers) {
        threads_.reserve(helpers);
        for (std::size_t i = 0; i < helpers; ++i)
            threads_.emplace_back([this] { worker(); });
    }

    ~Pool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
        }
        cv_work_.notify_all();
        for (auto& t : threads_) t.join();
    }

    std::size_t helpers() const { return threads_.size(); }

    void run(std::size_t n, std::size_t grain, const Fn& fn) {
        std::lock_guard run_lk(run_mu_);  // one fork-join region at a time
        {
            std::lock_guard lk(mu_);
            job_ = &fn;
            n_ = n;
            grain_ = grain;
            cursor_.store(0, std::memory_order_relaxed);
            pending_ = threads_.size();
            ++epoch_;
        }
        cv_work_.notify_all();
        const bool prev = t_in_worker;
        t_in_worker = true;  // nested calls from the caller's own chunks run inline
        drain(fn, n, grain);
        t_in_worker = prev;
        std::unique_lock lk(mu_);
        cv_done_.wait(lk, [&] { return pending_ == 0; });
        job_ = nullptr;
    }

private:
    void worker() {
        t_in_worker = true;
        std::uint64_t seen = 0;
        for (;;) {
            const Fn* f;
            std::size_t n, grain;
            {
                std::unique_lock lk(mu_);
                cv_work_.wait(lk, [&] { return stop_ || epoch_ != seen; });
                if (stop_) return;
                seen = epoch_;
                f = job_;
                n = n_;
                grain = grain_;
            }
            drain(*f, n, grain);
            {
                std::lock_guard lk(mu_);
                if (--pending_ == 0) cv_done_.notify_all();
            }
        }
    }

    void drain(const Fn& fn, std::size_t n, std::size_t grain) {
        for (;;) {
            const std::size_t i = cursor_.fetch_add(1, std::memory_order_relaxed);
            const std::size_t begin = i * grain;
            if (begin >= n) return;
            fn(begin, std::min(begin + grain, n));
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_work_, cv_done_;
    const Fn* job_ = nullptr;
    std::size_t n_ = 0, grain_ = 1;
    std::atomic<std::size_t> cursor_{0};
    std::size_t pending_ = 0;
    std::uint64_t epoch_ = 0;
    bool stop_ = false;
};

std::mutex g_pool_mu;
std::unique_ptr<Pool> g_pool;
std::size_t g_workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());

Pool* pool_for(std::size_t want_helpers) {
    std::lock_guard lk(g_pool_mu);
    if (!g_pool || g_pool->helpers() != want_helpers)
        g_pool = std::make_unique<Pool>(want_helpers);
    return g_pool.get();
}

}  // namespace

void set_workers(std::size_t n) {
    std::lock_guard lk(g_pool_mu);
    g_workers = std::max<std::size_t>(1, n);
}

std::size_t workers() { return g_workers; }

void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    grain = std::max<std::size_t>(1, grain);
    const std::size_t chunks = (n + grain - 1) / grain;
    // nested calls from a pool worker run inline
    if (t_in_worker || g_workers == 1 || chunks == 1) {
        fn(0, n);
        return;
    }
    pool_for(g_workers - 1)->run(n, grain, fn);
}

}  // namespace ddpmlab
