#pragma once
// Blocked parallel_for over an index range, dispatched to a lazily created
// persistent worker pool (thread creation costs far more than a condition
// variable wake at the stage sizes the tracker issues).  Each call hands one
// contiguous block to each participating worker and returns after all blocks
// finish, so successive calls are barrier-separated stages.

#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace polypath {

inline unsigned default_worker_count() {
  if (const char* env = std::getenv("POLYPATH_WORKERS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {

inline thread_local bool tl_in_pool_worker = false;

class WorkerPool {
 public:
  static WorkerPool& instance() {
    static WorkerPool pool;
    return pool;
  }

  // fn(lo, hi) over disjoint blocks covering [0, n); the calling thread
  // executes the last block itself
  void run(uint32_t n, unsigned workers, const std::function<void(uint32_t, uint32_t)>& fn) {
    std::lock_guard<std::mutex> dispatch(dispatch_mu_);
    ensure(workers - 1);
    {
      std::unique_lock<std::mutex> lk(mu_);
      fn_ = &fn;
      n_ = n;
      participants_ = workers;
      remaining_ = workers - 1;
      ++generation_;
    }
    cv_.notify_all();
    auto [lo, hi] = block(workers - 1, workers, n);
    fn(lo, hi);
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [&] { return remaining_ == 0; });
    fn_ = nullptr;
  }

  ~WorkerPool() {
    {
      std::unique_lock<std::mutex> lk(mu_);
      quit_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

 private:
  static std::pair<uint32_t, uint32_t> block(unsigned idx, unsigned workers, uint32_t n) {
    uint32_t chunk = n / workers;
    uint32_t rem = n % workers;
    uint32_t lo = idx * chunk + std::min<uint32_t>(idx, rem);
    uint32_t hi = lo + chunk + (idx < rem ? 1 : 0);
    return {lo, hi};
  }

  void ensure(unsigned helpers) {
    std::unique_lock<std::mutex> lk(mu_);
    while (threads_.size() < helpers) {
      unsigned idx = static_cast<unsigned>(threads_.size());
      threads_.emplace_back([this, idx] { worker_main(idx); });
    }
  }

  void worker_main(unsigned idx) {
    tl_in_pool_worker = true;
    uint64_t seen = 0;
    std::unique_lock<std::mutex> lk(mu_);
    for (;;) {
      cv_.wait(lk, [&] { return generation_ != seen || quit_; });
      if (quit_) return;
      seen = generation_;
      if (idx + 1 < participants_) {
        auto fn = fn_;
        auto [lo, hi] = block(idx, participants_, n_);
        lk.unlock();
        (*fn)(lo, hi);
        lk.lock();
        if (--remaining_ == 0) done_cv_.notify_all();
      }
    }
  }

  std::mutex dispatch_mu_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  std::vector<std::thread> threads_;
  const std::function<void(uint32_t, uint32_t)>* fn_ = nullptr;
  uint32_t n_ = 0;
  unsigned participants_ = 0;
  unsigned remaining_ = 0;
  uint64_t generation_ = 0;
  bool quit_ = false;
};

}  // namespace detail

// fn(lo, hi) over disjoint blocks covering [0, n).  min_block is the
// smallest worthwhile block: extra workers join only when every block stays
// at least that large, so cheap stages are not swamped by wake latency.
inline void parallel_for(uint32_t n, unsigned workers,
                         const std::function<void(uint32_t, uint32_t)>& fn,
                         uint32_t min_block = 1) {
  if (n == 0) return;
  if (min_block > 1) {
    unsigned limit = std::max<uint32_t>(1, n / min_block);
    workers = std::min<unsigned>(workers, limit);
  }
  if (workers > n) workers = n;
  // nested calls from inside a pool worker run serially
  if (workers <= 1 || n == 1 || detail::tl_in_pool_worker) {
    fn(0, n);
    return;
  }
  detail::WorkerPool::instance().run(n, workers, fn);
}

}  // namespace polypath
