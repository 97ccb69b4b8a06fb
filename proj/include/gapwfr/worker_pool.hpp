#ifndef GAPWFR_WORKER_POOL_HPP
#define GAPWFR_WORKER_POOL_HPP

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gapwfr {

/// Fixed set of workers executing one bulk job at a time. Work is split into
/// contiguous index blocks, one per worker; the calling thread runs block 0 and
/// returns once every block has finished (the barrier between sweeps).
class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers = 1) : workers_(workers == 0 ? 1 : workers) {
    threads_.reserve(workers_ - 1);
    for (unsigned k = 1; k < workers_; ++k) threads_.emplace_back([this, k] { loop(k); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
      ++generation_;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  unsigned size() const { return workers_; }

  /// Calls fn(i) for every i in [0, count). Rethrows the first exception.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (workers_ == 1 || count < 2) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      job_ = &fn;
      count_ = count;
      pending_ = workers_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    wake_.notify_all();
    run_block(0);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void run_block(unsigned k) {
    const std::size_t begin = count_ * k / workers_;
    const std::size_t end = count_ * (k + 1) / workers_;
    try {
      for (std::size_t i = begin; i < end; ++i) (*job_)(i);
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }

  void loop(unsigned k) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      run_block(k);
      {
        std::lock_guard lock(mutex_);
        --pending_;
      }
      done_.notify_one();
    }
  }

  unsigned workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t count_ = 0;
  unsigned pending_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace gapwfr

#endif  // GAPWFR_WORKER_POOL_HPP
