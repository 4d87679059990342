#pragma once

// Fixed worker pool with a blocking, allocation-free parallel_for.
//
// A parallel_for call publishes a job that lives on the caller's stack; the
// caller executes tasks of its own job alongside the workers and returns
// once every task finished. Calls may nest (a task may itself call
// parallel_for): the nested caller keeps draining its own job, so the pool
// can be oversubscribed but never deadlocks. Tasks must not throw.

#include <array>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace pflow {

class ThreadPool {
  public:
    /// `n_threads` counts the calling thread, so n_threads - 1 workers are
    /// started. Zero is treated as one.
    explicit ThreadPool(std::size_t n_threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const noexcept { return workers_.size() + 1; }

    template <class F>
    void parallel_for(std::size_t n_tasks, F&& fn) {
        using Fn = std::remove_reference_t<F>;
        if (n_tasks == 0) return;
        if (n_tasks == 1 || workers_.empty()) {
            for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
            return;
        }
        Job job;
        job.invoke = [](void* ctx, std::size_t i) { (*static_cast<Fn*>(ctx))(i); };
        job.ctx = const_cast<void*>(static_cast<const void*>(&fn));
        job.n = n_tasks;
        run(job);
    }

  private:
    struct Job {
        void (*invoke)(void*, std::size_t) = nullptr;
        void* ctx = nullptr;
        std::size_t n = 0;
        std::size_t next = 0;   // guarded by mutex_
        std::size_t done = 0;   // guarded by mutex_
    };

    static constexpr std::size_t kMaxJobs = 64;

    void run(Job& job);
    void worker_loop();
    Job* find_job_locked();

    std::mutex mutex_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    std::array<Job*, kMaxJobs> active_{};
    std::size_t n_active_ = 0;
    bool stop_ = false;
    std::vector<std::thread> workers_;
};

/// Pool size from PFLOW_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t default_thread_count();

}  // namespace pflow
