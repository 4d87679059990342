#include "pflow/thread_pool.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>

namespace pflow {

ThreadPool::ThreadPool(std::size_t n_threads) {
    const std::size_t n_workers = n_threads > 1 ? n_threads - 1 : 0;
    workers_.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    work_cv_.notify_all();
    for (auto& t : workers_) t.join();
}

ThreadPool::Job* ThreadPool::find_job_locked() {
    for (std::size_t i = 0; i < n_active_; ++i) {
        if (active_[i]->next < active_[i]->n) return active_[i];
    }
    return nullptr;
}

void ThreadPool::run(Job& job) {
    std::unique_lock lock(mutex_);
    if (n_active_ == kMaxJobs) {
        // Nesting deeper than the job table: run inline.
        lock.unlock();
        for (std::size_t i = 0; i < job.n; ++i) job.invoke(job.ctx, i);
        return;
    }
    active_[n_active_++] = &job;
    work_cv_.notify_all();

    while (job.next < job.n) {
        const std::size_t i = job.next++;
        lock.unlock();
        job.invoke(job.ctx, i);
        lock.lock();
        ++job.done;
    }
    done_cv_.wait(lock, [&] { return job.done == job.n; });

    auto* it = std::find(active_.begin(), active_.begin() + n_active_, &job);
    std::move(it + 1, active_.begin() + n_active_, it);
    --n_active_;
}

void ThreadPool::worker_loop() {
    std::unique_lock lock(mutex_);
    while (true) {
        Job* job = nullptr;
        work_cv_.wait(lock, [&] { return stop_ || (job = find_job_locked()) != nullptr; });
        if (stop_) return;
        const std::size_t i = job->next++;
        lock.unlock();
        job->invoke(job->ctx, i);
        lock.lock();
        if (++job->done == job->n) done_cv_.notify_all();
    }
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("PFLOW_THREADS")) {
        std::size_t n = 0;
        const char* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, n);
        if (ec == std::errc() && ptr == end && n > 0) return n;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace pflow
