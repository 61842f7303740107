#include "evolve/clock.hpp"

namespace evolve {

WallScheduler::WallScheduler()
    : epoch_(std::chrono::steady_clock::now()), th_([this] { worker(); }) {}

WallScheduler::~WallScheduler() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
        pending_.clear();
    }
    cv_.notify_all();
    th_.join();
}

TimerId WallScheduler::schedule(std::int64_t delay_ms, std::function<void()> fn) {
    TimerId id;
    {
        std::lock_guard lk(mu_);
        id = next_id_++;
        pending_.emplace(id, Entry{std::chrono::steady_clock::now() +
                                       std::chrono::milliseconds(delay_ms),
                                   std::move(fn)});
    }
    cv_.notify_all();
    return id;
}

void WallScheduler::cancel(TimerId id) {
    std::lock_guard lk(mu_);
    pending_.erase(id);
}

std::int64_t WallScheduler::now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - epoch_)
        .count();
}

void WallScheduler::worker() {
    std::unique_lock lk(mu_);
    for (;;) {
        if (stop_) return;
        if (pending_.empty()) {
            cv_.wait(lk);
            continue;
        }
        auto due_it = pending_.begin();
        for (auto it = pending_.begin(); it != pending_.end(); ++it)
            if (it->second.due < due_it->second.due) due_it = it;
        auto now = std::chrono::steady_clock::now();
        if (due_it->second.due <= now) {
            auto fn = std::move(due_it->second.fn);
            pending_.erase(due_it);
            lk.unlock();
            fn();
            lk.lock();
        } else {
            cv_.wait_until(lk, due_it->second.due);
        }
    }
}

}  // namespace evolve
