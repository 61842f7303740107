// Scheduler abstraction shared by the converter's state-entry timers, the
// simulated devices' dwell emissions, and the builtin handlers. The
// scenario harness implements it with a virtual clock; live mode with a
// wall-clock timer thread.
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

namespace evolve {

using TimerId = std::uint64_t;

class Scheduler {
public:
    virtual ~Scheduler() = default;

    // One-shot callback after delay_ms. Returns a generation-unique id; a
    // timer cancelled before firing never runs its callback, even if the
    // fire time has already been reached.
    virtual TimerId schedule(std::int64_t delay_ms, std::function<void()> fn) = 0;
    virtual void cancel(TimerId id) = 0;

    virtual std::int64_t now_ms() const = 0;
};

// Real-time scheduler backed by one worker thread. Callbacks run on that
// thread with no internal lock held, so they may schedule or cancel
// freely. The destructor drops unfired timers and joins the worker.
class WallScheduler final : public Scheduler {
public:
    WallScheduler();
    ~WallScheduler() override;

    WallScheduler(const WallScheduler&) = delete;
    WallScheduler& operator=(const WallScheduler&) = delete;

    TimerId schedule(std::int64_t delay_ms, std::function<void()> fn) override;
    void cancel(TimerId id) override;
    std::int64_t now_ms() const override;  // since construction

private:
    struct Entry {
        std::chrono::steady_clock::time_point due;
        std::function<void()> fn;
    };

    void worker();

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<TimerId, Entry> pending_;
    TimerId next_id_ = 1;
    bool stop_ = false;
    std::chrono::steady_clock::time_point epoch_;
    std::thread th_;
};

}  // namespace evolve
