// Wall-clock deployment. The wire protocol is deliberately the simplest
// faithful stand-in for the original serial-port transport: newline-
// delimited UTF-8 event names, one TCP connection per peer; the vendored
// HTTP library is unused here on purpose.
#include "evolve/live.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "evolve/devices.hpp"
#include "evolve/log.hpp"
#include "evolve/trace.hpp"

namespace evolve::live {

namespace {

using mapek::EventName;
using mapek::Source;

// ---- sockets ------------------------------------------------------------

[[noreturn]] void sys_fail(const std::string& what) {
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

struct FdRegistry {
    std::mutex mu;
    std::vector<int> fds;

    void add(int fd) {
        std::lock_guard<std::mutex> lock(mu);
        fds.push_back(fd);
    }
    // shutdown() unblocks blocked accept()/recv() on other threads, which
    // plain close() does not guarantee.
    void shutdown_all() {
        std::lock_guard<std::mutex> lock(mu);
        for (int fd : fds) ::shutdown(fd, SHUT_RDWR);
    }
    ~FdRegistry() {
        for (int fd : fds) ::close(fd);
    }
};

int listen_on(const Endpoint& ep, std::uint16_t* actual_port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    int rc = ::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(),
                           &hints, &res);
    if (rc != 0)
        throw std::runtime_error("cannot resolve " + ep.host + ": " +
                                 gai_strerror(rc));
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) sys_fail("socket");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0) {
        int saved = errno;
        ::close(fd);
        errno = saved;
        sys_fail("cannot bind " + ep.host + ":" + std::to_string(ep.port));
    }
    if (::listen(fd, 8) != 0) {
        int saved = errno;
        ::close(fd);
        errno = saved;
        sys_fail("listen");
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
        int saved = errno;
        ::close(fd);
        errno = saved;
        sys_fail("getsockname");
    }
    *actual_port = ntohs(bound.sin_port);
    return fd;
}

int connect_to(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    int rc = ::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(),
                           &hints, &res);
    if (rc != 0)
        throw std::runtime_error("cannot resolve " + ep.host + ": " +
                                 gai_strerror(rc));
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) sys_fail("socket");
    if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
        int saved = errno;
        ::close(fd);
        errno = saved;
        sys_fail("cannot connect to device peer " + ep.host + ":" +
                 std::to_string(ep.port));
    }
    return fd;
}

// Reads newline-delimited lines until EOF/error; strips a trailing '\r'.
void read_lines(int fd, const std::function<void(std::string)>& on_line) {
    std::string buf;
    char chunk[512];
    for (;;) {
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) return;
        buf.append(chunk, static_cast<std::size_t>(n));
        std::size_t p;
        while ((p = buf.find('\n')) != std::string::npos) {
            std::string line = buf.substr(0, p);
            buf.erase(0, p + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            on_line(std::move(line));
        }
    }
}

bool write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

// ---- helpers around the loop --------------------------------------------

// Serializes handler bodies on one worker thread: handlers still run off
// the loop thread, but never race each other on the shared flags.
class HandlerExecutor {
public:
    HandlerExecutor() : worker_([this] { run(); }) {}
    ~HandlerExecutor() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        worker_.join();
    }

    void post(std::function<void()> task) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            tasks_.push_back(std::move(task));
        }
        cv_.notify_all();
    }

private:
    void run() {
        std::unique_lock<std::mutex> lock(mu_);
        for (;;) {
            cv_.wait(lock, [this] { return stop_ || !tasks_.empty(); });
            if (tasks_.empty() && stop_) return;
            auto task = std::move(tasks_.front());
            tasks_.pop_front();
            lock.unlock();
            task();
            lock.lock();
        }
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> tasks_;
    bool stop_ = false;
    std::thread worker_;
};

// The simulated device is single-threaded by design; under the wall clock
// its dwell callbacks fire on the scheduler worker while the loop thread
// delivers events, so both paths go through one mutex.
class LockedScheduler final : public Scheduler {
public:
    LockedScheduler(Scheduler* base, std::mutex* mu) : base_(base), mu_(mu) {}
    TimerId schedule(std::int64_t delay_ms, std::function<void()> fn) override {
        return base_->schedule(delay_ms, [mu = mu_, f = std::move(fn)] {
            std::lock_guard<std::mutex> lock(*mu);
            f();
        });
    }
    void cancel(TimerId id) override { base_->cancel(id); }
    std::int64_t now_ms() const override { return base_->now_ms(); }

private:
    Scheduler* base_;
    std::mutex* mu_;
};

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
    std::size_t colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw std::invalid_argument("endpoint must be host:port, got '" + text +
                                    "'");
    Endpoint ep;
    ep.host = text.substr(0, colon);
    std::string port = text.substr(colon + 1);
    long value = 0;
    for (char c : port) {
        if (c < '0' || c > '9')
            throw std::invalid_argument("endpoint port must be numeric, got '" +
                                        text + "'");
        value = value * 10 + (c - '0');
        if (value > 65535)
            throw std::invalid_argument("endpoint port out of range in '" + text +
                                        "'");
    }
    ep.port = static_cast<std::uint16_t>(value);
    return ep;
}

int run_live(const evolution::ValidatedPair& pair, mapek::HandlerRegistry handlers,
             const LiveConfig& cfg) {
    // ---- trace output ----
    std::ofstream trace_file;
    std::ostream* trace_out = &std::cout;
    if (!cfg.trace_path.empty()) {
        trace_file.open(cfg.trace_path);
        if (!trace_file.good())
            throw std::runtime_error("cannot open trace output '" +
                                     cfg.trace_path + "'");
        trace_out = &trace_file;
    }

    mapek::Knowledge k = mapek::build_knowledge(pair, std::move(handlers));

    WallScheduler sched;
    std::mutex device_mu;
    LockedScheduler device_sched(&sched, &device_mu);
    HandlerExecutor executor;
    std::map<std::string, std::string> flags;
    FdRegistry fds;
    std::unique_ptr<mapek::Loop> loop;

    // ---- device: builtin simulation or external TCP peer ----
    std::unique_ptr<devices::SimulatedDevice> device;
    int device_fd = -1;
    std::mutex device_write_mu;
    const bool external_device = cfg.device.find(':') != std::string::npos;
    if (external_device) {
        device_fd = connect_to(parse_endpoint(cfg.device));
        fds.add(device_fd);
    } else {
        if (cfg.device == "lightbulb")
            device = std::make_unique<devices::SimulatedDevice>(
                devices::light_bulb_device());
        else if (cfg.device == "robot")
            device = std::make_unique<devices::SimulatedDevice>(
                devices::cleaning_robot_device());
        else
            throw devices::UnknownDeviceKind(cfg.device);
    }

    mapek::LoopServices svc;
    svc.scheduler = &sched;
    svc.flags = &flags;
    // One lock for the whole stream: step records come from the loop thread,
    // peer-disconnect notes from socket reader threads.
    auto trace_mu = std::make_shared<std::mutex>();
    svc.trace = [&, trace_mu](const mapek::StepRecord& r) {
        std::lock_guard<std::mutex> lock(*trace_mu);
        *trace_out << trace::render_step(r) << '\n' << std::flush;
    };
    svc.trace_note = [&, trace_mu](const std::string& note) {
        std::lock_guard<std::mutex> lock(*trace_mu);
        *trace_out << note << '\n' << std::flush;
    };
    if (external_device) {
        svc.sink = [&](const EventName& e) {
            std::lock_guard<std::mutex> lock(device_write_mu);
            if (!write_all(device_fd, e + "\n"))
                throw mapek::SinkFailure("device peer write failed for '" + e +
                                         "'");
        };
    } else {
        svc.sink = [&](const EventName& e) {
            std::lock_guard<std::mutex> lock(device_mu);
            device->receive(e);
        };
    }
    svc.launch = [&](const mapek::Handler& h, mapek::HandlerContext ctx) {
        executor.post([&h, ctx = std::move(ctx)]() mutable { h(ctx); });
    };

    loop = std::make_unique<mapek::Loop>(std::move(k), svc);

    if (device) {
        device->attach(&device_sched, [&](const EventName& e) {
            try {
                loop->queue().enqueue(e, Source::Device);
            } catch (const mapek::QueueClosed&) {
                // the loop exited while a dwell timer was in flight
            }
        });
    }

    // ---- listeners ----
    std::uint16_t controller_port = 0, control_port = 0;
    int controller_fd = listen_on(cfg.listen, &controller_port);
    fds.add(controller_fd);
    int control_fd = listen_on(cfg.control, &control_port);
    fds.add(control_fd);
    std::cout << "listening controller=" << cfg.listen.host << ":"
              << controller_port << " control=" << cfg.control.host << ":"
              << control_port << "\n"
              << std::flush;

    std::mutex threads_mu;
    std::vector<std::thread> threads;
    auto spawn = [&](std::function<void()> fn) {
        std::lock_guard<std::mutex> lock(threads_mu);
        threads.emplace_back(std::move(fn));
    };
    auto peer_note = [&](const std::string& text) { svc.trace_note("# " + text); };

    if (external_device)
        spawn([&, device_fd] {
            read_lines(device_fd, [&](std::string line) {
                if (line.empty()) return;
                try {
                    loop->queue().enqueue(line, Source::Device);
                } catch (const mapek::QueueClosed&) {
                }
            });
            peer_note("device peer disconnected");
        });

    spawn([&, controller_fd] {
        for (;;) {
            int conn = ::accept(controller_fd, nullptr, nullptr);
            if (conn < 0) return;
            fds.add(conn);
            log::debug("controller peer connected");
            spawn([&, conn] {
                read_lines(conn, [&](std::string line) {
                    if (line.empty()) return;
                    try {
                        loop->queue().enqueue(line, Source::Controller);
                    } catch (const mapek::QueueClosed&) {
                    }
                });
                peer_note("controller peer disconnected");
            });
        }
    });

    // The loop can exit while the control reader still owes the client its
    // "ok" reply; shutdown waits for that write so the reply is not cut off.
    std::mutex ack_mu;
    std::condition_variable ack_cv;
    bool exit_acked = false;
    std::atomic<bool> exiting{false};
    spawn([&, control_fd] {
        for (;;) {
            int conn = ::accept(control_fd, nullptr, nullptr);
            if (conn < 0) return;
            fds.add(conn);
            spawn([&, conn] {
                read_lines(conn, [&](std::string line) {
                    if (line.empty()) return;
                    mapek::ControlReply reply = loop->control(line);
                    std::string out =
                        reply.ok ? reply.text : "error: " + reply.text;
                    write_all(conn, out + "\n");
                    if (line == "exit" && reply.ok) {
                        exiting = true;
                        {
                            std::lock_guard<std::mutex> lock(ack_mu);
                            exit_acked = true;
                        }
                        ack_cv.notify_all();
                    }
                });
                if (!exiting) peer_note("control peer disconnected");
            });
        }
    });

    // ---- serve until exit ----
    loop->run();

    {
        std::unique_lock<std::mutex> lock(ack_mu);
        ack_cv.wait_for(lock, std::chrono::seconds(2),
                        [&] { return exit_acked; });
    }
    fds.shutdown_all();
    for (;;) {
        std::vector<std::thread> batch;
        {
            std::lock_guard<std::mutex> lock(threads_mu);
            batch.swap(threads);
        }
        if (batch.empty()) break;
        for (std::thread& t : batch) t.join();
    }
    if (trace_file.is_open()) trace_file.flush();
    return 0;
}

}  // namespace evolve::live
