// Wall-clock TCP deployment of the converter: newline-delimited event
// names on a controller socket, the device peer on a second connection,
// and the start/stop/status/exit command set on a control socket.
#pragma once

#include <cstdint>
#include <string>

#include "evolve/devices.hpp"
#include "evolve/evolution.hpp"
#include "evolve/mapek.hpp"

namespace evolve::live {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 = ephemeral, actual port is announced
};

// "host:port" with a numeric port.
Endpoint parse_endpoint(const std::string& text);

struct LiveConfig {
    Endpoint listen;        // controller events in
    Endpoint control;       // command channel
    // Builtin kind ("lightbulb"/"robot") for an in-process device, or
    // "host:port" to serve a TCP device peer: forwarded events are
    // written to it, lines it sends come back as device-sourced events.
    std::string device = "lightbulb";
    std::string trace_path;  // empty = stdout
};

// Blocks until an `exit` control command (or fatal socket error). On
// startup prints one line to stdout:
//   listening controller=<host:port> control=<host:port>
// so callers binding port 0 can discover the ports. Returns the process
// exit code.
int run_live(const evolution::ValidatedPair& pair, mapek::HandlerRegistry handlers,
             const LiveConfig& cfg);

}  // namespace evolve::live
