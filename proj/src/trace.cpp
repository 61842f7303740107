#include "evolve/trace.hpp"

#include <sstream>
#include <stdexcept>

namespace evolve::trace {

namespace {

std::string join(const std::vector<std::string>& xs, char sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void bad(std::size_t lineno, const std::string& line, const std::string& why) {
    throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + why +
                             ": " + line);
}

// "key=value" with a fixed expected key.
std::string field(const std::string& part, const std::string& key, std::size_t lineno,
                  const std::string& line) {
    const std::string prefix = key + "=";
    if (part.rfind(prefix, 0) != 0) bad(lineno, line, "expected field '" + key + "'");
    return part.substr(prefix.size());
}

// "before>after"
std::pair<std::string, std::string> arrow(const std::string& v, std::size_t lineno,
                                          const std::string& line) {
    auto pos = v.find('>');
    if (pos == std::string::npos) bad(lineno, line, "expected '<before>><after>'");
    return {v.substr(0, pos), v.substr(pos + 1)};
}

}  // namespace

std::string render_step(const mapek::StepRecord& r) {
    std::ostringstream os;
    os << "seq=" << r.event.seq;
    os << "\tevent=" << r.event.name;
    os << "\tsrc=" << mapek::to_string(r.event.source);
    os << "\tmode=" << mapek::to_string(r.mode);
    os << "\tsent=";
    if (r.action.kind == mapek::ActionSpec::Kind::Forward)
        os << join(r.action.events, ',');
    else
        os << '-';
    os << "\thandler=";
    if (r.action.kind == mapek::ActionSpec::Kind::Invoke)
        os << r.action.handler;
    else
        os << '-';
    os << "\to=" << r.o_before << '>' << r.o_after;
    os << "\tn=" << r.n_before << '>' << r.n_after;
    return os.str();
}

std::vector<mapek::StepRecord> parse_trace(const std::string& text) {
    std::vector<mapek::StepRecord> out;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto parts = split(line, '\t');
        if (parts.size() != 8) bad(lineno, line, "expected 8 tab-separated fields");

        mapek::StepRecord r;
        try {
            r.event.seq = std::stoull(field(parts[0], "seq", lineno, line));
        } catch (const std::logic_error&) {
            bad(lineno, line, "seq is not a number");
        }
        r.event.name = field(parts[1], "event", lineno, line);

        auto src = mapek::source_from_string(field(parts[2], "src", lineno, line));
        if (!src) bad(lineno, line, "unknown src");
        r.event.source = *src;

        auto mode = mapek::mode_from_string(field(parts[3], "mode", lineno, line));
        if (!mode) bad(lineno, line, "unknown mode");
        r.mode = *mode;

        std::string sent = field(parts[4], "sent", lineno, line);
        std::string handler = field(parts[5], "handler", lineno, line);
        if (handler != "-") {
            r.action.kind = mapek::ActionSpec::Kind::Invoke;
            r.action.handler = handler;
            if (sent != "-") bad(lineno, line, "invoke step cannot also send events");
        } else if (sent != "-") {
            r.action.kind = mapek::ActionSpec::Kind::Forward;
            r.action.events = split(sent, ',');
            for (const auto& e : r.action.events)
                if (e.empty()) bad(lineno, line, "empty event in sent list");
        } else {
            r.action.kind = mapek::ActionSpec::Kind::None;
        }

        std::tie(r.o_before, r.o_after) = arrow(field(parts[6], "o", lineno, line), lineno, line);
        std::tie(r.n_before, r.n_after) = arrow(field(parts[7], "n", lineno, line), lineno, line);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace evolve::trace
