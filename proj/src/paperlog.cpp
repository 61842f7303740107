// The block shapes here (header dashes, section names, the exact
// send/operate phrasings including the trailing space after "events." and
// the "in the another thread" wording) reproduce the original tool's log
// output byte for byte; tests pin them against the shipped log documents.
#include "evolve/paperlog.hpp"

#include <cctype>
#include <stdexcept>

namespace evolve::paperlog {

namespace {

using mapek::ActionSpec;
using mapek::Mode;
using mapek::Source;
using mapek::StepRecord;

bool has_upper_tail(const std::string& s) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::isupper(static_cast<unsigned char>(s[i]))) return true;
    return false;
}

// States always display with a capital first letter (spotWait ->
// SpotWait); events only when the name has no internal uppercase (clean
// -> Clean, but arriveSpot stays as is).
std::string cap_state(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string uncap_state(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

std::string cap_event(std::string s) {
    if (!s.empty() && !has_upper_tail(s))
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string uncap_event(std::string s) {
    if (!s.empty() && !has_upper_tail(s))
        s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

const char* source_label(Source s) {
    switch (s) {
        case Source::Controller: return "button_event";
        case Source::Device: return "device_event";
        case Source::Internal: return "internal_event";
    }
    return "button_event";
}

const char* mode_label(Mode m) {
    switch (m) {
        case Mode::Existing: return "Use existing functions";
        case Mode::New: return "Use new functions";
        case Mode::Rejected: return "Reject this event";
    }
    return "Reject this event";
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

[[noreturn]] void bad_line(int lineno, const std::string& why,
                           const std::string& line) {
    throw std::runtime_error("paper log line " + std::to_string(lineno) + ": " +
                             why + ": " + line);
}

}  // namespace

std::string render(const std::vector<StepRecord>& records) {
    std::string out;
    for (const StepRecord& r : records) {
        out += "----   ";
        out += source_label(r.event.source);
        out += " : ";
        out += cap_event(r.event.name);
        out += "   -----\n\n";
        out += "Monitor\n";
        out += " inputs " + cap_event(r.event.name) + " event.\n";
        out += "Analyze\n";
        out += " original_current_state: " + cap_state(r.o_before) + "\n";
        out += " new_current_state: " + cap_state(r.n_before) + "\n";
        out += std::string(" mode: ") + mode_label(r.mode) + "\n";
        out += "Plan\n";
        if (r.action.kind != ActionSpec::Kind::Forward)
            out += " MAPE-K loop does not send events. \n";
        out += "Execute\n";
        if (r.action.kind == ActionSpec::Kind::Invoke)
            out += " Operate existing functions for " + cap_state(r.action.handler) +
                   " in the another thread\n";
        if (r.action.kind == ActionSpec::Kind::Forward)
            for (const auto& e : r.action.events)
                out += " MAPE-K loop will send this event : " + cap_event(e) + "\n";
        out += " original_current_state: " + cap_state(r.o_after) + "\n";
        out += " new_current_state: " + cap_state(r.n_after) + "\n";
        if (!r.note.empty()) out += "# " + r.note + "\n";
        out += "\n";
        if (r.mode == Mode::New) out += "***  Start to run new functions. ***\n\n";
    }
    return out;
}

std::vector<StepRecord> parse(const std::string& text) {
    std::vector<StepRecord> records;
    bool open = false;
    StepRecord cur;
    enum class Stage { Header, Monitor, Analyze, Plan, Execute } stage = Stage::Header;

    auto finalize = [&](int lineno) {
        if (!open) return;
        // A block must have reached its Execute section and reported both
        // after-states; anything less is a truncated log.
        if (stage != Stage::Execute || cur.o_after.empty() || cur.n_after.empty())
            throw std::runtime_error("paper log line " + std::to_string(lineno) +
                                     ": block for '" + cur.event.name +
                                     "' is truncated");
        records.push_back(cur);
        open = false;
    };

    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            if (pos == text.size()) break;
            nl = text.size();
        }
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;

        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        if (starts_with(trimmed, "***")) continue;       // new-function banners
        if (ends_with(trimmed, " command")) continue;    // device echo lines

        if (starts_with(line, "----")) {
            finalize(lineno);
            std::size_t b = line.find_first_not_of("- ");
            std::size_t e = line.find_last_not_of("- ");
            if (b == std::string::npos) bad_line(lineno, "empty block header", line);
            std::string head = line.substr(b, e - b + 1);
            std::size_t sep = head.find(" : ");
            if (sep == std::string::npos)
                bad_line(lineno, "malformed block header", line);
            std::string src = head.substr(0, sep);
            std::string ev = head.substr(sep + 3);
            cur = StepRecord{};
            if (src == "button_event")
                cur.event.source = Source::Controller;
            else if (src == "device_event")
                cur.event.source = Source::Device;
            else if (src == "internal_event")
                cur.event.source = Source::Internal;
            else
                bad_line(lineno, "unknown event source '" + src + "'", line);
            cur.event.name = uncap_event(ev);
            cur.event.seq = records.size() + 1;
            open = true;
            stage = Stage::Header;
            continue;
        }
        if (!open) bad_line(lineno, "content before the first block header", line);

        if (line == "Monitor") {
            stage = Stage::Monitor;
        } else if (line == "Analyze") {
            stage = Stage::Analyze;
        } else if (line == "Plan") {
            stage = Stage::Plan;
        } else if (line == "Execute") {
            stage = Stage::Execute;
        } else if (starts_with(line, " inputs ") && ends_with(trimmed, " event.")) {
            std::string ev = trimmed.substr(7, trimmed.size() - 7 - 7);
            if (uncap_event(trim(ev)) != cur.event.name)
                bad_line(lineno, "inputs line disagrees with the block header", line);
        } else if (starts_with(line, " original_current_state: ")) {
            std::string v = uncap_state(trim(line.substr(25)));
            (stage == Stage::Analyze ? cur.o_before : cur.o_after) = v;
        } else if (starts_with(line, " new_current_state: ")) {
            std::string v = uncap_state(trim(line.substr(20)));
            (stage == Stage::Analyze ? cur.n_before : cur.n_after) = v;
        } else if (starts_with(line, " mode: ")) {
            std::string m = trim(line.substr(7));
            if (m == "Use existing functions")
                cur.mode = Mode::Existing;
            else if (m == "Use new functions")
                cur.mode = Mode::New;
            else if (m == "Reject this event")
                cur.mode = Mode::Rejected;
            else
                bad_line(lineno, "unknown mode '" + m + "'", line);
        } else if (trimmed == "MAPE-K loop does not send events.") {
            // informational; the Execute section carries the action
        } else if (starts_with(line, " MAPE-K loop will send this event : ")) {
            cur.action.kind = ActionSpec::Kind::Forward;
            cur.action.events.push_back(uncap_event(trim(line.substr(36))));
        } else if (starts_with(line, " Operate existing functions for ") &&
                   ends_with(trimmed, " in the another thread")) {
            cur.action.kind = ActionSpec::Kind::Invoke;
            std::string body = trimmed.substr(31);  // after "...functions for"
            cur.action.handler =
                uncap_state(trim(body.substr(0, body.size() - 22)));
        } else if (starts_with(line, "# ")) {
            cur.note = line.substr(2);
        } else {
            bad_line(lineno, "unrecognized line", line);
        }
    }
    finalize(lineno);
    return records;
}

}  // namespace evolve::paperlog
