#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdapd/detector.hpp"

namespace sdapd {

inline constexpr const char* kVersion = "1.0.0";

/// Click-trace dump: a 16-byte header (magic "SDAPDTRC", u32 version = 1,
/// u32 frame_gates, both little-endian) followed by the ascending u64
/// little-endian gate indices of every click. Index gaps encode the runs of
/// empty gates, so the file is a run-length form of the boolean trace.
struct TraceDump {
    std::uint32_t frame_gates = 1;
    std::vector<std::uint64_t> click_gates;
};

void write_click_trace(std::ostream& out, const ClickTrace& trace);
void write_click_trace_file(const std::string& path, const ClickTrace& trace);
TraceDump read_click_trace(std::istream& in);
TraceDump read_click_trace_file(const std::string& path);

} // namespace sdapd
