#include "sdapd/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace sdapd {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'A', 'P', 'D', 'T', 'R', 'C'};
constexpr std::uint32_t kTraceVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b;
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b.data(), b.size());
}

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream& in) {
    std::array<char, 4> b;
    in.read(b.data(), b.size());
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

bool get_u64(std::istream& in, std::uint64_t& v) {
    std::array<char, 8> b;
    in.read(b.data(), b.size());
    if (in.gcount() == 0) return false;
    if (in.gcount() != static_cast<std::streamsize>(b.size()))
        throw std::runtime_error("trace: truncated gate index");
    v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[static_cast<std::size_t>(i)])) << (8 * i);
    return true;
}

} // namespace

void write_click_trace(std::ostream& out, const ClickTrace& trace) {
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, kTraceVersion);
    put_u32(out, static_cast<std::uint32_t>(trace.frame_gates));
    for (std::size_t i = 0; i < trace.clicks.size(); ++i)
        if (trace.clicks[i]) put_u64(out, static_cast<std::uint64_t>(i));
    if (!out) throw std::runtime_error("trace: write failed");
}

void write_click_trace_file(const std::string& path, const ClickTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("trace: cannot open '" + path + "' for writing");
    write_click_trace(out, trace);
}

TraceDump read_click_trace(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("trace: bad magic");
    const std::uint32_t version = get_u32(in);
    if (version != kTraceVersion)
        throw std::runtime_error("trace: unsupported version " + std::to_string(version));
    TraceDump dump;
    dump.frame_gates = get_u32(in);
    if (!in) throw std::runtime_error("trace: truncated header");
    std::uint64_t gate = 0;
    std::uint64_t previous = 0;
    bool first = true;
    while (get_u64(in, gate)) {
        if (!first && gate <= previous) throw std::runtime_error("trace: gate indices not ascending");
        dump.click_gates.push_back(gate);
        previous = gate;
        first = false;
    }
    return dump;
}

TraceDump read_click_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("trace: cannot open '" + path + "'");
    return read_click_trace(in);
}

} // namespace sdapd
