// simulate: runs one configured experiment and writes its CSV table plus a
// JSON run manifest. Exit codes: 0 success, 2 configuration error, 3
// runtime error.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "sdapd/config.hpp"

namespace {

void usage(std::FILE* to) {
    std::fprintf(to,
                 "usage: simulate <config-path> [--seed N] [--frames N] [--out DIR] [--jobs N]\n"
                 "\n"
                 "Runs the experiment described by the config file. CSV results and a\n"
                 "manifest.json land in the output directory (config out_dir, overridden\n"
                 "by --out). --seed and --frames override the config; --jobs caps the\n"
                 "number of worker threads (results do not depend on it).\n");
}

bool parse_u64(const char* s, std::uint64_t& out) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') return false;
    out = v;
    return true;
}

} // namespace

int main(int argc, char** argv) {
    std::string config_path;
    sdapd::RunOverrides overrides;

    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&](const char* name) -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "simulate: %s needs a value\n", name);
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "-h" || arg == "--help") {
            usage(stdout);
            return 0;
        } else if (arg == "--seed") {
            std::uint64_t v;
            if (!parse_u64(next("--seed"), v)) {
                std::fprintf(stderr, "simulate: --seed expects a non-negative integer\n");
                return 2;
            }
            overrides.seed = v;
        } else if (arg == "--frames") {
            std::uint64_t v;
            if (!parse_u64(next("--frames"), v) || v == 0) {
                std::fprintf(stderr, "simulate: --frames expects a positive integer\n");
                return 2;
            }
            overrides.frames = v;
        } else if (arg == "--out") {
            overrides.out_dir = next("--out");
        } else if (arg == "--jobs") {
            std::uint64_t v;
            if (!parse_u64(next("--jobs"), v) || v == 0) {
                std::fprintf(stderr, "simulate: --jobs expects a positive integer\n");
                return 2;
            }
            overrides.jobs = static_cast<int>(v);
        } else if (!arg.empty() && arg[0] == '-') {
            std::fprintf(stderr, "simulate: unknown option '%s'\n", arg.c_str());
            usage(stderr);
            return 2;
        } else if (config_path.empty()) {
            config_path = arg;
        } else {
            std::fprintf(stderr, "simulate: unexpected argument '%s'\n", arg.c_str());
            return 2;
        }
    }

    if (config_path.empty()) {
        usage(stderr);
        return 2;
    }

    try {
        const auto config = sdapd::load_config(config_path);
        const auto output = sdapd::run(config, overrides);
        std::printf("wrote %s (%.2f s)\n", output.csv_path.c_str(), output.wall_time_s);
        std::printf("manifest: %s\n", output.manifest_path.c_str());
        return 0;
    } catch (const sdapd::ConfigError& e) {
        std::fprintf(stderr, "simulate: config error in %s: %s\n", config_path.c_str(), e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "simulate: config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "simulate: %s\n", e.what());
        return 3;
    }
}
