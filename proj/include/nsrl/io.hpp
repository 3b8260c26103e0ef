#pragma once

#include "nsrl/field.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsrl::io {

namespace fs = std::filesystem;

inline constexpr std::uint32_t snapshot_version = 1;
inline constexpr char snapshot_magic[4] = {'N', 'S', 'R', 'S'};

// magic, version, n, box_length, time, then u1 u2 u3 p as n^3 little-endian doubles each.
std::string encode_snapshot(const Snapshot& s);
// Throws FormatError on bad magic, version or length.
Snapshot decode_snapshot(std::string_view bytes);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const fs::path& path);
// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const fs::path& path, std::string_view bytes);

struct ManifestEntry {
    std::string file;  // relative to the manifest's directory
    double time = 0.0;
    std::uint64_t checksum = 0;
};

struct Manifest {
    int n = 0;
    double box_length = 0.0;
    std::vector<ManifestEntry> entries;
};

std::string encode_manifest(const Manifest& m);
Manifest decode_manifest(std::string_view text);

// Writes snap_00000.nsrs, ... and manifest.json into dir; returns the manifest path.
fs::path write_series(const SpaceTimeSlab& slab, const fs::path& dir);

// Streams snapshots to disk one at a time; finish() writes the manifest.
class SeriesWriter {
public:
    explicit SeriesWriter(fs::path dir);
    void add(const Snapshot& s);
    fs::path finish();

private:
    fs::path dir_;
    Manifest manifest_;
};

// Verifies every checksum and the recorded times (FormatError on mismatch).
SpaceTimeSlab load_series(const fs::path& manifest_path);

// Plain-text key = value, '#' starts a comment. Throws ConfigError on malformed lines
// and repeated keys.
struct Config {
    std::string text;
    std::map<std::string, std::string> values;
};

Config parse_config(std::string_view text);
Config read_config(const fs::path& path);

// Typed access to a Config restricted to a set of known keys.
class ConfigReader {
public:
    ConfigReader(const Config& config, std::vector<std::string> known);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::optional<double> get_optional(const std::string& key) const;
    double require_double(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Numbers separated by commas or whitespace.
    std::vector<double> get_list(const std::string& key) const;
    // Groups separated by ';', each a list of numbers.
    std::vector<std::vector<double>> get_groups(const std::string& key) const;

private:
    const std::string& raw(const std::string& key) const;

    const Config& config_;
};

// Exit-code contract of the command-line tool.
int exit_code(const std::exception& e);

} // namespace nsrl::io
