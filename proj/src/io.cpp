#include "nsrl/io.hpp"

#include "nsrl/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nsrl::io {

namespace {

template <class T>
void put(std::string& out, T v)
{
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out.append(b, sizeof(T));
}

template <class T>
T get(std::string_view in, std::size_t& pos)
{
    char b[sizeof(T)];
    std::memcpy(b, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

constexpr std::size_t header_bytes = 4 + 4 + 4 + 8 + 8;

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, "'" + text + "' is not a number");
    }
    if (used != text.size() || !std::isfinite(v)) throw ConfigError(key, "'" + text + "' is not a finite number");
    return v;
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text)
{
    std::string s = text;
    for (char& c : s)
        if (c == ',') c = ' ';
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_number(key, tok));
    return out;
}

} // namespace

std::string encode_snapshot(const Snapshot& s)
{
    const Grid& g = s.grid();
    std::string out;
    out.reserve(header_bytes + 4 * g.size() * 8);
    out.append(snapshot_magic, 4);
    put<std::uint32_t>(out, snapshot_version);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
    put<double>(out, g.box_length());
    put<double>(out, s.time);
    for (int c = 0; c < 3; ++c)
        for (double v : s.velocity[c].values()) put<double>(out, v);
    for (double v : s.pressure.values()) put<double>(out, v);
    return out;
}

Snapshot decode_snapshot(std::string_view bytes)
{
    if (bytes.size() < header_bytes) throw FormatError("snapshot: truncated header");
    if (std::memcmp(bytes.data(), snapshot_magic, 4) != 0) throw FormatError("snapshot: bad magic");
    std::size_t pos = 4;
    const auto version = get<std::uint32_t>(bytes, pos);
    if (version != snapshot_version) throw FormatError("snapshot: unsupported version " + std::to_string(version));
    const auto n = get<std::uint32_t>(bytes, pos);
    const double L = get<double>(bytes, pos);
    const double t = get<double>(bytes, pos);
    if (n == 0 || n > 4096) throw FormatError("snapshot: implausible n = " + std::to_string(n));
    const std::size_t cells = static_cast<std::size_t>(n) * n * n;
    if (bytes.size() != header_bytes + 4 * cells * 8)
        throw FormatError("snapshot: payload length " + std::to_string(bytes.size()) + " does not match n = " +
                          std::to_string(n));
    if (!(L > 0.0) || !std::isfinite(t)) throw FormatError("snapshot: invalid box length or time");
    const Grid g(static_cast<int>(n), L);
    auto read_field = [&] {
        std::vector<double> v(cells);
        for (auto& x : v) x = get<double>(bytes, pos);
        try {
            return ScalarField(g, std::move(v));
        } catch (const DomainError& e) {
            throw FormatError(std::string("snapshot: ") + e.what());
        }
    };
    auto u1 = read_field();
    auto u2 = read_field();
    auto u3 = read_field();
    auto p = read_field();
    return Snapshot(t, VectorField(std::move(u1), std::move(u2), std::move(u3)), std::move(p));
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return std::move(os).str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string encode_manifest(const Manifest& m)
{
    nlohmann::ordered_json j;
    j["format"] = "nsrl-manifest";
    j["version"] = 1;
    j["grid"] = {{"n", m.n}, {"box_length", m.box_length}};
    auto& list = j["snapshots"] = nlohmann::ordered_json::array();
    for (const auto& e : m.entries) list.push_back({{"file", e.file}, {"time", e.time}, {"fnv1a64", hex64(e.checksum)}});
    return j.dump(2) + "\n";
}

Manifest decode_manifest(std::string_view text)
{
    Manifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format").get<std::string>() != "nsrl-manifest") throw FormatError("manifest: wrong format tag");
        m.n = j.at("grid").at("n").get<int>();
        m.box_length = j.at("grid").at("box_length").get<double>();
        for (const auto& e : j.at("snapshots")) {
            ManifestEntry entry;
            entry.file = e.at("file").get<std::string>();
            entry.time = e.at("time").get<double>();
            entry.checksum = std::stoull(e.at("fnv1a64").get<std::string>(), nullptr, 16);
            m.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw FormatError("manifest: malformed checksum");
    }
    for (std::size_t i = 1; i < m.entries.size(); ++i)
        if (!(m.entries[i].time > m.entries[i - 1].time)) throw FormatError("manifest: times not strictly increasing");
    return m;
}

SeriesWriter::SeriesWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void SeriesWriter::add(const Snapshot& s)
{
    if (manifest_.entries.empty()) {
        manifest_.n = s.grid().n();
        manifest_.box_length = s.grid().box_length();
    } else {
        if (s.grid().n() != manifest_.n || s.grid().box_length() != manifest_.box_length)
            throw DomainError("series: snapshots on different grids");
        if (!(s.time > manifest_.entries.back().time)) throw WindowError("series: times must be strictly increasing");
    }
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.nsrs", manifest_.entries.size());
    const auto bytes = encode_snapshot(s);
    write_file_atomic(dir_ / name, bytes);
    manifest_.entries.push_back({name, s.time, fnv1a64(bytes)});
}

fs::path SeriesWriter::finish()
{
    const fs::path manifest = dir_ / "manifest.json";
    write_file_atomic(manifest, encode_manifest(manifest_));
    return manifest;
}

fs::path write_series(const SpaceTimeSlab& slab, const fs::path& dir)
{
    SeriesWriter w(dir);
    for (const auto& s : slab.snapshots()) w.add(s);
    return w.finish();
}

SpaceTimeSlab load_series(const fs::path& manifest_path)
{
    const Manifest m = decode_manifest(read_file(manifest_path));
    const fs::path dir = manifest_path.parent_path();
    std::vector<Snapshot> snaps;
    snaps.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        const auto bytes = read_file(dir / e.file);
        const auto sum = fnv1a64(bytes);
        if (sum != e.checksum)
            throw FormatError("checksum mismatch for " + e.file + ": manifest " + hex64(e.checksum) + ", file " + hex64(sum));
        auto s = decode_snapshot(bytes);
        if (s.time != e.time) throw FormatError("time mismatch for " + e.file);
        if (s.grid().n() != m.n || s.grid().box_length() != m.box_length)
            throw FormatError("grid mismatch for " + e.file);
        snaps.push_back(std::move(s));
    }
    return SpaceTimeSlab(std::move(snaps));
}

Config parse_config(std::string_view text)
{
    Config c;
    c.text = std::string(text);
    std::istringstream is(c.text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        if (!c.values.emplace(key, value).second) throw ConfigError(key, "repeated key");
    }
    return c;
}

Config read_config(const fs::path& path)
{
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(path.string(), e.what());
    }
    return parse_config(text);
}

ConfigReader::ConfigReader(const Config& config, std::vector<std::string> known) : config_(config)
{
    for (const auto& [key, value] : config.values)
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown key");
}

bool ConfigReader::has(const std::string& key) const { return config_.values.count(key) > 0; }

const std::string& ConfigReader::raw(const std::string& key) const { return config_.values.at(key); }

std::string ConfigReader::get_string(const std::string& key, const std::string& fallback) const
{
    return has(key) ? raw(key) : fallback;
}

double ConfigReader::get_double(const std::string& key, double fallback) const
{
    return has(key) ? parse_number(key, raw(key)) : fallback;
}

std::optional<double> ConfigReader::get_optional(const std::string& key) const
{
    if (!has(key)) return std::nullopt;
    return parse_number(key, raw(key));
}

double ConfigReader::require_double(const std::string& key) const
{
    if (!has(key)) throw ConfigError(key, "required key missing");
    return parse_number(key, raw(key));
}

long ConfigReader::get_int(const std::string& key, long fallback) const
{
    if (!has(key)) return fallback;
    const double v = parse_number(key, raw(key));
    if (v != std::floor(v)) throw ConfigError(key, "expected an integer");
    return static_cast<long>(v);
}

bool ConfigReader::get_bool(const std::string& key, bool fallback) const
{
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected true or false");
}

std::vector<double> ConfigReader::get_list(const std::string& key) const
{
    if (!has(key)) return {};
    return parse_numbers(key, raw(key));
}

std::vector<std::vector<double>> ConfigReader::get_groups(const std::string& key) const
{
    std::vector<std::vector<double>> out;
    if (!has(key)) return out;
    std::istringstream is(raw(key));
    std::string group;
    while (std::getline(is, group, ';')) {
        if (trim(group).empty()) continue;
        out.push_back(parse_numbers(key, group));
    }
    return out;
}

int exit_code(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const StabilityError*>(&e) || dynamic_cast<const DivergenceError*>(&e)) return 3;
    if (dynamic_cast<const FormatError*>(&e)) return 4;
    if (dynamic_cast<const GeometryError*>(&e) || dynamic_cast<const WindowError*>(&e) ||
        dynamic_cast<const ResolutionError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const SelectionError*>(&e))
        return 5;
    if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const DegenerateFieldError*>(&e)) return 6;
    return 1;
}

} // namespace nsrl::io
