// SPDX-License-Identifier: Apache-2.0
#include "nleq/capture.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nleq/common.hpp"

namespace nleq::channel {

namespace {

constexpr char kMagic[4] = {'N', 'L', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

// The writer emits little-endian scalars byte by byte so the format does not
// depend on host endianness.
template <typename T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        os.put(static_cast<char>(u & 0xFF));
        u >>= 8;
    }
}

void put_f64(std::ostream& os, double value) {
    std::uint64_t u;
    std::memcpy(&u, &value, sizeof(u));
    put_le(os, u);
}

struct Reader {
    std::istream& is;
    std::size_t offset = 0;

    void read(void* dst, std::size_t len, const char* what) {
        is.read(static_cast<char*>(dst), static_cast<std::streamsize>(len));
        if (static_cast<std::size_t>(is.gcount()) != len)
            throw ParseError(std::string("capture: truncated ") + what + ", length mismatch", offset);
        offset += len;
    }

    template <typename T>
    T get_le(const char* what) {
        unsigned char buf[sizeof(T)];
        read(buf, sizeof(T), what);
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = sizeof(T); i-- > 0;) u = (u << 8) | buf[i];
        return static_cast<T>(u);
    }

    double get_f64(const char* what) {
        const std::uint64_t u = get_le<std::uint64_t>(what);
        double d;
        std::memcpy(&d, &u, sizeof(d));
        return d;
    }
};

CaptureFile load_binary(std::istream& is, const std::filesystem::path& path) {
    Reader r{is};
    char magic[4];
    r.read(magic, 4, "header");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("capture: bad magic", 0);
    const auto version = r.get_le<std::uint32_t>("version");
    if (version != kVersion)
        throw ParseError("capture: unsupported version " + std::to_string(version), 4);
    const auto lane_count = r.get_le<std::uint32_t>("lane count");
    if (lane_count == 0 || lane_count > 4)
        throw ParseError("capture: lane count must be in [1,4]", 8);

    CaptureFile cap;
    cap.path = path;
    for (std::uint32_t l = 0; l < lane_count; ++l) {
        CaptureLane lane;
        const auto lane_id = r.get_le<std::uint32_t>("lane id");
        if (lane_id > 3) throw ParseError("capture: lane id out of range", r.offset - 4);
        lane.lane = modem::lane_from_index(static_cast<int>(lane_id));
        const auto n = r.get_le<std::uint64_t>("lane length");
        const auto m = r.get_le<std::uint32_t>("bits per symbol");
        if (n == 0) throw ParseError("capture: empty lane", r.offset - 12);
        if (m == 0 || m > 6) throw ParseError("capture: bits per symbol out of range", r.offset - 4);

        lane.y.source = "capture:" + path.string();
        lane.y.symbols.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::size_t at = r.offset;
            const double v = r.get_f64("symbol payload");
            if (!std::isfinite(v))
                throw ParseError("capture: non-finite sample", at);
            lane.y.symbols[i] = v;
        }

        lane.bits.n = n;
        lane.bits.m = static_cast<int>(m);
        lane.bits.lane = lane.lane;
        lane.bits.bits.resize(n * m);
        const std::size_t nbits = n * m;
        const std::size_t nbytes = (nbits + 7) / 8;
        std::vector<unsigned char> packed(nbytes);
        r.read(packed.data(), nbytes, "bit payload");
        for (std::size_t i = 0; i < nbits; ++i)
            lane.bits.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;

        cap.lanes.push_back(std::move(lane));
    }
    cap.validate();
    return cap;
}

CaptureFile load_csv(std::istream& is, const std::filesystem::path& path) {
    std::string line;
    std::size_t offset = 0;
    if (!std::getline(is, line)) throw ParseError("capture csv: empty file", 0);
    if (line.rfind("lane,index,y,b1", 0) != 0)
        throw ParseError("capture csv: bad header '" + line + "'", 0);
    int m = 0;
    for (std::size_t pos = 0; (pos = line.find(",b", pos)) != std::string::npos; ++pos) ++m;
    offset += line.size() + 1;

    // rows must be grouped by lane and indexed 0..n-1 within each lane
    CaptureFile cap;
    cap.path = path;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) {
            offset += 1;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        auto next = [&](const char* what) {
            if (!std::getline(ss, field, ','))
                throw ParseError(std::string("capture csv: missing field ") + what + " at line " +
                                     std::to_string(line_no),
                                 offset);
            return field;
        };
        const int lane_id = std::stoi(next("lane"));
        const std::size_t index = static_cast<std::size_t>(std::stoull(next("index")));
        const double y = std::stod(next("y"));
        if (!std::isfinite(y))
            throw ParseError("capture csv: non-finite sample at line " + std::to_string(line_no), offset);

        if (cap.lanes.empty() || static_cast<int>(cap.lanes.back().lane) != lane_id) {
            CaptureLane lane;
            lane.lane = modem::lane_from_index(lane_id);
            lane.bits.m = m;
            lane.bits.lane = lane.lane;
            lane.y.source = "capture:" + path.string();
            cap.lanes.push_back(std::move(lane));
        }
        CaptureLane& lane = cap.lanes.back();
        if (index != lane.y.symbols.size())
            throw ParseError("capture csv: non-contiguous index at line " + std::to_string(line_no), offset);
        lane.y.symbols.push_back(y);
        for (int j = 0; j < m; ++j) {
            const std::string b = next("bit");
            if (b != "0" && b != "1")
                throw ParseError("capture csv: bit must be 0/1 at line " + std::to_string(line_no), offset);
            lane.bits.bits.push_back(static_cast<std::uint8_t>(b == "1"));
        }
        lane.bits.n = lane.y.symbols.size();
        offset += line.size() + 1;
    }
    if (cap.lanes.empty()) throw ParseError("capture csv: no data rows", offset);
    cap.validate();
    return cap;
}

}  // namespace

void CaptureFile::validate() const {
    if (lanes.empty()) throw std::invalid_argument("capture: no lanes");
    for (const auto& lane : lanes) {
        if (lane.y.symbols.size() != lane.bits.n)
            throw std::invalid_argument("capture: symbol/bit length mismatch on lane " +
                                        std::string(modem::lane_name(lane.lane)));
        if (lane.bits.bits.size() != lane.bits.n * static_cast<std::size_t>(lane.bits.m))
            throw std::invalid_argument("capture: bit matrix shape mismatch");
        for (double v : lane.y.symbols)
            if (!std::isfinite(v)) throw std::invalid_argument("capture: non-finite sample");
    }
}

void save_capture(const CaptureFile& cap, const std::filesystem::path& path) {
    cap.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("capture: cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    put_le(os, kVersion);
    put_le(os, static_cast<std::uint32_t>(cap.lanes.size()));
    for (const auto& lane : cap.lanes) {
        put_le(os, static_cast<std::uint32_t>(lane.lane));
        put_le(os, static_cast<std::uint64_t>(lane.y.symbols.size()));
        put_le(os, static_cast<std::uint32_t>(lane.bits.m));
        for (double v : lane.y.symbols) put_f64(os, v);
        const std::size_t nbits = lane.bits.bits.size();
        std::vector<unsigned char> packed((nbits + 7) / 8, 0);
        for (std::size_t i = 0; i < nbits; ++i)
            if (lane.bits.bits[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
        os.write(reinterpret_cast<const char*>(packed.data()),
                 static_cast<std::streamsize>(packed.size()));
    }
    if (!os) throw std::runtime_error("capture: write failed for " + path.string());
}

void save_capture_csv(const CaptureFile& cap, const std::filesystem::path& path) {
    cap.validate();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("capture: cannot open " + path.string() + " for writing");
    const int m = cap.lanes.front().bits.m;
    os << "lane,index,y";
    for (int j = 1; j <= m; ++j) os << ",b" << j;
    os << "\n";
    char buf[64];
    for (const auto& lane : cap.lanes) {
        for (std::size_t i = 0; i < lane.y.symbols.size(); ++i) {
            // max precision so the CSV round-trips doubles exactly
            std::snprintf(buf, sizeof(buf), "%.17g", lane.y.symbols[i]);
            os << static_cast<int>(lane.lane) << ',' << i << ',' << buf;
            for (int j = 0; j < m; ++j) os << ',' << static_cast<int>(lane.bits.bit(i, j));
            os << "\n";
        }
    }
    if (!os) throw std::runtime_error("capture: write failed for " + path.string());
}

CaptureFile load_capture(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("capture: cannot open " + path.string());
    char magic[4] = {0, 0, 0, 0};
    is.read(magic, 4);
    is.clear();
    is.seekg(0);
    if (is.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) return load_binary(is, path);
    return load_csv(is, path);
}

}  // namespace nleq::channel
