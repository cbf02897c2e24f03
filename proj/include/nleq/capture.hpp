// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "nleq/modem.hpp"

namespace nleq::channel {

// One lane of received symbols aligned with the bits that produced them.
struct CaptureLane {
    modem::Lane lane = modem::Lane::XI;
    modem::SymbolFrame y;
    modem::BitFrame bits;
};

struct CaptureFile {
    std::filesystem::path path;
    std::vector<CaptureLane> lanes;

    void validate() const;
};

// Binary capture format (little-endian): magic "NLCP", u32 version, u32 lane
// count, then per lane u32 lane id, u64 n, u32 m, n float64 symbols and
// ceil(n*m/8) bytes of LSB-first packed bits. See docs in README.
void save_capture(const CaptureFile& cap, const std::filesystem::path& path);

// CSV alternative: header "lane,index,y,b1..bm", one row per symbol.
void save_capture_csv(const CaptureFile& cap, const std::filesystem::path& path);

// Loads either format; binary is detected by the magic bytes.
CaptureFile load_capture(const std::filesystem::path& path);

}  // namespace nleq::channel
