// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/paqg.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

#include "qpat/error.hpp"

namespace qpat {

namespace {

constexpr std::string_view kMagic{"PAQGRID\0", 8};
constexpr std::size_t kPrefix = 12;

void put_u64_le(std::string& out, std::uint64_t v)
{
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
    }
}

std::uint64_t get_u64_le(const unsigned char* p)
{
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) {
        v = (v << 8) | p[b];
    }
    return v;
}

template <class T>
std::vector<T> json_array(const nlohmann::json& header, const char* key)
{
    if (!header.contains(key) || !header.at(key).is_array()) {
        throw Error(ErrorCode::BadHeader, std::string("header key '") + key + "' missing");
    }
    try {
        return header.at(key).get<std::vector<T>>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::BadHeader, std::string("header key '") + key + "' has wrong type");
    }
}

}  // namespace

std::string encode_grid(const ScalarField& field)
{
    const auto& geometry = field.geometry();
    nlohmann::ordered_json header;
    header["version"] = 1;
    header["dims"] = std::vector<std::size_t>(geometry.dims().begin(), geometry.dims().end());
    header["spacing"] = std::vector<double>(geometry.spacing().begin(), geometry.spacing().end());
    header["origin"] = std::vector<double>(geometry.origin().begin(), geometry.origin().end());
    header["dtype"] = "f64";
    header["order"] = "row-major";
    const std::string text = header.dump();

    std::string out;
    out.reserve(kPrefix + text.size() + 8 * field.size());
    out.append(kMagic);
    const auto length = static_cast<std::uint32_t>(text.size());
    for (int b = 0; b < 4; ++b) {
        out.push_back(static_cast<char>((length >> (8 * b)) & 0xFFu));
    }
    out.append(text);
    for (double v : field.values()) {
        put_u64_le(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

ScalarField decode_grid(std::string_view bytes)
{
    if (bytes.size() < kPrefix || bytes.substr(0, 8) != kMagic) {
        throw Error(ErrorCode::BadMagic, "missing PAQGRID signature");
    }
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t length = static_cast<std::uint32_t>(raw[8]) |
                                 (static_cast<std::uint32_t>(raw[9]) << 8) |
                                 (static_cast<std::uint32_t>(raw[10]) << 16) |
                                 (static_cast<std::uint32_t>(raw[11]) << 24);
    if (bytes.size() - kPrefix < length) {
        throw Error(ErrorCode::BadHeader, "header length exceeds file size");
    }

    nlohmann::json header = nlohmann::json::parse(bytes.substr(kPrefix, length), nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw Error(ErrorCode::BadHeader, "header is not a JSON object");
    }
    if (!header.contains("version") || header["version"] != 1) {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported version");
    }
    if (!header.contains("dtype") || header["dtype"] != "f64") {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported dtype");
    }
    if (!header.contains("order") || header["order"] != "row-major") {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported sample order");
    }

    GridGeometry geometry(json_array<std::size_t>(header, "dims"),
                          json_array<double>(header, "spacing"),
                          json_array<double>(header, "origin"));

    const std::size_t payload = bytes.size() - kPrefix - length;
    const std::size_t count = geometry.size();
    if (count > std::numeric_limits<std::size_t>::max() / 8 || payload != 8 * count) {
        throw Error(ErrorCode::PayloadMismatch,
                    "payload holds " + std::to_string(payload) + " bytes, header implies " +
                        std::to_string(count) + " f64 values");
    }

    std::vector<double> values(count);
    const unsigned char* p = raw + kPrefix + length;
    for (std::size_t n = 0; n < count; ++n, p += 8) {
        values[n] = std::bit_cast<double>(get_u64_le(p));
    }
    return ScalarField(std::move(geometry), std::move(values));
}

void write_grid(const std::filesystem::path& path, const ScalarField& field)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    }
    const std::string bytes = encode_grid(field);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

ScalarField read_grid(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_grid(bytes);
}

}  // namespace qpat
