#include "leadsheet/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace leadsheet::zip {

namespace {

constexpr std::uint32_t kEocdSig = 0x06054b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kLocalSig = 0x04034b50;

std::uint16_t rd16(const std::string& d, size_t off) {
    std::uint16_t v;
    std::memcpy(&v, d.data() + off, 2);
    return v;
}

std::uint32_t rd32(const std::string& d, size_t off) {
    std::uint32_t v;
    std::memcpy(&v, d.data() + off, 4);
    return v;
}

std::string inflate_raw(const char* src, size_t src_len, size_t dst_len) {
    std::string out(dst_len, '\0');
    z_stream zs;
    std::memset(&zs, 0, sizeof zs);
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ZipError("zlib: inflateInit2 failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(src));
    zs.avail_in = static_cast<uInt>(src_len);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(dst_len);
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != dst_len)
        throw ZipError("zlib: corrupt deflate stream in archive entry");
    return out;
}

} // namespace

bool ZipReader::looks_like_zip(const std::string& bytes) {
    return bytes.size() >= 4 && bytes[0] == 'P' && bytes[1] == 'K' &&
           (bytes[2] == 3 || bytes[2] == 5) && (bytes[3] == 4 || bytes[3] == 6);
}

ZipReader ZipReader::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ZipError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return ZipReader(std::move(buf).str());
}

ZipReader::ZipReader(std::string bytes) : data_(std::move(bytes)) {
    if (data_.size() < 22) throw ZipError("not a zip archive: too small");

    // Scan backwards for the end-of-central-directory record; the comment
    // after it can be up to 64 KiB.
    const size_t scan_floor = data_.size() > 22 + 65535 ? data_.size() - 22 - 65535 : 0;
    size_t eocd = std::string::npos;
    for (size_t i = data_.size() - 22 + 1; i-- > scan_floor;) {
        if (rd32(data_, i) == kEocdSig) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) throw ZipError("not a zip archive: end-of-central-directory not found");

    const std::uint16_t count = rd16(data_, eocd + 10);
    const std::uint32_t cd_offset = rd32(data_, eocd + 16);
    if (cd_offset >= data_.size()) throw ZipError("corrupt zip: central directory offset out of range");

    size_t pos = cd_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (pos + 46 > data_.size() || rd32(data_, pos) != kCentralSig)
            throw ZipError("corrupt zip: bad central directory entry");
        Entry e;
        e.method = rd16(data_, pos + 10);
        e.crc = rd32(data_, pos + 16);
        e.compressed_size = rd32(data_, pos + 20);
        e.uncompressed_size = rd32(data_, pos + 24);
        const std::uint16_t name_len = rd16(data_, pos + 28);
        const std::uint16_t extra_len = rd16(data_, pos + 30);
        const std::uint16_t comment_len = rd16(data_, pos + 32);
        e.local_offset = rd32(data_, pos + 42);
        if (pos + 46 + name_len > data_.size()) throw ZipError("corrupt zip: truncated entry name");
        e.name = data_.substr(pos + 46, name_len);
        pos += 46 + name_len + extra_len + comment_len;
        names_.push_back(e.name);
        entries_.push_back(std::move(e));
    }
}

bool ZipReader::contains(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::string ZipReader::read(const std::string& name) const {
    const Entry* entry = nullptr;
    for (const Entry& e : entries_)
        if (e.name == name) {
            entry = &e;
            break;
        }
    if (!entry) throw ZipError("no such archive entry: " + name);

    const size_t lh = entry->local_offset;
    if (lh + 30 > data_.size() || rd32(data_, lh) != kLocalSig)
        throw ZipError("corrupt zip: bad local header for " + name);
    const std::uint16_t name_len = rd16(data_, lh + 26);
    const std::uint16_t extra_len = rd16(data_, lh + 28);
    const size_t start = lh + 30 + name_len + extra_len;
    if (start + entry->compressed_size > data_.size())
        throw ZipError("corrupt zip: truncated data for " + name);

    std::string raw;
    switch (entry->method) {
    case 0: // stored
        raw = data_.substr(start, entry->compressed_size);
        break;
    case 8: // deflate
        raw = inflate_raw(data_.data() + start, entry->compressed_size, entry->uncompressed_size);
        break;
    default:
        throw ZipError("unsupported compression method " + std::to_string(entry->method) + " for " + name);
    }
    const auto actual =
        static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(raw.data()), static_cast<uInt>(raw.size())));
    if (actual != entry->crc) throw ZipError("crc mismatch for " + name);
    return raw;
}

} // namespace leadsheet::zip
