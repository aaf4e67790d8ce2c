#pragma once

#include "leadsheet/error.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace leadsheet::zip {

class ZipError : public Error {
public:
    using Error::Error;
};

/// Read-only ZIP archive over an in-memory buffer. Supports the stored and
/// deflate methods, which covers .mxl containers; no zip64, no encryption.
class ZipReader {
public:
    explicit ZipReader(std::string bytes);
    static ZipReader from_file(const std::filesystem::path& path);

    static bool looks_like_zip(const std::string& bytes);

    const std::vector<std::string>& names() const { return names_; }
    bool contains(const std::string& name) const;
    std::string read(const std::string& name) const;

private:
    struct Entry {
        std::string name;
        std::uint16_t method = 0;
        std::uint32_t crc = 0;
        std::uint32_t compressed_size = 0;
        std::uint32_t uncompressed_size = 0;
        std::uint32_t local_offset = 0;
    };

    std::string data_;
    std::vector<Entry> entries_;
    std::vector<std::string> names_;
};

} // namespace leadsheet::zip
