#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "util/status.hpp"

namespace ewclab {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Status::io, "cannot open for reading: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(!in.bad(), Status::io, "read failed: " + path);
    return data;
}

inline void write_file(const std::string& path, const std::string& data) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), Status::io, "cannot open for writing: " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    require(out.good(), Status::io, "write failed: " + path);
}

} // namespace ewclab
