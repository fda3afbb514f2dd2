#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tdqn/error.hpp"

namespace tdqn {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open '", path, "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    require(!in.bad(), "read failed for '", path, "'");
    return buf.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write '", path, "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    require(out.good(), "write failed for '", path, "'");
}

inline void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    require(!ec, "cannot create directory '", path, "': ", ec.message());
}

inline std::string join_path(const std::string& dir, const std::string& leaf) {
    return (std::filesystem::path(dir) / leaf).string();
}

inline bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::exists(path, ec) && !ec;
}

}  // namespace tdqn
