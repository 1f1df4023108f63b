#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <system_error>

#include <unistd.h>

#include "errors.hpp"

namespace pointnls {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Accumulates CSV text with a fixed header.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& header) : text_(header + "\n") {}

    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            if (!first) text_ += ',';
            text_ += format_real(v);
            first = false;
        }
        text_ += '\n';
    }

    void raw_row(const std::string& line) { text_ += line + "\n"; }

    const std::string& str() const { return text_; }

private:
    std::string text_;
};

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("io: cannot write '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("io: cannot rename onto '" + path.string() + "'");
    }
}

}  // namespace pointnls
