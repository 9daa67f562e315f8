#pragma once

#include "guardscan/image.hpp"
#include "guardscan/rng.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <algorithm>

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("guardscan_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline guardscan::Image random_texture(int w, int h, guardscan::Rng& rng, double lo = 0.1, double hi = 0.9)
{
    guardscan::Image img(w, h, 1);
    for (double& v : img.data) v = rng.uniform(lo, hi);
    return img;
}

/// Dark vertical bar of width bar_w centred in a light window.
inline guardscan::Image bar_window(int w, int h, int bar_w, int offset = 0, double bg = 0.75, double fg = 0.25)
{
    guardscan::Image img(w, h, 1, bg);
    const int x0 = (w - bar_w) / 2 + offset;
    for (int y = h / 6; y < h; ++y)
        for (int x = std::max(0, x0); x < std::min(w, x0 + bar_w); ++x) img.at(x, y) = fg;
    return img;
}

}  // namespace testing
