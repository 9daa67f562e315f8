#include "guardscan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace guardscan {
namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open image '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(std::span<const unsigned char> bytes)
{
    static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

Image decode_png(std::span<const unsigned char> bytes, const std::string& origin)
{
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw ImageIoError("invalid PNG '" + origin + "': " + png.message);
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw ImageIoError("invalid PNG '" + origin + "': " + msg);
    }
    Image img(static_cast<int>(png.width), static_cast<int>(png.height), channels);
    std::transform(buf.begin(), buf.end(), img.data.begin(),
                   [](unsigned char v) { return v / 255.0; });
    return img;
}

// Reads one header token, skipping whitespace and '#' comments.
bool pnm_token(std::span<const unsigned char> bytes, std::size_t& pos, std::string& tok)
{
    tok.clear();
    while (pos < bytes.size()) {
        const unsigned char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(c)) {
            ++pos;
        } else {
            break;
        }
    }
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return !tok.empty();
}

}  // namespace

Image decode_pnm(std::span<const unsigned char> bytes, const std::string& origin)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw ImageIoError("unsupported image format '" + origin + "' (expected PNG, P5 or P6)");
    const int channels = bytes[1] == '5' ? 1 : 3;
    std::size_t pos = 2;
    std::string tok;
    long vals[3] = {0, 0, 0};
    for (long& v : vals) {
        if (!pnm_token(bytes, pos, tok)) throw ImageIoError("truncated PNM header in '" + origin + "'");
        try {
            v = std::stol(tok);
        } catch (const std::exception&) {
            throw ImageIoError("malformed PNM header in '" + origin + "'");
        }
    }
    const long w = vals[0], h = vals[1], maxval = vals[2];
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw ImageIoError("unsupported PNM geometry or depth in '" + origin + "'");
    ++pos;  // single whitespace after maxval
    const std::size_t need = static_cast<std::size_t>(w) * h * channels;
    if (pos > bytes.size() || bytes.size() - pos < need)
        throw ImageIoError("truncated PNM data in '" + origin + "'");
    Image img(static_cast<int>(w), static_cast<int>(h), channels);
    for (std::size_t i = 0; i < need; ++i)
        img.data[i] = std::min(1.0, bytes[pos + i] / static_cast<double>(maxval));
    return img;
}

Image load_image(const std::filesystem::path& path)
{
    const auto bytes = read_bytes(path);
    if (is_png(bytes)) return decode_png(bytes, path.string());
    return decode_pnm(bytes, path.string());
}

void save_png(const Image& img, const std::filesystem::path& path)
{
    img.validate();
    std::vector<unsigned char> buf(img.data.size());
    std::transform(img.data.begin(), img.data.end(), buf.begin(), [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    if (!png_image_write_to_file(&png, tmp.c_str(), 0, buf.data(), 0, nullptr))
        throw ImageIoError("cannot write PNG '" + path.string() + "': " + png.message);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ImageIoError("cannot write PNG '" + path.string() + "': " + ec.message());
}

void quantize_8bit(Image& img)
{
    for (double& v : img.data) v = static_cast<double>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0;
}

Image to_rgb(const Image& img)
{
    if (img.channels == 3) return img;
    Image out(img.width, img.height, 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        for (int c = 0; c < 3; ++c) out.data[i * 3 + c] = img.data[i];
    return out;
}

void draw_box(Image& img, const BoundingBox& box, const Rgb& color)
{
    if (img.channels != 3) throw std::invalid_argument("draw_box: RGB image required");
    auto put = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
    };
    for (int t = 0; t < 2; ++t) {
        for (int x = box.x; x < box.x + box.w; ++x) {
            put(x, box.y + t);
            put(x, box.y + box.h - 1 - t);
        }
        for (int y = box.y; y < box.y + box.h; ++y) {
            put(box.x + t, y);
            put(box.x + box.w - 1 - t, y);
        }
    }
}

void draw_row_line(Image& img, double slope, double intercept, const Rgb& color)
{
    if (img.channels != 3) throw std::invalid_argument("draw_row_line: RGB image required");
    for (int x = 0; x < img.width; ++x) {
        const long y = std::lround(slope * x + intercept);
        if (y < 0 || y >= img.height) continue;
        for (int c = 0; c < 3; ++c) img.at(x, static_cast<int>(y), c) = color[c];
    }
}

}  // namespace guardscan
