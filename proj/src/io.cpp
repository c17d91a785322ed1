#include "patchmask/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "patchmask/error.hpp"

namespace patchmask {
namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                return;
            }
        }
    }

    std::size_t read_number(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) throw ParseError(std::string("unexpected end of file reading ") + what, pos_);
        if (!std::isdigit(bytes_[pos_])) throw ParseError(std::string("expected a number for ") + what, pos_);
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > (1u << 24)) throw ParseError(std::string("value too large for ") + what, pos_);
            ++pos_;
        }
        return value;
    }

    void expect_single_space() {
        if (pos_ >= bytes_.size()) throw ParseError("unexpected end of file after header", pos_);
        if (!std::isspace(bytes_[pos_])) throw ParseError("expected whitespace after maxval", pos_);
        ++pos_;
    }

private:
    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

Image decode_pnm(std::span<const unsigned char> bytes) {
    if (bytes.size() < 2) throw ParseError("file too short for a magic number", bytes.size());
    if (bytes[0] != 'P') throw UnsupportedFormat("not a portable anymap (missing 'P' magic)");
    std::size_t channels = 0;
    if (bytes[1] == '6') {
        channels = 3;
    } else if (bytes[1] == '5') {
        channels = 1;
    } else {
        throw UnsupportedFormat(std::string("unsupported anymap type P") + static_cast<char>(bytes[1]) +
                                "; only binary P5 and P6 are read");
    }

    HeaderReader header(bytes.subspan(2));
    const std::size_t width = header.read_number("width");
    const std::size_t height = header.read_number("height");
    const std::size_t maxval = header.read_number("maxval");
    header.expect_single_space();
    const std::size_t data_start = 2 + header.offset();
    if (width == 0 || height == 0) throw ParseError("image dimensions must be positive", data_start);
    if (maxval == 0) throw ParseError("maxval must be positive", data_start);
    if (maxval > 255) throw UnsupportedFormat("16-bit anymaps are not supported");

    const std::size_t expected = width * height * channels;
    if (bytes.size() - data_start < expected) {
        throw ParseError("truncated pixel data: expected " + std::to_string(expected) + " bytes", bytes.size());
    }

    Image image(height, width, channels);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t k = 0; k < expected; ++k) {
        const unsigned char v = bytes[data_start + k];
        if (v > maxval) throw ParseError("sample exceeds maxval", data_start + k);
        image.data[k] = static_cast<double>(v) * scale;
    }
    return image;
}

Image load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pnm(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.offset());
    }
}

std::vector<unsigned char> encode_pnm(const Image& image) {
    if (image.channels != 1 && image.channels != 3) throw UnsupportedFormat("only 1- or 3-channel images can be written");
    const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(image.width) +
                               " " + std::to_string(image.height) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.reserve(header.size() + image.data.size());
    for (double v : image.data) {
        const double level = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
        out.push_back(static_cast<unsigned char>(level));
    }
    return out;
}

void save_image(const std::filesystem::path& path, const Image& image) {
    const auto bytes = encode_pnm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image render_mask(const Image& image, const Mask& mask, std::size_t patch_size) {
    if (patch_size == 0 || image.height % patch_size != 0 || image.width % patch_size != 0) {
        throw DimensionMismatch("render_mask: patch size does not divide the image");
    }
    const std::size_t cols = image.width / patch_size;
    const std::size_t rows = image.height / patch_size;
    if (mask.length() != rows * cols) {
        throw SizeMismatch("render_mask: mask length " + std::to_string(mask.length()) + " does not match " +
                           std::to_string(rows * cols) + " patches");
    }

    Image out = image;
    for (std::size_t p = 0; p < mask.length(); ++p) {
        if (!mask.masked[p]) continue;
        const std::size_t y0 = (p / cols) * patch_size;
        const std::size_t x0 = (p % cols) * patch_size;
        for (std::size_t y = y0; y < y0 + patch_size; ++y) {
            for (std::size_t x = x0; x < x0 + patch_size; ++x) {
                for (std::size_t c = 0; c < out.channels; ++c) out.at(y, x, c) = 0.5;
            }
        }
    }
    if (out.channels == 3) {
        for (std::size_t a : mask.anchors) {
            const std::size_t y0 = (a / cols) * patch_size;
            const std::size_t x0 = (a % cols) * patch_size;
            for (std::size_t y = y0; y < y0 + patch_size; ++y) {
                for (std::size_t x = x0; x < x0 + patch_size; ++x) {
                    const bool border = y == y0 || x == x0 || y + 1 == y0 + patch_size || x + 1 == x0 + patch_size;
                    if (!border) continue;
                    out.at(y, x, 0) = 1.0;
                    out.at(y, x, 1) = 0.0;
                    out.at(y, x, 2) = 0.0;
                }
            }
        }
    }
    return out;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("input directory does not exist: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Mask> read_masks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mask file " + path.string());
    std::vector<Mask> masks;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) {
            try {
                masks.push_back(mask_from_string(line));
            } catch (const ParseError& e) {
                throw ParseError(path.string() + ": bad mask line", offset + e.offset());
            }
        }
        offset += line.size() + 1;
    }
    return masks;
}

void write_masks(const std::filesystem::path& path, std::span<const Mask> masks) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const Mask& m : masks) out << mask_to_string(m) << '\n';
}

}  // namespace patchmask
