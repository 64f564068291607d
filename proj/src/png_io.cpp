#include "inkscore/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>

namespace inkscore {

namespace {

GrayRaster rgb_to_gray(const std::vector<std::uint8_t>& rgb, int w, int h) {
    GrayRaster out(w, h);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const std::uint8_t* p = rgb.data() + 3 * i;
        double lum = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(lum));
    }
    return out;
}

GrayRaster read_image(png_image& image, const void* memory, std::size_t size,
                      const char* path) {
    image.version = PNG_IMAGE_VERSION;
    int ok = path != nullptr
                 ? png_image_begin_read_from_file(&image, path)
                 : png_image_begin_read_from_memory(&image, memory, size);
    if (!ok) throw Error(std::string("png read failed: ") + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error("png read failed: " + msg);
    }
    return rgb_to_gray(buf, static_cast<int>(image.width), static_cast<int>(image.height));
}

} // namespace

GrayRaster load_gray_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    return read_image(image, nullptr, 0, path.c_str());
}

GrayRaster decode_gray_png(const std::vector<unsigned char>& bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    return read_image(image, bytes.data(), bytes.size(), nullptr);
}

void write_binary_png(const BinaryRaster& img, const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) buf[i] = img.ink[i] ? 0 : 255;
    if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
        throw Error(std::string("png write failed: ") + image.message);
}

std::vector<unsigned char> encode_binary_png(const BinaryRaster& img) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) buf[i] = img.ink[i] ? 0 : 255;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, buf.data(), 0, nullptr))
        throw Error(std::string("png encode failed: ") + image.message);
    std::vector<unsigned char> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, buf.data(), 0, nullptr))
        throw Error(std::string("png encode failed: ") + image.message);
    out.resize(size);
    return out;
}

} // namespace inkscore
