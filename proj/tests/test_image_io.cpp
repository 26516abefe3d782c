#include <gtest/gtest.h>

#include <png.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "toposeg/image_io.hpp"

using namespace toposeg;
namespace fs = std::filesystem;

namespace
{

fs::path temp_path(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "toposeg_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_raw(const fs::path& p, const std::string& bytes)
{
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

void write_png(const fs::path& p, int color_type, int depth, std::size_t w, std::size_t h,
               const std::vector<unsigned char>& raster)
{
    std::FILE* f = std::fopen(p.c_str(), "wb");
    ASSERT_NE(f, nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = raster.size() / h;
    for (std::size_t r = 0; r < h; ++r)
        png_write_row(png, raster.data() + r * stride);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

}  // namespace

TEST(LoadGrayscale, Pgm8BitAllMaxIsOne)
{
    const fs::path p = temp_path("white.pgm");
    write_raw(p, std::string("P5\n3 2\n255\n") + std::string(6, '\xff'));
    const GrayImage img = load_grayscale(p);
    ASSERT_EQ(img.height(), 2u);
    ASSERT_EQ(img.width(), 3u);
    for (double v : img.values())
        EXPECT_EQ(v, 1.0);
}

TEST(LoadGrayscale, AsciiPgmWithComments)
{
    const fs::path p = temp_path("ascii.pgm");
    write_raw(p, "P2\n# comment\n2 2\n# another\n4\n0 1\n2 4\n");
    const GrayImage img = load_grayscale(p);
    EXPECT_EQ(img(0, 0), 0.0);
    EXPECT_EQ(img(0, 1), 0.25);
    EXPECT_EQ(img(1, 0), 0.5);
    EXPECT_EQ(img(1, 1), 1.0);
}

TEST(LoadGrayscale, Pgm16BitScalesByMaxval)
{
    const fs::path p = temp_path("deep.pgm");
    std::string raster = {'\x03', '\xe8', '\x00', '\x00'};  // 1000, 0 big-endian
    write_raw(p, "P5\n2 1\n1000\n" + raster);
    const GrayImage img = load_grayscale(p);
    EXPECT_EQ(img(0, 0), 1.0);
    EXPECT_EQ(img(0, 1), 0.0);
}

TEST(LoadGrayscale, PpmKeepsGreenChannel)
{
    const fs::path bin = temp_path("rgb.ppm");
    std::string raster;
    for (int i = 0; i < 4; ++i)
        raster += std::string{'\x0a', '\x80', '\xc8'};  // R=10 G=128 B=200
    write_raw(bin, "P6\n2 2\n255\n" + raster);
    const GrayImage img = load_grayscale(bin);
    for (double v : img.values())
        EXPECT_DOUBLE_EQ(v, 128.0 / 255.0);

    const fs::path ascii = temp_path("rgb_ascii.ppm");
    write_raw(ascii, "P3\n1 1\n255\n10 128 200\n");
    EXPECT_DOUBLE_EQ(load_grayscale(ascii)(0, 0), 128.0 / 255.0);
}

TEST(LoadGrayscale, PngGrayAndRgb)
{
    const fs::path gray = temp_path("gray.png");
    write_png(gray, PNG_COLOR_TYPE_GRAY, 8, 2, 1, {0, 255});
    const GrayImage g = load_grayscale(gray);
    EXPECT_EQ(g(0, 0), 0.0);
    EXPECT_EQ(g(0, 1), 1.0);

    const fs::path rgb = temp_path("rgb.png");
    write_png(rgb, PNG_COLOR_TYPE_RGB, 8, 1, 1, {10, 128, 200});
    EXPECT_DOUBLE_EQ(load_grayscale(rgb)(0, 0), 128.0 / 255.0);

    const fs::path deep = temp_path("gray16.png");
    write_png(deep, PNG_COLOR_TYPE_GRAY, 16, 1, 1, {0xff, 0xff});
    EXPECT_EQ(load_grayscale(deep)(0, 0), 1.0);
}

TEST(LoadGrayscale, ErrorCases)
{
    EXPECT_THROW(load_grayscale(temp_path("does_not_exist.pgm")), IoError);

    const fs::path truncated = temp_path("truncated.pgm");
    write_raw(truncated, "P5\n4 4\n255\nabc");
    EXPECT_THROW(load_grayscale(truncated), IoError);

    const fs::path truncated_png = temp_path("truncated.png");
    write_png(truncated_png, PNG_COLOR_TYPE_GRAY, 8, 8, 8, std::vector<unsigned char>(64, 7));
    {
        std::string bytes;
        {
            std::ifstream in(truncated_png, std::ios::binary);
            bytes.assign(std::istreambuf_iterator<char>(in), {});
        }
        write_raw(truncated_png, bytes.substr(0, bytes.size() / 2));
    }
    EXPECT_THROW(load_grayscale(truncated_png), IoError);

    const fs::path bmp = temp_path("image.bmp");
    write_raw(bmp, "BM\x00\x00\x00\x00");
    EXPECT_THROW(load_grayscale(bmp), FormatError);

    const fs::path zero = temp_path("zero.pgm");
    write_raw(zero, "P5\n0 3\n255\n");
    EXPECT_THROW(load_grayscale(zero), FormatError);
}

TEST(SavePgm, RoundTripIsBitExactFor8BitData)
{
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int trial = 0; trial < 10; ++trial)
    {
        const std::size_t h = 1 + trial, w = 2 + 2 * trial;
        std::string raster;
        for (std::size_t i = 0; i < h * w; ++i)
            raster.push_back(static_cast<char>(byte(rng)));
        const std::string file = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n" + raster;
        const fs::path src = temp_path("src.pgm");
        write_raw(src, file);
        const fs::path dst = temp_path("dst.pgm");
        save_pgm(load_grayscale(src), dst);
        std::ifstream in(dst, std::ios::binary);
        const std::string back((std::istreambuf_iterator<char>(in)), {});
        EXPECT_EQ(back, file);
    }
}
