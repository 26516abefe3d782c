#pragma once

#include <cassert>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "toposeg/error.hpp"

namespace toposeg
{

/// Pixel coordinate, row-major.
struct Cell
{
    std::size_t row = 0;
    std::size_t col = 0;

    auto operator<=>(const Cell&) const = default;
};

/// Dense row-major 2D array.
template <typename T>
class Grid
{
public:
    using value_type = T;

    Grid() = default;

    Grid(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), data_(height * width, fill)
    {
    }

    Grid(std::size_t height, std::size_t width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data))
    {
        if (data_.size() != height_ * width_)
            throw DimensionMismatch("grid data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(height_) + "x" +
                                    std::to_string(width_));
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c)
    {
        assert(r < height_ && c < width_);
        return data_[r * width_ + c];
    }
    const T& operator()(std::size_t r, std::size_t c) const
    {
        assert(r < height_ && c < width_);
        return data_[r * width_ + c];
    }
    T& operator()(Cell cell) { return (*this)(cell.row, cell.col); }
    const T& operator()(Cell cell) const { return (*this)(cell.row, cell.col); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    Cell cell_of(std::size_t index) const noexcept { return {index / width_, index % width_}; }
    std::size_t index_of(Cell cell) const noexcept { return cell.row * width_ + cell.col; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept
    {
        return height_ == other.height() && width_ == other.width();
    }

    bool operator==(const Grid&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> data_;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what)
{
    if (!a.same_shape(b))
        throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                                "x" + std::to_string(b.width()));
}

}  // namespace toposeg
