#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "toposeg/error.hpp"
#include "toposeg/grid.hpp"

namespace toposeg
{

/// Exact minimum-cost perfect assignment on a square cost matrix
/// (Hungarian method with potentials, O(n^3)). Returns the column assigned
/// to each row.
inline std::vector<std::size_t> solve_assignment(const Grid<double>& cost)
{
    const std::size_t n = cost.height();
    if (cost.width() != n)
        throw InvalidArgument("assignment cost matrix must be square");
    if (n == 0)
        return {};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based; column 0 is the virtual start of each augmenting path.
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(n + 1, 0.0);
    std::vector<std::size_t> row_of_col(n + 1, 0);
    std::vector<std::size_t> way(n + 1, 0);
    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);

    for (std::size_t row = 1; row <= n; ++row)
    {
        row_of_col[0] = row;
        std::size_t col0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do
        {
            used[col0] = 1;
            const std::size_t i0 = row_of_col[col0];
            double delta = kInf;
            std::size_t col1 = 0;
            for (std::size_t j = 1; j <= n; ++j)
            {
                if (used[j])
                    continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j])
                {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if (minv[j] < delta)
                {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j)
            {
                if (used[j])
                {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                }
                else
                {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (row_of_col[col0] != 0);
        do
        {
            const std::size_t col1 = way[col0];
            row_of_col[col0] = row_of_col[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<std::size_t> col_of_row(n);
    for (std::size_t j = 1; j <= n; ++j)
        col_of_row[row_of_col[j] - 1] = j - 1;
    return col_of_row;
}

}  // namespace toposeg
