#pragma once

#include <cstddef>
#include <stdexcept>

namespace sfio {

/// Regular 2D lattice. Node (i, j) sits at (x0 + i*dx, y0 + j*dy); storage is
/// row-major in j, i.e. index = j*nx + i.
struct GridSpec {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double dx = 0.0;  // cm
    double dy = 0.0;  // cm
    double x0 = 0.0;  // cm
    double y0 = 0.0;  // cm

    std::size_t size() const { return nx * ny; }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
    double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
    double y(std::size_t j) const { return y0 + static_cast<double>(j) * dy; }
    double x_max() const { return x(nx == 0 ? 0 : nx - 1); }
    double y_max() const { return y(ny == 0 ? 0 : ny - 1); }

    void validate() const {
        if (nx == 0 || ny == 0) throw std::invalid_argument("grid: needs at least one node per axis");
        if ((nx > 1 && !(dx > 0.0)) || (ny > 1 && !(dy > 0.0)))
            throw std::invalid_argument("grid: spacing must be positive");
    }

    /// nx x ny nodes with both endpoints of [xmin, xmax] x [ymin, ymax] on the lattice.
    static GridSpec spanning(std::size_t nx, std::size_t ny, double xmin, double xmax, double ymin,
                             double ymax) {
        GridSpec g;
        g.nx = nx;
        g.ny = ny;
        g.x0 = xmin;
        g.y0 = ymin;
        g.dx = nx > 1 ? (xmax - xmin) / static_cast<double>(nx - 1) : 0.0;
        g.dy = ny > 1 ? (ymax - ymin) / static_cast<double>(ny - 1) : 0.0;
        return g;
    }

    /// Cell-centred simulation grid: n nodes of spacing size/n with node n/2 at the origin.
    static GridSpec centered(std::size_t nx, std::size_t ny, double dx, double dy) {
        GridSpec g;
        g.nx = nx;
        g.ny = ny;
        g.dx = dx;
        g.dy = dy;
        g.x0 = -static_cast<double>(nx / 2) * dx;
        g.y0 = -static_cast<double>(ny / 2) * dy;
        return g;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace sfio
