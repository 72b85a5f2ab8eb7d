// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace qpat {

/// One grid line along an axis: `count` samples starting at `offset`,
/// separated by `stride` in the flat row-major buffer.
struct GridLine {
    std::size_t offset = 0;
    std::size_t stride = 1;
    std::size_t count = 0;

    std::size_t operator[](std::size_t k) const { return offset + k * stride; }
};

/// Node-centred regular grid with 2 or 3 axes. Index (0,...,0) sits at
/// `origin`; the last axis is the fastest varying in memory.
class GridGeometry {
public:
    GridGeometry() = default;
    GridGeometry(std::vector<std::size_t> dims, std::vector<double> spacing,
                 std::vector<double> origin);

    /// Square/cube of side `length` anchored at the origin.
    static GridGeometry uniform(std::vector<std::size_t> dims, double length = 1.0);

    std::size_t rank() const { return dims_.size(); }
    std::span<const std::size_t> dims() const { return dims_; }
    std::span<const double> spacing() const { return spacing_; }
    std::span<const double> origin() const { return origin_; }
    std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
    double spacing(std::size_t axis) const { return spacing_.at(axis); }

    std::size_t size() const;
    std::size_t stride(std::size_t axis) const;
    double coordinate(std::size_t axis, std::size_t index) const;
    double extent(std::size_t axis) const;

    std::size_t flat_index(std::span<const std::size_t> index) const;
    std::size_t flat_index(std::initializer_list<std::size_t> index) const
    {
        return flat_index(std::span<const std::size_t>(index.begin(), index.size()));
    }
    std::array<std::size_t, 3> unravel(std::size_t flat) const;

    /// Number of grid lines parallel to `axis`.
    std::size_t line_count(std::size_t axis) const { return size() / dim(axis); }
    /// Line parallel to `axis` with transverse index `transverse`. Transverse
    /// indices enumerate the remaining axes in row-major order.
    GridLine line(std::size_t axis, std::size_t transverse) const;
    /// Transverse index of the line parallel to `axis` through `flat`.
    std::size_t transverse_index(std::size_t axis, std::size_t flat) const;

    bool is_boundary(std::size_t flat) const;

    bool operator==(const GridGeometry&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> spacing_;
    std::vector<double> origin_;
};

/// Finite real samples on a GridGeometry. Immutable once built.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(GridGeometry geometry, std::vector<double> values);

    static ScalarField filled(const GridGeometry& geometry, double value);

    const GridGeometry& geometry() const { return geometry_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t flat) const { return values_[flat]; }
    double at(std::size_t i, std::size_t j) const;
    double at(std::size_t i, std::size_t j, std::size_t k) const;

    double max() const;
    double min() const;

    /// Moves the sample buffer out, leaving the field empty.
    std::vector<double> release() && { return std::move(values_); }

private:
    GridGeometry geometry_;
    std::vector<double> values_;
};

/// Boolean node set on a grid.
struct Mask {
    GridGeometry geometry;
    std::vector<std::uint8_t> values;

    static Mask full(const GridGeometry& geometry);
    static Mask empty(const GridGeometry& geometry);

    bool contains(std::size_t flat) const { return values[flat] != 0; }
    std::size_t count() const;
};

/// Keeps nodes whose whole (2k+1)^d neighbourhood lies inside the mask and
/// inside the grid.
Mask erode(const Mask& mask, std::size_t cells);
/// Nodes at least `margin` cells away from every grid face.
Mask interior(const GridGeometry& geometry, std::size_t margin);
Mask intersect(const Mask& a, const Mask& b);
/// 0/1 field view of a mask, used for file output.
ScalarField to_field(const Mask& mask);
Mask from_field(const ScalarField& field);

/// 2D slice of a 3D field at `index` along `axis`.
ScalarField extract_slice(const ScalarField& field, std::size_t axis, std::size_t index);

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what);

}  // namespace qpat
