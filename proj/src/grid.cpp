// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qpat/error.hpp"

namespace qpat {

GridGeometry::GridGeometry(std::vector<std::size_t> dims, std::vector<double> spacing,
                           std::vector<double> origin)
    : dims_(std::move(dims)), spacing_(std::move(spacing)), origin_(std::move(origin))
{
    if (dims_.size() != 2 && dims_.size() != 3) {
        throw Error(ErrorCode::InvalidGeometry,
                    "grid must have 2 or 3 axes, got " + std::to_string(dims_.size()));
    }
    if (spacing_.size() != dims_.size() || origin_.size() != dims_.size()) {
        throw Error(ErrorCode::InvalidGeometry, "dims, spacing and origin lengths differ");
    }
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (dims_[k] < 2) {
            throw Error(ErrorCode::InvalidGeometry,
                        "axis " + std::to_string(k) + " has fewer than 2 nodes");
        }
        if (!std::isfinite(spacing_[k]) || spacing_[k] <= 0.0) {
            throw Error(ErrorCode::InvalidGeometry,
                        "axis " + std::to_string(k) + " spacing must be finite and > 0");
        }
        if (!std::isfinite(origin_[k])) {
            throw Error(ErrorCode::InvalidGeometry, "origin must be finite");
        }
    }
}

GridGeometry GridGeometry::uniform(std::vector<std::size_t> dims, double length)
{
    std::vector<double> spacing;
    for (auto n : dims) {
        spacing.push_back(n > 1 ? length / static_cast<double>(n - 1) : 0.0);
    }
    std::vector<double> origin(dims.size(), 0.0);
    return GridGeometry(std::move(dims), std::move(spacing), std::move(origin));
}

std::size_t GridGeometry::size() const
{
    if (dims_.empty()) {
        return 0;
    }
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t GridGeometry::stride(std::size_t axis) const
{
    std::size_t s = 1;
    for (std::size_t k = axis + 1; k < dims_.size(); ++k) {
        s *= dims_[k];
    }
    return s;
}

double GridGeometry::coordinate(std::size_t axis, std::size_t index) const
{
    return origin_.at(axis) + static_cast<double>(index) * spacing_.at(axis);
}

double GridGeometry::extent(std::size_t axis) const
{
    return static_cast<double>(dims_.at(axis) - 1) * spacing_.at(axis);
}

std::size_t GridGeometry::flat_index(std::span<const std::size_t> index) const
{
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        flat = flat * dims_[k] + index[k];
    }
    return flat;
}

std::array<std::size_t, 3> GridGeometry::unravel(std::size_t flat) const
{
    std::array<std::size_t, 3> index{};
    for (std::size_t k = dims_.size(); k-- > 0;) {
        index[k] = flat % dims_[k];
        flat /= dims_[k];
    }
    return index;
}

GridLine GridGeometry::line(std::size_t axis, std::size_t transverse) const
{
    const std::size_t inner = stride(axis);
    const std::size_t outer = transverse / inner;
    const std::size_t inner_index = transverse % inner;
    return GridLine{outer * dims_[axis] * inner + inner_index, inner, dims_[axis]};
}

std::size_t GridGeometry::transverse_index(std::size_t axis, std::size_t flat) const
{
    const std::size_t inner = stride(axis);
    const std::size_t outer = flat / (inner * dims_[axis]);
    return outer * inner + flat % inner;
}

bool GridGeometry::is_boundary(std::size_t flat) const
{
    const auto index = unravel(flat);
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (index[k] == 0 || index[k] + 1 == dims_[k]) {
            return true;
        }
    }
    return false;
}

ScalarField::ScalarField(GridGeometry geometry, std::vector<double> values)
    : geometry_(std::move(geometry)), values_(std::move(values))
{
    if (values_.size() != geometry_.size()) {
        throw Error(ErrorCode::PayloadMismatch,
                    "field has " + std::to_string(values_.size()) + " values, geometry needs " +
                        std::to_string(geometry_.size()));
    }
    for (std::size_t n = 0; n < values_.size(); ++n) {
        if (!std::isfinite(values_[n])) {
            throw Error(ErrorCode::NonFiniteValue,
                        "non-finite sample at flat index " + std::to_string(n));
        }
    }
}

ScalarField ScalarField::filled(const GridGeometry& geometry, double value)
{
    return ScalarField(geometry, std::vector<double>(geometry.size(), value));
}

double ScalarField::at(std::size_t i, std::size_t j) const
{
    return values_[i * geometry_.dim(1) + j];
}

double ScalarField::at(std::size_t i, std::size_t j, std::size_t k) const
{
    return values_[(i * geometry_.dim(1) + j) * geometry_.dim(2) + k];
}

double ScalarField::max() const
{
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const
{
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

Mask Mask::full(const GridGeometry& geometry)
{
    return Mask{geometry, std::vector<std::uint8_t>(geometry.size(), 1)};
}

Mask Mask::empty(const GridGeometry& geometry)
{
    return Mask{geometry, std::vector<std::uint8_t>(geometry.size(), 0)};
}

std::size_t Mask::count() const
{
    return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

Mask erode(const Mask& mask, std::size_t cells)
{
    if (cells == 0) {
        return mask;
    }
    const auto& geometry = mask.geometry;
    Mask current = mask;
    // Separable min filter: a box neighbourhood is the product of 1D windows.
    for (std::size_t axis = 0; axis < geometry.rank(); ++axis) {
        Mask next = Mask::empty(geometry);
        for (std::size_t t = 0; t < geometry.line_count(axis); ++t) {
            const GridLine line = geometry.line(axis, t);
            for (std::size_t k = 0; k < line.count; ++k) {
                if (k < cells || k + cells >= line.count) {
                    continue;
                }
                bool keep = true;
                for (std::size_t m = k - cells; m <= k + cells && keep; ++m) {
                    keep = current.contains(line[m]);
                }
                next.values[line[k]] = keep ? 1 : 0;
            }
        }
        current = std::move(next);
    }
    return current;
}

Mask interior(const GridGeometry& geometry, std::size_t margin)
{
    Mask result = Mask::empty(geometry);
    for (std::size_t n = 0; n < geometry.size(); ++n) {
        const auto index = geometry.unravel(n);
        bool inside = true;
        for (std::size_t k = 0; k < geometry.rank(); ++k) {
            inside = inside && index[k] >= margin && index[k] + margin < geometry.dim(k);
        }
        result.values[n] = inside ? 1 : 0;
    }
    return result;
}

Mask intersect(const Mask& a, const Mask& b)
{
    require_same_geometry(a.geometry, b.geometry, "mask intersection");
    Mask result = a;
    for (std::size_t n = 0; n < result.values.size(); ++n) {
        result.values[n] = (a.values[n] && b.values[n]) ? 1 : 0;
    }
    return result;
}

ScalarField to_field(const Mask& mask)
{
    std::vector<double> values(mask.values.begin(), mask.values.end());
    return ScalarField(mask.geometry, std::move(values));
}

Mask from_field(const ScalarField& field)
{
    Mask mask = Mask::empty(field.geometry());
    for (std::size_t n = 0; n < field.size(); ++n) {
        mask.values[n] = field[n] != 0.0 ? 1 : 0;
    }
    return mask;
}

ScalarField extract_slice(const ScalarField& field, std::size_t axis, std::size_t index)
{
    const auto& geometry = field.geometry();
    if (geometry.rank() != 3 || axis > 2 || index >= geometry.dim(axis)) {
        throw Error(ErrorCode::InvalidArgument, "slice needs a 3D field and an in-range index");
    }
    std::vector<std::size_t> dims;
    std::vector<double> spacing;
    std::vector<double> origin;
    for (std::size_t k = 0; k < 3; ++k) {
        if (k != axis) {
            dims.push_back(geometry.dim(k));
            spacing.push_back(geometry.spacing(k));
            origin.push_back(geometry.origin()[k]);
        }
    }
    GridGeometry plane(std::move(dims), std::move(spacing), std::move(origin));
    std::vector<double> values;
    values.reserve(plane.size());
    for (std::size_t n = 0; n < geometry.size(); ++n) {
        if (geometry.unravel(n)[axis] == index) {
            values.push_back(field[n]);
        }
    }
    return ScalarField(std::move(plane), std::move(values));
}

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what)
{
    if (!(a == b)) {
        throw Error(ErrorCode::GeometryMismatch, std::string(what) + ": grid geometries differ");
    }
}

}  // namespace qpat
