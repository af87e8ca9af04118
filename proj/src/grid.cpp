#include "plate/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plate/error.hpp"

namespace plate {

Grid::Grid(int dim, int nodes_per_side, double radius_B)
    : dim_(dim), n_side_(nodes_per_side), radius_(radius_B) {
    if (dim != 2 && dim != 3)
        throw InvalidArgument("grid dimension must be 2 or 3, got " + std::to_string(dim));
    if (nodes_per_side < 9 || nodes_per_side % 2 == 0)
        throw InvalidArgument("nodes_per_side must be odd and >= 9, got " +
                              std::to_string(nodes_per_side));
    if (!(radius_B > 0.0) || !std::isfinite(radius_B))
        throw InvalidArgument("radius_B must be positive");
    h_ = 2.0 * radius_B / (nodes_per_side - 1);
    cell_volume_ = std::pow(h_, dim);
    node_count_ = 1;
    for (int k = 0; k < dim; ++k) node_count_ *= static_cast<std::size_t>(nodes_per_side);
}

std::array<int, 3> Grid::coords(NodeIndex idx) const noexcept {
    std::array<int, 3> c{0, 0, 0};
    const auto n = static_cast<NodeIndex>(n_side_);
    for (int k = 0; k < dim_; ++k) {
        c[k] = static_cast<int>(idx % n);
        idx /= n;
    }
    return c;
}

NodeIndex Grid::index(std::array<int, 3> c) const noexcept {
    NodeIndex idx = 0;
    for (int k = dim_ - 1; k >= 0; --k) idx = idx * static_cast<NodeIndex>(n_side_) + c[k];
    return idx;
}

bool Grid::in_box(std::array<int, 3> c) const noexcept {
    for (int k = 0; k < dim_; ++k)
        if (c[k] < 0 || c[k] >= n_side_) return false;
    return true;
}

Point Grid::position(NodeIndex idx) const noexcept {
    const auto c = coords(idx);
    Point p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) p[k] = coordinate(c[k]);
    return p;
}

bool Grid::in_ball(NodeIndex idx) const noexcept {
    const auto p = position(idx);
    return p[0] * p[0] + p[1] * p[1] + p[2] * p[2] < radius_ * radius_;
}

Grid make_grid(int dim, int nodes_per_side, double radius_B) {
    return Grid(dim, nodes_per_side, radius_B);
}

double distance(const Point& a, const Point& b) noexcept {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// ---------------------------------------------------------------------------

Mask::Mask(const Grid& grid) : grid_(grid), inside_(grid.node_count(), 0) {}

Mask Mask::from_nodes(const Grid& grid, std::span<const NodeIndex> nodes) {
    Mask m(grid);
    for (NodeIndex i : nodes)
        if (i < grid.node_count() && grid.in_ball(i)) m.inside_[i] = 1;
    m.rebuild_members();
    return m;
}

void Mask::rebuild_members() {
    members_.clear();
    for (NodeIndex i = 0; i < inside_.size(); ++i)
        if (inside_[i]) members_.push_back(i);
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Mask mask)
    : mask_(std::move(mask)), values_(mask_.grid().node_count(), 0.0) {}

ScalarField::ScalarField(Mask mask, std::vector<double> values)
    : mask_(std::move(mask)), values_(std::move(values)) {
    if (values_.size() != mask_.grid().node_count())
        throw InvalidArgument("field size does not match grid");
    for (NodeIndex i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) throw InvalidArgument("field has non-finite value");
        if (!mask_.contains(i) && values_[i] != 0.0)
            throw InvalidArgument("field is nonzero outside its mask");
    }
}

ScalarField ScalarField::from_members(Mask mask, std::span<const double> member_values) {
    if (member_values.size() != mask.size())
        throw InvalidArgument("member value count does not match mask size");
    std::vector<double> full(mask.grid().node_count(), 0.0);
    const auto& members = mask.members();
    for (std::size_t k = 0; k < members.size(); ++k) full[members[k]] = member_values[k];
    return ScalarField(std::move(mask), std::move(full));
}

std::vector<double> ScalarField::member_values() const {
    std::vector<double> out;
    out.reserve(mask_.size());
    for (NodeIndex i : mask_.members()) out.push_back(values_[i]);
    return out;
}

// ---------------------------------------------------------------------------

Mask ball_mask(const Grid& grid, const Point& center, double radius) {
    if (radius < 0.0) throw InvalidArgument("ball radius must be nonnegative");
    return Mask::from_predicate(grid, [&](NodeIndex i) {
        return distance(grid.position(i), center) < radius;
    });
}

double mask_volume(const Mask& mask) noexcept {
    return mask.grid().cell_volume() * static_cast<double>(mask.size());
}

Point mask_centroid(const Mask& mask) {
    Point c{0.0, 0.0, 0.0};
    if (mask.empty()) return c;
    for (NodeIndex i : mask.members()) {
        const auto p = mask.grid().position(i);
        for (int k = 0; k < 3; ++k) c[k] += p[k];
    }
    for (auto& v : c) v /= static_cast<double>(mask.size());
    return c;
}

Components connected_components(const Mask& mask) {
    const Grid& g = mask.grid();
    Components out;
    out.labels.assign(g.node_count(), -1);
    std::vector<NodeIndex> stack;
    for (NodeIndex seed : mask.members()) {
        if (out.labels[seed] >= 0) continue;
        const int label = out.count++;
        out.labels[seed] = label;
        stack.push_back(seed);
        while (!stack.empty()) {
            const NodeIndex cur = stack.back();
            stack.pop_back();
            g.for_each_face_neighbor(cur, [&](NodeIndex nb) {
                if (mask.contains(nb) && out.labels[nb] < 0) {
                    out.labels[nb] = label;
                    stack.push_back(nb);
                }
            });
        }
    }
    return out;
}

Mask dilate(const Mask& mask) {
    const Grid& g = mask.grid();
    std::vector<NodeIndex> nodes(mask.members());
    for (NodeIndex i : mask.members())
        g.for_each_face_neighbor(i, [&](NodeIndex nb) {
            if (!mask.contains(nb)) nodes.push_back(nb);
        });
    return Mask::from_nodes(g, nodes);
}

namespace {

bool has_outside_neighbor(const Mask& mask, NodeIndex i) {
    const Grid& g = mask.grid();
    int inside_neighbors = 0;
    g.for_each_face_neighbor(i, [&](NodeIndex nb) {
        if (mask.contains(nb)) ++inside_neighbors;
    });
    return inside_neighbors < 2 * g.dim();
}

}  // namespace

Mask erode(const Mask& mask) {
    std::vector<NodeIndex> nodes;
    for (NodeIndex i : mask.members())
        if (!has_outside_neighbor(mask, i)) nodes.push_back(i);
    return Mask::from_nodes(mask.grid(), nodes);
}

std::vector<NodeIndex> boundary_nodes(const Mask& mask) {
    std::vector<NodeIndex> out;
    for (NodeIndex i : mask.members())
        if (has_outside_neighbor(mask, i)) out.push_back(i);
    return out;
}

RescaleResult rescale_mask(const Mask& mask, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("rescale factor must be positive");
    const Grid& g = mask.grid();
    if (t == 1.0) return {mask, false};
    const Point c = mask_centroid(mask);
    const double h = g.spacing();
    const double r2 = g.radius() * g.radius();

    RescaleResult out{Mask(g), false};
    for (NodeIndex i : mask.members()) {
        const Point p = g.position(i);
        double s = 0.0;
        for (int k = 0; k < g.dim(); ++k) {
            const double y = c[k] + t * (p[k] - c[k]);
            s += y * y;
        }
        if (s >= r2) {
            out.clipped = true;
            break;
        }
    }

    std::vector<NodeIndex> nodes;
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        if (!g.in_ball(i)) continue;
        const Point p = g.position(i);
        std::array<int, 3> src{0, 0, 0};
        for (int k = 0; k < g.dim(); ++k) {
            const double y = c[k] + (p[k] - c[k]) / t;
            src[k] = static_cast<int>(std::lround((y + g.radius()) / h));
        }
        if (g.in_box(src) && mask.contains(g.index(src))) nodes.push_back(i);
    }
    out.mask = Mask::from_nodes(g, nodes);
    return out;
}

Mask mask_union(const Mask& a, const Mask& b) {
    if (!(a.grid() == b.grid())) throw InvalidArgument("masks live on different grids");
    std::vector<NodeIndex> nodes(a.members());
    nodes.insert(nodes.end(), b.members().begin(), b.members().end());
    return Mask::from_nodes(a.grid(), nodes);
}

Mask mask_intersection(const Mask& a, const Mask& b) {
    if (!(a.grid() == b.grid())) throw InvalidArgument("masks live on different grids");
    std::vector<NodeIndex> nodes;
    for (NodeIndex i : a.members())
        if (b.contains(i)) nodes.push_back(i);
    return Mask::from_nodes(a.grid(), nodes);
}

bool is_subset(const Mask& inner, const Mask& outer) {
    if (!(inner.grid() == outer.grid())) return false;
    return std::all_of(inner.members().begin(), inner.members().end(),
                       [&](NodeIndex i) { return outer.contains(i); });
}

}  // namespace plate
