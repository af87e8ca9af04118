#pragma once

// Uniform Cartesian lattice over the box [-R_B, R_B]^n, node masks standing in
// for open subsets of the reference ball B, and scalar fields extended by zero.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace plate {

using NodeIndex = std::size_t;
using Point = std::array<double, 3>;  // unused trailing coordinates are zero

class Grid {
public:
    /// dim in {2, 3}; nodes_per_side odd and >= 9; radius_B > 0.
    Grid(int dim, int nodes_per_side, double radius_B);

    int dim() const noexcept { return dim_; }
    int nodes_per_side() const noexcept { return n_side_; }
    double radius() const noexcept { return radius_; }
    double spacing() const noexcept { return h_; }
    /// h^n, the lumped quadrature weight of a node.
    double cell_volume() const noexcept { return cell_volume_; }
    std::size_t node_count() const noexcept { return node_count_; }

    /// Node index <-> integer lattice coordinates. The first coordinate varies
    /// fastest (lexicographic order used by every dump format).
    std::array<int, 3> coords(NodeIndex idx) const noexcept;
    NodeIndex index(std::array<int, 3> c) const noexcept;
    bool in_box(std::array<int, 3> c) const noexcept;

    Point position(NodeIndex idx) const noexcept;
    double coordinate(int lattice) const noexcept { return -radius_ + lattice * h_; }

    /// |x| < R_B, the defining predicate of the reference ball.
    bool in_ball(NodeIndex idx) const noexcept;

    /// Calls f(neighbor_index) for every face neighbour (2n of them) inside the box.
    template <typename F>
    void for_each_face_neighbor(NodeIndex idx, F&& f) const {
        const auto c = coords(idx);
        for (int axis = 0; axis < dim_; ++axis) {
            for (int step : {-1, 1}) {
                auto d = c;
                d[axis] += step;
                if (d[axis] >= 0 && d[axis] < n_side_) f(index(d));
            }
        }
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int dim_;
    int n_side_;
    double radius_;
    double h_;
    double cell_volume_;
    std::size_t node_count_;
};

Grid make_grid(int dim, int nodes_per_side, double radius_B);

double distance(const Point& a, const Point& b) noexcept;

/// Finite set of grid nodes representing an open set Omega inside B.
/// Membership is a dense byte map; member indices are kept sorted.
class Mask {
public:
    explicit Mask(const Grid& grid);

    /// Builds a mask from a node predicate, dropping nodes outside B.
    template <typename Pred>
    static Mask from_predicate(const Grid& grid, Pred&& pred) {
        Mask m(grid);
        for (NodeIndex i = 0; i < grid.node_count(); ++i)
            if (grid.in_ball(i) && pred(i)) m.inside_[i] = 1;
        m.rebuild_members();
        return m;
    }

    /// Builds a mask from node indices; nodes outside B are dropped.
    static Mask from_nodes(const Grid& grid, std::span<const NodeIndex> nodes);

    const Grid& grid() const noexcept { return grid_; }
    bool contains(NodeIndex idx) const noexcept { return inside_[idx] != 0; }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    const std::vector<NodeIndex>& members() const noexcept { return members_; }
    const std::vector<std::uint8_t>& membership() const noexcept { return inside_; }

    friend bool operator==(const Mask& a, const Mask& b) {
        return a.grid_ == b.grid_ && a.inside_ == b.inside_;
    }

private:
    void rebuild_members();

    Grid grid_;
    std::vector<std::uint8_t> inside_;
    std::vector<NodeIndex> members_;
};

/// One value per grid node, exactly zero outside its mask.
class ScalarField {
public:
    /// Zero field on mask.
    explicit ScalarField(Mask mask);
    /// Full-grid values; throws unless finite and zero outside the mask.
    ScalarField(Mask mask, std::vector<double> values);
    /// Values listed in the order of mask.members().
    static ScalarField from_members(Mask mask, std::span<const double> member_values);

    const Mask& mask() const noexcept { return mask_; }
    const Grid& grid() const noexcept { return mask_.grid(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](NodeIndex idx) const noexcept { return values_[idx]; }
    std::vector<double> member_values() const;

private:
    Mask mask_;
    std::vector<double> values_;
};

/// Nodes with |x - center| < radius and |x| < R_B.
Mask ball_mask(const Grid& grid, const Point& center, double radius);

/// h^n times the number of member nodes.
double mask_volume(const Mask& mask) noexcept;

/// Arithmetic mean of member positions; zero for an empty mask.
Point mask_centroid(const Mask& mask);

struct Components {
    int count = 0;
    std::vector<int> labels;  // per grid node; -1 outside the mask
};

/// Face-adjacency components, labelled 0..count-1 in order of smallest member.
Components connected_components(const Mask& mask);

/// Adds one face-neighbour ring, clipped to B.
Mask dilate(const Mask& mask);
/// Removes every member with a non-member face neighbour.
Mask erode(const Mask& mask);

/// Member nodes having at least one non-member face neighbour.
/// Neighbours past the box edge count as non-members.
std::vector<NodeIndex> boundary_nodes(const Mask& mask);

struct RescaleResult {
    Mask mask;
    bool clipped = false;  // part of the scaled image fell outside B
};

/// Spatial scaling by t about the mask centroid with nearest-node pullback.
RescaleResult rescale_mask(const Mask& mask, double t);

Mask mask_union(const Mask& a, const Mask& b);
Mask mask_intersection(const Mask& a, const Mask& b);
bool is_subset(const Mask& inner, const Mask& outer);

}  // namespace plate
