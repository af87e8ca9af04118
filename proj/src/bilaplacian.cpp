#include "plate/bilaplacian.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "plate/error.hpp"

namespace plate {

namespace {

// splitmix64 finaliser: a per-node pseudo-random value that does not depend on
// traversal order or on the standard library's distributions.
double unit_hash(std::uint64_t seed, std::uint64_t node) {
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + node + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

void require_same_mask(const Mask& mask, const ScalarField& field) {
    if (!(field.mask() == mask)) throw InvalidArgument("field mask does not match operator mask");
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ScalarField to_field(const Mask& mask, const Eigen::VectorXd& v) {
    return ScalarField::from_members(mask, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

}  // namespace

ClampedBilaplacian::ClampedBilaplacian(const Mask& mask, BoundaryClosure closure) : mask_(mask) {
    const Grid& g = mask.grid();
    const auto& members = mask.members();
    std::unordered_map<NodeIndex, Eigen::Index> column;
    column.reserve(members.size() * 2);
    for (std::size_t k = 0; k < members.size(); ++k) column.emplace(members[k], static_cast<Eigen::Index>(k));

    // Support: the mask and its face-neighbour ring, in ascending node order.
    std::vector<NodeIndex> support_nodes(members);
    for (NodeIndex i : members)
        g.for_each_face_neighbor(i, [&](NodeIndex nb) {
            if (!mask.contains(nb)) support_nodes.push_back(nb);
        });
    std::sort(support_nodes.begin(), support_nodes.end());
    support_nodes.erase(std::unique(support_nodes.begin(), support_nodes.end()), support_nodes.end());

    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const double diag = -2.0 * g.dim() * inv_h2;
    // A ring node has no member neighbour beyond the box, so in_box checks suffice.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(support_nodes.size() * (2 * g.dim() + 1));
    for (std::size_t row = 0; row < support_nodes.size(); ++row) {
        const NodeIndex s = support_nodes[row];
        const auto r = static_cast<Eigen::Index>(row);
        if (mask.contains(s)) {
            triplets.emplace_back(r, column.at(s), diag);
            g.for_each_face_neighbor(s, [&](NodeIndex nb) {
                if (mask.contains(nb)) triplets.emplace_back(r, column.at(nb), inv_h2);
            });
            continue;
        }
        const auto c = g.coords(s);
        for (int axis = 0; axis < g.dim(); ++axis) {
            auto lo = c, hi = c;
            --lo[axis];
            ++hi[axis];
            const bool lo_in = g.in_box(lo) && mask.contains(g.index(lo));
            const bool hi_in = g.in_box(hi) && mask.contains(g.index(hi));
            const double weight =
                (closure == BoundaryClosure::MirrorGhost && lo_in != hi_in) ? 2.0 * inv_h2 : inv_h2;
            if (lo_in) triplets.emplace_back(r, column.at(g.index(lo)), weight);
            if (hi_in) triplets.emplace_back(r, column.at(g.index(hi)), weight);
        }
    }
    laplacian_.resize(static_cast<Eigen::Index>(support_nodes.size()), static_cast<Eigen::Index>(members.size()));
    laplacian_.setFromTriplets(triplets.begin(), triplets.end());
    laplacian_.makeCompressed();
}

Eigen::VectorXd ClampedBilaplacian::laplacian(const Eigen::VectorXd& member_values) const {
    return laplacian_ * member_values;
}

Eigen::VectorXd ClampedBilaplacian::apply(const Eigen::VectorXd& member_values) const {
    return laplacian_.transpose() * (laplacian_ * member_values);
}

Eigen::SparseMatrix<double> ClampedBilaplacian::matrix() const {
    Eigen::SparseMatrix<double> a = laplacian_.transpose() * laplacian_;
    a.makeCompressed();
    return a;
}

ScalarField apply_clamped_bilap(const Mask& mask, const ScalarField& field, BoundaryClosure closure) {
    require_same_mask(mask, field);
    const ClampedBilaplacian op(mask, closure);
    return to_field(mask, op.apply(to_eigen(field.member_values())));
}

double rayleigh_quotient(const Mask& mask, const ScalarField& field, BoundaryClosure closure) {
    require_same_mask(mask, field);
    const Eigen::VectorXd u = to_eigen(field.member_values());
    const double denom = u.squaredNorm();
    if (!(denom > 0.0)) throw InvalidArgument("vanishing field: Rayleigh quotient undefined");
    const ClampedBilaplacian op(mask, closure);
    return op.laplacian(u).squaredNorm() / denom;
}

ToneResult fundamental_tone(const Mask& mask, const ToneOptions& options) {
    if (mask.empty()) throw InvalidArgument("fundamental_tone: empty mask");
    if (!(options.tol > 0.0)) throw InvalidArgument("fundamental_tone: tol must be positive");
    if (options.block_size < 1) throw InvalidArgument("fundamental_tone: block_size must be >= 1");
    if (options.max_iter < 1) throw InvalidArgument("fundamental_tone: max_iter must be >= 1");

    const ClampedBilaplacian op(mask, options.closure);
    const Eigen::SparseMatrix<double> a = op.matrix();
    const Eigen::Index n = op.size();

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> cholesky;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    if (options.solver == InnerSolver::Cholesky) {
        cholesky.compute(a);
        if (cholesky.info() != Eigen::Success)
            throw Error("fundamental_tone: Cholesky factorisation failed (operator not SPD)");
    } else {
        cg.setTolerance(options.cg_tol);
        cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * n));
        cg.compute(a);
    }

    // Subspace inverse iteration with Rayleigh-Ritz; block 1 is plain inverse iteration.
    const Eigen::Index p = std::min<Eigen::Index>(options.block_size, n);
    const auto& members = mask.members();
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double r = unit_hash(options.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(j),
                                       members[static_cast<std::size_t>(k)]);
            x(k, j) = j == 0 ? 1.0 + 0.25 * (r - 0.5) : r - 0.5;
        }
    auto orthonormalise = [&](Eigen::MatrixXd& m) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        m = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    };
    orthonormalise(x);

    auto last_iterate = [&] { return std::vector<double>(x.col(0).data(), x.col(0).data() + n); };
    double gamma = x.col(0).dot(a * x.col(0));
    double residual = 0.0;
    const double residual_tol = std::sqrt(options.tol);
    for (int it = 1; it <= options.max_iter; ++it) {
        Eigen::MatrixXd y(n, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            if (options.solver == InnerSolver::Cholesky) {
                y.col(j) = cholesky.solve(x.col(j));
            } else {
                y.col(j) = cg.solveWithGuess(x.col(j), x.col(j) / gamma);
                if (cg.info() != Eigen::Success)
                    throw ConvergenceError("fundamental_tone: CG stagnated (error " + std::to_string(cg.error()) + ")",
                                           last_iterate(), gamma);
            }
        }
        if (!y.allFinite() || !(y.col(0).norm() > 0.0))
            throw ConvergenceError("fundamental_tone: inner solve produced an invalid iterate", last_iterate(), gamma);
        orthonormalise(y);
        const Eigen::MatrixXd ay = a * y;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(y.transpose() * ay);
        x = y * ritz.eigenvectors();
        const Eigen::VectorXd u = x.col(0);
        const Eigen::VectorXd au = ay * ritz.eigenvectors().col(0);
        const double next = u.dot(au);
        residual = (au - next * u).norm();
        const bool settled = std::abs(next - gamma) <= options.tol * next;
        gamma = next;
        if (settled && residual <= residual_tol * gamma) {
            // Fix the sign so that the largest-magnitude entry is positive.
            Eigen::VectorXd v = u;
            Eigen::Index imax = 0;
            v.cwiseAbs().maxCoeff(&imax);
            if (v[imax] < 0.0) v = -v;
            v /= std::sqrt(mask.grid().cell_volume());
            return ToneResult{gamma, to_field(mask, v), it, residual};
        }
    }
    throw ConvergenceError("fundamental_tone: no convergence within " + std::to_string(options.max_iter) +
                               " iterations",
                           last_iterate(), gamma);
}

double eigen_residual(const Mask& mask, const ScalarField& field, double gamma, BoundaryClosure closure) {
    require_same_mask(mask, field);
    const Eigen::VectorXd u = to_eigen(field.member_values());
    const double norm = u.norm();
    if (!(norm > 0.0)) return 0.0;
    const ClampedBilaplacian op(mask, closure);
    return (op.apply(u) - gamma * u).norm() / norm;
}

double GradientField::magnitude(NodeIndex idx) const noexcept {
    const auto& g = gradient[idx];
    return std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
}

GradientField gradient_field(const ScalarField& field) {
    const Grid& g = field.grid();
    GradientField out{g, std::vector<std::array<double, 3>>(g.node_count(), {0.0, 0.0, 0.0})};
    const auto& v = field.values();
    const double inv_2h = 0.5 / g.spacing();
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        const auto c = g.coords(i);
        for (int axis = 0; axis < g.dim(); ++axis) {
            auto lo = c, hi = c;
            --lo[axis];
            ++hi[axis];
            const double vl = g.in_box(lo) ? v[g.index(lo)] : 0.0;
            const double vh = g.in_box(hi) ? v[g.index(hi)] : 0.0;
            out.gradient[i][axis] = (vh - vl) * inv_2h;
        }
    }
    return out;
}

}  // namespace plate
