#pragma once

// Clamped bilaplacian on a node mask. A field u on the mask is extended by
// zero to the whole lattice and D maps it to the (2n+1)-point Laplacian on
// the support (mask plus its outside face-neighbour ring). The operator is
// A = D^T D: symmetric positive definite on the mask, with discrete energy
// ||D u||^2 h^n that penalises any nonzero normal slope at the boundary.
//
// Two closures of the outside ring are available:
//   ZeroExtension  D = Delta_h of the zero extension (13-point stencil in 2D).
//                  The clamped boundary lands about 0.7h outside the mask,
//                  so tones carry an O(h) low bias.
//   MirrorGhost    at a ring node, along each axis with exactly one member
//                  neighbour, the missing value beyond the ring is the mirror
//                  image of that member (u = 0 on the ring, du/dn = 0 there).
//                  Along such axes the ring Laplacian doubles. Interior rows
//                  are unchanged.

#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <vector>

#include "plate/grid.hpp"

namespace plate {

enum class BoundaryClosure { MirrorGhost, ZeroExtension };

class ClampedBilaplacian {
public:
    explicit ClampedBilaplacian(const Mask& mask, BoundaryClosure closure = BoundaryClosure::MirrorGhost);

    const Mask& mask() const noexcept { return mask_; }
    Eigen::Index size() const noexcept { return laplacian_.cols(); }

    /// D u: the discrete Laplacian on every support node.
    Eigen::VectorXd laplacian(const Eigen::VectorXd& member_values) const;
    /// A u, returned on the mask members.
    Eigen::VectorXd apply(const Eigen::VectorXd& member_values) const;
    /// Assembled A = D^T D.
    Eigen::SparseMatrix<double> matrix() const;

private:
    Mask mask_;
    Eigen::SparseMatrix<double> laplacian_;  // support x members, scaled by 1/h^2
};

ScalarField apply_clamped_bilap(const Mask& mask, const ScalarField& field,
                                BoundaryClosure closure = BoundaryClosure::MirrorGhost);

/// sum over the support of (D u)^2 h^n / sum u^2 h^n. Throws on a vanishing field.
double rayleigh_quotient(const Mask& mask, const ScalarField& field,
                         BoundaryClosure closure = BoundaryClosure::MirrorGhost);

enum class InnerSolver { Cholesky, ConjugateGradient };

struct ToneOptions {
    double tol = 1e-10;          // relative change of the Rayleigh quotient
    int max_iter = 200;
    InnerSolver solver = InnerSolver::Cholesky;
    BoundaryClosure closure = BoundaryClosure::MirrorGhost;
    double cg_tol = 1e-8;        // relative residual of each inner CG solve
    std::uint64_t seed = 0;      // start-vector perturbation
    int block_size = 3;          // Ritz block; 1 is plain inverse iteration
};

struct ToneResult {
    double gamma = 0.0;
    ScalarField eigenfield;      // normalised so that sum u^2 h^n = 1
    int iterations = 0;
    double residual = 0.0;       // ||A u - gamma u|| / ||u||
};

/// Smallest eigenvalue of A on the mask by block inverse iteration with
/// Rayleigh-Ritz (block_size 1 is plain inverse power iteration).
/// Stops when the relative change of the lowest Ritz value is <= tol and the
/// relative residual ||Au - gamma u|| / (gamma ||u||) is <= sqrt(tol).
ToneResult fundamental_tone(const Mask& mask, const ToneOptions& options = {});

/// ||A u - gamma u||_2 / ||u||_2.
double eigen_residual(const Mask& mask, const ScalarField& field, double gamma,
                      BoundaryClosure closure = BoundaryClosure::MirrorGhost);

/// Central differences of the zero extension, at every grid node.
struct GradientField {
    Grid grid;
    std::vector<std::array<double, 3>> gradient;

    double magnitude(NodeIndex idx) const noexcept;
};

GradientField gradient_field(const ScalarField& field);

}  // namespace plate
