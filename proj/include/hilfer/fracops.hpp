#pragma once

#include "hilfer/errors.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hilfer::fracops {

/// Pair of fractional orders (alpha, beta) with alpha in (0,1], beta in [0,1].
/// The derived interpolation exponent gamma = alpha + beta (1 - alpha) sits in
/// [alpha, 1] and controls the weight (t - a)^{1-gamma} carried by solution
/// trajectories. beta = 0 and beta = 1 recover the two classical endpoint
/// conventions of the composed derivative.
class FracOrder {
public:
    FracOrder(double alpha, double beta);

    double alpha() const { return a_; }
    double beta() const { return b_; }
    double gamma() const { return a_ + b_ * (1.0 - a_); }
    /// order of the inner integral in the composed derivative
    double inner_order() const { return (1.0 - b_) * (1.0 - a_); }
    /// order of the outer integral in the composed derivative
    double outer_order() const { return b_ * (1.0 - a_); }

private:
    double a_, b_;
};

/// Sign-flipped variant alpha + beta (alpha - 1) of the interpolation
/// exponent. Not used by any solver path; retained so comparison runs against
/// sources using the other sign convention are possible.
double gamma_sign_flipped(double alpha, double beta);

/// Strictly increasing C^1 time warp. The fractional operators integrate
/// against d(warp), so kernels depend on warp differences only; the identity
/// warp gives the classical operators and the logarithm gives their
/// Hadamard-type counterparts.
struct PsiFunction {
    enum class Kind { identity, logarithm, custom };

    Kind kind = Kind::identity;
    std::string name = "identity";
    std::function<double(double)> value_fn, slope_fn;

    double value(double t) const;
    double slope(double t) const;

    static PsiFunction identity();
    static PsiFunction logarithm();
    static PsiFunction custom(std::string name, std::function<double(double)> value,
                              std::function<double(double)> slope);

    /// Throws SingularityError unless the warp is finite, has positive slope,
    /// and is strictly increasing across the given nodes.
    void validate_on(const std::vector<double>& nodes) const;
};

/// Power-law behavior attached below a sample grid's first node:
/// u(s) = values.front() * ((s - origin) / (nodes.front() - origin))^exponent
/// on (origin, nodes.front()]. This is how trajectories with a weak
/// singularity at their anchor enter the integral operators exactly instead
/// of being clipped at the first node.
struct LeftTail {
    double origin = 0.0;
    double exponent = 0.0; // > -1
};

/// Function known by its values on a strictly increasing node grid, linearly
/// interpolated in between, with an optional power-law left tail.
struct SampledFunction {
    std::vector<double> nodes;
    std::vector<double> values;
    std::optional<LeftTail> left_tail;

    /// Throws GridError on malformed grids or an inconsistent tail.
    void validate() const;

    /// Lower limit of integration: tail origin if present, else first node.
    double base() const;

    /// Pointwise evaluation (tail + piecewise linear). Throws GridError
    /// outside [base, nodes.back()], DomainError at a singular tail origin.
    double interp(double s) const;
};

/// Nodes a + (b - a) (i/n)^q for i = 0..n; q = 1 is uniform, q > 1 clusters
/// near a to resolve power-law behavior of integrands there.
std::vector<double> graded_nodes(double a, double b, int n, double q);

/// int_0^h (A - sigma)^{mu-1} sigma^rho dsigma for A >= h > 0, mu in (0, 2],
/// rho > -1. Exact Beta value when A == h; otherwise the left singularity is
/// absorbed by substitution and the rest integrated by panelled
/// Gauss-Legendre. Both endpoint powers are handled without cancellation, so
/// this is the building block for every singular head cell.
double power_weighted_cell(double A, double h, double mu, double rho);

/// Fractional integral of order alpha against the warp psi:
///   (1/Gamma(alpha)) int_base^t psi'(s) (psi(t) - psi(s))^{alpha-1} u(s) ds.
/// u is integrated by product integration: linear interpolation in warp space
/// with exact power moments per cell, plus an exact singular head when u has
/// a left tail. alpha in (0, 2]. Targets must lie in [base, nodes.back()];
/// t == base returns 0.
double frac_integral(double alpha, const PsiFunction& psi, const SampledFunction& u,
                     double t);
std::vector<double> frac_integral(double alpha, const PsiFunction& psi,
                                  const SampledFunction& u,
                                  const std::vector<double>& ts);

/// Composed two-sided derivative of order (alpha, beta) against the warp psi:
/// outer integral of order beta (1 - alpha) applied to the warp-derivative of
/// the inner integral of order (1 - beta)(1 - alpha) of u. The middle stage
/// differentiates by nonuniform three-point stencils in warp space, and the
/// singular behavior of the differentiated inner integral near the base is
/// restored by fitting a power-law left tail from the first interior nodes.
/// When u declares a left tail under the identity warp, the matching anchor
/// power is split off and sent through all three stages in closed form, so
/// the stencils only ever see the remainder, which vanishes at the anchor;
/// in particular the power with exponent gamma - 1 is annihilated exactly.
std::vector<double> hilfer_derivative(const FracOrder& order, const PsiFunction& psi,
                                      const SampledFunction& u,
                                      const std::vector<double>& ts);

/// One weighted piece of a piecewise-defined trajectory: stored values are
/// w(t) = (t - anchor)^{1-gamma} x(t), finite at the anchor even when the
/// underlying x blows up like (t - anchor)^{gamma-1}.
struct TrajectorySegment {
    double anchor = 0.0;
    std::vector<double> nodes;
    std::vector<double> w;
};

/// Weighted trajectory over a partition of the time interval; gamma is the
/// interpolation exponent that defines the weights.
struct WeightedTrajectory {
    double gamma = 1.0;
    std::vector<TrajectorySegment> segments;

    /// Throws GridError on malformed segments.
    void validate() const;

    /// Unweighted value x = w (t - anchor)^{gamma-1} at a stored node; NaN at
    /// the anchor node itself when gamma < 1 (x is singular there).
    double unweighted(std::size_t seg, std::size_t node) const;
};

/// max over stored nodes of |w|^delta, delta in (0, 1]. This is the metric
/// the contraction and stability estimates are stated in: a delta-Holder
/// compression of the weighted sup norm.
double pc_norm(const WeightedTrajectory& traj, double delta);

} // namespace hilfer::fracops
