#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hilfer/fracops.hpp"
#include "hilfer/model.hpp"

namespace hilfer::stability {

/// Residuals of a candidate trajectory against the problem's two defining
/// relations. Evolution windows measure |D^{alpha,beta} v - A v - f(t, v,
/// Tv, Vv)| with the fractional derivative taken from the window's anchor
/// and evaluated numerically; impulse windows measure |v - xi_i(t, v)|.
///
/// Samples sit on the trajectory's own nodes. Evolution windows skip their
/// first two nodes, everything inside a guard region covering the leading
/// 5% of the window, and the final node: against the weighted blow-up at
/// the anchor the exact derivative diverges while sampled data pins the
/// head only to O(h^alpha), so residuals at a fixed node index cannot
/// converge there and would poison the sup; the last node only has a
/// one-sided stencil. Impulse windows skip the anchor node, where the
/// unweighted value is not defined. Windows whose guard swallows every
/// interior node contribute no samples.
struct ResidualProfile {
    std::vector<std::vector<double>> evolution_times;
    std::vector<std::vector<double>> evolution_residuals;
    std::vector<std::vector<double>> impulse_times;
    std::vector<std::vector<double>> impulse_residuals;

    /// Smallest scale at which the declared tolerance profile dominates all
    /// samples: sup over evolution samples of r/varphi(t) joined with sup
    /// over impulse samples of r/phi. When no profile is supplied this is
    /// the raw sup of all samples. A zero tolerance against a nonzero
    /// residual yields infinity; 0/0 counts as 0.
    double eps_fit = 0.0;
};

/// Measures how far v is from solving the problem, window by window.
/// Requires v to live on the problem's mesh (same alternating window
/// layout, anchors, and endpoints); throws GridError otherwise. The
/// generator must reduce to a scalar, as in the solver.
ResidualProfile residual_profile(const model::ProblemSpec& spec,
                                 const fracops::WeightedTrajectory& v,
                                 const model::PhiData* phidata = nullptr);

/// The three additive parts of the stability constant, in window order:
/// the post-impulse evolution branch (raised to delta), the impulse-window
/// branch M / (1 - M Ltilde^delta - M Lxi^delta), and the leading-window
/// branch M (M + Ltilde) c_varphi [E+1] E. Exposed so certificates can be
/// audited term by term; uhr_constant returns their sum.
std::array<double, 3> uhr_constant_parts(const model::ProblemSpec& spec,
                                         const model::PhiData& phidata);

/// Constant C such that every tolerance-profile-respecting candidate v
/// stays within |v - u|^delta <= C (phi^delta + varphi(t)^delta) of the
/// true solution u. Assembled from the generator bound, the Lipschitz data,
/// the kernel sup-integrals, and the profile's cumulative constant; grows
/// without bound as M Ltilde^delta + M Lxi^delta approaches one and throws
/// DomainError once that sum reaches one.
double uhr_constant(const model::ProblemSpec& spec, const model::PhiData& phidata);

/// Grid-verified stability certificate. `observed` is |v - u|^delta and
/// `bound` is C (phi^delta + varphi(t)^delta), both sampled at `times`;
/// the verdict holds when observed <= bound + 1e-9 at every sample, and
/// slack is the smallest bound - observed gap (negative iff the verdict
/// fails). The comparison is at grid nodes only, not a continuum proof.
struct StabilityCertificate {
    double C = 0.0;
    std::vector<double> times;
    std::vector<double> observed;
    std::vector<double> bound;
    bool verdict = false;
    double slack = 0.0;
};

/// Certifies that the candidate v tracks the solution u within the
/// tolerance-scaled envelope. First checks that v actually respects the
/// declared profile: sampled residuals of v may exceed 1.1 varphi(t)
/// (resp. 1.1 phi) only by twice u's own discretization residual plus
/// 1e-12, else PreconditionError. u and v must share a node grid
/// (GridError otherwise).
StabilityCertificate certify_uhr(const model::ProblemSpec& spec,
                                 const fracops::WeightedTrajectory& u,
                                 const fracops::WeightedTrajectory& v,
                                 const model::PhiData& phidata);

/// Constant-tolerance special case: the candidate's residuals are measured
/// against the flat profile varphi = eps, phi = eps. Covers the two
/// uniform stability notions (plain and generalized) that need no profile
/// data.
StabilityCertificate certify_uh(const model::ProblemSpec& spec,
                                const fracops::WeightedTrajectory& u,
                                const fracops::WeightedTrajectory& v,
                                double eps);

/// Builds the canonical perturbed instance: the forcing gains the additive
/// term eps * profile(t) and every jump relation is shifted by jump_shift.
/// Lipschitz data, contraction structure, and all other fields are
/// untouched, so a solve of the result is a certified tolerance-respecting
/// candidate for the original problem with varphi = eps * profile and
/// phi = |jump_shift|.
model::ProblemSpec perturbed_problem(const model::ProblemSpec& spec, double eps,
                                     std::function<double(double)> profile,
                                     double jump_shift);

} // namespace hilfer::stability
