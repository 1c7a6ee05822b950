#pragma once

#include <vector>

#include "dbr/model_c.hpp"
#include "dbr/rng.hpp"
#include "dbr/span.hpp"

namespace dbr {
namespace cayley {

/// Internal Cayley transform of the controllable model, compressed to a span.
/// State input coefficients range over `in_basis`; images are expressed in
/// `aug_basis` = in_basis + node conj(alpha), where the section formulas are
/// exact. A_mat and B_mat therefore have aug_basis.dim() rows and in_basis
/// column counts; the energy identity holds without approximation.
struct DiscreteBlock {
  SpanBasis in_basis;
  SpanBasis aug_basis;
  CMat A_mat;  // aug x in
  CMat B_mat;  // aug x m
  CMat C_mat;  // p x in
  CMat D_mat;  // p x m
  Complex alpha;
};

/// Columnwise assembly from the closed section formulas:
///   A e_c(nu)* u = ((conj(alpha)+conj(nu)) e_c(nu)* - 2Re(alpha) e_c(conj(alpha))*) u / (alpha-conj(nu))
///   B u          = sqrt(2Re alpha) e_c(conj(alpha))* u
///   C e_c(nu)* u = sqrt(2Re alpha) (phi(conj(nu)) - phi(alpha)) u / (alpha-conj(nu))
///   D            = phi(alpha)
/// Throws DegenerateNodeError when conj(alpha) collides with a basis node.
DiscreteBlock cayley_block_c(const SchurFunction& f, Complex alpha, const SpanBasis& kc_basis);

/// Max over random (x, u) of |(||Ax+Bu||_G^2 + ||Cx+Du||^2) - (||x||_G^2 + ||u||^2)| / scale.
double isometry_check(const DiscreteBlock& block, int n_samples, RngStream& rng);

/// Transfer of the Cayley block through the closed kernel-section path
/// (never by inverting the compressed block):
///   (1 - z A)^{-1} B u = (sqrt(2Re alpha)/(1+z)) e_c(conj(mu))* u, mu = mu_alpha(z),
///   Dhat(z) u = phi(alpha) u + z C (that section).
CMat discrete_transfer(const SchurFunction& f, Complex alpha, Complex z);

enum class XiVariant { Observable, Controllable };

/// Coefficient transport of Xi on kernel sections:
///   observable (parameter alpha):        scale_j = (alpha + conj(lambda_j)) / sqrt(2 Re alpha)
///   controllable (parameter conj(alpha)): scale_j = (conj(alpha) + conj(lambda_j)) / sqrt(2 Re alpha)
/// `halfplane_nodes` must map onto the disk basis nodes under the matching
/// Moebius map (checked to 1e-10, DomainError otherwise).
ModelVector xi_apply(const SpanBasis& disk_basis, const ModelVector& disk_vec,
                     const std::vector<Complex>& halfplane_nodes, Complex alpha, XiVariant variant);

/// (Xi_alpha xi)(mu) = sqrt(2 Re alpha) / (conj(alpha) + mu) * xi(z_alpha(mu)).
CVec xi_pointwise(const Evaluator& xi_disk, Complex alpha, Complex mu);

/// (Xi_alpha^{-1} zeta)(z) = sqrt(2 Re alpha) / (1 + z) * zeta(mu_alpha(z)).
CVec xi_inverse_pointwise(const Evaluator& zeta_halfplane, Complex alpha, Complex z);

struct DiskObsAction {
  CVec Ag_at_z;  // (g(z) - g(0)) / z
  CVec Bu_at_z;  // (phi(z) - phi(0)) / z * u
  CVec Cg;       // g(0)
  CVec Du;       // phi(0) u
};

/// Classical disk-model actions; z = 0 is evaluated by a two-sided numerical
/// derivative with step 1e-5 and one quadratic Richardson step.
DiskObsAction disk_model_obs(const SchurFunction& phi_disk, const Evaluator& g, const CVec& u, Complex z);

/// Pointwise residuals of the intertwining between the Cayley block of the
/// observable model and the classical disk model transported by Xi_alpha.
/// `alpha_disk` lets a negative control mismatch the two sides; equal
/// parameters give the identity being certified.
double intertwine_check_obs(const SchurFunction& f, Complex alpha, const std::vector<Complex>& probe_mus,
                            const std::vector<CVec>& probe_vecs, Complex alpha_disk);

inline double intertwine_check_obs(const SchurFunction& f, Complex alpha, const std::vector<Complex>& probe_mus,
                                   const std::vector<CVec>& probe_vecs) {
  return intertwine_check_obs(f, alpha, probe_mus, probe_vecs, alpha);
}

/// Controllable-side intertwining, with the disk-model functional g~(0)
/// computed by transport through Xi_conj(alpha).
double intertwine_check_contr(const SchurFunction& f, Complex alpha, const std::vector<Complex>& probe_mus,
                              const std::vector<CVec>& probe_vecs);

/// alpha-independence of the transported functional: C_c x computed through
/// tau_{c,alpha} (alpha - A_c) for the two parameters, on differences of
/// kernel sections. Returns the max abs disagreement.
double gamma_alpha_independence(const SchurFunction& f, Complex alpha1, Complex alpha2,
                                const std::vector<Complex>& node_pairs, const std::vector<CVec>& vecs);

nlohmann::json discrete_block_to_json(const DiscreteBlock& block);

}  // namespace cayley
}  // namespace dbr
