#include "dbr/cayley.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "dbr/kernels.hpp"

namespace dbr {
namespace cayley {

namespace {

constexpr double kDegenTol = 1e-8;

// (phi(at) - phi(alpha)) / (alpha - at); near at ~ alpha this is -phi'(alpha),
// evaluated by a two-sided difference with one Richardson step.
CMat phi_difference_quotient(const SchurFunction& f, Complex at, Complex alpha) {
  if (std::abs(alpha - at) < kDegenTol) {
    auto diff = [&](double h) -> CMat { return (f.eval(alpha + h) - f.eval(alpha - h)) / (2.0 * h); };
    CMat d1 = diff(1e-5);
    CMat d2 = diff(5e-6);
    return -(4.0 * d2 - d1) / 3.0;
  }
  return (f.eval(at) - f.eval(alpha)) / (alpha - at);
}

// (g(z) - g(0)) / z with the z = 0 value supplied by the derivative at 0.
CVec disk_difference_quotient(const std::function<CVec(Complex)>& g, Complex z) {
  if (std::abs(z) < kDegenTol) {
    auto diff = [&](double h) -> CVec { return (g(Complex(h, 0.0)) - g(Complex(-h, 0.0))) / (2.0 * h); };
    CVec d1 = diff(1e-5);
    CVec d2 = diff(5e-6);
    return (4.0 * d2 - d1) / 3.0;
  }
  return (g(z) - g(Complex(0.0, 0.0))) / z;
}

}  // namespace

DiscreteBlock cayley_block_c(const SchurFunction& f, Complex alpha, const SpanBasis& kc_basis) {
  if (kc_basis.kind().tag != KernelTag::Kc) throw DomainError("cayley_block_c needs a Kc span basis");
  if (!(alpha.real() > 0.0)) throw DomainError("Cayley parameter must lie in the right half-plane");
  Complex ab = std::conj(alpha);
  for (Complex node : kc_basis.nodes())
    if (std::abs(node - ab) < kDegenTol)
      throw DegenerateNodeError("Cayley parameter conjugate collides with a basis node");

  DiscreteBlock block;
  block.alpha = alpha;
  block.in_basis = kc_basis;
  block.aug_basis = kc_basis.with_node(ab);

  Eigen::Index d = kc_basis.block_dim();
  Eigen::Index p = f.output_dim();
  Eigen::Index n_in = kc_basis.dim();
  Eigen::Index n_aug = block.aug_basis.dim();
  double s = std::sqrt(2.0 * alpha.real());
  CMat phi_alpha = f.eval(alpha);

  block.A_mat = CMat::Zero(n_aug, n_in);
  block.B_mat = CMat::Zero(n_aug, d);
  block.C_mat = CMat::Zero(p, n_in);
  block.D_mat = phi_alpha;
  block.B_mat.bottomRows(d) = s * CMat::Identity(d, d);

  for (std::size_t j = 0; j < kc_basis.nodes().size(); ++j) {
    Complex nu_bar = std::conj(kc_basis.nodes()[j]);
    Complex den = alpha - nu_bar;
    Eigen::Index col = static_cast<Eigen::Index>(j) * d;
    block.A_mat.block(col, col, d, d) = (ab + nu_bar) / den * CMat::Identity(d, d);
    block.A_mat.block(n_in, col, d, d) = -2.0 * alpha.real() / den * CMat::Identity(d, d);
    block.C_mat.block(0, col, p, d) = s * (f.eval(nu_bar) - phi_alpha) / den;
  }
  return block;
}

double isometry_check(const DiscreteBlock& block, int n_samples, RngStream& rng) {
  if (n_samples < 1) throw DomainError("isometry check needs at least one sample");
  const CMat& g_aug = block.aug_basis.gram().entries;
  Eigen::Index n_in = block.in_basis.dim();
  Eigen::Index m = block.B_mat.cols();
  double worst = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    CVec x = rng.cvec(n_in);
    CVec u = rng.cvec(m);
    CVec state = block.A_mat * x + block.B_mat * u;
    CVec out = block.C_mat * x + block.D_mat * u;
    double lhs = (state.adjoint() * g_aug * state)(0, 0).real() + out.squaredNorm();
    CVec x_aug = CVec::Zero(block.aug_basis.dim());
    x_aug.head(n_in) = x;
    double rhs = (x_aug.adjoint() * g_aug * x_aug)(0, 0).real() + u.squaredNorm();
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(rhs, 1e-30));
  }
  return worst;
}

CMat discrete_transfer(const SchurFunction& f, Complex alpha, Complex z) {
  if (!(alpha.real() > 0.0)) throw DomainError("Cayley parameter must lie in the right half-plane");
  if (!in_disk(z) || std::abs(z + 1.0) < 1e-14) throw DomainError("transfer point must lie in D, z != -1");
  Complex mu = mobius_to_halfplane(alpha, z);
  double s2 = 2.0 * alpha.real();
  Complex section_coeff = std::sqrt(s2) / (1.0 + z);
  // Dhat(z) = phi(alpha) + z C (1 - z A)^{-1} B through the closed section path.
  return f.eval(alpha) + z * section_coeff * std::sqrt(s2) * phi_difference_quotient(f, mu, alpha);
}

ModelVector xi_apply(const SpanBasis& disk_basis, const ModelVector& disk_vec,
                     const std::vector<Complex>& halfplane_nodes, Complex alpha, XiVariant variant) {
  if (!(alpha.real() > 0.0)) throw DomainError("Xi parameter must lie in the right half-plane");
  if (halfplane_nodes.size() != disk_basis.nodes().size())
    throw DimensionError("one half-plane node per disk node required");
  if (disk_vec.coeffs.size() != disk_basis.dim()) throw DimensionError("coefficient length mismatch");
  bool obs = variant == XiVariant::Observable;
  if (obs && disk_basis.kind().tag != KernelTag::DiskKo)
    throw DomainError("observable transport expects a DiskKo basis");
  if (!obs && disk_basis.kind().tag != KernelTag::DiskKc)
    throw DomainError("controllable transport expects a DiskKc basis");

  Complex map_param = obs ? alpha : std::conj(alpha);
  double s = std::sqrt(2.0 * alpha.real());
  Eigen::Index d = disk_basis.block_dim();
  ModelVector out{CVec::Zero(disk_vec.coeffs.size())};
  for (std::size_t j = 0; j < halfplane_nodes.size(); ++j) {
    Complex lambda = halfplane_nodes[j];
    if (!(lambda.real() > 0.0)) throw DomainError("half-plane nodes must have positive real part");
    Complex expected = mobius_to_disk(map_param, lambda);
    if (std::abs(expected - disk_basis.nodes()[j]) > 1e-10)
      throw DomainError("disk node is not the Moebius image of the supplied half-plane node");
    Complex scale = (obs ? alpha + std::conj(lambda) : std::conj(alpha) + std::conj(lambda)) / s;
    out.coeffs.segment(static_cast<Eigen::Index>(j) * d, d) =
        scale * disk_vec.coeffs.segment(static_cast<Eigen::Index>(j) * d, d);
  }
  return out;
}

CVec xi_pointwise(const Evaluator& xi_disk, Complex alpha, Complex mu) {
  if (!(alpha.real() > 0.0)) throw DomainError("Xi parameter must lie in the right half-plane");
  if (!in_halfplane(mu)) throw DomainError("Xi output lives on the right half-plane");
  return std::sqrt(2.0 * alpha.real()) / (std::conj(alpha) + mu) * xi_disk(mobius_to_disk(alpha, mu));
}

CVec xi_inverse_pointwise(const Evaluator& zeta_halfplane, Complex alpha, Complex z) {
  if (!(alpha.real() > 0.0)) throw DomainError("Xi parameter must lie in the right half-plane");
  if (!in_disk(z) || std::abs(z + 1.0) < 1e-14) throw DomainError("Xi inverse needs z in D, z != -1");
  return std::sqrt(2.0 * alpha.real()) / (1.0 + z) * zeta_halfplane(mobius_to_halfplane(alpha, z));
}

DiskObsAction disk_model_obs(const SchurFunction& phi_disk, const Evaluator& g, const CVec& u, Complex z) {
  if (phi_disk.domain() != Domain::Disk) throw DomainError("disk_model_obs needs a disk function");
  if (!in_disk(z)) throw DomainError("disk model probed outside the unit disk");
  DiskObsAction action;
  action.Ag_at_z = disk_difference_quotient(g, z);
  auto phi_u = [&](Complex w) -> CVec { return phi_disk.eval(w) * u; };
  action.Bu_at_z = disk_difference_quotient(phi_u, z);
  action.Cg = g(Complex(0.0, 0.0));
  action.Du = phi_disk.eval(Complex(0.0, 0.0)) * u;
  return action;
}

double intertwine_check_obs(const SchurFunction& f, Complex alpha, const std::vector<Complex>& probe_mus,
                            const std::vector<CVec>& probe_vecs, Complex alpha_disk) {
  if (probe_mus.empty() || probe_vecs.empty()) throw DomainError("intertwine check needs probes");
  SchurFunction fd = f.to_disk(alpha_disk);
  double s = std::sqrt(2.0 * alpha.real());
  double worst = 0.0;

  std::size_t n_sections = std::min<std::size_t>(3, probe_mus.size());
  for (std::size_t k = 0; k < n_sections; ++k) {
    Complex node = probe_mus[k];
    Complex w = mobius_to_disk(alpha_disk, node);
    CVec y = probe_vecs[k % probe_vecs.size()];
    if (y.size() != f.output_dim()) throw DimensionError("observable probes live in the output space");
    Evaluator xi = [fd, w, y](Complex z) -> CVec {
      return eval_kernel(KernelKind::disk_ko(), fd, z, w) * y;
    };
    Evaluator xi_A = [xi](Complex z) -> CVec { return disk_difference_quotient(xi, z); };
    // The transport runs at the disk-side parameter; with alpha_disk == alpha
    // this is the certified identity, otherwise the negative control.
    CVec x_at_alpha = xi_pointwise(xi, alpha_disk, alpha);

    for (Complex mu : probe_mus) {
      if (std::abs(mu - alpha) < 1e-6) continue;
      CVec x_mu = xi_pointwise(xi, alpha_disk, mu);

      CVec lhs_A = ((std::conj(alpha) + mu) * x_mu - 2.0 * alpha.real() * x_at_alpha) / (alpha - mu);
      CVec rhs_A = xi_pointwise(xi_A, alpha_disk, mu);
      worst = std::max(worst, (lhs_A - rhs_A).norm());
    }
    // C row: sqrt(2 Re alpha) (Xi xi)(alpha) against xi(0).
    worst = std::max(worst, (s * x_at_alpha - xi(Complex(0.0, 0.0))).norm());
  }

  // B column and feedthrough, on input-space vectors.
  for (Eigen::Index i = 0; i < f.input_dim(); ++i) {
    CVec u = CVec::Unit(f.input_dim(), i);
    Evaluator disk_b = [fd, u](Complex z) -> CVec {
      auto phi_u = [&](Complex w) -> CVec { return fd.eval(w) * u; };
      return disk_difference_quotient(phi_u, z);
    };
    for (Complex mu : probe_mus) {
      if (std::abs(mu - alpha) < 1e-6) continue;
      CVec lhs_B = s * phi_difference_quotient(f, mu, alpha) * u;
      CVec rhs_B = xi_pointwise(disk_b, alpha_disk, mu);
      worst = std::max(worst, (lhs_B - rhs_B).norm());
    }
  }
  worst = std::max(worst, (f.eval(alpha) - fd.eval(Complex(0.0, 0.0))).norm());
  return worst;
}

double intertwine_check_contr(const SchurFunction& f, Complex alpha, const std::vector<Complex>& probe_mus,
                              const std::vector<CVec>& probe_vecs) {
  if (probe_mus.empty() || probe_vecs.empty()) throw DomainError("intertwine check needs probes");
  SchurFunction fd = f.to_disk(alpha);
  SchurFunction flip = f.adjoint_flip();
  SchurFunction flip_d = fd.adjoint_flip();
  Complex ab = std::conj(alpha);
  double s = std::sqrt(2.0 * alpha.real());
  double worst = 0.0;

  std::size_t n_sections = std::min<std::size_t>(3, probe_mus.size());
  for (std::size_t k = 0; k < n_sections; ++k) {
    Complex node = probe_mus[k];
    Complex w = mobius_to_disk(ab, node);
    CVec u = probe_vecs[k % probe_vecs.size()];
    if (u.size() != f.input_dim()) throw DimensionError("controllable probes live in the input space");

    Evaluator g = [fd, w, u](Complex z) -> CVec {
      return eval_kernel(KernelKind::disk_kc(), fd, z, w) * u;
    };
    // Transported section is exact: Xi_conj(alpha) g = (conj(alpha)+conj(node))/s e_c(node)* u.
    SpanBasis basis = SpanBasis::build(KernelKind::kc(), f, {node});
    ModelVector x = basis.unit_section(0, u);
    x.coeffs *= (ab + std::conj(node)) / s;

    CVec tau_x = model_c::tau(basis, x, alpha);
    CVec gtilde0 = s * tau_x;  // disk functional by transport
    Evaluator disk_A = [g, flip_d, gtilde0](Complex z) -> CVec {
      return z * g(z) - flip_d.eval(z) * gtilde0;
    };

    for (Complex mu : probe_mus) {
      CVec x_mu = basis.point_eval(x, mu);
      // Transported-section identity itself (the kernel relation, pointwise).
      worst = std::max(worst, (x_mu - xi_pointwise(g, ab, mu)).norm());

      CVec lhs_A = ((ab - mu) * x_mu - 2.0 * alpha.real() * (flip.eval(mu) * tau_x)) / (alpha + mu);
      CVec rhs_A = xi_pointwise(disk_A, ab, mu);
      worst = std::max(worst, (lhs_A - rhs_A).norm());
    }
  }

  for (Eigen::Index i = 0; i < f.input_dim(); ++i) {
    CVec u = CVec::Unit(f.input_dim(), i);
    Evaluator disk_b = [fd, u](Complex z) -> CVec {
      return eval_kernel(KernelKind::disk_kc(), fd, z, Complex(0.0, 0.0)) * u;
    };
    for (Complex mu : probe_mus) {
      CVec lhs_B = s * (eval_kernel(KernelKind::kc(), f, mu, ab) * u);
      CVec rhs_B = xi_pointwise(disk_b, ab, mu);
      worst = std::max(worst, (lhs_B - rhs_B).norm());
    }
  }
  worst = std::max(worst, (f.eval(alpha) - fd.eval(Complex(0.0, 0.0))).norm());
  return worst;
}

double gamma_alpha_independence(const SchurFunction& f, Complex alpha1, Complex alpha2,
                                const std::vector<Complex>& node_pairs, const std::vector<CVec>& vecs) {
  if (node_pairs.size() < 2 || node_pairs.size() % 2 != 0)
    throw DomainError("node list must hold pairs of distinct section nodes");
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < node_pairs.size(); k += 2) {
    Complex a = node_pairs[k];
    Complex b = node_pairs[k + 1];
    CVec u = vecs[(k / 2) % vecs.size()];
    SpanBasis basis = SpanBasis::build(KernelKind::kc(), f, {a, b});
    Eigen::Index d = basis.block_dim();
    auto gamma_for = [&](Complex alpha) -> CVec {
      ModelVector reg{CVec::Zero(2 * d)};
      reg.coeffs.head(d) = (alpha - std::conj(a)) * u;
      reg.coeffs.tail(d) = -(alpha - std::conj(b)) * u;
      return model_c::tau(basis, reg, alpha);
    };
    worst = std::max(worst, (gamma_for(alpha1) - gamma_for(alpha2)).norm());
  }
  return worst;
}

nlohmann::json discrete_block_to_json(const DiscreteBlock& block) {
  auto dump = [](const CMat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json j;
  j["alpha"] = {block.alpha.real(), block.alpha.imag()};
  j["A"] = dump(block.A_mat);
  j["B"] = dump(block.B_mat);
  j["C"] = dump(block.C_mat);
  j["D"] = dump(block.D_mat);
  j["gram"] = dump(block.aug_basis.gram().entries);
  nlohmann::json nodes = nlohmann::json::array();
  for (Complex n : block.aug_basis.nodes()) nodes.push_back({n.real(), n.imag()});
  j["nodes"] = nodes;
  return j;
}

}  // namespace cayley
}  // namespace dbr
