#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dbr/model_c.hpp"
#include "dbr/rng.hpp"

using namespace dbr;
using namespace dbr::model_c;

namespace {
Complex c(double re, double im = 0.0) { return {re, im}; }
SchurFunction zero_fn() { return SchurFunction::constant(CMat::Zero(1, 1)); }
SchurFunction blaschke1() { return SchurFunction::blaschke(c(1)); }
CVec one() { return CVec::Constant(1, 1.0); }
}  // namespace

TEST_CASE("generator action") {
  GeneratorImage img = apply_generator(blaschke1(), {c(2), one()});
  CHECK(img.basis.nodes().size() == 1);
  CHECK(std::abs(img.basis.nodes()[0] - c(2)) < 1e-15);
  CHECK(std::abs(img.state.coeffs(0) - c(2)) < 1e-15);
  CHECK(std::abs(img.output(0) - 1.0 / 3.0) < 1e-15);

  GeneratorImage zero_out = apply_generator(zero_fn(), {c(1), one()});
  CHECK(zero_out.output.norm() == 0.0);
  CHECK(std::abs(zero_out.state.coeffs(0) - 1.0) < 1e-15);

  GeneratorImage null = apply_generator(blaschke1(), {c(2), CVec::Zero(1)});
  CHECK(null.state.coeffs.norm() == 0.0);
  CHECK(null.output.norm() == 0.0);
}

TEST_CASE("energy identity") {
  // Hand value: lambda1 = lambda2 = 2 gives 1 - 1/9 = 8/9 on both sides.
  SchurFunction b = blaschke1();
  Complex lhs = 1.0 - b.eval(c(2))(0, 0) * std::conj(b.eval(c(2))(0, 0));
  CHECK(std::abs(lhs - 8.0 / 9.0) < 1e-15);
  Complex rhs = 4.0 * eval_kernel(KernelKind::kc(), b, c(2), c(2))(0, 0);
  CHECK(std::abs(rhs - 8.0 / 9.0) < 1e-15);
  CHECK(energy_identity_check(b, {{c(2), one()}}) < 1e-15);

  CHECK(energy_identity_check(zero_fn(), {{c(1), one()}}) < 1e-15);

  // Isometric constant: H_c is the zero space, both sides vanish.
  SchurFunction iso = SchurFunction::constant(CMat::Constant(1, 1, 1.0));
  CHECK(energy_identity_check(iso, {{c(1), one()}, {c(2, 1), one()}}) < 1e-15);

  RngStream rng(31, "energy");
  std::vector<NodePair> pairs;
  for (int k = 0; k < 10; ++k) pairs.push_back({rng.halfplane_point(), rng.cvec(1)});
  CHECK(energy_identity_check(b, pairs) < 1e-12);
}

TEST_CASE("resolvent on spans") {
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), zero_fn(), {c(1)});
  SpanResult r = resolvent_on_span(basis, basis.unit_section(0, one()), c(2));
  REQUIRE(r.basis.nodes().size() == 2);
  CHECK(std::abs(r.vec.coeffs(0) - 1.0) < 1e-15);   // e_c(1)*
  CHECK(std::abs(r.vec.coeffs(1) + 1.0) < 1e-15);   // -e_c(2)*

  SpanResult zero = resolvent_on_span(basis, basis.zero_vector(), c(2));
  CHECK(zero.vec.coeffs.norm() == 0.0);

  SpanBasis b2 = SpanBasis::build(KernelKind::kc(), blaschke1(), {c(2)});
  SpanResult r2 = resolvent_on_span(b2, b2.unit_section(0, one()), c(1));
  CHECK(std::abs(r2.vec.coeffs(0) + 1.0) < 1e-15);  // -e_c(2)*
  CHECK(std::abs(r2.vec.coeffs(1) - 1.0) < 1e-15);  // +e_c(1)*

  CHECK_THROWS_AS(resolvent_on_span(basis, basis.unit_section(0, one()), c(1)), DegenerateNodeError);
}

TEST_CASE("tau on sections") {
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), blaschke1(), {c(2)});
  CVec t = tau(basis, basis.unit_section(0, one()), c(1));
  CHECK(std::abs(t(0) + 1.0 / 3.0) < 1e-15);

  SpanBasis cbasis = SpanBasis::build(KernelKind::kc(), SchurFunction::constant(CMat::Constant(1, 1, 0.4)),
                                      {c(1), c(2, 1)});
  RngStream rng(32, "tau");
  CHECK(tau(cbasis, ModelVector{rng.cvec(cbasis.dim())}, c(1.7, 0.3)).norm() < 1e-15);
  CHECK(tau(basis, basis.zero_vector(), c(1)).norm() == 0.0);
}

TEST_CASE("regularized A action") {
  SpanResult r = apply_A_regularized(zero_fn(), c(2), c(1), one());
  CHECK(std::abs(r.vec.coeffs(0) - 1.0) < 1e-15);
  CHECK(std::abs(r.vec.coeffs(1) + 2.0) < 1e-15);

  // Operator identity A (alpha - A)^{-1} = alpha (alpha - A)^{-1} - 1 on sections.
  SchurFunction b = blaschke1();
  Complex alpha = c(1.4, 0.5);
  Complex node = c(2, -1);
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), b, {node});
  ModelVector x = basis.unit_section(0, one());
  SpanResult res = resolvent_on_span(basis, x, alpha);
  SpanResult areg = apply_A_regularized(b, alpha, node, one());
  RngStream rng(33, "areg");
  for (int k = 0; k < 10; ++k) {
    Complex mu = rng.halfplane_point();
    CVec lhs = areg.basis.point_eval(areg.vec, mu);
    CVec rhs = alpha * res.basis.point_eval(res.vec, mu) - basis.point_eval(x, mu);
    CHECK((lhs - rhs).norm() < 1e-12);
  }
  CHECK(apply_A_regularized(b, alpha, node, CVec::Zero(1)).vec.coeffs.norm() == 0.0);
}

TEST_CASE("two resolvent routes agree") {
  // phi = 0, alpha = 2, g = e_c(1)*: both routes give 1/6 at mu = 1.
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), zero_fn(), {c(1)});
  ModelVector x = basis.unit_section(0, one());
  SpanResult direct = resolvent_on_span(basis, x, c(2));
  CHECK(std::abs(direct.basis.point_eval(direct.vec, c(1))(0) - 1.0 / 6.0) < 1e-15);
  Evaluator generic = resolvent_generic(zero_fn(), c(2), basis.evaluator(x), tau(basis, x, c(2)));
  CHECK(std::abs(generic(c(1))(0) - 1.0 / 6.0) < 1e-15);

  // Blaschke example: value 1/9 at mu = 2 both ways.
  SpanBasis b2 = SpanBasis::build(KernelKind::kc(), blaschke1(), {c(2)});
  ModelVector x2 = b2.unit_section(0, one());
  CVec tau2 = tau(b2, x2, c(1));
  CHECK(std::abs(tau2(0) + 1.0 / 3.0) < 1e-15);
  Evaluator gen2 = resolvent_generic(blaschke1(), c(1), b2.evaluator(x2), tau2);
  CHECK(std::abs(gen2(c(2))(0) - 1.0 / 9.0) < 1e-14);
  SpanResult dir2 = resolvent_on_span(b2, x2, c(1));
  CHECK(std::abs(dir2.basis.point_eval(dir2.vec, c(2))(0) - 1.0 / 9.0) < 1e-14);

  Evaluator zero_route = resolvent_generic(blaschke1(), c(1), b2.evaluator(b2.zero_vector()), CVec::Zero(1));
  CHECK(zero_route(c(2)).norm() < 1e-15);
}

TEST_CASE("resolvent identity") {
  RngStream rng(34, "res-id");
  SchurFunction b = SchurFunction::blaschke(c(2, 1));
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), b, {c(0.5), c(1, 1)});
  ModelVector x{rng.cvec(basis.dim())};
  Complex a1 = c(1.2, 0.4), a2 = c(2.5, -0.6);
  SpanResult r1 = resolvent_on_span(basis, x, a1);
  SpanResult r2 = resolvent_on_span(basis, x, a2);
  SpanResult r12 = resolvent_on_span(r2.basis, r2.vec, a1);
  for (int k = 0; k < 20; ++k) {
    Complex mu = rng.halfplane_point();
    CVec lhs = r1.basis.point_eval(r1.vec, mu) - r2.basis.point_eval(r2.vec, mu);
    CVec rhs = (a2 - a1) * r12.basis.point_eval(r12.vec, mu);
    CHECK((lhs - rhs).norm() <= 1e-9);
  }
}

TEST_CASE("Cc on zero-sum combinations and the semi-explicit output") {
  SchurFunction b = blaschke1();
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), b, {c(2), c(3)});
  ModelVector diff{CVec::Zero(2)};
  diff.coeffs << 1.0, -1.0;
  CVec gamma = apply_Cc_zero_sum(basis, diff);
  CHECK(std::abs(gamma(0) - (b.eval(c(2))(0, 0) - b.eval(c(3))(0, 0))) < 1e-15);
  ModelVector bad{CVec::Zero(2)};
  bad.coeffs << 1.0, 1.0;
  CHECK_THROWS_AS(apply_Cc_zero_sum(basis, bad), DomainError);

  // y = gamma_lambda + phi(conj(lambda)) u must not depend on lambda.
  ModelVector x = basis.unit_section(0, one());
  CVec y1 = semiexplicit_output(basis, x, one(), c(0.8, 0.1));
  CVec y2 = semiexplicit_output(basis, x, one(), c(4.0, -2.0));
  CHECK((y1 - y2).norm() < 1e-14);
  CHECK(std::abs(y1(0) - b.eval(c(2))(0, 0)) < 1e-14);
}

TEST_CASE("dual apply and the eta limit") {
  // Constant D: u = D* y regardless of the schedule.
  CMat d = CMat::Constant(1, 1, Complex(0.3, 0.4));
  SchurFunction f = SchurFunction::constant(d);
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), f, {c(1)});
  CVec y = CVec::Constant(1, Complex(1.0, -2.0));
  DualApplyResult r = dual_apply(f, basis, basis.zero_vector(), y);
  CHECK((r.u - d.adjoint() * y).norm() < 1e-10);

  // Blaschke section at lambda = 1 with y = 0: u = lim eta K_c(eta, 1) = 1.
  SchurFunction b = blaschke1();
  SpanBasis bb = SpanBasis::build(KernelKind::kc(), b, {c(1)});
  DualApplyResult rb = dual_apply(b, bb, bb.unit_section(0, one()), CVec::Zero(1));
  CHECK(std::abs(rb.u(0) - 1.0) < 1e-6);
  CHECK((rb.u - dual_limit_closed_form(b, bb, bb.unit_section(0, one()), CVec::Zero(1))).norm() < 1e-6);

  DualApplyResult rz = dual_apply(b, bb, bb.zero_vector(), CVec::Zero(1));
  CHECK(rz.u.norm() < 1e-12);

  // The returned z evaluator reproduces mu x(mu) + phi~(mu) y - u.
  RngStream rng(35, "dual");
  ModelVector x{rng.cvec(1)};
  CVec y2 = rng.cvec(1);
  DualApplyResult r2 = dual_apply(b, bb, x, y2);
  SchurFunction flip = b.adjoint_flip();
  for (int k = 0; k < 20; ++k) {
    Complex mu = rng.halfplane_point();
    CVec direct = mu * bb.point_eval(x, mu) + flip.eval(mu) * y2 - r2.u;
    CHECK((r2.z(mu) - direct).norm() < 1e-10);
  }

  CHECK_THROWS_AS(dual_apply(b, bb, x, y2, {1.0, 2.0, 3.0}), DomainError);
}

TEST_CASE("dual action on a resolvent-type domain element") {
  // For the Blaschke factor, x(mu) = (phi(mu) - phi(2)) / (2 - mu) equals
  // -(2/3) K_c(., 1), an exact span element, and the pair (x, y=1) lies in
  // the domain of the adjoint with u = phi~(2) = 1/3 and z = 2 x. This pins
  // the limit formula against the resolvent route.
  SchurFunction b = blaschke1();
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), b, {c(1)});
  ModelVector x{CVec::Constant(1, -2.0 / 3.0)};
  RngStream rng(38, "dual-domain");
  for (int k = 0; k < 10; ++k) {
    Complex mu = rng.halfplane_point();
    Complex expected = (b.eval(mu)(0, 0) - b.eval(c(2))(0, 0)) / (c(2) - mu);
    CHECK(std::abs(basis.point_eval(x, mu)(0) - expected) < 1e-14);
  }
  DualApplyResult r = dual_apply(b, basis, x, one());
  CHECK(std::abs(r.u(0) - 1.0 / 3.0) < 1e-8);
  for (int k = 0; k < 10; ++k) {
    Complex mu = rng.halfplane_point();
    CHECK((r.z(mu) - 2.0 * basis.point_eval(x, mu)).norm() < 1e-8);
  }
}

TEST_CASE("delta intertwiner for the Blaschke realization") {
  SchurFunction b = blaschke1();
  ExtRealization ext;
  double s = std::sqrt(2.0);
  ext.A = CMat::Constant(1, 1, -1.0);
  ext.B = CMat::Constant(1, 1, -s);
  ext.C = CMat::Constant(1, 1, s);
  ext.D = CMat::Constant(1, 1, 1.0);
  CHECK(ext.is_hurwitz());
  CHECK(ext.is_energy_preserving());

  // Single node {2}: Delta = (2+1)^{-1}(-sqrt 2) and |Delta|^2 = 2/9 = K_c(2,2).
  SpanBasis single = SpanBasis::build(KernelKind::kc(), b, {c(2)});
  DeltaResult d1 = intertwiner_delta(b, ext, single);
  CHECK(std::abs(d1.delta(0, 0) + s / 3.0) < 1e-15);
  CHECK(d1.isometry_residual < 1e-12);
  CHECK(d1.intertwine_residual < 1e-12);

  SpanBasis five = SpanBasis::build(KernelKind::kc(), b, {c(0.5), c(2), c(3), c(1, 1), c(2, -3)});
  DeltaResult d5 = intertwiner_delta(b, ext, five);
  CHECK(d5.isometry_residual < 1e-10);
  CHECK(d5.intertwine_residual < 1e-10);

  ExtRealization bad = ext;
  bad.B *= 1.1;
  CHECK_FALSE(bad.is_energy_preserving());
  DeltaResult db = intertwiner_delta(b, bad, five);
  CHECK(db.isometry_residual > 1e-3);

  ExtRealization unstable = ext;
  unstable.A = CMat::Constant(1, 1, 1.0);
  CHECK_THROWS_AS(intertwiner_delta(b, unstable, five), StabilityError);

  // Zero-dimensional realization of an isometric constant: everything vanishes.
  SchurFunction iso = SchurFunction::constant(CMat::Constant(1, 1, 1.0));
  ExtRealization trivial;
  trivial.A = CMat(0, 0);
  trivial.B = CMat(0, 1);
  trivial.C = CMat(1, 0);
  trivial.D = CMat::Constant(1, 1, 1.0);
  SpanBasis zero_basis = SpanBasis::build(KernelKind::kc(), iso, {c(1), c(2)});
  DeltaResult dz = intertwiner_delta(iso, trivial, zero_basis);
  CHECK(dz.isometry_residual < 1e-15);
  CHECK(dz.intertwine_residual < 1e-15);
}

TEST_CASE("conservativity probe") {
  RngStream rng(36, "conserv");
  std::vector<Complex> probes;
  for (int k = 0; k < 12; ++k) probes.push_back(rng.halfplane_point());

  SchurFunction b = blaschke1();
  SpanBasis dense_b = SpanBasis::build(KernelKind::kc(), b, default_dense_nodes());
  ConservativityReport rep_b =
      conservativity_probe(b, c(1), {CVec::Constant(1, 1.0), CVec::Zero(1)}, dense_b, probes);
  CHECK(rep_b.heuristic);
  CHECK(rep_b.phi_tilde_injective);
  CHECK_FALSE(rep_b.samples[0].in_span);
  CHECK(rep_b.conservative);

  SchurFunction half = SchurFunction::constant(CMat::Constant(1, 1, 0.5));
  SpanBasis dense_h = SpanBasis::build(KernelKind::kc(), half, default_dense_nodes());
  ConservativityReport rep_h = conservativity_probe(half, c(1), {CVec::Constant(1, 1.0)}, dense_h, probes);
  CHECK(rep_h.samples[0].in_span);
  CHECK_FALSE(rep_h.conservative);
}

TEST_CASE("observable model via duality") {
  SchurFunction b = blaschke1();
  ObservableModel obs(b);

  CHECK(obs.duality_gram_residual({c(1), c(2), c(0.5, 0.5)}) < 1e-14);

  SpanBasis ko = obs.build_span({c(1)});
  ModelVector x = ko.unit_section(0, one());
  // ((2 - A_o)^{-1} x)(1) = (K_o(1,1) - K_o(2,1)) / (2 - 1) = 1/6.
  Evaluator res = obs.resolvent(ko, x, c(2));
  CHECK(std::abs(res(c(1))(0) - 1.0 / 6.0) < 1e-14);
  // C_o (2 - A_o)^{-1} x = x(2) = 1/3.
  CHECK(std::abs(obs.Co_of_resolvent(ko, x, c(2))(0) - 1.0 / 3.0) < 1e-14);

  // Constant symbol: the B_o section vanishes identically.
  ObservableModel obs_const(SchurFunction::constant(CMat::Constant(1, 1, Complex(0.2, 0.1))));
  Evaluator bo = obs_const.Bo_section(c(2), one());
  CHECK(bo(c(1)).norm() < 1e-15);

  // Generator of the adjoint pair realizes phi~.
  GeneratorImage gen = obs.apply_generator(c(2), one());
  CHECK(std::abs(gen.output(0) - b.adjoint_flip().eval(c(2))(0, 0)) < 1e-15);
}

TEST_CASE("dual resolvent adjoint pairing") {
  RngStream rng(37, "dual-res");
  SchurFunction b = SchurFunction::blaschke(c(2, 1));
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), b, {c(0.7), c(1.5, 0.8), c(3, -1)});
  ModelVector x{rng.cvec(basis.dim())};
  std::vector<ModelVector> ys;
  for (int k = 0; k < 10; ++k) ys.push_back(ModelVector{rng.cvec(basis.dim())});
  CHECK(dual_resolvent_law_residual(basis, x, c(1.3, 0.2), ys) < 1e-10);
}
