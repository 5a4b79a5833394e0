#include <catch2/catch_amalgamated.hpp>

#include "jumplab/forms.hpp"

using namespace jumplab;

namespace {

// Independent oracle for the box-truncated Gamma(phi, phi) of a single tent
// function under a radial kernel profile in d = 1, via the one-dimensional
// reduction
//   Gamma_B = 2 int_0^(box width) rho(r) g_B(r) dr,
//   g_B(r)  = int_{x in B, x+r in B} (phi(x+r) - phi(x))^2 dx,
// with g_B evaluated piecewise-exactly (the integrand is piecewise quadratic
// between tent and box breakpoints) and an analytic |x-y| < delta part. The
// assembly integrates over box x box, so the oracle carries the same
// truncation.
double tent_gamma_oracle(double a_half, const std::function<double(double)>& rho,
                         double grad_sq_coeff, double box_lo, double box_hi) {
  auto phi = [a_half](double x) { return std::max(0.0, 1.0 - std::abs(x) / a_half); };
  auto g_box = [&](double r) {
    std::vector<double> bp = {-a_half, 0.0, a_half, -a_half - r, -r, a_half - r,
                              box_lo, box_hi - r};
    std::sort(bp.begin(), bp.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      double lo = std::max(bp[i], box_lo), hi = std::min(bp[i + 1], box_hi - r);
      if (hi <= lo) continue;
      s += integrate_gauss([&](double x) { double d = phi(x + r) - phi(x); return d * d; }, lo, hi);
    }
    return s;
  };
  double delta = 1e-5 * a_half;
  // small-r part: g ~ r^2 int phi'^2 and the box constraint is inactive there
  double small = grad_sq_coeff * integrate_graded([&](double r) { return r * r * rho(r); },
                                                  1e-9 * a_half, delta, 8);
  double bulk = integrate_graded([&](double r) { return rho(r) * g_box(r); }, delta,
                                 box_hi - box_lo, 16, {2.0 * a_half});
  return 2.0 * (small + bulk);
}

}  // namespace

TEST_CASE("assembled Gamma(phi,phi) converges to the one-dimensional reduction oracle") {
  const double a_half = 0.25;  // tent half-width fixed across refinements
  const double grad_sq = 2.0 / a_half;

  SECTION("smooth exponential kernel") {
    JumpKernel k;
    k.dim = 1;
    k.symmetric_hint = true;
    k.eval_fn = [](const Vec& x, const Vec& y) { return std::exp(-(x - y).norm()); };
    k.label = "exp_kernel";
    double oracle =
        tent_gamma_oracle(a_half, [](double r) { return std::exp(-r); }, grad_sq, -2.0, 2.0);
    double prev_err = 1e300;
    for (int nodes : {33, 65, 129}) {
      Grid grid = Grid::make1d(-2.0, 2.0, nodes);
      BasisSet basis = BasisSet::interior_hats(grid);
      Vec coeff = Vec::Zero(basis.size());
      for (int i = 0; i < basis.size(); ++i)
        coeff[i] = std::max(0.0, 1.0 - std::abs(grid.node(basis.centers[i])[0]) / a_half);
      auto fa = assemble_forms(k, grid, basis, 8 * (nodes - 1));
      double val = coeff.dot(fa.gamma.A * coeff);
      double err = std::abs(val - oracle) / oracle;
      CAPTURE(nodes, val, oracle, err);
      REQUIRE(err < prev_err);
      prev_err = err;
      if (nodes == 129) REQUIRE(err < 5e-3);
    }
  }

  SECTION("singular stable profile") {
    const double alpha = 0.8;
    const double w = stable_weight(alpha, 1, Normalization::levy_constant);
    auto k = stable_like_kernel(constant_exponent(alpha, 1), Normalization::levy_constant);
    double oracle = tent_gamma_oracle(
        a_half, [&](double r) { return w * std::pow(r, -1.0 - alpha); }, grad_sq, -2.0, 2.0);
    double prev_err = 1e300;
    for (int nodes : {33, 65, 129, 257}) {
      Grid grid = Grid::make1d(-2.0, 2.0, nodes);
      BasisSet basis = BasisSet::interior_hats(grid);
      Vec coeff = Vec::Zero(basis.size());
      for (int i = 0; i < basis.size(); ++i)
        coeff[i] = std::max(0.0, 1.0 - std::abs(grid.node(basis.centers[i])[0]) / a_half);
      auto fa = assemble_forms(k, grid, basis, 8 * (nodes - 1));
      double val = coeff.dot(fa.gamma.A * coeff);
      double err = std::abs(val - oracle) / oracle;
      CAPTURE(nodes, val, oracle, err);
      REQUIRE(err < prev_err);
      prev_err = err;
      if (nodes == 257) REQUIRE(err < 0.05);
    }
  }
}

TEST_CASE("matched-quadrature split identity and symmetric-kernel collapse") {
  Grid grid = Grid::make1d(-2.0, 2.0, 34);
  BasisSet basis = BasisSet::interior_hats(grid);
  SECTION("nonsymmetric kernel") {
    auto k = stable_like_kernel(tanh_exponent(0.7, 0.1), Normalization::paper_weight);
    auto fa = assemble_forms(k, grid, basis, 32);
    double resid = (2.0 * fa.eta.A - fa.gamma.A - 2.0 * fa.B.A).norm() / (2.0 * fa.eta.A.norm());
    REQUIRE(resid < 1e-8);
    REQUIRE(fa.gamma.asym_residual < 1e-12);
    REQUIRE(fa.B.asym_residual > 0.0);  // B is genuinely nonsymmetric here
    REQUIRE(fa.eta.A.allFinite());
  }
  SECTION("symmetric kernel: B vanishes and eta = Gamma/2") {
    auto k = stable_like_kernel(constant_exponent(0.9, 1), Normalization::paper_weight);
    auto fa = assemble_forms(k, grid, basis, 32);
    REQUIRE(fa.B.A.norm() == 0.0);
    REQUIRE((fa.eta.A - 0.5 * fa.gamma.A).norm() <= 1e-12 * fa.eta.A.norm());
  }
  SECTION("far-separated supports under a range-truncated kernel give zero entries") {
    JumpKernel trunc;
    trunc.dim = 1;
    trunc.symmetric_hint = true;
    trunc.eval_fn = [](const Vec& x, const Vec& y) {
      double r = (x - y).norm();
      return r < 0.5 ? std::pow(r, -1.8) : 0.0;
    };
    trunc.label = "truncated_power";
    auto fa = assemble_forms(trunc, grid, basis, 32);
    REQUIRE(fa.gamma.A(0, basis.size() - 1) == 0.0);
    REQUIRE(fa.eta.A(0, basis.size() - 1) == 0.0);
  }
}

TEST_CASE("Gamma is positive semidefinite and diagonal entries are nonnegative") {
  auto k = stable_like_kernel(tanh_exponent(0.7, 0.1), Normalization::paper_weight);
  Grid grid = Grid::make1d(-2.0, 2.0, 34);
  BasisSet basis = BasisSet::interior_hats(grid);
  auto fa = assemble_forms(k, grid, basis, 32);
  Eigen::SelfAdjointEigenSolver<Mat> es(fa.gamma.A);
  REQUIRE(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  for (int i = 0; i < basis.size(); ++i) REQUIRE(fa.gamma.A(i, i) >= 0.0);

  SECTION("Gamma^n(phi,phi) is nondecreasing in the truncation level") {
    double prev = 0.0;
    for (int n : {2, 4, 8, 16, 32}) {
      auto g = assemble_forms(k, grid, basis, n).gamma;
      double v = g.A(16, 16);
      REQUIRE(v >= prev - 1e-15);
      prev = v;
    }
  }
  SECTION("eta^n(phi,phi) is Cauchy across the finest truncation levels") {
    double v1 = assemble_forms(k, grid, basis, 256).eta.A(16, 16);
    double v2 = assemble_forms(k, grid, basis, 512).eta.A(16, 16);
    REQUIRE(std::abs(v2 - v1) <= 1e-3 * std::abs(v2));
  }
}

TEST_CASE("form inequalities hold with the kernel's own constants") {
  auto ef = tanh_exponent(0.7, 0.1);
  auto k = stable_like_kernel(ef, Normalization::paper_weight);
  Grid grid = Grid::make1d(-2.0, 2.0, 66);
  BasisSet basis = BasisSet::interior_hats(grid);
  REQUIRE(basis.size() == 64);
  auto fa = assemble_forms(k, grid, basis, 64);
  QuadratureConfig q;
  auto cond = check_conditions(k, q, sample_points_1d(-2, 2, 9), admissible_gamma(ef).pick());
  auto bounds = verify_bounds(fa, cond, 1000, 1e-10, 99);
  for (const auto& c : bounds.checks) {
    CAPTURE(c.name, c.worst_margin);
    REQUIRE(c.pass);
  }
  REQUIRE(bounds.sector_ratio_sup <= 2.0 * std::sqrt(2.0));

  SECTION("symmetrized shifted matrix is positive semidefinite") {
    Mat sym = 0.5 * (fa.eta.A + fa.eta.A.transpose()) + cond.beta0 * fa.mass;
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-10 * std::abs(es.eigenvalues().maxCoeff()));
  }
  SECTION("beta0 = 0 collapses the sandwich to the symmetric case") {
    auto ks = stable_like_kernel(constant_exponent(0.75, 1), Normalization::paper_weight);
    auto fs = assemble_forms(ks, grid, basis, 64);
    auto cs = check_conditions(ks, q, sample_points_1d(-2, 2, 5), 1.0);
    REQUIRE(cs.beta0 == 0.0);
    auto bs = verify_bounds(fs, cs, 500, 1e-10, 5);
    for (const auto& c : bs.checks) REQUIRE(c.pass);
  }
}

TEST_CASE("unit contraction surrogate is nonnegative on clipped grid functions") {
  auto k = stable_like_kernel(tanh_exponent(0.7, 0.1), Normalization::paper_weight);
  Grid grid = Grid::make1d(-2.0, 2.0, 34);
  std::vector<Vec> samples;
  {
    Vec u = Vec::Zero(grid.n_nodes());   // peak 2: clipping active above
    Vec v = Vec::Zero(grid.n_nodes());   // negative bump: Uu = 0
    Vec w = Vec::Zero(grid.n_nodes());   // inside [0,1]: u - Uu = 0
    for (int i = 0; i < grid.n_nodes(); ++i) {
      double x = grid.node(i)[0];
      double hat = std::max(0.0, 1.0 - std::abs(x));
      u[i] = 2.0 * hat;
      v[i] = -hat;
      w[i] = 0.8 * hat;
    }
    samples = {u, v, w};
  }
  auto rep = check_unit_contraction(k, grid, {8, 16, 32}, samples);
  REQUIRE(rep.pass);
  REQUIRE(rep.min_value >= 0.0);
  // u - Uu = 0 cases give exactly zero
  REQUIRE(rep.values[rep.values.size() - 1] == 0.0);  // w sample, finest n
}

TEST_CASE("two-dimensional assembly sanity") {
  auto k = stable_like_kernel(constant_exponent(1.0, 2), Normalization::levy_constant);
  Grid grid = Grid::make({{{-1.0, 1.0}, {-1.0, 1.0}}}, 9);
  BasisSet basis = BasisSet::interior_hats(grid);
  REQUIRE(basis.size() == 49);
  auto fa = assemble_forms(k, grid, basis, 16);
  REQUIRE(fa.B.A.norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(fa.gamma.A);
  REQUIRE(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  double resid = (2.0 * fa.eta.A - fa.gamma.A).norm() / (2.0 * fa.eta.A.norm());
  REQUIRE(resid < 1e-12);
}

TEST_CASE("triplet serialization carries the band level and hashes") {
  auto k = symmetric_power_kernel(1, 2.0);
  Grid grid = Grid::make1d(-1.0, 1.0, 10);
  BasisSet basis = BasisSet::interior_hats(grid);
  auto fa = assemble_forms(k, grid, basis, 8);
  std::string path = "form_test.txt";
  fa.gamma.save_triplets(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  REQUIRE(header.find("kind=gamma") != std::string::npos);
  REQUIRE(header.find("n=8") != std::string::npos);
  REQUIRE(header.find("grid=" + std::to_string(grid.hash())) != std::string::npos);
  int r, c;
  double v;
  REQUIRE(in >> r >> c >> v);
  REQUIRE(v == fa.gamma.A(r, c));
  std::remove(path.c_str());
}
