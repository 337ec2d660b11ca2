#include <doctest.h>

#include "prdl/compact_scaphase.hpp"
#include "prdl/tuning.hpp"
#include "support.hpp"

using namespace prdl;
using namespace prdl::testing;

namespace {

CVector flat(const CMatrix& M) { return Eigen::Map<const CVector>(M.data(), M.size()); }

// 1/2 ||vec(Y_p) - H_p d||^2 with Y_p = target - F(DZ) + F(d_p z_p).
double column_objective(const ProblemInstance& inst, const Iterate& it, Index p,
                        const CVector& d) {
  const CVector z = it.Z.row(p).transpose();
  const CMatrix H = partial_block(inst.op(), z);
  const CVector yp = flat(it.target - inst.op().apply(it.D * it.Z)) + H * it.D.col(p);
  return 0.5 * (yp - H * d).squaredNorm();
}

double line_objective(const ProblemInstance& inst, const Iterate& it, const CMatrix& dD,
                      const CMatrix& dZ, const CMatrix& Zn, double g) {
  const CMatrix V = (it.D + g * dD) * (it.Z + g * dZ);
  return 0.5 * (it.target - inst.op().apply(V)).squaredNorm() +
         g * inst.lambda * (l1_norm(Zn) - l1_norm(it.Z));
}

std::vector<ProblemInstance> random_instances(Rng& rng) {
  std::vector<ProblemInstance> out;
  out.push_back(random_instance(share(random_general(2, 4, 3, 6, 5, rng)), 2, rng));
  out.push_back(random_instance(
      share(MixingOperator::time_invariant(complex_gaussian(6, 3, rng), complex_gaussian(6, 5, rng))),
      2, rng));
  out.push_back(random_instance(
      share(MixingOperator::time_invariant(complex_gaussian(6, 3, rng), CMatrix::Identity(6, 6))),
      3, rng));
  out.push_back(random_instance(share(random_selectors(5, 3, 6, rng)), 2, rng));
  for (auto& inst : out) inst.lambda = 0.05 * lambda_max(inst);
  return out;
}

SolverConfig quiet(int iters = 300) {
  SolverConfig cfg;
  cfg.max_iters = iters;
  return cfg;
}

}  // namespace

TEST_CASE("partial block matches the assembled operator") {
  Rng rng(1);
  const auto op = random_general(2, 3, 2, 4, 3, rng);
  const CVector z = complex_gaussian(4, 1, rng);
  const CMatrix H = partial_block(op, z);
  for (Index n = 0; n < 2; ++n) {
    CMatrix X = CMatrix::Zero(2, 4);
    X.row(n) = z.transpose();
    CHECK(rel_err(CMatrix(H.col(n)), CMatrix(flat(op.apply(X)))) < 1e-13);
  }
  const auto sel = random_selectors(3, 2, 4, rng);
  const CMatrix Hs = partial_block(sel, z);
  for (Index n = 0; n < 2; ++n) {
    CMatrix X = CMatrix::Zero(2, 4);
    X.row(n) = z.transpose();
    CHECK(rel_err(CMatrix(Hs.col(n)), CMatrix(flat(sel.apply(X)))) < 1e-13);
  }
}

TEST_CASE("direction_D") {
  Rng rng(2);
  SUBCASE("single atom, identity operator: projected least squares") {
    auto op = share(MixingOperator::time_invariant(CMatrix::Identity(3, 3), CMatrix::Identity(4, 4)));
    ProblemInstance inst(RMatrix::Constant(3, 4, 2.0) + RMatrix::Identity(3, 4), op, 1);
    const Iterate it = Iterate::compact(inst, unit_norm_columns(3, 1, rng) * 0.5,
                                        complex_gaussian(1, 4, rng));
    const CompactScaphase solver(inst);
    const CMatrix Dn = solver.direction_D(it);
    const CVector z = it.Z.row(0).transpose();
    CVector want = it.target * z.conjugate() / z.squaredNorm();
    if (want.norm() > 1.0) want /= want.norm();
    CHECK((Dn.col(0) - want).norm() < 1e-9);
    const auto direct = solve_ball_ls(partial_block(*op, z), flat(it.target));
    CHECK((Dn.col(0) - direct.d).norm() < 1e-9);
  }
  SUBCASE("zero code row leaves the column unchanged") {
    for (auto& inst : random_instances(rng)) {
      CMatrix Z = complex_gaussian(inst.atoms(), inst.op().snapshots(), rng);
      Z.row(1).setZero();
      const Iterate it = Iterate::compact(inst, interior_dictionary(3, inst.atoms(), rng), Z);
      const CMatrix Dn = CompactScaphase(inst).direction_D(it);
      CHECK(Dn.col(1) == it.D.col(1));
    }
  }
  SUBCASE("vanishing code row moves along the data direction") {
    for (auto& inst : random_instances(rng)) {
      for (double eps : {1e-60, 1e-155, 1e-170}) {
        CMatrix Z = complex_gaussian(inst.atoms(), inst.op().snapshots(), rng);
        const CVector z0 = Z.row(1).transpose();
        Z.row(1) *= eps;
        const Iterate it = Iterate::compact(inst, interior_dictionary(3, inst.atoms(), rng), Z);
        const CMatrix Dn = CompactScaphase(inst).direction_D(it);
        REQUIRE(Dn.allFinite());
        const CVector r = flat(it.target - it.image);
        const CVector want = (partial_block(inst.op(), z0).adjoint() * r).stableNormalized();
        CHECK((Dn.col(1) - want).norm() <= 1e-8);
      }
    }
  }
  SUBCASE("block optimality and agreement with the generic path") {
    for (auto& inst : random_instances(rng)) {
      const Iterate it = Iterate::compact(inst, interior_dictionary(3, inst.atoms(), rng),
                                          complex_gaussian(inst.atoms(), inst.op().snapshots(), rng));
      const CMatrix Dn = CompactScaphase(inst).direction_D(it);
      for (Index p = 0; p < inst.atoms(); ++p) {
        CHECK(Dn.col(p).norm() <= 1.0 + 1e-12);
        CHECK(column_objective(inst, it, p, Dn.col(p)) <=
              column_objective(inst, it, p, it.D.col(p)) + 1e-10);
        const CVector z = it.Z.row(p).transpose();
        const CMatrix H = partial_block(inst.op(), z);
        const CVector y = flat(it.target - it.image) + H * it.D.col(p);
        CHECK((Dn.col(p) - solve_ball_ls(H, y).d).norm() <= 1e-8);
      }
    }
  }
}

TEST_CASE("direction_Z") {
  Rng rng(3);
  SUBCASE("lambda 0, identity operator and dictionary") {
    auto op = share(MixingOperator::identity(2, 4));
    RMatrix Y = RMatrix::Random(2, 4).cwiseAbs();
    ProblemInstance inst(Y, op, 2);
    const Iterate it = Iterate::compact(inst, CMatrix::Identity(2, 2), complex_gaussian(2, 4, rng));
    const auto g = gradients_cprdl(inst, it.D, it.Z, it);
    const CMatrix Zn = CompactScaphase(inst).direction_Z(it, g.Z);
    CHECK(rel_err(Zn, it.target) < 1e-14);
  }
  SUBCASE("large threshold shrinks to zero") {
    auto insts = random_instances(rng);
    auto& inst = insts[0];
    inst.lambda = 1e6;
    const Iterate it = Iterate::compact(inst, interior_dictionary(3, 2, rng),
                                        complex_gaussian(2, 6, rng));
    const auto g = gradients_cprdl(inst, it.D, it.Z, it);
    CHECK(CompactScaphase(inst).direction_Z(it, g.Z).norm() == 0.0);
  }
  SUBCASE("entries match a scalar prox grid oracle") {
    for (auto& inst : random_instances(rng)) {
      const Iterate it = Iterate::compact(inst, interior_dictionary(3, inst.atoms(), rng),
                                          complex_gaussian(inst.atoms(), inst.op().snapshots(), rng));
      const auto g = gradients_cprdl(inst, it.D, it.Z, it);
      const CMatrix Zn = CompactScaphase(inst).direction_Z(it, g.Z);
      double worst = 0.0;
      for (Index i = 0; i < it.Z.cols(); ++i) {
        const CMatrix Fi = inst.op().block(i).F;
        for (Index p = 0; p < it.Z.rows(); ++p) {
          const double e = (Fi * it.D.col(p)).squaredNorm();
          const Complex want = grid_prox(e, it.Z(p, i), g.Z(p, i), inst.lambda);
          worst = std::max(worst, std::abs(Zn(p, i) - want));
        }
      }
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("line search") {
  Rng rng(4);
  SUBCASE("zero direction") {
    auto inst = random_instances(rng)[0];
    const Iterate it = Iterate::compact(inst, interior_dictionary(3, 2, rng), complex_gaussian(2, 6, rng));
    const CMatrix zD = CMatrix::Zero(3, 2), zZ = CMatrix::Zero(2, 6);
    CHECK(CompactScaphase(inst).line_search(it, zD, zZ, it.Z).gamma == 0.0);
  }
  SUBCASE("quadratic case with minimizer 1/2") {
    auto inst = random_instances(rng)[1];
    inst.lambda = 0.0;
    const Iterate it = Iterate::compact(inst, interior_dictionary(3, 2, rng), complex_gaussian(2, 6, rng));
    CMatrix dD = complex_gaussian(3, 2, rng);
    const CMatrix R0 = it.image - it.target;
    CMatrix Q1 = inst.op().apply(dD * it.Z);
    if (real_inner(R0, Q1) > 0) {
      dD = -dD;
      Q1 = -Q1;
    }
    dD *= -real_inner(R0, Q1) / (0.5 * Q1.squaredNorm());
    const CMatrix dZ = CMatrix::Zero(2, 6);
    const double g = CompactScaphase(inst).line_search(it, dD, dZ, it.Z).gamma;
    CHECK(g == doctest::Approx(0.5).epsilon(1e-10));
    auto phi = [&](double x) { return line_objective(inst, it, dD, dZ, it.Z, x); };
    CHECK(phi(g) <= grid_min(phi) + 1e-6 * std::max(1.0, std::abs(phi(g))));
  }
  SUBCASE("random directions against a dense grid") {
    for (auto& inst : random_instances(rng)) {
      const Iterate it = Iterate::compact(inst, interior_dictionary(3, inst.atoms(), rng),
                                          complex_gaussian(inst.atoms(), inst.op().snapshots(), rng));
      const CMatrix dD = complex_gaussian(3, inst.atoms(), rng) * 0.5;
      const CMatrix dZ = complex_gaussian(inst.atoms(), inst.op().snapshots(), rng);
      const CMatrix Zn = it.Z + dZ;
      const auto ls = CompactScaphase(inst).line_search(it, dD, dZ, Zn);
      auto phi = [&](double x) { return line_objective(inst, it, dD, dZ, Zn, x); };
      CHECK(std::abs(ls.poly(0.37) - phi(0.37)) <= 1e-10 * std::max(1.0, phi(0.37)));
      CHECK(phi(ls.gamma) <= grid_min(phi) + 1e-8);
    }
  }
}

TEST_CASE("stationarity residual") {
  Rng rng(5);
  auto inst = random_instances(rng)[1];
  SUBCASE("interior columns: raw gradient norm") {
    const Iterate it = Iterate::compact(inst, interior_dictionary(3, 2, rng), complex_gaussian(2, 6, rng));
    const auto g = gradients_cprdl(inst, it.D, it.Z, it);
    CHECK(rel_err(CompactScaphase(inst).stationarity_residual(it).d, g.D.norm()) < 1e-14);
  }
  SUBCASE("zero codes under a dominating weight: stationary") {
    inst.lambda = lambda_max(inst);
    const Iterate it = Iterate::compact(inst, unit_norm_columns(3, 2, rng), CMatrix::Zero(2, 6));
    const Residuals r = CompactScaphase(inst).stationarity_residual(it);
    CHECK(r.d == 0.0);
    CHECK(r.z == 0.0);
  }
  SUBCASE("fixed point of the directions") {
    inst.lambda = 0.0;
    auto pl = planted(inst.shared_op(), 2, rng);
    const CMatrix D = 0.5 * pl.D, Z = 2.0 * pl.Z;
    ProblemInstance exact(inst.op().apply(D * Z).cwiseAbs(), inst.shared_op(), 2);
    const Iterate it = Iterate::compact(exact, D, Z);
    const CompactScaphase solver(exact);
    const auto g = gradients_cprdl(exact, D, Z, it);
    CHECK(rel_err(solver.direction_D(it), D) < 1e-8);
    CHECK(rel_err(solver.direction_Z(it, g.Z), Z) < 1e-8);
    const Residuals r = solver.stationarity_residual(it);
    CHECK(r.d <= 1e-8);
    CHECK(r.z <= 1e-8);
  }
}

TEST_CASE("run: descent, feasibility, termination") {
  Rng rng(6);
  int idx = 0;
  for (auto& inst : random_instances(rng)) {
    SolverConfig cfg = quiet(200);
    cfg.rng_seed = 100 + idx++;
    const CompactScaphase solver(inst, cfg);
    const auto rep = solver.run(random_compact_start(inst, cfg));
    for (size_t t = 1; t < rep.trace.size(); ++t) {
      CHECK(rep.trace[t].objective <= rep.trace[t - 1].objective + 1e-10);
    }
    for (Index p = 0; p < rep.D.cols(); ++p) CHECK(rep.D.col(p).norm() <= 1.0 + 1e-12);
    CHECK(rel_err(rep.objective, objective_cprdl(inst, rep.D, rep.Z)) < 1e-9);
    for (int stop : {1, 7, 30}) {
      SolverConfig c2 = cfg;
      c2.max_iters = stop;
      const auto r2 = CompactScaphase(inst, c2).run(random_compact_start(inst, cfg));
      for (Index p = 0; p < r2.D.cols(); ++p) CHECK(r2.D.col(p).norm() <= 1.0 + 1e-12);
    }
  }

  auto inst = random_instances(rng)[3];
  inst.lambda = lambda_max(inst);
  const auto rep = CompactScaphase(inst).run(unit_norm_columns(3, 2, rng), CMatrix::Zero(2, 6));
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.Z.norm() == 0.0);

  SolverConfig bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("run: noiseless tiny instance is fitted") {
  Rng rng(7);
  auto op = share(MixingOperator::time_invariant(complex_gaussian(16, 4, rng), CMatrix::Identity(8, 8)));
  const auto pl = planted(op, 2, rng);
  ProblemInstance inst(op->apply(pl.D * pl.Z).cwiseAbs(), op, 2);
  inst.lambda = 1e-9 * lambda_max(inst);
  SolverConfig cfg;
  cfg.epsilon = 1e-9;
  cfg.max_iters = 3000;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 10; ++j) {
    cfg.rng_seed = mix_seed(7, j);
    best = std::min(best, CompactScaphase(inst, cfg).run(random_compact_start(inst, cfg)).objective);
  }
  CHECK(best <= 1e-6);
}

TEST_CASE("debias") {
  Rng rng(8);
  auto op = share(MixingOperator::time_invariant(complex_gaussian(16, 4, rng), CMatrix::Identity(8, 8)));
  const auto pl = planted(op, 2, rng);
  ProblemInstance inst(op->apply(pl.D * pl.Z).cwiseAbs(), op, 2);
  inst.lambda = 0.1 * lambda_max(inst);

  SUBCASE("empty support returns the input") {
    const CMatrix D = unit_norm_columns(4, 2, rng);
    const auto rep = CompactScaphase(inst).debias(D, CMatrix::Zero(2, 8));
    CHECK(rep.D == D);
    CHECK(rep.Z.norm() == 0.0);
  }
  SUBCASE("true support: data term decreases, support is held") {
    const CMatrix Z = pl.Z * 0.7;
    const double before = magnitude_misfit(inst.measurements(), op->apply(pl.D * Z));
    SolverConfig cfg;
    cfg.max_iters = 500;
    const auto rep = CompactScaphase(inst, cfg).debias(pl.D, Z);
    CHECK(rep.objective < before);
    CHECK(((pl.Z.array() == Complex(0.0)) <= (rep.Z.array() == Complex(0.0))).all());
    for (size_t t = 1; t < rep.trace.size(); ++t) {
      CHECK(rep.trace[t].objective <= rep.trace[t - 1].objective + 1e-10);
    }
  }
  SUBCASE("lambda 0: continuation from a converged point") {
    inst.lambda = 0.0;
    SolverConfig cfg;
    cfg.max_iters = 2000;
    cfg.rng_seed = 3;
    const CompactScaphase solver(inst, cfg);
    const auto rep = solver.run(random_compact_start(inst, cfg));
    REQUIRE(rep.converged);
    const auto deb = solver.debias(rep.D, rep.Z);
    CHECK(deb.converged);
    CHECK(deb.iterations == 0);
    CHECK(deb.objective == doctest::Approx(rep.objective).epsilon(1e-12));
  }
}
