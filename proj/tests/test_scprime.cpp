#include <doctest.h>

#include "prdl/scaphase.hpp"
#include "prdl/scprime.hpp"
#include "prdl/tuning.hpp"
#include "support.hpp"

using namespace prdl;
using namespace prdl::testing;

namespace {

std::vector<ProblemInstance> random_instances(Rng& rng) {
  std::vector<ProblemInstance> out;
  out.push_back(random_instance(share(random_general(2, 4, 3, 6, 5, rng)), 2, rng));
  out.push_back(random_instance(
      share(MixingOperator::time_invariant(complex_gaussian(6, 3, rng), CMatrix::Identity(6, 6))),
      3, rng));
  out.push_back(random_instance(share(random_selectors(5, 3, 6, rng)), 2, rng));
  for (auto& inst : out) {
    inst.mu = 0.8;
    inst.rho = 0.05 * rho_max(inst);
  }
  return out;
}

}  // namespace

TEST_CASE("construction") {
  Rng rng(1);
  auto inst = random_instances(rng)[0];
  inst.mu = 0.0;
  CHECK_THROWS_AS(Scprime{inst}, ParameterError);
}

TEST_CASE("each block step decreases the majorizer") {
  Rng rng(2);
  int idx = 0;
  for (auto& inst : random_instances(rng)) {
    SolverConfig cfg;
    cfg.rng_seed = 50 + idx++;
    const Scprime solver(inst, cfg);
    const InitialPoint x0 = random_full_start(inst, cfg);
    Iterate it = Iterate::full(inst, x0.X, x0.D, x0.Z);
    bool ok = true;
    for (int t = 0; t < 100; ++t) {
      std::array<double, 4> v{};
      solver.sweep(it, cached_gradients_prdl(inst, it), &v);
      for (int k = 1; k < 4; ++k) ok = ok && v[k] <= v[k - 1] + 1e-10 * std::max(1.0, v[0]);
      it.reanchor(inst);
    }
    CHECK(ok);
  }
}

TEST_CASE("run: monotone objective and feasibility") {
  Rng rng(3);
  int idx = 0;
  for (auto& inst : random_instances(rng)) {
    SolverConfig cfg;
    cfg.max_iters = 400;
    cfg.rng_seed = 70 + idx++;
    const auto rep = Scprime(inst, cfg).run(random_full_start(inst, cfg));
    for (size_t t = 1; t < rep.trace.size(); ++t) {
      CHECK(rep.trace[t].objective <= rep.trace[t - 1].objective + 1e-10);
    }
    for (Index p = 0; p < rep.D.cols(); ++p) CHECK(rep.D.col(p).norm() <= 1.0 + 1e-12);
    CHECK(rel_err(rep.objective, objective_prdl(inst, rep.X, rep.D, rep.Z)) < 1e-9);
  }
}

TEST_CASE("stationary input does not move") {
  Rng rng(4);
  auto op = share(MixingOperator::time_invariant(complex_gaussian(8, 3, rng), CMatrix::Identity(6, 6)));
  const auto pl = planted(op, 2, rng);
  const CMatrix D = 0.5 * pl.D, Z = 2.0 * pl.Z, X = D * Z;
  ProblemInstance inst(op->apply(X).cwiseAbs(), op, 2);
  inst.mu = 1.0;
  SolverConfig cfg;
  cfg.epsilon = 1e-300;
  cfg.max_iters = 5;
  const auto rep = Scprime(inst, cfg).run({X, D, Z});
  CHECK(rep.iterations == 5);
  CHECK(rel_err(rep.X, X) <= 1e-12);
  CHECK(rel_err(rep.D, D) <= 1e-12);
  CHECK(rel_err(rep.Z, Z) <= 1e-12);
}

TEST_CASE("SCAphase reaches a lower objective at equal budget on a tiny Case-1 instance") {
  Rng rng(5);
  auto op = share(MixingOperator::time_invariant(complex_gaussian(16, 4, rng), CMatrix::Identity(8, 8)));
  const auto pl = planted(op, 2, rng);
  RMatrix Y = op->apply(pl.D * pl.Z).cwiseAbs();
  std::normal_distribution<double> noise(0.0, 0.05);
  for (Index j = 0; j < Y.size(); ++j) Y.data()[j] = std::max(0.0, Y.data()[j] + noise(rng));
  ProblemInstance inst(Y, op, 2);
  inst.mu = mu_default(inst);
  inst.rho = grid_value(rho_max(inst), 10);
  int wins = 0;
  for (int j = 0; j < 5; ++j) {
    SolverConfig cfg;
    cfg.max_iters = 20;
    cfg.epsilon = 1e-12;
    cfg.rng_seed = mix_seed(5, j);
    const InitialPoint x0 = random_full_start(inst, cfg);
    const double a = Scaphase(inst, cfg).run(x0).objective;
    const double b = Scprime(inst, cfg).run(x0).objective;
    wins += a <= b * (1.0 + 1e-9) ? 1 : 0;
  }
  CHECK(wins == 5);
}

TEST_CASE("custom step constants and debias") {
  Rng rng(6);
  auto inst = random_instances(rng)[1];
  SolverConfig cfg;
  cfg.max_iters = 200;
  cfg.rng_seed = 1;
  ScprimeConstants k;
  const double s = inst.op().spectral_bounds().sigma_max;
  k.x_lipschitz = 2.0 * (s * s + inst.mu);
  k.z_lipschitz = 2.0 * inst.mu * inst.atoms();
  const auto rep = Scprime(inst, cfg, k).run(random_full_start(inst, cfg));
  for (size_t t = 1; t < rep.trace.size(); ++t) {
    CHECK(rep.trace[t].objective <= rep.trace[t - 1].objective + 1e-10);
  }
  const auto deb = Scprime(inst, cfg).debias(rep.X, rep.D, rep.Z);
  CHECK(((rep.Z.array() == Complex(0.0)) <= (deb.Z.array() == Complex(0.0))).all());
  for (size_t t = 1; t < deb.trace.size(); ++t) {
    CHECK(deb.trace[t].objective <= deb.trace[t - 1].objective + 1e-10);
  }
  const auto empty = Scprime(inst, cfg).debias(rep.X, rep.D, CMatrix::Zero(3, 6));
  CHECK(empty.Z.norm() == 0.0);
  CHECK(empty.X == rep.X);
}
