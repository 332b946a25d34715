#include "rrsplit/scheme.hpp"
#include "rrsplit/study.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace rrsplit;
using rrsplit::testing::for_all;
using rrsplit::testing::Gen;

TEST(TimeDifferences, Formulas) {
  EXPECT_DOUBLE_EQ(ddt(Vector::Constant(1, 3.0), Vector::Constant(1, 1.0), 0.5)[0], 4.0);
  EXPECT_DOUBLE_EQ(avg(Vector::Constant(1, 3.0), Vector::Constant(1, 1.0))[0], 2.0);
  EXPECT_DOUBLE_EQ(ddt2(Vector::Constant(1, 1.0), Vector::Constant(1, 0.0), Vector::Constant(1, 1.0), 1.0)[0], 2.0);
  EXPECT_THROW(ddt(Vector::Zero(2), Vector::Zero(3), 1.0), std::invalid_argument);
  EXPECT_THROW(avg(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
  EXPECT_THROW(ddt2(Vector::Zero(2), Vector::Zero(2), Vector::Zero(1), 1.0), std::invalid_argument);
}

TEST(SchemeParams, Validation) {
  EXPECT_NO_THROW((SchemeParams{1, 0.05, 1.0, 1.0, 1.0, 0.25}.validate()));
  EXPECT_THROW((SchemeParams{3, 0.05, 1.0, 1.0, 1.0, 0.25}.validate()), std::invalid_argument);
  EXPECT_THROW((SchemeParams{1, 0.1, 1.0, 1.0, 1.0, 0.25}.validate()), std::invalid_argument);
  EXPECT_THROW((SchemeParams{1, 0.05, 0.0, 1.0, 1.0, 0.25}.validate()), std::invalid_argument);
  EXPECT_EQ((SchemeParams{1, 0.05, 1.0, 1.0, 1.0, 0.25}.n_steps()), 5);
}

TEST(RobinRobin, ZeroStateStaysZero) {
  const auto mesh = uniform_split_mesh(4);
  const auto op = build_operators(mesh);
  for (int k : {1, 2}) {
    const RobinRobinSolver rr({k, 0.1, 1.0, 1.0, 1.0, 0.5}, mesh, op);
    const auto s = rr.advance(zero_state(op), SourceData{});
    EXPECT_EQ(s.u.values.norm() + s.w.values.norm() + s.q.values.norm() + s.lambda.values.norm(), 0.0);
    EXPECT_EQ(s.step_index, 1);
  }
}

// uniform_split_mesh(2) has one free solid node, (1/2, 3/4). By hand:
// M = 3 (1/16) / 6 = 1/32, K = 1.25 + 0.25 + 1 = 5/2, interface mass row
// (1/12, 1/3, 1/12).
TEST(RobinRobin, SolidStepMatchesHandAssembly) {
  const auto mesh = uniform_split_mesh(2);
  const auto op = build_operators(mesh);
  ASSERT_EQ(op.dofs_s.size(), 1);
  EXPECT_NEAR(op.mass_s.at(0, 0), 1.0 / 32.0, 1e-16);
  EXPECT_NEAR(op.stiffness_s.at(0, 0), 2.5, 1e-14);

  const double dt = 0.1, alpha = 2.0;
  SchemeState s = zero_state(op);
  s.w.values[0] = 0.4;
  s.q = s.w;
  const Index mid_f = op.dofs_f.interface_dofs[1];
  s.u.values[mid_f] = 0.3;
  s.lambda.values << 0.2, -0.5, 0.7;

  const RobinRobinSolver rr({1, dt, alpha, 1.0, 1.0, 0.5}, mesh, op);
  const auto solid = rr.solid_step(s, SourceData{}, dt);
  const double m_lambda = 0.2 / 12.0 - 0.5 / 3.0 + 0.7 / 12.0;
  const double rhs = 0.4 / (32.0 * dt) + alpha * 0.3 / 3.0 - m_lambda;
  const double lhs = 1.0 / (32.0 * dt) + 2.5 + alpha / 3.0;
  EXPECT_NEAR(solid.w.values[0], rhs / lhs, 1e-12);
  EXPECT_EQ(solid.q.values[0], solid.w.values[0]);
}

TEST(RobinRobin, FluidStepAndMultiplierUpdate) {
  Gen g(7);
  const auto mesh = uniform_split_mesh(4);
  const auto op = build_operators(mesh);
  const double dt = 0.05, alpha = 3.0;
  SchemeState s = random_state(op, 1, 9);
  const RobinRobinSolver rr({1, dt, alpha, 1.0, 1.0, 0.5}, mesh, op);
  const auto solid = rr.solid_step(s, SourceData{}, dt);
  const auto fluid = rr.fluid_step(s, solid, SourceData{}, dt);

  // dense oracle for the fluid system
  const Eigen::MatrixXd mf = op.mass_f.to_dense();
  const Eigen::MatrixXd a = mf / dt + op.stiffness_f.to_dense() + alpha * op.interface_mass_f.to_dense();
  const Eigen::MatrixXd msig = op.interface_mass.to_dense();
  Vector kin = Vector::Zero(op.n_trace());
  Vector rhs = mf * s.u.values / dt;
  for (Index k = 0; k < op.n_trace(); ++k) {
    const Index d = op.dofs_s.interface_dofs[k];
    if (d != no_dof) kin[k] = solid.w.values[d];
  }
  const Vector iface = msig * s.lambda.values + alpha * msig * kin;
  for (Index k = 0; k < op.n_trace(); ++k) {
    const Index d = op.dofs_f.interface_dofs[k];
    if (d != no_dof) rhs[d] += iface[k];
  }
  const Vector u = a.ldlt().solve(rhs);
  EXPECT_LE((fluid.u.values - u).cwiseAbs().maxCoeff(), 1e-11);

  // coefficient-wise multiplier update
  const Vector u_tr = trace_restrict(op.dofs_f, fluid.u).values;
  const Vector expected = s.lambda.values - alpha * (u_tr - kin);
  EXPECT_LE((fluid.lambda.values - expected).cwiseAbs().maxCoeff(), 1e-14);
  // endpoints only move through data, which is zero here
  EXPECT_EQ(fluid.lambda.values[0], s.lambda.values[0]);
}

TEST(RobinRobin, SecondOrderStepSatisfiesMidpointRelation) {
  const auto mesh = uniform_split_mesh(4);
  const auto op = build_operators(mesh);
  SchemeState s = zero_state(op);
  s.q.values = Vector::Ones(op.dofs_s.size());
  const SchemeParams p{2, 0.1, 1.0, 1.0, 1.0, 0.5};
  const RobinRobinSolver rr(p, mesh, op);
  const auto next = rr.advance(s, SourceData{});
  const auto c = check_step_identities(p, op, s, next, Vector::Zero(op.n_trace()));
  EXPECT_LE(c.velocity, 1e-12);
  EXPECT_LE(c.multiplier, 1e-12);
}

TEST(EnergyIdentity, HoldsForRandomDataAndParameters) {
  for_all(51, 12, [](Gen& g, int trial) {
    EnergyAuditConfig cfg;
    cfg.k = 1 + trial % 2;
    cfg.alpha = std::exp(g.uniform(std::log(0.05), std::log(20.0)));
    cfg.dt = std::exp(g.uniform(std::log(0.01), std::log(1.0)));
    cfg.steps = g.integer(1, 15);
    cfg.mesh_n = g.integer(2, 7);
    cfg.nu_f = g.uniform(0.2, 3.0);
    cfg.nu_s = g.uniform(0.2, 3.0);
    cfg.seed = static_cast<std::uint64_t>(g.integer(0, 1 << 30));
    const auto rep = energy_audit(cfg);
    EXPECT_LE(rep.defect, 1e-10) << "k=" << cfg.k << " alpha=" << cfg.alpha << " dt=" << cfg.dt;
    for (double z : rep.ledger.Z) EXPECT_GE(z, 0.0);
    for (double s : rep.ledger.S) EXPECT_GE(s, 0.0);
    EXPECT_EQ(rep.ledger.Z.size(), static_cast<std::size_t>(cfg.steps + 1));
  });
}

TEST(EnergyIdentity, ZeroDataTriviallyPasses) {
  const auto mesh = uniform_split_mesh(8);
  const auto op = build_operators(mesh);
  const auto rep = energy_audit({}, zero_state(op));
  EXPECT_EQ(rep.z0, 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(EnergyIdentity, EnergyDecaysWithoutSources) {
  const auto rep = energy_audit({2, 10.0, 0.5, 10, 8, 1.0, 1.0, 3});
  EXPECT_TRUE(rep.pass);
  for (std::size_t n = 1; n < rep.ledger.Z.size(); ++n) EXPECT_LE(rep.ledger.Z[n], rep.ledger.Z[n - 1] * (1 + 1e-14));
}

TEST(StepIdentities, HoldAfterEveryStepOfAManufacturedRun) {
  const auto c = get_case("ph_uniform");
  const auto mesh = uniform_split_mesh(8);
  const auto op = build_operators(mesh);
  const SchemeParams p{2, 1.0 / 16.0, 1.0, 1.0, 1.0, 0.25};
  const auto src = SourceData::from_case(c);
  const RobinRobinSolver rr(p, mesh, op);
  SchemeState s = initial_state_from_case(c, mesh, op);
  for (int n = 0; n < 4; ++n) {
    const auto next = rr.advance(s, src);
    const auto gd = interface_data(mesh, op, src, static_cast<double>(n + 1) * p.dt).g_D;
    const auto id = check_step_identities(p, op, s, next, gd);
    EXPECT_LE(id.multiplier, 1e-12);
    EXPECT_LE(id.velocity, 1e-12);
    s = next;
  }
}

TEST(Run, RejectsMismatchedInitialVelocityForFirstOrder) {
  const auto mesh = uniform_split_mesh(4);
  const auto op = build_operators(mesh);
  auto s = zero_state(op);
  s.q.values[0] = 1.0;
  EXPECT_THROW(run({1, 0.1, 1.0, 1.0, 1.0, 0.2}, mesh, op, SourceData{}, s), std::invalid_argument);
}

TEST(Monolithic, ConstraintHoldsOnInteriorInterfaceNodes) {
  for (int k : {1, 2}) {
    const auto mesh = uniform_split_mesh(6);
    const auto op = build_operators(mesh);
    const SchemeParams p{k, 0.1, 1.0, 1.0, 1.0, 0.5};
    const MonolithicSolver mono(p, mesh, op);
    const auto s = random_state(op, k, 17);
    const auto next = mono.advance(s, SourceData{});
    Vector kin = kinematic_trace(p, op, next.w.values, s);
    const Vector jump = kin - trace_restrict(op.dofs_f, next.u).values;
    const Vector weighted = spmv(op.interface_mass, jump);
    for (Index i = 1; i + 1 < op.n_trace(); ++i) EXPECT_NEAR(weighted[i], 0.0, 1e-12) << "k=" << k;
    EXPECT_EQ(next.lambda.values[0], s.lambda.values[0]);
  }
}

TEST(Monolithic, AgreesWithRobinRobinAsStepShrinks) {
  const auto c = get_case("pp_conforming");
  double prev = 0.0;
  for (int m = 5; m <= 7; ++m) {
    const double dt = std::ldexp(1.0, -m);
    const auto mesh = uniform_split_mesh(16);
    const auto op = build_operators(mesh);
    const SchemeParams p{1, dt, 1.0, 1.0, 1.0, 0.25};
    RunOptions ro;
    ro.record_energy = false;
    const auto a = run(p, mesh, op, SourceData::from_case(c), initial_state_from_case(c, mesh, op), ro);
    ro.stepper = Stepper::monolithic;
    const auto b = run(p, mesh, op, SourceData::from_case(c), initial_state_from_case(c, mesh, op), ro);
    const Field diff{Subdomain::fluid, a.final.u.values - b.final.u.values};
    const double d = l2_error(mesh, op.dofs_f, diff, [](const Point&, double) { return 0.0; }, 0.0);
    if (prev > 0.0) {
      EXPECT_LT(d, 0.75 * prev);
    }
    prev = d;
  }
}

TEST(Output, EnergyCsvAndCheckpoint) {
  EnergyLedger l{{2.0, 1.5, 1.2}, {0.5, 0.3}};
  std::ostringstream os;
  write_energy_csv(os, l);
  EXPECT_EQ(os.str(), "n,Z,S,Z_plus_cumS\n0,2,0,2\n1,1.5,0.5,2\n2,1.2,0.29999999999999999,2\n");
  EXPECT_NEAR(l.max_relative_defect(), 0.0, 1e-16);

  const auto mesh = uniform_split_mesh(2);
  const auto op = build_operators(mesh);
  std::ostringstream cp;
  write_checkpoint(cp, zero_state(op));
  EXPECT_EQ(cp.str().substr(0, 7), "step 0\n");
}
