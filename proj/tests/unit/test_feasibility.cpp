#include "case_study.hpp"
#include "stlconf/feasibility/lp.hpp"
#include "stlconf/feasibility/pwa.hpp"
#include "stlconf/feasibility/robust.hpp"
#include "stlconf/feasibility/satisfaction.hpp"
#include "stlconf/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stlconf;
using namespace stlconf::feasibility;

namespace {

InputBox symmetric_box(Eigen::Index m, double bound) {
  return InputBox(Vector::Constant(m, -bound), Vector::Constant(m, bound));
}

AffineInputConstraint random_constraint(RngStream& rng, std::size_t steps, const InputBox& box) {
  AffineInputConstraint c;
  c.time = steps;
  c.f.resize(static_cast<Eigen::Index>(steps) * box.dim());
  for (Eigen::Index i = 0; i < c.f.size(); ++i) c.f(i) = rng.uniform() < 0.1 ? 0.0 : rng.uniform(-2, 2);
  c.b = rng.uniform(-3, 3);
  return c;
}

InputBox random_box(RngStream& rng, Eigen::Index m) {
  Vector lo(m), hi(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lo(i) = rng.uniform(-1.5, 0.5);
    hi(i) = lo(i) + rng.uniform(0.0, 2.0);
  }
  return InputBox(lo, hi);
}

// G[1,4](y ∈ [-0.5, 0.5]) at δ = 0.1: small but non-empty feasible set around θ = 0.
VerificationProblem band_problem(GammaForm form = GammaForm::standard_deviation) {
  return VerificationProblem(fixtures::case_model(), stl::parse_stl("G[1,4] (mu1 & mu2)", fixtures::case_predicates()),
                             0.1, Vector::Zero(2), {}, form);
}

VerificationProblem case_problem(GammaForm form = GammaForm::standard_deviation) {
  return VerificationProblem(fixtures::case_model(), fixtures::case_formula(), 0.01, Vector::Zero(2), {}, form);
}

Vector theta(double a, double b) {
  Vector t(2);
  t << a, b;
  return t;
}

}  // namespace

TEST(Lp, SmallProblems) {
  // max x + y s.t. x + 2y ≤ 4, 3x + y ≤ 6, x, y ∈ [0, 10]: optimum at (1.6, 1.2).
  Matrix G(2, 2);
  G << 1, 2, 3, 1;
  const auto r = maximize_over_box(Vector::Ones(2), G, Vector((Vector(2) << 4, 6).finished()), Vector::Zero(2),
                                   Vector::Constant(2, 10.0));
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 2.8, 1e-10);
  EXPECT_NEAR(r.x(0), 1.6, 1e-10);

  Matrix A(1, 2);
  A << 1, 1;
  EXPECT_EQ(solve_standard_lp(A, Vector::Constant(1, -1.0), Vector::Ones(2)).status, LpStatus::infeasible);
  EXPECT_EQ(solve_standard_lp(A, Vector::Constant(1, 1.0), -Vector::Ones(2)).status, LpStatus::optimal);
  Matrix A2(1, 2);
  A2 << 1, -1;
  EXPECT_EQ(solve_standard_lp(A2, Vector::Constant(1, 1.0), -Vector::Ones(2)).status, LpStatus::unbounded);
}

TEST(Lp, MatchesVertexEnumerationIn2D) {
  RngStream rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform() * 4);
    Matrix G(k, 2);
    Vector h(k);
    for (int i = 0; i < k; ++i) {
      G(i, 0) = rng.uniform(-2, 2);
      G(i, 1) = rng.uniform(-2, 2);
      h(i) = rng.uniform(-1, 3);
    }
    const Vector lo = Vector::Constant(2, -1.0), hi = Vector::Constant(2, 2.0);
    Vector c(2);
    c << rng.uniform(-1, 1), rng.uniform(-1, 1);
    // All half-planes including the box, as rows a·x ≤ β.
    Matrix Aall(k + 4, 2);
    Vector ball(k + 4);
    Aall.topRows(k) = G;
    ball.head(k) = h;
    Aall.bottomRows(4) << 1, 0, 0, 1, -1, 0, 0, -1;
    ball.tail(4) << hi(0), hi(1), -lo(0), -lo(1);
    double best = -kInfinity;
    for (int i = 0; i < k + 4; ++i) {
      for (int j = i + 1; j < k + 4; ++j) {
        Matrix M(2, 2);
        M << Aall.row(i), Aall.row(j);
        if (std::abs(M.determinant()) < 1e-12) continue;
        const Vector x = M.partialPivLu().solve(Vector((Vector(2) << ball(i), ball(j)).finished()));
        if (((Aall * x - ball).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
      }
    }
    const auto r = maximize_over_box(c, G, h, lo, hi);
    if (best == -kInfinity) {
      EXPECT_EQ(r.status, LpStatus::infeasible);
    } else {
      ASSERT_EQ(r.status, LpStatus::optimal);
      EXPECT_NEAR(r.objective, best, 1e-8);
    }
  }
}

TEST(WorstCaseMargin, Examples) {
  const auto box = symmetric_box(1, 1.0);
  EXPECT_EQ(worst_case_margin({Vector::Zero(3), 0.7, 3}, box), 0.7);
  EXPECT_DOUBLE_EQ(worst_case_margin({Vector((Vector(2) << 1, -2).finished()), 0.0, 2}, box), -3.0);
}

TEST(WorstCaseMargin, MatchesCornerEnumeration) {
  RngStream rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.uniform() * 3);
    const std::size_t steps = 1 + static_cast<std::size_t>(rng.uniform() * (12 / m));
    const auto box = random_box(rng, m);
    const auto c = random_constraint(rng, steps, box);
    const auto n = c.f.size();
    double best = kInfinity;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      double v = c.b;
      for (Eigen::Index i = 0; i < n; ++i) {
        v += c.f(i) * (((mask >> i) & 1) ? box.upper(i % m) : box.lower(i % m));
      }
      best = std::min(best, v);
    }
    EXPECT_NEAR(worst_case_margin(c, box), best, 1e-12);
  }
}

TEST(Farkas, Boundaries) {
  const auto box = symmetric_box(1, 1.0);
  EXPECT_FALSE(farkas_feasible({Vector::Zero(2), -1.0, 2}, box).feasible);
  EXPECT_TRUE(farkas_feasible({Vector::Zero(2), 0.0, 2}, box).feasible);
  EXPECT_FALSE(farkas_feasible({Vector::Zero(2), -kInfinity, 2}, box).feasible);
}

TEST(FarkasProperty, AgreesWithClosedFormAndCertifies) {
  RngStream rng(33);
  int positives = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.uniform() * 4);
    const std::size_t steps = 1 + static_cast<std::size_t>(rng.uniform() * (40 / m));
    const auto box = random_box(rng, m);
    auto c = random_constraint(rng, steps, box);
    const double margin = worst_case_margin(c, box);
    if (trial % 5 == 0) c.b -= margin;  // land exactly on the boundary
    const double wc = worst_case_margin(c, box);
    const auto res = farkas_feasible(c, box);
    if (std::abs(wc) > 1e-9) {
      EXPECT_EQ(res.feasible, wc >= 0.0) << "margin " << wc;
    }
    if (res.feasible) {
      ++positives;
      const Vector& P = res.certificate->P;
      const Eigen::Index k = c.f.size();
      EXPECT_GE(P.minCoeff(), 0.0);
      EXPECT_LE((P.head(k) - P.tail(k) + c.f).cwiseAbs().maxCoeff(), 1e-9);
      Vector up(k), lo(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        up(i) = box.upper(i % m);
        lo(i) = box.lower(i % m);
      }
      EXPECT_LE(up.dot(P.head(k)) - lo.dot(P.tail(k)), c.b + 1e-9);
    }
  }
  EXPECT_GT(positives, 100);
}

TEST(SatisfactionFn, CaseStudyRejectsDistantTheta) {
  EXPECT_EQ(satisfaction_fn(theta(2.0, -1.0), case_problem()), 0);
}

TEST(SatisfactionFn, CaseStudyAcceptsNominalTheta) {
  EXPECT_EQ(satisfaction_fn(theta(-0.5, 1.0), case_problem()), 1);
}

TEST(SatisfactionFn, DominatingNoiseRejects) {
  const auto model = lti::laguerre_model(0.4, 1e6, 0.5);
  const VerificationProblem problem(model, stl::parse_stl("G[1,4] (mu1 & mu2)", fixtures::case_predicates()), 0.1,
                                    Vector::Zero(2));
  RngStream rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vector th = rng.uniform_in(Box(Vector::Constant(2, -3), Vector::Constant(2, 3)));
    EXPECT_EQ(satisfaction_fn(th, problem), 0);
  }
}

TEST(SatisfactionFn, RoutesAgree) {
  RngStream rng(5);
  int ones = 0;
  for (auto form : {GammaForm::standard_deviation, GammaForm::paper_literal}) {
    const auto p1 = band_problem(form), p2 = case_problem(form);
    for (int i = 0; i < 300; ++i) {
      const Vector th = rng.uniform_in(Box(Vector::Constant(2, -0.6), Vector::Constant(2, 0.6)));
      for (const auto* p : {&p1, &p2}) {
        const int a = satisfaction_fn(th, *p, FeasibilityRoute::closed_form);
        EXPECT_EQ(a, satisfaction_fn(th, *p, FeasibilityRoute::farkas));
        ones += a;
      }
    }
  }
  EXPECT_GT(ones, 0);
}

TEST(SatisfactionFnProperty, MonotoneInDelta) {
  RngStream rng(6);
  const auto formula = stl::parse_stl("G[1,4] (mu1 & mu2)", fixtures::case_predicates());
  int ones = 0;
  for (int i = 0; i < 200; ++i) {
    const double d1 = rng.uniform(0.01, 0.5);
    const double d2 = rng.uniform(d1, 0.9);
    const VerificationProblem a(fixtures::case_model(), formula, d1, Vector::Zero(2));
    const VerificationProblem b(fixtures::case_model(), formula, d2, Vector::Zero(2));
    const Vector th = rng.uniform_in(Box(Vector::Constant(2, -0.5), Vector::Constant(2, 0.5)));
    if (satisfaction_fn(th, a) == 1) {
      ++ones;
      EXPECT_EQ(satisfaction_fn(th, b), 1);
    }
  }
  EXPECT_GT(ones, 5);
}

TEST(PwaPartition, Grid) {
  const Box region(Vector::Constant(2, -3.5), Vector::Constant(2, 3.5));
  const auto cells = pwa_partition(region, 5);
  ASSERT_EQ(cells.size(), 25u);
  double vol = 0.0;
  for (const auto& c : cells) vol += c.volume();
  EXPECT_NEAR(vol, region.volume(), 1e-12);
  EXPECT_NEAR(cells[1].lower(0), cells[0].upper(0), 1e-15);  // first coordinate varies fastest
  EXPECT_EQ(cells[1].lower(1), cells[0].lower(1));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const Vector lo = cells[i].lower.cwiseMax(cells[j].lower);
      const Vector hi = cells[i].upper.cwiseMin(cells[j].upper);
      EXPECT_FALSE(((hi - lo).array() > 1e-12).all());
    }
  }
  const auto one = pwa_partition(region, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].lower, region.lower);
  EXPECT_EQ(one[0].upper, region.upper);
}

TEST(PwaLinearize, EnclosesGamma) {
  RngStream rng(7);
  for (auto form : {GammaForm::standard_deviation, GammaForm::paper_literal}) {
    const auto problem = case_problem(form);
    for (int trial = 0; trial < 40; ++trial) {
      const Vector c = rng.uniform_in(Box(Vector::Constant(2, -3), Vector::Constant(2, 3)));
      const double w = rng.uniform(0.01, 1.5);
      const ThetaCell cell{c.array() - w, c.array() + w, CellLabel::unknown};
      for (const auto& k : problem.kernels()) {
        if (k.delta() <= 0.0 || k.delta() >= 1.0) continue;
        const auto lin = pwa_linearize(k, cell);
        for (int s = 0; s < 25; ++s) {
          const Vector th = rng.uniform_in(cell.box());
          const double g = k.gamma(th);
          EXPECT_GE(g, lin.lower(th) - 1e-12);
          EXPECT_LE(g, lin.upper(th) + 1e-12);
        }
      }
    }
  }
}

TEST(PwaLinearize, ZeroWidthCellIsExact) {
  const auto problem = case_problem();
  const Vector c = theta(0.7, -1.3);
  const ThetaCell cell{c, c, CellLabel::unknown};
  for (const auto& k : problem.kernels()) {
    const auto lin = pwa_linearize(k, cell);
    EXPECT_EQ(lin.eps, 0.0);
    EXPECT_NEAR(lin.lower(c), k.gamma(c), 1e-12);
  }
}

TEST(PwaLinearize, RemainderIsQuadratic) {
  const auto problem = case_problem();
  const Vector c = theta(1.2, -0.8);
  for (const auto& k : problem.kernels()) {
    if (k.time() == 0) continue;
    for (double w : {0.2, 0.1, 0.05}) {
      const auto big = pwa_linearize(k, ThetaCell{c.array() - w, c.array() + w, CellLabel::unknown});
      const auto small = pwa_linearize(k, ThetaCell{c.array() - w / 2, c.array() + w / 2, CellLabel::unknown});
      ASSERT_FALSE(big.interval_fallback);
      EXPECT_GE(big.eps / small.eps, 3.9);
    }
  }
}

TEST(PwaClassify, SoundOnBandProperty) {
  const auto problem = band_problem();
  const auto region = restrict_region(problem, Box(Vector::Constant(2, -3.5), Vector::Constant(2, 3.5)));
  ASSERT_FALSE(region.box.empty);
  RngStream rng(8);
  int feasible = 0;
  for (std::size_t per_axis : {4, 8, 16}) {
    for (auto& cell : pwa_partition(region.box, per_axis)) {
      cell.label = pwa_classify(cell, problem);
      if (cell.label == CellLabel::unknown) continue;
      feasible += cell.label == CellLabel::feasible;
      for (int s = 0; s < 200; ++s) {
        const int sat = satisfaction_fn(rng.uniform_in(cell.box()), problem);
        EXPECT_EQ(sat, cell.label == CellLabel::feasible ? 1 : 0);
      }
    }
  }
  EXPECT_GT(feasible, 0);
}

TEST(PwaClassify, CaseStudyDistantCellNotFeasible) {
  const auto problem = case_problem();
  const ThetaCell cell{theta(1.95, -1.05), theta(2.05, -0.95), CellLabel::unknown};
  EXPECT_NE(pwa_classify(cell, problem), CellLabel::feasible);
}

TEST(RestrictRegion, ContainsEverySatisfyingSample) {
  const auto problem = band_problem();
  const Box theta_box(Vector::Constant(2, -3.5), Vector::Constant(2, 3.5));
  const auto r = restrict_region(problem, theta_box);
  EXPECT_TRUE(r.tightened);
  EXPECT_TRUE((r.box.lower.array() >= theta_box.lower.array()).all());
  EXPECT_TRUE((r.box.upper.array() <= theta_box.upper.array()).all());
  RngStream rng(9);
  for (int i = 0; i < 20000; ++i) {
    const Vector th = rng.uniform_in(theta_box);
    if (satisfaction_fn(th, problem)) {
      EXPECT_TRUE(r.box.contains(th, 1e-12));
    }
  }
  const auto again = restrict_region(problem, r.box);
  EXPECT_LE((again.box.lower - r.box.lower).cwiseAbs().maxCoeff(), 1e-2 * theta_box.widths().maxCoeff());
  EXPECT_LE((again.box.upper - r.box.upper).cwiseAbs().maxCoeff(), 1e-2 * theta_box.widths().maxCoeff());
}

TEST(RestrictRegion, InfeasibleSpecFlagsEmpty) {
  const VerificationProblem problem(fixtures::case_model(), stl::parse_stl("(mu1 & !mu1)", fixtures::case_predicates()),
                                    0.01, Vector::Zero(2));
  const auto r = restrict_region(problem, Box(Vector::Constant(2, -3.5), Vector::Constant(2, 3.5)));
  EXPECT_TRUE(r.box.empty);
}
