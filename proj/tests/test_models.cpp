#include <gtest/gtest.h>

#include <cmath>

#include "truncbound/bounds.hpp"
#include "truncbound/models.hpp"

namespace tb = truncbound;
using tb::ModelSpec;

namespace {

double row_total(const tb::TransitionRow& row) {
  double s = 0.0;
  for (const auto& [l, v] : row) s += v;
  return s;
}

tb::ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const tb::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected truncbound::Error";
  return tb::ErrorCode::ParseError;
}

}  // namespace

TEST(TransitionRow, BirthDeath) {
  const auto m = ModelSpec::birth_death(0.3);
  auto r0 = tb::transition_row(m, {0});
  ASSERT_EQ(r0.size(), 2u);
  EXPECT_EQ(r0[0].first, (tb::Label{0}));
  EXPECT_DOUBLE_EQ(r0[0].second, 0.7);
  EXPECT_EQ(r0[1].first, (tb::Label{1}));
  EXPECT_DOUBLE_EQ(r0[1].second, 0.3);

  auto r5 = tb::transition_row(m, {5});
  ASSERT_EQ(r5.size(), 2u);
  EXPECT_EQ(r5[0].first, (tb::Label{4}));
  EXPECT_EQ(r5[1].first, (tb::Label{6}));
  EXPECT_EQ(row_total(r5), 1.0);

  EXPECT_EQ(code_of([&] { tb::transition_row(m, {-1}); }), tb::ErrorCode::InvalidState);
}

TEST(TransitionRow, TandemStaysNonnegative) {
  const auto m = ModelSpec::tandem_2d(0.2, 0.3, 0.3);
  for (std::int64_t i = 0; i < 4; ++i)
    for (std::int64_t j = 0; j < 4; ++j) {
      auto row = tb::transition_row(m, {i, j});
      EXPECT_NEAR(row_total(row), 1.0, 1e-15);
      for (const auto& [l, v] : row) {
        EXPECT_GE(l[0], 0);
        EXPECT_GE(l[1], 0);
        EXPECT_GT(v, 0.0);
      }
    }
}

TEST(TransitionRow, NcdAndRandomDenseAreStochastic) {
  const auto ncd = ModelSpec::ncd_blocks(3, 4, 0.01);
  for (std::int64_t x = 0; x < 12; ++x) EXPECT_NEAR(row_total(tb::transition_row(ncd, {x})), 1.0, 1e-14);
  const auto rd = ModelSpec::random_dense(10, 7);
  for (std::int64_t x = 0; x < 10; ++x) {
    auto row = tb::transition_row(rd, {x});
    EXPECT_EQ(row.size(), 10u);
    EXPECT_NEAR(row_total(row), 1.0, 1e-14);
    EXPECT_EQ(row, tb::transition_row(rd, {x}));
  }
  EXPECT_EQ(code_of([&] { tb::transition_row(rd, {10}); }), tb::ErrorCode::InvalidState);
}

TEST(ModelSpec, Validation) {
  EXPECT_EQ(code_of([] { tb::validate_model(ModelSpec::birth_death(1.5)); }), tb::ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { tb::validate_model(ModelSpec::tandem_2d(0.5, 0.4, 0.3)); }),
            tb::ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { tb::validate_model(ModelSpec::ncd_blocks(2, 3, 0.0)); }),
            tb::ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { tb::validate_model(ModelSpec::ncd_blocks(1, 3, 0.1)); }),
            tb::ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { tb::validate_model({tb::ModelFamily::BirthDeath, {}, 0}); }),
            tb::ErrorCode::InvalidModel);
}

TEST(Window, BirthDeathLeaksAtTop) {
  auto w = tb::window(ModelSpec::birth_death(0.3), 4);
  ASSERT_EQ(w.states.size(), 4u);
  EXPECT_DOUBLE_EQ(w.kernel.row_sum(3), 0.7);
  EXPECT_DOUBLE_EQ(w.kernel.row_sum(0), 1.0);
  ASSERT_TRUE(w.kernel.has_leak());
  EXPECT_EQ(w.kernel.leak(), (std::vector<double>{0.0, 0.0, 0.0, 0.3}));
}

TEST(Window, TandemInteriorRowsAreStochastic) {
  const auto m = ModelSpec::tandem_2d(0.2, 0.3, 0.3);
  auto w = tb::window(m, 6);
  for (tb::Index i = 0; i < w.states.size(); ++i) {
    const auto& l = w.states.label(i);
    if (l[0] < 5 && l[1] < 5) {
      EXPECT_NEAR(w.kernel.row_sum(i), 1.0, 1e-15);
    }
  }
}

TEST(Window, RandomDenseIsWholeSpace) {
  auto w = tb::window(ModelSpec::random_dense(10, 7), 50);
  EXPECT_EQ(w.states.size(), 10u);
  EXPECT_TRUE(tb::validate_kernel(w.kernel, tb::KernelKind::Stochastic).passed());
}

TEST(Window, RowsAreExactSubRowsOfTransitionRow) {
  for (const auto& m : {ModelSpec::birth_death(0.3), ModelSpec::tandem_2d(0.2, 0.3, 0.3),
                        ModelSpec::ncd_blocks(3, 3, 0.05)}) {
    auto w = tb::window(m, 4);
    for (tb::Index i = 0; i < w.states.size(); ++i) {
      std::size_t inside = 0;
      for (const auto& [l, v] : tb::transition_row(m, w.states.label(i))) {
        if (auto j = w.states.find(l)) {
          EXPECT_EQ(w.kernel.at(i, *j), v);
          ++inside;
        }
      }
      EXPECT_EQ(w.kernel.row(i).size(), inside);
    }
  }
}

TEST(ClosedForm, BirthDeathRatios) {
  const auto m = ModelSpec::birth_death(0.3);
  auto pi = tb::closed_form_stationary(m, {{0}, {1}, {2}});
  EXPECT_NEAR(pi[1] / pi[0], 3.0 / 7.0, 1e-15);
  EXPECT_NEAR(pi[2] / pi[1], 3.0 / 7.0, 1e-15);

  // Against the dense stationary solve on the reflecting window {0..60}: the
  // top state keeps its up-mass as a self-loop.
  auto w = tb::window(m, 61);
  std::vector<tb::SparseKernel::Row> rows(61);
  for (tb::Index i = 0; i < 61; ++i) {
    for (const auto& e : w.kernel.row(i)) rows[i].push_back(e);
    if (i == 60) rows[i].push_back({60, 0.3});
  }
  tb::SparseKernel reflecting(61, std::move(rows), tb::KernelKind::Stochastic);
  auto oracle = tb::stationary_oracle(reflecting);
  for (std::size_t n = 0; n < 20; ++n) EXPECT_NEAR(oracle[n + 1] / oracle[n], 3.0 / 7.0, 1e-6);
}

TEST(ClosedForm, Errors) {
  EXPECT_EQ(code_of([] { tb::closed_form_stationary(ModelSpec::birth_death(0.5), {{0}}); }),
            tb::ErrorCode::Unstable);
  EXPECT_EQ(code_of([] { tb::closed_form_stationary(ModelSpec::tandem_2d(0.2, 0.3, 0.3), {{0, 0}}); }),
            tb::ErrorCode::Unavailable);
}

TEST(NcdBlocks, WithinBlockDiameterShrinksWithCoupling) {
  // Reported, not asserted against a rate: S = the first block, A = everything
  // except one state of the last block.
  double previous = 1.0;
  for (double eps : {0.2, 0.05, 0.01}) {
    const auto m = ModelSpec::ncd_blocks(3, 4, eps);
    auto w = tb::window(m, 11);
    auto spec = tb::TruncationSpec(w.states, {{0}, {1}, {2}, {3}});
    auto nt = tb::nu_table(tb::fundamental_rows(tb::censor(w.kernel, spec)));
    const double d = tb::tv_diameter(nt).diameter;
    RecordProperty("diameter_eps_" + std::to_string(eps), std::to_string(d));
    EXPECT_LE(d, previous + 1e-12);
    previous = d;
  }
}
