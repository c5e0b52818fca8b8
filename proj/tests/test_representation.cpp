#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/chains.hpp"
#include "support/oracles.hpp"
#include "truncbound/representation.hpp"

namespace tb = truncbound;
namespace tt = truncbound::testing;
using tb::Distribution;
using tb::KernelKind;
using tb::SparseKernel;

namespace {

tb::ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const tb::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected truncbound::Error";
  return tb::ErrorCode::ParseError;
}

tb::NuTable two_state_nu() {
  return tb::nu_table(tb::fundamental_rows(SparseKernel::from_dense({{0.5, 0.25}, {0.25, 0.5}})));
}

}  // namespace

TEST(Distribution, Invariants) {
  EXPECT_NO_THROW(Distribution({0.25, 0.75}));
  EXPECT_EQ(code_of([] { Distribution({0.5, 0.6}); }), tb::ErrorCode::NotNormalized);
  EXPECT_EQ(code_of([] { Distribution({1.5, -0.5}); }), tb::ErrorCode::NegativeEntry);
  EXPECT_NO_THROW(tb::Measure({2.0, 3.0}));
}

TEST(Mixture, Examples) {
  const auto nt = two_state_nu();
  auto p0 = tb::mixture(Distribution::point_mass(2, 0), nt);
  EXPECT_EQ(p0[0], nt.nu(0, 0));
  EXPECT_EQ(p0[1], nt.nu(0, 1));

  auto uni = tb::mixture(Distribution::uniform(2), nt);
  EXPECT_NEAR(uni[0], 0.5, 1e-15);
  EXPECT_NEAR(uni[1], 0.5, 1e-15);

  // Direct weighted sum: 0.25 * 2/3 + 0.75 * 1/3 = 5/12.
  auto mixed = tb::mixture(Distribution({0.25, 0.75}), nt);
  EXPECT_NEAR(mixed[0], 5.0 / 12.0, 1e-15);
  EXPECT_NEAR(mixed[1], 7.0 / 12.0, 1e-15);

  EXPECT_EQ(code_of([&] { tb::mixture(Distribution::uniform(3), nt); }),
            tb::ErrorCode::DimensionMismatch);
}

TEST(ForwardMap, SingleState) {
  auto g = SparseKernel::from_dense({{0.5}});
  auto p = SparseKernel::from_dense({{1.0}}, KernelKind::Stochastic);
  auto fwd = tb::forward_map(p, g, Distribution({1.0}));
  EXPECT_DOUBLE_EQ(fwd.pi2[0], 0.5);
  EXPECT_DOUBLE_EQ(fwd.g[0], 2.0);
  EXPECT_DOUBLE_EQ(fwd.eta[0], 1.0);
  auto nt = tb::nu_table(tb::fundamental_rows(g));
  EXPECT_DOUBLE_EQ(tb::mixture(fwd.eta, nt)[0], 1.0);
}

TEST(ForwardMap, TwoStateExample) {
  auto g = SparseKernel::from_dense({{0.25, 0.25}, {0.25, 0.25}});
  // Dense solve oracle: N = [[1.5, 0.5], [0.5, 1.5]].
  const Eigen::MatrixXd n = tt::dense_fundamental(g);
  ASSERT_NEAR(n(0, 0), 1.5, 1e-15);
  ASSERT_NEAR(n(0, 1), 0.5, 1e-15);
  auto p = SparseKernel::from_dense({{0.5, 0.5}, {0.5, 0.5}}, KernelKind::Stochastic);
  const Distribution pi({0.5, 0.5});
  auto fwd = tb::forward_map(p, g, pi);
  EXPECT_NEAR(fwd.pi2[0], 0.25, 1e-15);
  EXPECT_NEAR(fwd.pi2[1], 0.25, 1e-15);
  EXPECT_NEAR(fwd.g[0], 2.0, 1e-14);
  EXPECT_NEAR(fwd.eta[0], 0.5, 1e-14);
  EXPECT_NEAR(fwd.eta[1], 0.5, 1e-14);
  // pi1 + pi2 = pi.
  EXPECT_NEAR(fwd.pi1[0] + fwd.pi2[0], 0.5, 1e-15);
  auto mixed = tb::mixture(fwd.eta, tb::nu_table(tb::fundamental_rows(g)));
  EXPECT_NEAR(tb::l1_distance(mixed.weights(), pi.weights()), 0.0, 1e-14);
}

TEST(ForwardMap, Errors) {
  auto stoch = SparseKernel::from_dense({{0.5, 0.5}, {1.0, 0.0}}, KernelKind::Stochastic);
  EXPECT_EQ(code_of([&] { tb::forward_map(stoch, stoch, Distribution({2.0 / 3.0, 1.0 / 3.0})); }),
            tb::ErrorCode::FundamentalDiverges);
  EXPECT_EQ(code_of([&] { tb::forward_map(stoch, stoch, Distribution({0.5, 0.5})); }),
            tb::ErrorCode::NotStationary);
  auto big_g = SparseKernel::from_dense({{0.6, 0.0}, {0.0, 0.0}});
  auto p = SparseKernel::from_dense({{0.5, 0.5}, {0.5, 0.5}}, KernelKind::Stochastic);
  EXPECT_EQ(code_of([&] { tb::forward_map(p, big_g, Distribution({0.5, 0.5})); }),
            tb::ErrorCode::NotDominating);
}

TEST(BackwardMap, SingleState) {
  auto g = SparseKernel::from_dense({{0.5}});
  auto nt = tb::nu_table(tb::fundamental_rows(g));
  auto bwd = tb::backward_map(Distribution({1.0}), g, nt);
  EXPECT_DOUBLE_EQ(bwd.c, 0.5);
  EXPECT_DOUBLE_EQ(bwd.phi[0], 1.0);
  EXPECT_DOUBLE_EQ(bwd.P.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(bwd.mu[0], 1.0);
}

TEST(BackwardMap, TwoStateExamples) {
  auto g = SparseKernel::from_dense({{0.25, 0.25}, {0.25, 0.25}});
  auto nt = tb::nu_table(tb::fundamental_rows(g));

  auto uni = tb::backward_map(Distribution::uniform(2), g, nt);
  EXPECT_NEAR(uni.c, 0.5, 1e-15);
  EXPECT_NEAR(uni.phi[0], 0.5, 1e-15);
  EXPECT_NEAR(uni.P.at(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(uni.P.at(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(uni.mu[0], 0.5, 1e-15);
  EXPECT_LE(tb::stationarity_residual(uni.mu, uni.P), 1e-15);

  auto corner = tb::backward_map(Distribution({1.0, 0.0}), g, nt);
  EXPECT_NEAR(corner.phi[0], 1.0, 1e-15);
  EXPECT_NEAR(corner.P.at(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(corner.P.at(0, 1), 0.25, 1e-15);
  EXPECT_NEAR(corner.P.at(1, 0), 0.75, 1e-15);
  EXPECT_NEAR(corner.mu[0], 0.75, 1e-15);
  EXPECT_NEAR(corner.mu[1], 0.25, 1e-15);
  EXPECT_LE(tb::stationarity_residual(corner.mu, corner.P), 1e-15);
}

TEST(StationaryOracle, Examples) {
  auto id = SparseKernel::from_dense({{1.0, 0.0}, {0.0, 1.0}}, KernelKind::Stochastic);
  EXPECT_EQ(code_of([&] { tb::stationary_oracle(id); }), tb::ErrorCode::NotUniqueStationary);

  auto flip = SparseKernel::from_dense({{0.0, 1.0}, {1.0, 0.0}}, KernelKind::Stochastic);
  auto pi = tb::stationary_oracle(flip);
  EXPECT_NEAR(pi[0], 0.5, 1e-15);
  EXPECT_NEAR(pi[1], 0.5, 1e-15);

  std::mt19937_64 rng(43);
  auto chain = tt::random_irreducible(20, rng);
  EXPECT_LE(tb::stationarity_residual(tb::stationary_oracle(chain), chain), 1e-10);
}

TEST(ConditionalDistribution, Examples) {
  auto uni = tb::conditional_distribution(Distribution::uniform(4), {0, 1});
  EXPECT_DOUBLE_EQ(uni[0], 0.5);
  EXPECT_DOUBLE_EQ(uni[1], 0.5);

  EXPECT_EQ(code_of([] { tb::conditional_distribution(Distribution({0.0, 0.0, 1.0}), {0, 1}); }),
            tb::ErrorCode::ZeroMass);

  // Geometric (1 - rho) rho^n over {0..9}, conditioned on {0..4}: closed form
  // rho^n (1 - rho) / (1 - rho^5).
  const double rho = 3.0 / 7.0;
  std::vector<double> w(10);
  double total = 0.0;
  for (int k = 0; k < 10; ++k) total += (w[static_cast<std::size_t>(k)] = (1 - rho) * std::pow(rho, k));
  for (auto& v : w) v /= total;
  auto cond = tb::conditional_distribution(Distribution(w), {0, 1, 2, 3, 4});
  for (int k = 0; k < 5; ++k)
    EXPECT_NEAR(cond[static_cast<std::size_t>(k)], std::pow(rho, k) * (1 - rho) / (1 - std::pow(rho, 5)), 1e-15);
}

// Round trips between stationary distributions of dominating chains and
// mixtures of the nu rows.
class RepresentationProperty : public ::testing::Test {
 protected:
  struct Instance {
    SparseKernel p;  // censored chain on S (A = S*)
    tb::CensoredKernel g;  // censored on a proper window
    tb::NuTable nt;
    Distribution pi;
  };

  static Instance draw(std::mt19937_64& rng) {
    const std::size_t n = tt::uniform_index(rng, 3, 50);
    auto chain = tt::random_irreducible(n, rng);
    const auto pi_star = tb::stationary_oracle(chain);
    auto s = tt::random_subset(n, tt::uniform_index(rng, 1, n - 1), rng);
    auto rest = tb::complement(s, n);
    auto extra = tt::uniform_index(rng, 0, rest.size() - 1);
    tb::IndexSet a = s;
    for (std::size_t i = 0; i < extra; ++i) a.push_back(rest[i]);
    std::sort(a.begin(), a.end());

    auto all = tb::StateSpace::range(n);
    auto p = tb::censor(chain, tb::TruncationSpec(all, tt::labels_of(s))).G.with_kind(KernelKind::Stochastic);
    auto g = tb::censor(tb::restrict_to(chain, a, a),
                        tb::TruncationSpec(tb::StateSpace(tt::labels_of(a)), tt::labels_of(s)));
    auto nt = tb::nu_table(tb::fundamental_rows(g));
    return {p, g, nt, tb::conditional_distribution(pi_star, s)};
  }
};

TEST_F(RepresentationProperty, ForwardReproducesConditionalStationary) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = draw(rng);
    auto fwd = tb::forward_map(inst.p, inst.g, inst.pi);
    EXPECT_NEAR(fwd.eta.total(), 1.0, tb::tol::prob);
    EXPECT_LE(tb::l1_distance(tb::mixture(fwd.eta, inst.nt).weights(), inst.pi.weights()), 1e-8);
  }
}

TEST_F(RepresentationProperty, BackwardThenForward) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = draw(rng);
    auto gamma = tt::random_distribution(inst.nt.size(), rng);
    auto bwd = tb::backward_map(gamma, inst.g, inst.nt);
    EXPECT_TRUE(tb::validate_kernel(bwd.P, KernelKind::Stochastic, 1e-12).passed());
    EXPECT_TRUE(tb::dominates(bwd.P, inst.g.G));
    EXPECT_LE(tb::stationarity_residual(bwd.mu, bwd.P), 1e-10);
    auto again = tb::forward_map(bwd.P, inst.g, bwd.mu);
    EXPECT_LE(tb::l1_distance(tb::mixture(again.eta, inst.nt).weights(), bwd.mu.weights()), 1e-8);
  }
}
