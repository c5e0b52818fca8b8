#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support/chains.hpp"
#include "support/tempdir.hpp"
#include "truncbound/io.hpp"

namespace tb = truncbound;
namespace tt = truncbound::testing;
namespace io = truncbound::io;
using tb::SparseKernel;

namespace {

tb::ErrorCode parse_code(const std::string& text, std::string* message = nullptr) {
  std::istringstream in(text);
  try {
    io::read_matrix_market(in, "m.mtx");
  } catch (const tb::Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected a parse failure";
  return tb::ErrorCode::VerifyFailed;
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  std::mt19937_64 rng(83);
  for (int i = 0; i < 1000; ++i) {
    const double v = tt::uniform01(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
}

TEST(MatrixMarket, WriteThenReadIsIdentical) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = tt::uniform_index(rng, 1, 40);
    auto k = tt::random_substochastic(n, rng, 0.9, 0.2);
    std::ostringstream out;
    io::write_matrix_market(out, k);
    std::istringstream in(out.str());
    auto back = io::read_matrix_market(in);
    EXPECT_TRUE(back.same_entries(k));
  }
}

TEST(MatrixMarket, EmptyMatrixIsAllZeroSubstochastic) {
  std::istringstream in("%%MatrixMarket matrix coordinate real general\n3 3 0\n");
  auto k = io::read_matrix_market(in);
  EXPECT_EQ(k.rows(), 3u);
  EXPECT_EQ(k.nonzeros(), 0u);
  EXPECT_TRUE(tb::validate_kernel(k, tb::KernelKind::Substochastic).passed());
}

TEST(MatrixMarket, NegativeEntryParsesThenFailsValidation) {
  std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 -0.5\n2 2 1\n");
  auto k = io::read_matrix_market(in);
  auto report = tb::validate_kernel(k, tb::KernelKind::Substochastic);
  ASSERT_TRUE(report.failure);
  EXPECT_EQ(report.failure->code, tb::ErrorCode::NegativeEntry);
}

TEST(MatrixMarket, CommentsAreSkipped) {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n% a comment\n\n2 2 1\n% another\n1 2 0.5\n");
  auto k = io::read_matrix_market(in);
  EXPECT_EQ(k.at(0, 1), 0.5);
}

TEST(MatrixMarket, ParseErrorsCarryLineNumbers) {
  const std::string banner = "%%MatrixMarket matrix coordinate real general\n";
  std::string msg;
  EXPECT_EQ(parse_code("", &msg), tb::ErrorCode::ParseError);
  EXPECT_EQ(parse_code("%%MatrixMarket matrix array real general\n2 2\n", &msg),
            tb::ErrorCode::ParseError);
  EXPECT_NE(msg.find("m.mtx:1"), std::string::npos) << msg;
  EXPECT_EQ(parse_code(banner + "2 2 1\n1 x 0.5\n", &msg), tb::ErrorCode::ParseError);
  EXPECT_NE(msg.find("m.mtx:3"), std::string::npos) << msg;
  EXPECT_EQ(parse_code(banner + "2 2 1\n3 1 0.5\n", &msg), tb::ErrorCode::ParseError);
  EXPECT_EQ(parse_code(banner + "2 2 2\n1 1 0.5\n", &msg), tb::ErrorCode::ParseError);
  EXPECT_EQ(parse_code(banner + "2 2 1\n1 1 0.5\n2 2 0.5\n", &msg), tb::ErrorCode::ParseError);
  EXPECT_EQ(parse_code(banner + "2 2 2\n1 1 0.5\n1 1 0.25\n", &msg), tb::ErrorCode::ParseError);
  EXPECT_EQ(parse_code(banner + "2 2\n", &msg), tb::ErrorCode::ParseError);
}

TEST(LabeledKernel, SidecarPermutesIntoCanonicalOrder) {
  tt::TempDir dir;
  // File order: states 2, 0, 1.
  io::write_text(dir.file("k.mtx"),
                 "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 2 1\n2 3 1\n3 1 1\n");
  io::write_text(dir.file("k.json"), R"({"schema_version": 1, "labels": [[2], [0], [1]]})");
  auto lk = io::read_labeled_kernel(dir.file("k.mtx"), dir.file("k.json"));
  // File edges 2->0, 0->1, 1->2 in canonical order.
  EXPECT_EQ(lk.kernel.at(2, 0), 1.0);
  EXPECT_EQ(lk.kernel.at(0, 1), 1.0);
  EXPECT_EQ(lk.kernel.at(1, 2), 1.0);
  EXPECT_EQ(lk.space, tb::StateSpace::range(3));

  io::write_labeled_kernel(dir.file("o.mtx"), dir.file("o.json"), lk.space, lk.kernel);
  auto back = io::read_labeled_kernel(dir.file("o.mtx"), dir.file("o.json"));
  EXPECT_TRUE(back.kernel.same_entries(lk.kernel));
  EXPECT_EQ(back.space, lk.space);
}

TEST(LabeledKernel, SidecarSizeMismatch) {
  tt::TempDir dir;
  io::write_text(dir.file("k.mtx"), "%%MatrixMarket matrix coordinate real general\n3 3 0\n");
  io::write_text(dir.file("k.json"), R"({"labels": [0, 1]})");
  try {
    io::read_labeled_kernel(dir.file("k.mtx"), dir.file("k.json"));
    FAIL();
  } catch (const tb::Error& e) {
    EXPECT_EQ(e.code(), tb::ErrorCode::DimensionMismatch);
  }
  auto plain = io::read_labeled_kernel(dir.file("k.mtx"), std::nullopt);
  EXPECT_EQ(plain.space, tb::StateSpace::range(3));
}

TEST(LabeledKernel, MissingFileIsIoError) {
  try {
    io::read_matrix_market(std::string("/nonexistent/k.mtx"));
    FAIL();
  } catch (const tb::Error& e) {
    EXPECT_EQ(e.code(), tb::ErrorCode::IoError);
  }
}

TEST(NuCsv, HeaderAndRows) {
  auto nt = tb::nu_table(tb::RowMatrix::Identity(2, 2));
  std::ostringstream out;
  io::write_nu_csv(out, tb::StateSpace({{0, 1}, {2, 3}}), nt);
  EXPECT_EQ(out.str(), "label,g,0:1,2:3\n0:1,1,1,0\n2:3,1,0,1\n");
}

TEST(Json, DistributionAndModelRoundTrip) {
  const tb::StateSpace space({{3}, {1}, {2}});
  const tb::Distribution d({0.2, 0.3, 0.5});
  auto [s2, d2] = io::distribution_from_json(io::distribution_to_json(space, d));
  EXPECT_EQ(s2, space);
  EXPECT_EQ(d2.weights(), d.weights());

  for (const auto& m : {tb::ModelSpec::birth_death(0.3), tb::ModelSpec::tandem_2d(0.2, 0.3, 0.3),
                        tb::ModelSpec::ncd_blocks(3, 4, 0.01), tb::ModelSpec::random_dense(20, 42)}) {
    auto back = io::model_from_json(io::model_to_json(m));
    EXPECT_EQ(back.family, m.family);
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.seed, m.seed);
  }
  EXPECT_THROW(io::model_from_json(nlohmann::json{{"family", "nope"}}), tb::Error);
}
