#include <gtest/gtest.h>

#include <cmath>

#include "spmvopt/benchmark.hpp"
#include "spmvopt/decomposed_csr.hpp"
#include "spmvopt/delta_csr.hpp"
#include "spmvopt/generator.hpp"
#include "spmvopt/kernels.hpp"
#include "spmvopt/partition.hpp"
#include "support/oracles.hpp"

using namespace spmvopt;
using testsupport::dense_matvec;

namespace {

std::vector<double> run(const Kernel& k, const std::vector<double>& x) {
  std::vector<double> y(k.nrows(), -1.0);
  k(x, y);
  return y;
}

CsrMatrix long_middle_row() {
  CsrMatrix m;
  m.nrows = 3;
  m.ncols = 100;
  m.rowptr = {0, 1, 101, 102};
  m.colind.push_back(0);
  for (index_t c = 0; c < 100; ++c) m.colind.push_back(c);
  m.colind.push_back(99);
  for (std::size_t j = 0; j < m.colind.size(); ++j) m.values.push_back(0.1 + 0.01 * static_cast<double>(j));
  return m;
}

}  // namespace

TEST(Csr, IdentityAndEmptyRow) {
  CsrMatrix id = CsrMatrix::identity(2);
  std::vector<double> x = {3, 4}, y(2);
  spmv_csr(id, x, y, partition_by_nnz(id, 1));
  EXPECT_EQ(y, x);

  CsrMatrix gap = CsrMatrix::from_dense(3, 2, {1, 2, 0, 0, 5, 0});
  std::vector<double> y3(3, 42.0);
  spmv_csr(gap, std::vector<double>{1, 1}, y3, partition_by_nnz(gap, 2));
  EXPECT_EQ(y3, (std::vector<double>{3, 0, 5}));
}

TEST(Csr, MatchesDenseOracle) {
  CsrMatrix m = generate({GeneratorKind::UniformRandom, 50, 50, 200, 4});
  auto x = testsupport::random_vector(50, 1);
  std::vector<double> y(50);
  spmv_csr(m, x, y, partition_by_nnz(m, 3));
  auto ref = dense_matvec(m, x);
  EXPECT_LE(testsupport::max_relative_error(y, ref, testsupport::abs_row_scale(m, x)), 1e-13);
}

TEST(Csr, DimensionChecks) {
  CsrMatrix m = CsrMatrix::identity(3);
  std::vector<double> x(2), y(3);
  EXPECT_THROW(spmv_csr(m, x, y, partition_by_nnz(m, 1)), DimensionMismatch);
  auto k = compose(KernelId{}, m, {});
  std::vector<double> x3(3), y2(2);
  EXPECT_THROW(k->run(x3, y2, {}), DimensionMismatch);
}

TEST(Delta, MatchesCsrBitwise) {
  CsrMatrix m = generate({GeneratorKind::Banded, 1000, 1000, 2900, 8, 3});
  auto x = testsupport::random_vector(1000, 2);
  auto d = std::get<DeltaCsrMatrix>(compress_delta(m));
  Partition p = partition_by_nnz(m, 4);
  std::vector<double> y0(1000), y1(1000);
  spmv_csr(m, x, y0, p);
  spmv_delta(d, x, y1, p);
  EXPECT_EQ(y0, y1);

  CsrMatrix id = CsrMatrix::identity(2);
  auto did = std::get<DeltaCsrMatrix>(compress_delta(id));
  std::vector<double> y2(2);
  spmv_delta(did, std::vector<double>{3, 4}, y2, partition_by_nnz(id, 1));
  EXPECT_EQ(y2, (std::vector<double>{3, 4}));
}

TEST(Delta, SixteenBitMatchesOracle) {
  CsrMatrix m;
  m.nrows = 2;
  m.ncols = 301;
  m.rowptr = {0, 2, 4};
  m.colind = {0, 300, 5, 17};
  m.values = {0.5, -1.25, 2.0, 0.75};
  auto d = std::get<DeltaCsrMatrix>(compress_delta(m));
  ASSERT_EQ(d.width, DeltaWidth::Bits16);
  auto x = testsupport::random_vector(301, 3);
  std::vector<double> y(2);
  spmv_delta(d, x, y, partition_by_nnz(m, 2));
  EXPECT_LE(testsupport::max_relative_error(y, dense_matvec(m, x), testsupport::abs_row_scale(m, x)), 1e-13);
}

TEST(Decomposed, NoLongRowsIsCsr) {
  CsrMatrix m = generate({GeneratorKind::UniformRandom, 300, 300, 1500, 5});
  auto x = testsupport::random_vector(300, 4);
  DecomposedCsrMatrix d = decompose(m, 1000);
  std::vector<double> y0(300), y1(300);
  spmv_csr(m, x, y0, partition_by_nnz(m, 3));
  spmv_decomposed(d, x, y1, partition_by_nnz(d.rowptr, 3));
  EXPECT_EQ(y0, y1);
}

TEST(Decomposed, LongRowReduction) {
  CsrMatrix m = long_middle_row();
  DecomposedCsrMatrix d = decompose(m, 10);
  std::vector<double> ones(100, 1.0);
  auto ref = dense_matvec(m, ones);
  for (std::size_t t : {1u, 2u, 3u, 8u}) {
    std::vector<double> y(3);
    spmv_decomposed(d, ones, y, partition_by_nnz(d.rowptr, t));
    EXPECT_LE(testsupport::max_relative_error(y, ref, testsupport::abs_row_scale(m, ones)), 1e-12);
  }
  std::vector<double> y0(3), y1(3);
  spmv_csr(m, ones, y0, partition_by_nnz(m, 1));
  spmv_decomposed(d, ones, y1, partition_by_nnz(d.rowptr, 1));
  EXPECT_EQ(y0, y1);
}

TEST(Prefetch, MatchesCsrBitwise) {
  EXPECT_EQ(prefetch_distance(64), 16u);
  for (const auto& c : testsupport::generated_cases(24, 13, 400)) {
    const CsrMatrix& m = c.matrix;
    auto x = testsupport::random_vector(m.ncols, 5);
    std::vector<double> y0(m.nrows), y1(m.nrows);
    Partition p = partition_by_nnz(m, 2);
    spmv_csr(m, x, y0, p);
    spmv_prefetch(m, x, y1, p);
    EXPECT_EQ(y0, y1) << c.name;
    spmv_prefetch(m, x, y1, p, 4096);
    EXPECT_EQ(y0, y1) << c.name;
  }
}

TEST(Dynamic, MatchesCsrBitwise) {
  CsrMatrix id = CsrMatrix::identity(2);
  std::vector<double> y(2);
  spmv_dynamic(id, std::vector<double>{3, 4}, y, 2, 1);
  EXPECT_EQ(y, (std::vector<double>{3, 4}));

  CsrMatrix m = generate({GeneratorKind::PowerLawRows, 500, 500, 5000, 6, 3, 1.5});
  auto x = testsupport::random_vector(500, 6);
  std::vector<double> y0(500), y1(500), y2(500);
  spmv_csr(m, x, y0, partition_by_nnz(m, 1));
  spmv_dynamic(m, x, y1, 4, 7);
  spmv_dynamic(m, x, y2, 3, m.nrows);
  EXPECT_EQ(y0, y1);
  EXPECT_EQ(y0, y2);
}

TEST(Unrolled, ShortRowsUseRemainderLoop) {
  CsrMatrix m = CsrMatrix::from_dense(2, 4, {0.1, 0.2, 0.3, 0, 1, 0, 0, 0});
  auto x = testsupport::random_vector(4, 7);
  std::vector<double> y0(2), y1(2);
  spmv_csr(m, x, y0, partition_by_nnz(m, 1));
  spmv_unrolled(m, x, y1, partition_by_nnz(m, 1));
  if (kUnrollFactor > 3) EXPECT_EQ(y0, y1);
}

TEST(Unrolled, IntegerSumsAreExact) {
  CsrMatrix m = CsrMatrix::from_dense(1, 8, std::vector<double>(8, 1.0));
  std::vector<double> y(1);
  spmv_unrolled(m, std::vector<double>(8, 1.0), y, partition_by_nnz(m, 1));
  EXPECT_EQ(y[0], 8.0);
}

TEST(Unrolled, MatchesDenseOracle) {
  CsrMatrix m = generate({GeneratorKind::BlockDense, 400, 400, 6400, 8, 3, 2.0, 8});
  auto x = testsupport::random_vector(400, 8);
  std::vector<double> y(400);
  spmv_unrolled(m, x, y, partition_by_nnz(m, 2));
  EXPECT_LE(testsupport::max_relative_error(y, dense_matvec(m, x), testsupport::abs_row_scale(m, x)), 1e-12);
}

TEST(KernelId, TextRoundTrip) {
  for (const KernelId& id : testsupport::all_kernel_ids()) EXPECT_EQ(parse_kernel_id(to_string(id)), id);
  EXPECT_EQ(to_string(KernelId{}), "csr/static/plain");
  KernelId id = parse_kernel_id("delta+prefetch/static/unrolled");
  EXPECT_TRUE(id.delta_indices && id.prefetch);
  EXPECT_EQ(id.inner, InnerLoop::Unrolled);
  EXPECT_THROW(parse_kernel_id("csr/sideways/plain"), std::invalid_argument);
}

TEST(Compose, RejectsDeltaWithDecomposition) {
  KernelId id;
  id.delta_indices = id.decompose_long_rows = true;
  EXPECT_FALSE(id.valid());
  EXPECT_THROW(compose(id, CsrMatrix::identity(2), {}), InvalidCombination);
}

TEST(Compose, BaselineIsCsr) {
  CsrMatrix m = generate({GeneratorKind::UniformRandom, 200, 150, 1200, 9});
  auto x = testsupport::random_vector(150, 9);
  std::vector<double> y0(200);
  spmv_csr(m, x, y0, partition_by_nnz(m, 2));
  KernelOptions o;
  o.nthreads = 2;
  EXPECT_EQ(run(*compose(KernelId{}, m, o), x), y0);
}

TEST(Compose, DeltaPrefetchUnrolledOnBanded) {
  CsrMatrix m = generate({GeneratorKind::Banded, 800, 800, 4000, 10, 7});
  auto x = testsupport::random_vector(800, 10);
  KernelOptions o;
  o.nthreads = 3;
  auto k = compose(parse_kernel_id("delta+prefetch/static/unrolled"), m, o);
  EXPECT_TRUE(k->effective().delta_indices);
  EXPECT_LE(testsupport::max_relative_error(run(*k, x), dense_matvec(m, x), testsupport::abs_row_scale(m, x)),
            1e-12);
}

TEST(Compose, FallsBackWhenDeltaTooWide) {
  CsrMatrix m;
  m.nrows = 1;
  m.ncols = 70001;
  m.rowptr = {0, 2};
  m.colind = {0, 70000};
  m.values = {1.0, 2.0};
  auto k = compose(parse_kernel_id("delta/static/plain"), m, {});
  EXPECT_TRUE(k->requested().delta_indices);
  EXPECT_FALSE(k->effective().delta_indices);
  std::vector<double> x(70001, 1.0);
  EXPECT_EQ(run(*k, x), (std::vector<double>{3.0}));
}

TEST(Compose, BusyTimesPerThread) {
  CsrMatrix m = generate({GeneratorKind::UniformRandom, 500, 500, 5000, 11});
  auto x = testsupport::random_vector(500, 11);
  for (const KernelId& id : testsupport::all_kernel_ids()) {
    KernelOptions o;
    o.nthreads = 3;
    auto k = compose(id, m, o);
    std::vector<double> y(500), busy(3, -1.0);
    k->run(x, y, busy);
    for (double b : busy) EXPECT_GE(b, 0.0) << to_string(id);
  }
}

TEST(Compose, AllVariantsMatchOracle) {
  for (const auto& c : testsupport::generated_cases(40, 21, 600)) {
    const CsrMatrix& m = c.matrix;
    auto x = testsupport::random_vector(m.ncols, 12);
    auto ref = dense_matvec(m, x);
    auto scale = testsupport::abs_row_scale(m, x);
    for (const KernelId& id : testsupport::all_kernel_ids()) {
      for (std::size_t t : {1u, 4u}) {
        KernelOptions o;
        o.nthreads = t;
        o.chunk_rows = 5;
        auto y = run(*compose(id, m, o), x);
        EXPECT_LE(testsupport::max_relative_error(y, ref, scale), 1e-12) << c.name << ' ' << to_string(id);
      }
    }
  }
}

TEST(Benchmark, RateFormulas) {
  EXPECT_DOUBLE_EQ(run_rate(1000000, 128, 2.0), 2e6 * 128 / 2.0);
  std::vector<double> same = {2e9, 2e9, 2e9, 2e9, 2e9};
  EXPECT_DOUBLE_EQ(harmonic_mean(same), 2e9);
  std::vector<double> two = {1, 3};
  EXPECT_DOUBLE_EQ(harmonic_mean(two), 1.5);
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  std::vector<double> neg = {1, -1};
  EXPECT_THROW(harmonic_mean(neg), std::invalid_argument);
}

TEST(Benchmark, SummarizeTiming) {
  std::vector<double> secs = {1.0, 2.0};
  std::vector<std::vector<double>> busy = {{0.5, 1.0}, {1.0, 2.0}};
  TimingResult t = summarize_timing(1000, 10, secs, busy);
  EXPECT_EQ(t.runs, 2u);
  EXPECT_EQ(t.iterations, 10u);
  EXPECT_DOUBLE_EQ(t.run_rates[0], 2.0 * 1000 * 10 / 1.0);
  EXPECT_DOUBLE_EQ(t.run_rates[1], 2.0 * 1000 * 10 / 2.0);
  EXPECT_DOUBLE_EQ(t.rate, 2.0 / (1.0 / t.run_rates[0] + 1.0 / t.run_rates[1]));
  ASSERT_EQ(t.per_thread_times.size(), 2u);
  EXPECT_DOUBLE_EQ(t.per_thread_times[0], 0.075);
  EXPECT_DOUBLE_EQ(t.per_thread_times[1], 0.15);
  EXPECT_DOUBLE_EQ(t.seconds_per_iteration(), 0.15);
}

TEST(Benchmark, MeasuresKernel) {
  CsrMatrix m = generate({GeneratorKind::UniformRandom, 1000, 1000, 8000, 12});
  KernelOptions o;
  o.nthreads = 2;
  auto k = compose(KernelId{}, m, o);
  TimingResult t = benchmark(*k, 3, 16);
  EXPECT_EQ(t.run_rates.size(), 3u);
  EXPECT_GT(t.rate, 0.0);
  EXPECT_EQ(t.per_thread_times.size(), 2u);
  double lo = *std::min_element(t.run_rates.begin(), t.run_rates.end());
  double hi = *std::max_element(t.run_rates.begin(), t.run_rates.end());
  EXPECT_GE(t.rate, lo * (1 - 1e-12));
  EXPECT_LE(t.rate, hi * (1 + 1e-12));
}
