#include <catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "renorm/besov.hpp"
#include "renorm/littlewood_paley.hpp"

using namespace renorm;
using Catch::Approx;

TEST_CASE("block count covers the whole discrete spectrum") {
  CHECK(max_block_index(Grid(1, 256)) == 7);
  CHECK(max_block_index(Grid(2, 128)) == 7);
  CHECK(max_block_index(Grid(2, 64)) == 6);
}

TEST_CASE("partition of unity holds on the grid") {
  for (auto g : {Grid(1, 256), Grid(2, 128), Grid(2, 32)}) CHECK(partition_of_unity_defect(g) <= 1e-15);
}

TEST_CASE("dyadic cutoff supports") {
  for (double r : {0.0, 0.49, 2.0, 3.0}) CHECK(DyadicCutoff::phi(r) == 0.0);
  CHECK(DyadicCutoff::phi(1.0) == 1.0);
  for (int k = 0; k < 6; ++k) {
    CHECK(DyadicCutoff::weight(k, std::ldexp(1.0, k - 1) * 0.999) == 0.0);
    CHECK(DyadicCutoff::weight(k, std::ldexp(1.0, k + 1) * 1.001) == 0.0);
  }
}

TEST_CASE("reconstruction is exact for mean-zero fields") {
  for (auto g : {Grid(1, 256), Grid(2, 64)}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto f = oracle::random_field(g, seed);
      const auto dec = decompose(f);
      CHECK(dec.blocks.size() == static_cast<std::size_t>(max_block_index(g) + 1));
      CHECK(lp_norm(reconstruct(dec) - f, 2.0) <= 1e-12 * lp_norm(f, 2.0));
    }
  }
}

TEST_CASE("single mode block is the cutoff weight times the mode") {
  const Grid g(1, 256);
  const Wavevector xi{12, 0};
  const auto f = single_mode(g, xi, 1.0, 0.3);
  for (int k = 0; k <= max_block_index(g); ++k) {
    const double v = DyadicCutoff::weight(k, 12.0);
    CHECK(oracle::max_abs_diff(dyadic_block(f, k), f * v) < 1e-14);
  }
}

TEST_CASE("block index outside the grid range is a resolution error") {
  const Grid g(1, 64);
  const auto f = single_mode(g, {1, 0});
  CHECK_THROWS_AS(dyadic_block(f, -1), ResolutionError);
  CHECK_THROWS_AS(dyadic_block(f, max_block_index(g) + 1), ResolutionError);
}

TEST_CASE("reconstruction rejects inconsistent decompositions") {
  const Grid g(1, 64);
  auto a = decompose(oracle::random_field(g, 1));
  const auto b = decompose(oracle::random_field(g, 2));
  auto mixed = a;
  mixed.blocks[2] = b.blocks[2];
  CHECK_THROWS_AS(reconstruct(mixed), ConsistencyError);
  auto missing = a;
  missing.blocks.pop_back();
  CHECK_THROWS_AS(reconstruct(missing), ConsistencyError);
  auto swapped = a;
  std::swap(swapped.blocks[0], swapped.blocks[1]);
  CHECK_THROWS_AS(reconstruct(swapped), ConsistencyError);
  CHECK_THROWS_AS(reconstruct(DyadicDecomposition{}), ConsistencyError);
}

TEST_CASE("Besov norm of a single mode") {
  const Grid g(1, 256);
  const auto f = single_mode(g, {16, 0});
  // |xi| = 16 sits exactly on lambda_4, where only phi_4 is nonzero
  const auto r = besov_norm_lp(f, 0.5, 2.0);
  CHECK(r.argmax_block == 4);
  CHECK(r.value == Approx(4.0 * std::sqrt(0.5)).epsilon(1e-13));
  CHECK_FALSE(r.alpha_out_of_range);
  CHECK(besov_norm_lp(f, 1.5, 2.0).alpha_out_of_range);
}

TEST_CASE("Besov LP norm needs mean-zero input") {
  const Grid g(1, 64);
  CHECK_THROWS_AS(besov_norm_lp(ScalarField::constant(g, 1.0) + single_mode(g, {2, 0}), 0.5, 2.0), PreconditionError);
  CHECK(besov_norm_lp(ScalarField::zeros(g), 0.5, 2.0).value == 0.0);
}

TEST_CASE("Besov LP norm is homogeneous and nondecreasing in alpha") {
  const Grid g(2, 64);
  const auto f = oracle::random_field(g, 3);
  const double a = besov_norm_lp(f, 0.4, 3.0).value;
  CHECK(besov_norm_lp(f * 2.5, 0.4, 3.0).value == Approx(2.5 * a).epsilon(1e-13));
  CHECK(besov_norm_lp(f, 0.6, 3.0).value >= a);
}

TEST_CASE("lacunary field has matching block norms") {
  const Grid g(1, 1024);
  const double alpha = 0.4;
  const auto f = synth_lacunary(g, alpha, 7, 2);
  const auto r = besov_norm_lp(f, alpha, 2.0);
  // every octave k >= 1 carries weighted norm sqrt(1/2), since 2^k sits on lambda_k
  for (int k = 1; k <= 7; ++k) CHECK(r.profile[static_cast<std::size_t>(k)].weighted_norm == Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("embedding check compares the two Besov norms") {
  const Grid g(1, 512);
  const auto f = synth_lacunary(g, 0.6, 7, 1);
  const auto e = embedding_check(f, 2.0, 4.0, 0.6);
  CHECK(e.target_alpha == Approx(0.6 - 0.25));
  CHECK(e.ratio > 0.0);
  CHECK(embedding_check(f, 3.0, 3.0, 0.6).ratio == Approx(1.0));
  CHECK_THROWS_AS(embedding_check(f, 4.0, 2.0, 0.6), ArgumentError);
  CHECK(embedding_check(ScalarField::zeros(g), 2.0, 4.0, 0.6).ratio == 0.0);
}

TEST_CASE("block profile CSV columns") {
  const Grid g(1, 64);
  std::ostringstream os;
  write_block_profile_csv(os, besov_norm_lp(single_mode(g, {4, 0}), 0.5, 2.0));
  CHECK(os.str().rfind("k,lambda_k,block_lp_norm,weighted_norm\n0,1,", 0) == 0);
}
