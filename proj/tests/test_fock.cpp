// Copyright 2026 The nlosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "nlo/fock.hpp"
#include "nlo/circuit.hpp"
#include "nlo/rng.hpp"

using namespace nlo;
using Catch::Approx;

namespace {

// Brute-force permanent over all n! permutations; the independent oracle.
cdouble permanent_naive(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  cdouble total(0.0);
  do {
    cdouble prod(1.0);
    for (int i = 0; i < n; ++i) prod *= m(i, perm[i]);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

Eigen::MatrixXcd random_complex(int n, DrawStream& stream) {
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      auto [a, b] = stream.normal_pair();
      m(r, c) = cdouble(a, b);
    }
  return m;
}

Eigen::MatrixXcd haar_unitary(int n, DrawStream& stream) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_complex(n, stream));
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    const cdouble d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

FockState make_state(std::initializer_list<int> counts) {
  return FockState::basis(std::vector<int>(counts));
}

Occupation occ(std::initializer_list<int> counts) {
  return Occupation::from_counts(std::vector<int>(counts));
}

}  // namespace

TEST_CASE("permanent: small fixed cases", "[fock]") {
  Eigen::MatrixXcd one(1, 1);
  one << 2.0;
  CHECK(permanent(one).real() == Approx(2.0));

  Eigen::MatrixXcd two(2, 2);
  two << 1, 1, 1, 1;
  CHECK(permanent(two).real() == Approx(2.0));

  CHECK(permanent(Eigen::MatrixXcd::Ones(3, 3)).real() == Approx(6.0));
  CHECK(permanent(Eigen::MatrixXcd(0, 0)) == cdouble(1.0));
}

TEST_CASE("permanent: rejects non-square input", "[fock]") {
  CHECK_THROWS_AS(permanent(Eigen::MatrixXcd::Ones(2, 3)),
                  std::invalid_argument);
}

TEST_CASE("permanent matches naive enumeration up to n = 7", "[fock]") {
  DrawStream stream(11, 0, 0);
  for (int n = 1; n <= 7; ++n) {
    const Eigen::MatrixXcd m = random_complex(n, stream);
    const cdouble fast = permanent(m);
    const cdouble slow = permanent_naive(m);
    CHECK(std::abs(fast - slow) <= 1e-10 * std::max(1.0, std::abs(slow)));
  }
}

TEST_CASE("evolve: phase shifter on a single photon", "[fock]") {
  const FockState in = make_state({1, 0});
  const std::array<int, 2> at{0, 1};
  const Eigen::MatrixXcd m =
      embed(ps_matrix(0.7).matrix(), std::span<const int>(at.data(), 1), 2);
  const FockState out = evolve(in, ModeTransfer::unchecked(m, false));
  CHECK(std::abs(out.amplitude(occ({1, 0})) - std::polar(1.0, 0.7)) < 1e-12);
}

TEST_CASE("evolve: Hong-Ou-Mandel through the 50:50 beam splitter", "[fock]") {
  const FockState out = evolve(make_state({1, 1}),
                               bs_matrix(std::numbers::pi / 2.0, 0.0));
  const cdouble expect = cdouble(0.0, 1.0) / std::numbers::sqrt2;
  CHECK(std::abs(out.amplitude(occ({2, 0})) - expect) < 1e-12);
  CHECK(std::abs(out.amplitude(occ({0, 2})) - expect) < 1e-12);
  // cos(pi/4) and sin(pi/4) differ by one ulp; the bunching probability is
  // zero far below any physical tolerance.
  CHECK(std::norm(out.amplitude(occ({1, 1}))) < 1e-24);
}

TEST_CASE("evolve: identity leaves any state unchanged", "[fock]") {
  FockState in(3);
  in.add(occ({1, 0, 1}), cdouble(0.6, 0.1));
  in.add(occ({0, 1, 1}), cdouble(0.0, -0.79));
  const FockState out =
      evolve(in, ModeTransfer::unitary(Eigen::MatrixXcd::Identity(3, 3)));
  in.terms().for_each([&](std::uint64_t key, cdouble amp) {
    CHECK(std::abs(out.terms().at(key) - amp) < 1e-12);
  });
  CHECK(out.term_count() == in.term_count());
}

TEST_CASE("evolve: photon number conservation and unitary norm", "[fock]") {
  DrawStream stream(21, 0, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const int modes = 2 + rep % 5;           // up to 6
    const int photons = 1 + rep % 4;         // up to 4
    std::vector<int> counts(modes, 0);
    for (int p = 0; p < photons; ++p)
      counts[static_cast<int>(stream.uniform() * modes)]++;
    const FockState in = FockState::basis(counts);
    const FockState out =
        evolve(in, ModeTransfer::unitary(haar_unitary(modes, stream)));
    CHECK(out.norm2() == Approx(1.0).margin(1e-10));
    out.terms().for_each([&](std::uint64_t key, cdouble) {
      CHECK(Occupation(key).total() == photons);
    });
  }
}

TEST_CASE("evolve: composition equals product of transfers", "[fock]") {
  DrawStream stream(31, 0, 0);
  const int modes = 4;
  const Eigen::MatrixXcd u1 = haar_unitary(modes, stream);
  const Eigen::MatrixXcd u2 = haar_unitary(modes, stream);
  const FockState in = make_state({1, 0, 2, 0});

  const FockState step =
      evolve(evolve(in, ModeTransfer::unchecked(u1, false)),
             ModeTransfer::unchecked(u2, false));
  const FockState direct =
      evolve(in, ModeTransfer::unchecked(u2 * u1, false));
  step.terms().for_each([&](std::uint64_t key, cdouble amp) {
    CHECK(std::abs(direct.terms().at(key) - amp) < 1e-10);
  });
}

TEST_CASE("evolve: photon cap guards runaway states", "[fock]") {
  const FockState in = make_state({9, 0});
  CHECK_THROWS_AS(evolve(in, bs_matrix(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("evolve: dimension mismatch", "[fock]") {
  CHECK_THROWS_AS(evolve(make_state({1, 0, 0}), bs_matrix(1.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("apply_pair agrees with embedded evolve", "[fock]") {
  DrawStream stream(41, 0, 0);
  const Eigen::MatrixXcd u = haar_unitary(2, stream);
  FockState state(4);
  state.add(occ({2, 1, 0, 1}), cdouble(0.5, 0.0));
  state.add(occ({1, 1, 1, 1}), cdouble(0.0, 0.5));
  state.add(occ({0, 0, 3, 1}), cdouble(-0.5, 0.5));

  FockState by_pair = state;
  FockState scratch(4);
  apply_pair(by_pair, 1, 2, pair_lifts(u, 4), scratch);

  const std::array<int, 2> at{1, 2};
  const FockState by_evolve = evolve(
      state, ModeTransfer::unchecked(
                 embed(u, std::span<const int>(at.data(), 2), 4), false));
  by_evolve.terms().for_each([&](std::uint64_t key, cdouble amp) {
    CHECK(std::abs(by_pair.terms().at(key) - amp) < 1e-10);
  });
  CHECK(by_pair.norm2() == Approx(by_evolve.norm2()).margin(1e-10));
}

TEST_CASE("scale_mode multiplies amplitudes by c^n", "[fock]") {
  FockState state(2);
  state.add(occ({2, 0}), cdouble(1.0));
  state.add(occ({1, 1}), cdouble(1.0));
  scale_mode(state, 0, cdouble(0.5, 0.0));
  CHECK(std::abs(state.amplitude(occ({2, 0})) - cdouble(0.25)) < 1e-15);
  CHECK(std::abs(state.amplitude(occ({1, 1})) - cdouble(0.5)) < 1e-15);
}

TEST_CASE("post_select: wildcard pattern keeps everything", "[fock]") {
  FockState state(3);
  const double r = 1.0 / std::numbers::sqrt2;
  state.add(occ({1, 0, 1}), r);
  state.add(occ({0, 1, 1}), r);
  const std::vector<std::optional<int>> pattern{std::nullopt, std::nullopt, 1};
  const PostSelectResult res = post_select(state, pattern);
  CHECK(res.probability == Approx(1.0));
  CHECK(res.state.mode_count() == 2);
  CHECK(std::abs(res.state.amplitude(occ({1, 0})) - r) < 1e-12);
  CHECK(std::abs(res.state.amplitude(occ({0, 1})) - r) < 1e-12);
}

TEST_CASE("post_select: exact constraint projects and reports weight", "[fock]") {
  FockState state(3);
  const double r = 1.0 / std::numbers::sqrt2;
  state.add(occ({1, 0, 1}), r);
  state.add(occ({0, 1, 1}), r);
  const std::vector<std::optional<int>> pattern{1, std::nullopt, std::nullopt};
  const PostSelectResult res = post_select(state, pattern);
  CHECK(res.probability == Approx(0.5));
  CHECK(res.state.mode_count() == 2);
  CHECK(std::abs(res.state.amplitude(occ({0, 1})) - r) < 1e-12);
  CHECK(res.state.term_count() == 1);
}

TEST_CASE("post_select: empty match gives zero probability", "[fock]") {
  FockState state(2);
  state.add(occ({1, 0}), cdouble(1.0));
  const std::vector<std::optional<int>> pattern{3, std::nullopt};
  const PostSelectResult res = post_select(state, pattern);
  CHECK(res.probability == 0.0);
  CHECK(res.state.term_count() == 0);
}

TEST_CASE("post_select: pattern length mismatch", "[fock]") {
  FockState state(2);
  const std::vector<std::optional<int>> pattern{std::nullopt};
  CHECK_THROWS_AS(post_select(state, pattern), std::invalid_argument);
}

TEST_CASE("dual_rail_decode: basis mapping and ordering", "[fock]") {
  FockState state(4);
  state.add(occ({1, 0, 0, 1}), cdouble(1.0));
  const std::vector<std::pair<int, int>> pairs{{0, 1}, {2, 3}};
  const DualRailDecoded dec = dual_rail_decode(state, pairs);
  CHECK(std::abs(dec.amplitudes(1) - cdouble(1.0)) < 1e-15);  // |01>
  CHECK(dec.discarded_weight == 0.0);
}

TEST_CASE("dual_rail_decode: outside the dual-rail subspace", "[fock]") {
  FockState state(4);
  state.add(occ({2, 0, 0, 0}), cdouble(1.0));
  const std::vector<std::pair<int, int>> pairs{{0, 1}, {2, 3}};
  const DualRailDecoded dec = dual_rail_decode(state, pairs);
  CHECK(dec.amplitudes.norm() == 0.0);
  CHECK(dec.discarded_weight == Approx(1.0));
}

TEST_CASE("dual_rail_decode: superposition decodes componentwise", "[fock]") {
  FockState state(4);
  const double r = 1.0 / std::numbers::sqrt2;
  state.add(occ({1, 0, 1, 0}), r);
  state.add(occ({0, 1, 0, 1}), r);
  const std::vector<std::pair<int, int>> pairs{{0, 1}, {2, 3}};
  const DualRailDecoded dec = dual_rail_decode(state, pairs);
  CHECK(std::abs(dec.amplitudes(0) - r) < 1e-12);
  CHECK(std::abs(dec.amplitudes(3) - r) < 1e-12);
  CHECK(std::abs(dec.amplitudes(1)) == 0.0);
}

TEST_CASE("dual_rail_decode: overlapping pairs rejected", "[fock]") {
  FockState state(4);
  state.add(occ({1, 0, 1, 0}), cdouble(1.0));
  const std::vector<std::pair<int, int>> pairs{{0, 1}, {1, 2}};
  CHECK_THROWS_AS(dual_rail_decode(state, pairs), std::invalid_argument);
}

TEST_CASE("ModeTransfer validation", "[fock]") {
  CHECK_THROWS_AS(ModeTransfer::unitary(Eigen::MatrixXcd::Ones(2, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ModeTransfer::subunitary(2.0 * Eigen::MatrixXcd::Ones(1, 1)),
                  std::invalid_argument);
  CHECK_NOTHROW(ModeTransfer::subunitary(0.5 * Eigen::MatrixXcd::Identity(2, 2)));
}

TEST_CASE("FockState: mixed photon numbers are detected", "[fock]") {
  FockState state(2);
  state.add(occ({1, 0}), cdouble(0.5));
  state.add(occ({1, 1}), cdouble(0.5));
  CHECK_THROWS_AS(state.total_photons(), std::runtime_error);
}
