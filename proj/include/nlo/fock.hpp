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

#pragma once

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nlo {

using cdouble = std::complex<double>;

/// Photon budget guard for exact evolution; circuits beyond this are refused.
inline constexpr int kDefaultPhotonCap = 8;

// ---------------------------------------------------------------------------
// Occupation: photon counts per mode, nibble-packed into 64 bits.
// Supports up to 16 modes with up to 15 photons each, which comfortably
// covers the 14-mode MBQC circuits at the default photon cap.
// ---------------------------------------------------------------------------
class Occupation {
 public:
  static constexpr int kMaxModes = 16;
  static constexpr int kMaxCount = 15;

  Occupation() = default;
  explicit Occupation(std::uint64_t packed) : bits_(packed) {}

  static Occupation from_counts(std::span<const int> counts) {
    if (counts.size() > static_cast<std::size_t>(kMaxModes))
      throw std::invalid_argument("Occupation: more than 16 modes");
    Occupation occ;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] < 0 || counts[i] > kMaxCount)
        throw std::invalid_argument("Occupation: count out of range");
      occ.set(static_cast<int>(i), counts[i]);
    }
    return occ;
  }

  int count(int mode) const {
    return static_cast<int>((bits_ >> (4 * mode)) & 0xFull);
  }

  void set(int mode, int n) {
    bits_ = (bits_ & ~(0xFull << (4 * mode))) |
            (static_cast<std::uint64_t>(n) << (4 * mode));
  }

  Occupation with(int mode, int n) const {
    Occupation o = *this;
    o.set(mode, n);
    return o;
  }

  /// Total photon number (sums every nibble; unused modes hold zero).
  int total() const {
    const std::uint64_t m = 0x0F0F0F0F0F0F0F0Full;
    const std::uint64_t byte_sums = (bits_ & m) + ((bits_ >> 4) & m);
    return static_cast<int>((byte_sums * 0x0101010101010101ull) >> 56);
  }

  std::vector<int> counts(int mode_count) const {
    std::vector<int> c(mode_count);
    for (int i = 0; i < mode_count; ++i) c[i] = count(i);
    return c;
  }

  std::uint64_t packed() const { return bits_; }
  bool operator==(const Occupation&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// AmplitudeMap: open-addressing accumulate-map from packed occupations to
// complex amplitudes. This is the hot data structure of the trajectory
// engine; iteration order is a deterministic function of the insert history.
// ---------------------------------------------------------------------------
class AmplitudeMap {
 public:
  struct Slot {
    std::uint64_t key;
    cdouble amp;
  };
  // All-ones is not a reachable occupation at the photon cap.
  static constexpr std::uint64_t kEmptyKey = ~0ull;

  AmplitudeMap() { rehash(32); }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void clear() {
    for (Slot& s : slots_) s.key = kEmptyKey;
    size_ = 0;
  }

  void reserve(std::size_t n) {
    if (2 * n > slots_.size()) rehash(std::bit_ceil(2 * n));
  }

  void add(std::uint64_t key, cdouble amp) {
    Slot& s = locate(key);
    if (s.key == kEmptyKey) {
      s.key = key;
      s.amp = amp;
      ++size_;
      if (10 * size_ >= 7 * slots_.size()) rehash(2 * slots_.size());
    } else {
      s.amp += amp;
    }
  }

  cdouble at(std::uint64_t key) const {
    const Slot& s = const_cast<AmplitudeMap*>(this)->locate(key);
    return s.key == kEmptyKey ? cdouble(0.0) : s.amp;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const Slot& s : slots_)
      if (s.key != kEmptyKey) f(s.key, s.amp);
  }

  template <class F>
  void for_each_mut(F&& f) {
    for (Slot& s : slots_)
      if (s.key != kEmptyKey) f(s.key, s.amp);
  }

 private:
  static std::uint64_t hash(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  Slot& locate(std::uint64_t key) {
    const std::size_t mask = slots_.size() - 1;
    std::size_t i = hash(key) & mask;
    while (slots_[i].key != key && slots_[i].key != kEmptyKey)
      i = (i + 1) & mask;
    return slots_[i];
  }

  void rehash(std::size_t cap) {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(cap, Slot{kEmptyKey, cdouble(0.0)});
    size_ = 0;
    for (const Slot& s : old)
      if (s.key != kEmptyKey) add(s.key, s.amp);
  }

  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// FockState: sparse complex superposition over occupations of a fixed mode
// count. Evolution under any mode transfer conserves total photon number;
// loss shows up as norm decay, never as photon removal.
// ---------------------------------------------------------------------------
class FockState {
 public:
  explicit FockState(int mode_count) : mode_count_(mode_count) {
    if (mode_count < 0 || mode_count > Occupation::kMaxModes)
      throw std::invalid_argument("FockState: bad mode count");
  }

  static FockState basis(std::span<const int> counts) {
    FockState st(static_cast<int>(counts.size()));
    st.add(Occupation::from_counts(counts), cdouble(1.0));
    return st;
  }

  int mode_count() const { return mode_count_; }
  std::size_t term_count() const { return terms_.size(); }
  const AmplitudeMap& terms() const { return terms_; }
  AmplitudeMap& terms() { return terms_; }

  void add(const Occupation& occ, cdouble amp) { terms_.add(occ.packed(), amp); }

  cdouble amplitude(const Occupation& occ) const { return terms_.at(occ.packed()); }

  double norm2() const {
    double n = 0.0;
    terms_.for_each([&](std::uint64_t, cdouble a) { n += std::norm(a); });
    return n;
  }

  /// Total photon number shared by all terms; throws if terms disagree.
  std::optional<int> total_photons() const {
    std::optional<int> n;
    terms_.for_each([&](std::uint64_t key, cdouble) {
      const int t = Occupation(key).total();
      if (!n)
        n = t;
      else if (*n != t)
        throw std::runtime_error("FockState: mixed photon numbers");
    });
    return n;
  }

 private:
  int mode_count_;
  AmplitudeMap terms_;
};

// ---------------------------------------------------------------------------
// ModeTransfer: complex m-by-m matrix acting on creation operators as
// a_j^dag -> sum_i M_ij a_i^dag. Unitary for lossless networks; sub-unitary
// after a virtual loss mode has been traced out.
// ---------------------------------------------------------------------------
class ModeTransfer {
 public:
  static constexpr double kUnitaryTol = 1e-10;

  static ModeTransfer unitary(Eigen::MatrixXcd m) {
    require_square(m);
    const double dev =
        (m * m.adjoint() - Eigen::MatrixXcd::Identity(m.rows(), m.rows()))
            .cwiseAbs()
            .maxCoeff();
    if (dev > kUnitaryTol)
      throw std::invalid_argument("ModeTransfer: matrix is not unitary");
    return ModeTransfer(std::move(m), false);
  }

  static ModeTransfer subunitary(Eigen::MatrixXcd m) {
    require_square(m);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    if (svd.singularValues().maxCoeff() > 1.0 + kUnitaryTol)
      throw std::invalid_argument(
          "ModeTransfer: singular values exceed 1");
    return ModeTransfer(std::move(m), true);
  }

  /// Unvalidated constructor for analytically-exact internal constructions.
  static ModeTransfer unchecked(Eigen::MatrixXcd m, bool subunitary) {
    require_square(m);
    return ModeTransfer(std::move(m), subunitary);
  }

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  bool is_subunitary() const { return subunitary_; }
  int modes() const { return static_cast<int>(matrix_.rows()); }

 private:
  ModeTransfer(Eigen::MatrixXcd m, bool sub)
      : matrix_(std::move(m)), subunitary_(sub) {}

  static void require_square(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols())
      throw std::invalid_argument("ModeTransfer: matrix must be square");
  }

  Eigen::MatrixXcd matrix_;
  bool subunitary_;
};

// ---------------------------------------------------------------------------
// Permanent, Ryser's formula with Gray-code row-sum updates: O(2^n n).
// ---------------------------------------------------------------------------
inline cdouble permanent(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("permanent: matrix must be square");
  const int n = static_cast<int>(m.rows());
  if (n == 0) return cdouble(1.0);
  if (n > 24) throw std::invalid_argument("permanent: matrix too large");

  std::array<cdouble, 24> row_sum{};
  cdouble total(0.0);
  for (std::uint64_t k = 1; k < (1ull << n); ++k) {
    const int bit = std::countr_zero(k);
    const std::uint64_t gray = k ^ (k >> 1);
    const double sgn_col = (gray >> bit) & 1 ? 1.0 : -1.0;
    for (int r = 0; r < n; ++r) row_sum[r] += sgn_col * m(r, bit);
    cdouble prod(1.0);
    for (int r = 0; r < n; ++r) prod *= row_sum[r];
    const int ones = std::popcount(gray);
    total += ((n - ones) % 2 ? -1.0 : 1.0) * prod;
  }
  return total;
}

namespace detail {

inline const std::array<double, 16>& factorials() {
  static const std::array<double, 16> f = [] {
    std::array<double, 16> t{};
    t[0] = 1.0;
    for (int i = 1; i < 16; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return f;
}

/// Integer power by repeated multiplication; ipow(0, 0) == 1.
inline cdouble ipow(cdouble base, int n) {
  cdouble r(1.0);
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

/// All occupations of `total` photons over `modes` modes, lexicographic.
inline void enumerate_occupations(int modes, int total,
                                  std::vector<Occupation>& out) {
  Occupation occ;
  auto rec = [&](auto&& self, int mode, int remaining) -> void {
    if (mode == modes - 1) {
      occ.set(mode, remaining);
      out.push_back(occ);
      occ.set(mode, 0);
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      occ.set(mode, n);
      self(self, mode + 1, remaining - n);
    }
    occ.set(mode, 0);
  };
  if (modes == 0) {
    if (total == 0) out.push_back(occ);
    return;
  }
  rec(rec, 0, total);
}

inline std::size_t compositions(int modes, int total) {
  // C(total + modes - 1, modes - 1)
  long double v = 1.0L;
  for (int i = 1; i < modes; ++i)
    v = v * (total + i) / i;
  return static_cast<std::size_t>(v + 0.5L);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact Fock-space evolution. The amplitude taking occupation n to n' is
// Per(M[n', n]) / sqrt(prod n_k! prod n'_k!), with row i of M repeated n'_i
// times and column j repeated n_j times. Photon number is conserved; the
// norm is non-increasing for sub-unitary transfers.
// ---------------------------------------------------------------------------
inline FockState evolve(const FockState& state, const ModeTransfer& m,
                        int photon_cap = kDefaultPhotonCap) {
  if (m.modes() != state.mode_count())
    throw std::invalid_argument("evolve: dimension mismatch");
  FockState out(state.mode_count());
  if (state.term_count() == 0) return out;
  const int photons = state.total_photons().value();
  if (photons > photon_cap)
    throw std::invalid_argument("evolve: photon number exceeds cap");
  if (photons == 0) {
    // Vacuum is invariant under any passive network.
    state.terms().for_each(
        [&](std::uint64_t k, cdouble a) { out.terms().add(k, a); });
    return out;
  }
  const int modes = state.mode_count();
  if (detail::compositions(modes, photons) > 2'000'000u)
    throw std::invalid_argument("evolve: output basis too large");

  std::vector<Occupation> outputs;
  detail::enumerate_occupations(modes, photons, outputs);
  out.terms().reserve(outputs.size());

  const auto& fact = detail::factorials();
  Eigen::MatrixXcd sub(photons, photons);
  std::vector<int> col_modes(photons);

  state.terms().for_each([&](std::uint64_t key, cdouble amp) {
    const Occupation in(key);
    int c = 0;
    double in_fact = 1.0;
    for (int j = 0; j < modes; ++j) {
      const int nj = in.count(j);
      in_fact *= fact[nj];
      for (int r = 0; r < nj; ++r) col_modes[c++] = j;
    }
    for (const Occupation& target : outputs) {
      int r = 0;
      double out_fact = 1.0;
      for (int i = 0; i < modes; ++i) {
        const int ni = target.count(i);
        out_fact *= fact[ni];
        for (int k = 0; k < ni; ++k) {
          for (int q = 0; q < photons; ++q)
            sub(r, q) = m.matrix()(i, col_modes[q]);
          ++r;
        }
      }
      const cdouble per = permanent(sub);
      if (per != cdouble(0.0))
        out.add(target, amp * per / std::sqrt(in_fact * out_fact));
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Fast local updates used by the trajectory engine. These agree with
// evolve() on the corresponding embedded transfer (covered by tests).
// ---------------------------------------------------------------------------

/// Scales every term by c^n where n is its photon count on `mode`.
inline void scale_mode(FockState& state, int mode, cdouble c) {
  std::array<cdouble, Occupation::kMaxCount + 1> pow;
  pow[0] = cdouble(1.0);
  for (int i = 1; i <= Occupation::kMaxCount; ++i) pow[i] = pow[i - 1] * c;
  state.terms().for_each_mut([&](std::uint64_t key, cdouble& amp) {
    amp *= pow[Occupation(key).count(mode)];
  });
}

/// Lifts of a 2x2 transfer onto the s-photon sectors of a mode pair,
/// s = 0..max_total. lifts[s](k', k) maps input (k, s-k) to output (k', s-k'),
/// k counted on the first mode of the pair.
inline std::vector<Eigen::MatrixXcd> pair_lifts(const Eigen::Matrix2cd& a,
                                                int max_total) {
  const auto& fact = detail::factorials();
  std::vector<Eigen::MatrixXcd> lifts(max_total + 1);
  std::vector<cdouble> p0(max_total + 1), p1(max_total + 1),
      prod(max_total + 1);
  for (int s = 0; s <= max_total; ++s) {
    Eigen::MatrixXcd l(s + 1, s + 1);
    for (int k = 0; k <= s; ++k) {
      const int nq = s - k;
      // (a00 x + a10 y)^k coefficients on x^i y^(k-i)
      for (int i = 0; i <= k; ++i)
        p0[i] = fact[k] / (fact[i] * fact[k - i]) * detail::ipow(a(0, 0), i) *
                detail::ipow(a(1, 0), k - i);
      for (int j = 0; j <= nq; ++j)
        p1[j] = fact[nq] / (fact[j] * fact[nq - j]) * detail::ipow(a(0, 1), j) *
                detail::ipow(a(1, 1), nq - j);
      std::fill(prod.begin(), prod.begin() + s + 1, cdouble(0.0));
      for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= nq; ++j) prod[i + j] += p0[i] * p1[j];
      const double in_norm = std::sqrt(fact[k] * fact[nq]);
      for (int kp = 0; kp <= s; ++kp)
        l(kp, k) = prod[kp] * std::sqrt(fact[kp] * fact[s - kp]) / in_norm;
    }
    lifts[s] = std::move(l);
  }
  return lifts;
}

/// Applies a 2x2 transfer on (mode_a, mode_b) using precomputed lifts.
/// `scratch` is reused across calls to avoid reallocation.
inline void apply_pair(FockState& state, int mode_a, int mode_b,
                       std::span<const Eigen::MatrixXcd> lifts,
                       FockState& scratch) {
  scratch.terms().clear();
  scratch.terms().reserve(2 * state.term_count() + 16);
  state.terms().for_each([&](std::uint64_t key, cdouble amp) {
    const Occupation in(key);
    const int k = in.count(mode_a);
    const int s = k + in.count(mode_b);
    const Eigen::MatrixXcd& l = lifts[s];
    for (int kp = 0; kp <= s; ++kp) {
      const cdouble w = l(kp, k);
      if (w == cdouble(0.0)) continue;
      scratch.add(in.with(mode_a, kp).with(mode_b, s - kp), amp * w);
    }
  });
  std::swap(state, scratch);
}

// ---------------------------------------------------------------------------
// Postselection: keep terms matching every exact-count constraint, drop the
// constrained modes, and report the kept squared norm. The returned state is
// deliberately not renormalized; the caller decides.
// ---------------------------------------------------------------------------
struct PostSelectResult {
  FockState state;
  double probability;
};

inline PostSelectResult post_select(
    const FockState& state, std::span<const std::optional<int>> pattern) {
  if (static_cast<int>(pattern.size()) != state.mode_count())
    throw std::invalid_argument("post_select: pattern length mismatch");
  std::vector<int> kept_modes;
  for (int i = 0; i < state.mode_count(); ++i)
    if (!pattern[i]) kept_modes.push_back(i);

  PostSelectResult res{FockState(static_cast<int>(kept_modes.size())), 0.0};
  state.terms().for_each([&](std::uint64_t key, cdouble amp) {
    const Occupation in(key);
    for (int i = 0; i < state.mode_count(); ++i)
      if (pattern[i] && in.count(i) != *pattern[i]) return;
    Occupation out;
    for (std::size_t j = 0; j < kept_modes.size(); ++j)
      out.set(static_cast<int>(j), in.count(kept_modes[j]));
    res.state.add(out, amp);
    res.probability += std::norm(amp);
  });
  return res;
}

// ---------------------------------------------------------------------------
// Dual-rail decoding. Logical |0> is occupation (1,0) on the qubit's mode
// pair and |1> is (0,1); qubit 0 is the most significant bit. Terms outside
// the dual-rail subspace are dropped and their squared weight reported.
// ---------------------------------------------------------------------------
struct DualRailDecoded {
  Eigen::VectorXcd amplitudes;
  double discarded_weight;
};

inline DualRailDecoded dual_rail_decode(
    const FockState& state, std::span<const std::pair<int, int>> pairs) {
  std::vector<bool> used(state.mode_count(), false);
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= state.mode_count() || b >= state.mode_count())
      throw std::invalid_argument("dual_rail_decode: mode out of range");
    if (used[a] || used[b] || a == b)
      throw std::invalid_argument("dual_rail_decode: overlapping pairs");
    used[a] = used[b] = true;
  }
  for (int i = 0; i < state.mode_count(); ++i)
    if (!used[i])
      throw std::invalid_argument("dual_rail_decode: unmapped mode");

  const int q_count = static_cast<int>(pairs.size());
  DualRailDecoded res{Eigen::VectorXcd::Zero(std::int64_t(1) << q_count), 0.0};
  state.terms().for_each([&](std::uint64_t key, cdouble amp) {
    const Occupation occ(key);
    std::int64_t index = 0;
    for (int q = 0; q < q_count; ++q) {
      const int n0 = occ.count(pairs[q].first);
      const int n1 = occ.count(pairs[q].second);
      if (n0 == 1 && n1 == 0) {
        index = index << 1;
      } else if (n0 == 0 && n1 == 1) {
        index = (index << 1) | 1;
      } else {
        res.discarded_weight += std::norm(amp);
        return;
      }
    }
    res.amplitudes(index) += amp;
  });
  return res;
}

}  // namespace nlo
