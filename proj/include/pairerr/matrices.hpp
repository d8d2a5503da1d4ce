// Copyright 2026 The pairerr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "pairerr/error.hpp"

namespace pairerr {

/// Raw single-order outcomes: entry (i, j) is +1 when i, placed first, was
/// preferred over j, and -1 otherwise. 0 marks an entry not yet observed.
class PreferenceMatrixY {
 public:
  explicit PreferenceMatrixY(std::size_t n) : n_(n), entries_(n * n, 0) {}

  std::size_t size() const { return n_; }
  int at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  bool has(std::size_t i, std::size_t j) const { return at(i, j) != 0; }

  void set(std::size_t i, std::size_t j, int outcome) {
    if (i >= n_ || j >= n_ || i == j) throw Error(ErrorCode::kInvalidInput, "Y index out of range or diagonal");
    if (outcome != 1 && outcome != -1) throw Error(ErrorCode::kInvalidInput, "Y entries are +1 or -1");
    entries_[i * n_ + j] = static_cast<std::int8_t>(outcome);
  }

  bool complete() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && !has(i, j)) return false;
    return true;
  }

  void require_complete() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && !has(i, j))
          throw Error(ErrorCode::kIncompleteMatrix,
                      "Y entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is unset");
  }

 private:
  std::size_t n_;
  std::vector<std::int8_t> entries_;
};

/// Antisymmetric matrix whose entries are averages of `trials` +/-1 outcomes,
/// stored exactly as integer numerators over the common denominator `trials`.
/// Entries therefore live on the grid (trials - 2m) / trials, m = 0..trials.
class SkewMatrix {
 public:
  SkewMatrix(std::size_t n, int trials) : n_(n), trials_(trials), num_(n * n, 0) {
    if (trials < 1) throw Error(ErrorCode::kInvalidInput, "denominator must be positive");
  }

  std::size_t size() const { return n_; }
  int denominator() const { return trials_; }
  int numerator(std::size_t i, std::size_t j) const { return num_[i * n_ + j]; }
  double value(std::size_t i, std::size_t j) const { return static_cast<double>(numerator(i, j)) / trials_; }

  /// Sets (i, j) and its mirror (j, i).
  void set_numerator(std::size_t i, std::size_t j, int numerator) {
    if (i >= n_ || j >= n_ || i == j) throw Error(ErrorCode::kInvalidInput, "matrix index out of range or diagonal");
    if (std::abs(numerator) > trials_ || (numerator + trials_) % 2 != 0)
      throw Error(ErrorCode::kInvalidInput, "numerator " + std::to_string(numerator) + " is off the grid for denominator " +
                                                std::to_string(trials_));
    num_[i * n_ + j] = numerator;
    num_[j * n_ + i] = -numerator;
  }

  bool antisymmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (num_[i * n_ + i] != 0) return false;
      for (std::size_t j = i + 1; j < n_; ++j)
        if (num_[i * n_ + j] != -num_[j * n_ + i]) return false;
    }
    return true;
  }

  /// Principal submatrix on the given indices, in the given order.
  SkewMatrix submatrix(const std::vector<std::size_t>& idx) const {
    SkewMatrix out(idx.size(), trials_);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) out.num_[a * idx.size() + b] = numerator(idx[a], idx[b]);
    return out;
  }

  bool operator==(const SkewMatrix&) const = default;

 private:
  std::size_t n_;
  int trials_;
  std::vector<int> num_;
};

/// Both-order consensus matrix: entries in {-1, 0, +1}. Stored with
/// denominator 2 so it shares its representation with a one-plus-one
/// repeated matrix.
class ConsensusMatrixZ : public SkewMatrix {
 public:
  explicit ConsensusMatrixZ(std::size_t n) : SkewMatrix(n, 2) {}

  int entry(std::size_t i, std::size_t j) const { return numerator(i, j) / 2; }
  void set_entry(std::size_t i, std::size_t j, int z) {
    if (z < -1 || z > 1) throw Error(ErrorCode::kInvalidInput, "Z entries are -1, 0 or +1");
    set_numerator(i, j, 2 * z);
  }
};

/// Repeated-comparison matrix built from k_plus trials with the lower index
/// placed first and k_minus trials with it placed second.
class RepeatedMatrixW : public SkewMatrix {
 public:
  RepeatedMatrixW(std::size_t n, int k_plus, int k_minus)
      : SkewMatrix(n, k_plus + k_minus), k_plus_(k_plus), k_minus_(k_minus) {
    if (k_plus < 1 || k_minus < 1) throw Error(ErrorCode::kInvalidInput, "k_plus and k_minus must be >= 1");
  }

  int k_plus() const { return k_plus_; }
  int k_minus() const { return k_minus_; }

 private:
  int k_plus_;
  int k_minus_;
};

/// Win counts: (i, j) is the number of trials, in either order, that i won.
class StrengthMatrixX {
 public:
  explicit StrengthMatrixX(std::size_t n) : n_(n), counts_(n * n, 0) {}

  std::size_t size() const { return n_; }
  long wins(std::size_t i, std::size_t j) const { return counts_[i * n_ + j]; }
  void set_wins(std::size_t i, std::size_t j, long count) {
    if (i >= n_ || j >= n_ || i == j) throw Error(ErrorCode::kInvalidInput, "X index out of range or diagonal");
    if (count < 0) throw Error(ErrorCode::kInvalidInput, "X counts are nonnegative");
    counts_[i * n_ + j] = count;
  }
  void add_win(std::size_t winner, std::size_t loser) { set_wins(winner, loser, wins(winner, loser) + 1); }

  long total_wins(std::size_t i) const {
    long s = 0;
    for (std::size_t j = 0; j < n_; ++j) s += wins(i, j);
    return s;
  }
  long total_losses(std::size_t i) const {
    long s = 0;
    for (std::size_t j = 0; j < n_; ++j) s += wins(j, i);
    return s;
  }

 private:
  std::size_t n_;
  std::vector<long> counts_;
};

}  // namespace pairerr
