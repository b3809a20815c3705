#pragma once

// Polynomial-coded matrix multiplication C = A^T B over a prime field.
//
// A (s x r) is split column-wise into A_0..A_{m-1} and B (s x t) into
// B_0..B_{n-1}. Head i receives
//
//   A~_i = sum_j A_j x_i^j,   B~_i = sum_k B_k x_i^{k m}
//
// so that A~_i^T B~_i evaluates a degree mn-1 matrix polynomial whose
// coefficient j + k m is the block A_j^T B_k of C. Any mn results recover C.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdc/model.hpp"
#include "cdc/numeric.hpp"

namespace cdc::polycode {

using Element = std::uint64_t;
__extension__ using Wide = unsigned __int128;

/// Deterministic Miller-Rabin for 64-bit integers.
bool is_prime(std::uint64_t n);

class PrimeField {
 public:
  /// Throws std::invalid_argument unless p is a prime below 2^63.
  explicit PrimeField(std::uint64_t p = 2147483647ULL);

  std::uint64_t modulus() const { return p_; }

  Element reduce(std::int64_t x) const;
  Element add(Element a, Element b) const {
    Element s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  Element sub(Element a, Element b) const { return a >= b ? a - b : a + p_ - b; }
  Element neg(Element a) const { return a == 0 ? 0 : p_ - a; }
  Element mul(Element a, Element b) const {
    return static_cast<Element>(static_cast<Wide>(a) * b % p_);
  }
  Element pow(Element a, std::uint64_t e) const;
  /// Throws std::domain_error for 0.
  Element inv(Element a) const;

 private:
  std::uint64_t p_;
};

/// Dense row-major matrix of field elements.
class FieldMatrix {
 public:
  FieldMatrix() = default;
  FieldMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Element& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Element at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const Element> data() const { return data_; }

  /// Columns [first, first + count).
  FieldMatrix columns(std::size_t first, std::size_t count) const;

  bool operator==(const FieldMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Element> data_;
};

/// a^T b.
FieldMatrix transpose_multiply(const FieldMatrix& a, const FieldMatrix& b, const PrimeField& field);

FieldMatrix random_matrix(std::size_t rows, std::size_t cols, const PrimeField& field, Rng& rng);

struct Share {
  Id head;
  Element point = 0;
  FieldMatrix a;  // s x r/m
  FieldMatrix b;  // s x t/n

  bool operator==(const Share&) const = default;
};

struct CodedResult {
  Id head;
  Element point = 0;
  FieldMatrix c;  // r/m x t/n

  bool operator==(const CodedResult&) const = default;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// m n.
std::size_t recovery_threshold(std::size_t m, std::size_t n);

/// 1, 2, ..., count.
std::vector<Element> default_eval_points(std::size_t count);

/// One share per evaluation point; share heads are left empty for the caller.
std::vector<Share> encode(const FieldMatrix& a, const FieldMatrix& b, std::size_t m,
                          std::size_t n, std::span<const Element> points,
                          const PrimeField& field);

CodedResult local_compute(const Share& share, const PrimeField& field);

/// Interpolates from the first m n results. Throws DecodeError with
/// "insufficient results" below the threshold and on repeated points.
FieldMatrix decode(std::span<const CodedResult> results, std::size_t m, std::size_t n,
                   const PrimeField& field);

/// Dims header row "rows,cols", then one row per line.
void write_matrix_csv(std::ostream& out, const FieldMatrix& matrix);
FieldMatrix read_matrix_csv(std::istream& in);

/// share_<head>.csv: "head,point" header row, then A~ and B~ in matrix CSV form.
std::string share_file_name(const Id& head);
void write_share_csv(std::ostream& out, const Share& share);
Share read_share_csv(std::istream& in);

}  // namespace cdc::polycode
