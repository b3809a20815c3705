#include "cdc/polycode.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "cdc/csv.hpp"

namespace cdc::polycode {
namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<Wide>(a) * b % n);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t n) {
  std::uint64_t result = 1 % n;
  a %= n;
  while (e > 0) {
    if (e & 1) result = mulmod(result, a, n);
    a = mulmod(a, a, n);
    e >>= 1;
  }
  return result;
}

std::uint64_t parse_u64(const std::string& cell, const char* what) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(fmt::format("{}: '{}' is not a non-negative integer", what, cell));
  }
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw std::invalid_argument(fmt::format("{}: unexpected end of input", what));
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are a proven witness set for all 64-bit inputs.
  constexpr std::array<std::uint64_t, 7> bases{2, 325, 9375, 28178, 450775, 9780504, 1795265022};
  for (std::uint64_t a : bases) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

PrimeField::PrimeField(std::uint64_t p) : p_(p) {
  if (p >= (1ULL << 63) || !is_prime(p)) {
    throw std::invalid_argument(fmt::format("field modulus {} is not a prime below 2^63", p));
  }
}

Element PrimeField::reduce(std::int64_t x) const {
  auto p = static_cast<std::int64_t>(p_);
  std::int64_t r = x % p;
  return static_cast<Element>(r < 0 ? r + p : r);
}

Element PrimeField::pow(Element a, std::uint64_t e) const { return powmod(a, e, p_); }

Element PrimeField::inv(Element a) const {
  if (a % p_ == 0) throw std::domain_error("field inverse of zero");
  return pow(a, p_ - 2);
}

FieldMatrix FieldMatrix::columns(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw std::out_of_range("FieldMatrix::columns: range exceeds width");
  FieldMatrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < count; ++j) out.at(i, j) = at(i, first + j);
  }
  return out;
}

FieldMatrix transpose_multiply(const FieldMatrix& a, const FieldMatrix& b,
                               const PrimeField& field) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument(fmt::format("transpose_multiply: {} rows vs {} rows", a.rows(),
                                            b.rows()));
  }
  FieldMatrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Element acc = 0;
      for (std::size_t k = 0; k < a.rows(); ++k) acc = field.add(acc, field.mul(a.at(k, i), b.at(k, j)));
      c.at(i, j) = acc;
    }
  }
  return c;
}

FieldMatrix random_matrix(std::size_t rows, std::size_t cols, const PrimeField& field, Rng& rng) {
  FieldMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rng.below(field.modulus());
  }
  return m;
}

std::size_t recovery_threshold(std::size_t m, std::size_t n) {
  if (m < 1 || n < 1) throw std::invalid_argument("recovery_threshold: m and n must be >= 1");
  return m * n;
}

std::vector<Element> default_eval_points(std::size_t count) {
  std::vector<Element> points(count);
  for (std::size_t i = 0; i < count; ++i) points[i] = i + 1;
  return points;
}

std::vector<Share> encode(const FieldMatrix& a, const FieldMatrix& b, std::size_t m,
                          std::size_t n, std::span<const Element> points,
                          const PrimeField& field) {
  recovery_threshold(m, n);
  if (a.rows() != b.rows()) throw std::invalid_argument("encode: A and B differ in row count");
  if (a.cols() % m != 0) {
    throw std::invalid_argument(fmt::format("encode: m = {} does not divide r = {}", m, a.cols()));
  }
  if (b.cols() % n != 0) {
    throw std::invalid_argument(fmt::format("encode: n = {} does not divide t = {}", n, b.cols()));
  }
  std::set<Element> seen;
  for (Element x : points) {
    if (x >= field.modulus()) throw std::invalid_argument("encode: eval point outside the field");
    if (!seen.insert(x).second) {
      throw std::invalid_argument(fmt::format("encode: duplicate eval point {}", x));
    }
  }

  std::size_t wa = a.cols() / m;
  std::size_t wb = b.cols() / n;
  std::vector<FieldMatrix> a_blocks, b_blocks;
  for (std::size_t j = 0; j < m; ++j) a_blocks.push_back(a.columns(j * wa, wa));
  for (std::size_t k = 0; k < n; ++k) b_blocks.push_back(b.columns(k * wb, wb));

  auto combine = [&](const std::vector<FieldMatrix>& blocks, Element x, std::uint64_t stride) {
    FieldMatrix out(blocks.front().rows(), blocks.front().cols());
    Element step = field.pow(x, stride);
    Element coeff = 1;
    for (const auto& block : blocks) {
      for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
          out.at(i, j) = field.add(out.at(i, j), field.mul(coeff, block.at(i, j)));
        }
      }
      coeff = field.mul(coeff, step);
    }
    return out;
  };

  std::vector<Share> shares;
  shares.reserve(points.size());
  for (Element x : points) {
    shares.push_back({{}, x, combine(a_blocks, x, 1), combine(b_blocks, x, m)});
  }
  return shares;
}

CodedResult local_compute(const Share& share, const PrimeField& field) {
  return {share.head, share.point, transpose_multiply(share.a, share.b, field)};
}

FieldMatrix decode(std::span<const CodedResult> results, std::size_t m, std::size_t n,
                   const PrimeField& field) {
  std::size_t K = recovery_threshold(m, n);
  if (results.size() < K) {
    throw DecodeError(fmt::format("decode: insufficient results ({} of {} needed)",
                                  results.size(), K));
  }
  auto used = results.first(K);
  std::size_t br = used.front().c.rows();
  std::size_t bc = used.front().c.cols();
  std::set<Element> seen;
  for (const auto& res : used) {
    if (!seen.insert(res.point % field.modulus()).second) {
      throw DecodeError(fmt::format("decode: repeated eval point {}", res.point));
    }
    if (res.c.rows() != br || res.c.cols() != bc) {
      throw DecodeError("decode: results differ in dimensions");
    }
  }

  // Master polynomial P(x) = prod (x - x_q), coefficients low to high.
  std::vector<Element> master{1};
  for (const auto& res : used) {
    std::vector<Element> next(master.size() + 1, 0);
    for (std::size_t d = 0; d < master.size(); ++d) {
      next[d + 1] = field.add(next[d + 1], master[d]);
      next[d] = field.sub(next[d], field.mul(master[d], res.point));
    }
    master = std::move(next);
  }

  // basis[l][d]: coefficient of x^d in the Lagrange polynomial of point l.
  std::vector<std::vector<Element>> basis(K, std::vector<Element>(K));
  for (std::size_t l = 0; l < K; ++l) {
    Element xl = used[l].point;
    // Synthetic division P(x) / (x - x_l).
    std::vector<Element> quotient(K);
    Element carry = 0;
    for (std::size_t d = K; d-- > 0;) {
      carry = field.add(master[d + 1], field.mul(carry, xl));
      quotient[d] = carry;
    }
    Element denom = 1;
    for (std::size_t q = 0; q < K; ++q) {
      if (q != l) denom = field.mul(denom, field.sub(xl, used[q].point));
    }
    Element scale = field.inv(denom);
    for (std::size_t d = 0; d < K; ++d) basis[l][d] = field.mul(quotient[d], scale);
  }

  FieldMatrix c(br * m, bc * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t d = j + k * m;
      for (std::size_t i = 0; i < br; ++i) {
        for (std::size_t q = 0; q < bc; ++q) {
          Element acc = 0;
          for (std::size_t l = 0; l < K; ++l) {
            acc = field.add(acc, field.mul(basis[l][d], used[l].c.at(i, q)));
          }
          c.at(j * br + i, k * bc + q) = acc;
        }
      }
    }
  }
  return c;
}

void write_matrix_csv(std::ostream& out, const FieldMatrix& matrix) {
  out << matrix.rows() << ',' << matrix.cols() << '\n';
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out << ',';
      out << matrix.at(i, j);
    }
    out << '\n';
  }
}

FieldMatrix read_matrix_csv(std::istream& in) {
  auto dims = split_csv_line(next_line(in, "matrix csv"));
  if (dims.size() != 2) throw std::invalid_argument("matrix csv: header must be rows,cols");
  std::size_t rows = parse_u64(dims[0], "matrix csv rows");
  std::size_t cols = parse_u64(dims[1], "matrix csv cols");
  FieldMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto cells = split_csv_line(next_line(in, "matrix csv"));
    if (cells.size() != cols) {
      throw std::invalid_argument(
          fmt::format("matrix csv: row {} has {} entries, expected {}", i + 1, cells.size(), cols));
    }
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = parse_u64(cells[j], "matrix csv entry");
  }
  return m;
}

std::string share_file_name(const Id& head) { return "share_" + head + ".csv"; }

void write_share_csv(std::ostream& out, const Share& share) {
  out << share.head << ',' << share.point << '\n';
  write_matrix_csv(out, share.a);
  write_matrix_csv(out, share.b);
}

Share read_share_csv(std::istream& in) {
  auto header = split_csv_line(next_line(in, "share csv"));
  if (header.size() != 2) throw std::invalid_argument("share csv: header must be head,point");
  Share s;
  s.head = header[0];
  s.point = parse_u64(header[1], "share csv point");
  s.a = read_matrix_csv(in);
  s.b = read_matrix_csv(in);
  return s;
}

}  // namespace cdc::polycode
