// Sylvester-Hadamard (OVSF) code sets and bit-packed code words.
//
// Codes are +/-1 vectors; packed form stores bit i = (1 - entry_i) / 2 with
// LSB-first ordering, so 0 encodes +1 and 1 encodes -1. Multi-word storage
// covers lengths beyond 64.
#pragma once

#include <cstdint>
#include <vector>

#include "ovgen/common.hpp"

namespace ovgen {

struct PackedCode {
  std::vector<std::uint64_t> words;
  int length = 0;

  int bit(int i) const {
    return static_cast<int>((words[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u);
  }
  void set_bit(int i, int value) {
    std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value)
      words[static_cast<std::size_t>(i) >> 6] |= mask;
    else
      words[static_cast<std::size_t>(i) >> 6] &= ~mask;
  }
  // +1 or -1 at position i.
  int entry(int i) const { return bit(i) ? -1 : 1; }
};

PackedCode make_packed(int length);  // all-zero bits (all +1)
PackedCode pack_code(const std::vector<std::int8_t>& code);
std::vector<std::int8_t> unpack_code(const PackedCode& packed);

// Rows of the order-n Sylvester-Hadamard matrix, kept bit-packed.
// Row 0 is all-ones; dot(B_i, B_j) = L when i == j and 0 otherwise.
// Immutable after construction; safe to share across threads.
class OvsfBasis {
 public:
  int order() const { return order_; }
  int length() const { return length_; }

  // +1 / -1 entry of row i, column j.
  int entry(int row, int col) const { return rows_[row].entry(col); }
  const PackedCode& packed_row(int row) const { return rows_[row]; }
  std::vector<std::int8_t> row(int row) const { return unpack_code(rows_[row]); }

 private:
  friend OvsfBasis build_basis(int order);
  int order_ = 0;
  int length_ = 1;
  std::vector<PackedCode> rows_;
};

// Sylvester recursion H_0 = [1], H_k = [[H, H], [H, -H]].
// Accepts 0 <= n <= 16; the dense matrix is only ever materialized row by row.
OvsfBasis build_basis(int order);

}  // namespace ovgen
