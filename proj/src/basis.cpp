#include "ovgen/basis.hpp"

namespace ovgen {

PackedCode make_packed(int length) {
  if (length < 1) throw validation_error("packed code length must be >= 1");
  PackedCode pc;
  pc.length = length;
  pc.words.assign(static_cast<std::size_t>((length + 63) / 64), 0);
  return pc;
}

PackedCode pack_code(const std::vector<std::int8_t>& code) {
  if (code.empty()) throw validation_error("cannot pack an empty code");
  PackedCode pc = make_packed(static_cast<int>(code.size()));
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code[i] != 1 && code[i] != -1)
      throw validation_error("code entries must be +1 or -1");
    if (code[i] == -1) pc.set_bit(static_cast<int>(i), 1);
  }
  return pc;
}

std::vector<std::int8_t> unpack_code(const PackedCode& packed) {
  std::vector<std::int8_t> code(static_cast<std::size_t>(packed.length));
  for (int i = 0; i < packed.length; ++i)
    code[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(packed.entry(i));
  return code;
}

OvsfBasis build_basis(int order) {
  if (order < 0 || order > 16)
    throw config_error("basis order must be in [0, 16], got " + std::to_string(order));

  OvsfBasis basis;
  basis.order_ = order;
  basis.length_ = 1 << order;
  basis.rows_.assign(1, make_packed(1));  // H_0 = [+1]
  basis.rows_[0].length = 1;

  // Doubling step on the packed rows: each parent row r of length h yields
  // row r = r ++ r and row r+h = r ++ complement(r).
  for (int k = 1; k <= order; ++k) {
    int h = 1 << (k - 1);
    int len = 1 << k;
    std::vector<PackedCode> next(static_cast<std::size_t>(len));
    for (int r = 0; r < h; ++r) {
      const PackedCode& parent = basis.rows_[static_cast<std::size_t>(r)];
      PackedCode top = make_packed(len);
      PackedCode bottom = make_packed(len);
      for (int i = 0; i < h; ++i) {
        int b = parent.bit(i);
        top.set_bit(i, b);
        top.set_bit(i + h, b);
        bottom.set_bit(i, b);
        bottom.set_bit(i + h, b ^ 1);
      }
      next[static_cast<std::size_t>(r)] = std::move(top);
      next[static_cast<std::size_t>(r + h)] = std::move(bottom);
    }
    basis.rows_ = std::move(next);
  }
  return basis;
}

}  // namespace ovgen
