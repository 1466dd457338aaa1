#include "dimlab/cantor_example.hpp"

#include <functional>

namespace dimlab {

const char* function_name(DigitFunction fn) {
  switch (fn) {
    case DigitFunction::OddDigits: return "f";
    case DigitFunction::EvenDigits: return "g";
    case DigitFunction::Sum: return "f+g";
  }
  return "?";
}

DigitFunction parse_function(const std::string& s) {
  if (s == "f" || s == "odd") return DigitFunction::OddDigits;
  if (s == "g" || s == "even") return DigitFunction::EvenDigits;
  if (s == "f+g" || s == "sum") return DigitFunction::Sum;
  throw InvalidArgument("unknown digit function '" + s + "' (expected f, g or f+g)");
}

Rational eval(DigitFunction fn, const DigitVector& v) {
  if (v.depth() == 0) throw InvalidArgument("eval: digit vector must have depth at least 1");
  Rational f = 0, g = 0, w = 1;
  for (std::size_t i = 0; i < v.depth(); i += 2) {
    w /= 3;
    f += w * v.digits[i];
    if (i + 1 < v.depth()) g += w * v.digits[i + 1];
  }
  switch (fn) {
    case DigitFunction::OddDigits: return f;
    case DigitFunction::EvenDigits: return g;
    case DigitFunction::Sum: return f + g;
  }
  return 0;
}

namespace {

void check_depth(int depth, int limit, const char* who) {
  if (depth < 0) throw InvalidArgument(std::string(who) + ": negative depth");
  if (limit > 40) throw InvalidArgument(std::string(who) + ": enumeration limit above 40 is not supported");
  if (depth > limit)
    throw LimitExceeded(std::string(who) + ": depth " + std::to_string(depth) + " exceeds the enumeration limit " +
                        std::to_string(limit));
}

/// Sum of 3^{-j} over j > J, i.e. the value of an all-ones tail.
Rational ones_tail(int j) { return rational_pow(3, -j) / 2; }

}  // namespace

GraphEnumeration enumerate_graph(DigitFunction fn, int depth, bool closure, int limit) {
  check_depth(depth, limit, "enumerate_graph");
  GraphEnumeration out;
  out.depth = depth;
  out.closure = closure;
  const std::uint64_t count = std::uint64_t{1} << depth;
  out.points.reserve(closure ? 2 * count : count);
  const Rational x_tail = ones_tail(depth);
  const Rational f_tail = ones_tail((depth + 1) / 2);
  const Rational g_tail = ones_tail(depth / 2);
  Rational h_tail = fn == DigitFunction::OddDigits ? f_tail : fn == DigitFunction::EvenDigits ? g_tail : f_tail + g_tail;
  for (std::uint64_t c = 0; c < count; ++c) {
    DigitVector v = DigitVector::from_code(c, static_cast<std::size_t>(depth));
    Rational x = v.value();
    Rational h = depth == 0 ? Rational(0) : eval(fn, v);
    if (closure) {
      out.points.emplace_back(x, h);
      out.points.emplace_back(x + x_tail, h + h_tail);
    } else {
      out.points.emplace_back(std::move(x), std::move(h));
    }
  }
  return out;
}

std::uint64_t brute_force_mesh_count(DigitFunction fn, int n, int limit) {
  if (n < 0) throw InvalidArgument("brute_force_mesh_count: negative scale index");
  const int depth = 4 * n;
  check_depth(depth, limit, "brute_force_mesh_count");
  if (n == 0) return fn == DigitFunction::Sum ? 2 : 1;  // the graph meets [0,1)^2 and, for f+g, the cell above y = 1
  // At depth 4n: x = X/3^{4n}, f = F/3^{2n}, g = G/3^{2n}; the mesh is 9^{-n} = 3^{-2n}.
  // Doubled integers carry the all-ones tails (x + 3^{-4n}/2, f + 3^{-2n}/2, g + 3^{-2n}/2).
  const std::int64_t x_unit = 2 * int_pow(3, 2 * n);
  const std::int64_t y_cells = int_pow(9, n) + 2;
  std::vector<std::uint32_t> stamp(static_cast<std::size_t>(y_cells), 0);
  std::uint32_t block = 0;
  std::int64_t current_xcell = -1;
  std::uint64_t total = 0;
  std::vector<std::int64_t> x_weight(static_cast<std::size_t>(depth)), y_weight(static_cast<std::size_t>(depth));
  for (int i = 0; i < depth; ++i) x_weight[static_cast<std::size_t>(i)] = int_pow(3, depth - 1 - i);
  for (int i = 0; i < depth; ++i) y_weight[static_cast<std::size_t>(i)] = int_pow(3, 2 * n - 1 - i / 2);
  const bool use_f = fn != DigitFunction::EvenDigits;
  const bool use_g = fn != DigitFunction::OddDigits;
  const std::int64_t y_tail = (use_f ? 1 : 0) + (use_g ? 1 : 0);

  auto visit = [&](std::int64_t x, std::int64_t y) {
    for (int c = 0; c < 2; ++c) {
      const std::int64_t xcell = (2 * x + c) / x_unit;
      const std::int64_t ycell = (2 * y + c * y_tail) / 2;
      if (xcell != current_xcell) {
        current_xcell = xcell;
        ++block;
      }
      auto& s = stamp[static_cast<std::size_t>(ycell)];
      if (s != block) {
        s = block;
        ++total;
      }
    }
  };
  std::function<void(int, std::int64_t, std::int64_t)> walk = [&](int pos, std::int64_t x, std::int64_t y) {
    if (pos == depth) {
      visit(x, y);
      return;
    }
    walk(pos + 1, x, y);
    const bool odd_position = pos % 2 == 0;  // positions are 1-based in the digit definition
    const bool counts = odd_position ? use_f : use_g;
    walk(pos + 1, x + x_weight[static_cast<std::size_t>(pos)], counts ? y + y_weight[static_cast<std::size_t>(pos)] : y);
  };
  walk(0, 0, 0);
  return total;
}

ClosedFormCounts closed_form_counts(int n) {
  if (n < 1) throw InvalidArgument("closed_form_counts: n must be at least 1");
  ClosedFormCounts c;
  mpz_class two_3n, two_2n, three_n;
  mpz_ui_pow_ui(two_3n.get_mpz_t(), 2, static_cast<unsigned long>(3 * n));
  mpz_ui_pow_ui(two_2n.get_mpz_t(), 2, static_cast<unsigned long>(2 * n));
  mpz_ui_pow_ui(three_n.get_mpz_t(), 3, static_cast<unsigned long>(n));
  c.f = two_3n;
  c.g = two_3n;
  c.sum = two_2n * (three_n + 1);
  return c;
}

bool surjectivity_check(int n, int limit) {
  if (n < 0) throw InvalidArgument("surjectivity_check: negative n");
  if (n == 0) return true;
  check_depth(4 * n, limit, "surjectivity_check");
  // Tail digits 2n+1..4n contribute (F_t + G_t) / 3^{2n} with F_t, G_t < 3^n;
  // the cell offset inside [(f+g)(x_h), (f+g)(x_h) + 3^{-n}) is F_t + G_t.
  const std::int64_t cells = int_pow(3, n);
  const int tail_len = 2 * n;
  std::vector<std::int64_t> w(static_cast<std::size_t>(tail_len));
  for (int i = 0; i < tail_len; ++i) w[static_cast<std::size_t>(i)] = int_pow(3, n - 1 - i / 2);
  const std::uint64_t prefixes = std::uint64_t{1} << (2 * n);
  const std::uint64_t tails = std::uint64_t{1} << tail_len;
  std::vector<std::uint64_t> hit(static_cast<std::size_t>(cells), 0);
  for (std::uint64_t h = 0; h < prefixes; ++h) {
    const std::uint64_t mark = h + 1;
    std::int64_t missing = cells;
    for (std::uint64_t t = 0; t < tails; ++t) {
      std::int64_t off = 0;
      for (int i = 0; i < tail_len; ++i)
        if (t >> (tail_len - 1 - i) & 1U) off += w[static_cast<std::size_t>(i)];
      if (off >= cells) return false;
      auto& slot = hit[static_cast<std::size_t>(off)];
      if (slot != mark) {
        slot = mark;
        --missing;
      }
    }
    if (missing != 0) return false;
  }
  return true;
}

ScaleSeries mesh_series(DigitFunction fn, int n_lo, int n_hi, int limit) {
  if (n_lo > n_hi) throw InvalidArgument("mesh_series: empty scale range");
  ScaleSeries s;
  s.base = 9;
  for (int n = n_lo; n <= n_hi; ++n) s.add(n, brute_force_mesh_count(fn, n, limit));
  return s;
}

}  // namespace dimlab
