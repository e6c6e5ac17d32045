#include "sattn/masks.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "sattn/error.hpp"

namespace sattn {

std::string_view to_string(WindowConvention c) noexcept {
  switch (c) {
    case WindowConvention::CausalOneSided:
      return "causal";
    case WindowConvention::SymmetricCircular:
      return "circular";
  }
  return "?";
}

WindowConvention parse_convention(std::string_view s) {
  if (s == "causal" || s == "causal-one-sided") return WindowConvention::CausalOneSided;
  if (s == "circular" || s == "symmetric-circular") return WindowConvention::SymmetricCircular;
  throw ConfigError("unknown window convention '" + std::string(s) + "'");
}

void validate_window(std::size_t n, const WindowSpec& spec) {
  if (spec.w < 1 || spec.w > n) {
    throw ConfigError("window size w=" + std::to_string(spec.w) + " must satisfy 1 <= w <= n=" +
                      std::to_string(n));
  }
}

bool window_contains(std::size_t n, const WindowSpec& spec, std::size_t a, std::size_t b) noexcept {
  if (spec.convention == WindowConvention::CausalOneSided) {
    return b <= a && a - b <= spec.w - 1;
  }
  const std::size_t forward = (b + n - a) % n;  // (b - a) mod n
  const std::size_t ahead = spec.w / 2;
  const std::size_t behind = (spec.w + 1) / 2 - 1;
  return forward <= ahead || forward >= n - behind;
}

std::vector<std::ptrdiff_t> window_offsets(const WindowSpec& spec) {
  std::vector<std::ptrdiff_t> offs;
  const auto w = static_cast<std::ptrdiff_t>(spec.w);
  if (spec.convention == WindowConvention::CausalOneSided) {
    for (std::ptrdiff_t o = -(w - 1); o <= 0; ++o) offs.push_back(o);
  } else {
    for (std::ptrdiff_t o = -((w + 1) / 2 - 1); o <= w / 2; ++o) offs.push_back(o);
  }
  return offs;
}

MaskMatrix build_window_mask(std::size_t n, const WindowSpec& spec) {
  validate_window(n, spec);
  MaskMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.set(i, j, window_contains(n, spec, i, j));
  return m;
}

MaskMatrix build_stochastic_mask(std::size_t n, const WindowSpec& spec, const Permutation& p) {
  validate_window(n, spec);
  if (p.size() != n) {
    throw DimensionError("build_stochastic_mask: permutation size " + std::to_string(p.size()) +
                         " != n=" + std::to_string(n));
  }
  MaskMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.set(i, j, window_contains(n, spec, p(i), p(j)));
  return m;
}

MaskMatrix intersect_causal(const MaskMatrix& m) {
  MaskMatrix out(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) {
    for (std::size_t j = 0; j < i; ++j) out.set(i, j, m(i, j));
    out.set(i, i, true);
  }
  return out;
}

MaskMatrix full_causal_mask(std::size_t n) { return intersect_causal(MaskMatrix(n, true)); }

MaskMatrix mask_union(const MaskMatrix& a, const MaskMatrix& b) {
  if (a.n() != b.n()) throw DimensionError("mask_union: size mismatch");
  MaskMatrix out(a.n());
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = 0; j < a.n(); ++j) out.set(i, j, a(i, j) || b(i, j));
  return out;
}

double mask_density(const MaskMatrix& m) {
  if (m.n() == 0) return 0.0;
  const double n = static_cast<double>(m.n());
  return static_cast<double>(m.count_ones()) / (n * n);
}

double off_diagonal_density(const MaskMatrix& m) {
  if (m.n() < 2) return 0.0;
  std::size_t diag = 0;
  for (std::size_t i = 0; i < m.n(); ++i) diag += m(i, i) ? 1 : 0;
  const double n = static_cast<double>(m.n());
  return static_cast<double>(m.count_ones() - diag) / (n * (n - 1));
}

bool is_subset(const MaskMatrix& inner, const MaskMatrix& outer) {
  if (inner.n() != outer.n()) return false;
  for (std::size_t i = 0; i < inner.n(); ++i)
    for (std::size_t j = 0; j < inner.n(); ++j)
      if (inner(i, j) && !outer(i, j)) return false;
  return true;
}

KeyLists key_lists(const MaskMatrix& m) {
  KeyLists rows(m.n());
  for (std::size_t i = 0; i < m.n(); ++i)
    for (std::size_t j = 0; j < m.n(); ++j)
      if (m(i, j)) rows[i].push_back(j);
  return rows;
}

KeyLists stochastic_key_lists(std::size_t n, const WindowSpec& spec, const Permutation& p, bool causal) {
  validate_window(n, spec);
  if (p.size() != n) throw DimensionError("stochastic_key_lists: permutation size mismatch");
  const auto offs = window_offsets(spec);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  KeyLists rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    r.reserve(offs.size());
    const auto a = static_cast<std::ptrdiff_t>(p(i));
    for (auto o : offs) {
      std::ptrdiff_t b = a + o;
      if (spec.convention == WindowConvention::SymmetricCircular) {
        b = ((b % sn) + sn) % sn;
      } else if (b < 0) {
        continue;
      }
      const std::size_t j = p.token_at(static_cast<std::size_t>(b));
      if (!causal || j <= i) r.push_back(j);
    }
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (causal && (r.empty() || r.back() != i)) r.push_back(i);  // forced diagonal
  }
  return rows;
}

void write_mask_csv(std::ostream& os, const MaskMatrix& m) {
  for (std::size_t j = 0; j < m.n(); ++j) os << (j ? "," : "") << j;
  os << '\n';
  for (std::size_t i = 0; i < m.n(); ++i) {
    for (std::size_t j = 0; j < m.n(); ++j) {
      if (j) os << ',';
      os << (m(i, j) ? '1' : '0');
    }
    os << '\n';
  }
}

void write_mask_pgm(std::ostream& os, const MaskMatrix& m, std::string_view comment) {
  os << "P5\n";
  if (!comment.empty()) os << "# " << comment << '\n';
  os << m.n() << ' ' << m.n() << "\n255\n";
  std::string row(m.n(), '\0');
  for (std::size_t i = 0; i < m.n(); ++i) {
    for (std::size_t j = 0; j < m.n(); ++j) row[j] = m(i, j) ? static_cast<char>(255) : '\0';
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

void write_mask_svg(std::ostream& os, const MaskMatrix& m, int cell, std::string_view comment) {
  const std::size_t side = m.n() * static_cast<std::size_t>(cell);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << side << "\" height=\"" << side
     << "\" viewBox=\"0 0 " << side << ' ' << side << "\">\n";
  if (!comment.empty()) os << "<!-- " << comment << " -->\n";
  os << "<rect width=\"" << side << "\" height=\"" << side << "\" fill=\"#000000\"/>\n";
  for (std::size_t i = 0; i < m.n(); ++i)
    for (std::size_t j = 0; j < m.n(); ++j)
      if (m(i, j))
        os << "<rect x=\"" << j * cell << "\" y=\"" << i * cell << "\" width=\"" << cell
           << "\" height=\"" << cell << "\" fill=\"#ffffff\"/>\n";
  os << "</svg>\n";
}

}  // namespace sattn
