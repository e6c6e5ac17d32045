#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "sattn/mask_matrix.hpp"
#include "sattn/permutation.hpp"

namespace sattn {

enum class WindowConvention {
  /// bit(i, j) = 1 iff 0 <= i - j <= w - 1 (the causal LM window).
  CausalOneSided,
  /// bit(i, j) = 1 iff the circular offset (j - i) mod n lies in
  /// {-(ceil(w/2) - 1), ..., floor(w/2)}: exactly w entries per row.
  SymmetricCircular,
};

std::string_view to_string(WindowConvention c) noexcept;
/// Accepts "causal" / "causal-one-sided" and "circular" / "symmetric-circular".
WindowConvention parse_convention(std::string_view s);

struct WindowSpec {
  std::size_t w = 1;
  WindowConvention convention = WindowConvention::SymmetricCircular;
};

/// Throws ConfigError unless 1 <= spec.w <= n.
void validate_window(std::size_t n, const WindowSpec& spec);

/// The window test on positions a (query) and b (key) in a sequence of length n.
bool window_contains(std::size_t n, const WindowSpec& spec, std::size_t a, std::size_t b) noexcept;

/// Signed key offsets b - a admitted by the window, in ascending order. For the
/// circular convention these are taken mod n; for the one-sided one they are
/// -(w-1), ..., 0.
std::vector<std::ptrdiff_t> window_offsets(const WindowSpec& spec);

MaskMatrix build_window_mask(std::size_t n, const WindowSpec& spec);

/// bit(i, j) = window_contains(sigma(i), sigma(j)). No causal filtering here;
/// see intersect_causal.
MaskMatrix build_stochastic_mask(std::size_t n, const WindowSpec& spec, const Permutation& p);

/// Keeps bit(i, j) only where j <= i (original positions) and forces the
/// diagonal on, so no row is ever empty.
MaskMatrix intersect_causal(const MaskMatrix& m);

MaskMatrix full_causal_mask(std::size_t n);

MaskMatrix mask_union(const MaskMatrix& a, const MaskMatrix& b);

/// (# ones) / n^2.
double mask_density(const MaskMatrix& m);

/// (# off-diagonal ones) / (n (n - 1)); 0 for n = 1.
double off_diagonal_density(const MaskMatrix& m);

bool is_subset(const MaskMatrix& inner, const MaskMatrix& outer);

/// Per-row ascending key lists.
using KeyLists = std::vector<std::vector<std::size_t>>;

KeyLists key_lists(const MaskMatrix& m);

/// Key lists of intersect_causal?(build_stochastic_mask(n, spec, p)) built in
/// O(n w) without materializing the dense mask.
KeyLists stochastic_key_lists(std::size_t n, const WindowSpec& spec, const Permutation& p, bool causal);

// Mask dump formats.

/// Header row of column indices 0..n-1, then n lines of comma-separated 0/1.
void write_mask_csv(std::ostream& os, const MaskMatrix& m);

/// Binary PGM (P5): "P5\n", an optional "# comment\n", "<n> <n>\n255\n", then
/// n*n bytes row-major, 255 = unmasked, 0 = masked.
void write_mask_pgm(std::ostream& os, const MaskMatrix& m, std::string_view comment = {});

/// One white square per unmasked cell on a black background; `cell` pixels per cell.
void write_mask_svg(std::ostream& os, const MaskMatrix& m, int cell = 4, std::string_view comment = {});

}  // namespace sattn
