#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sattn/attention.hpp"
#include "sattn/mask_matrix.hpp"
#include "sattn/rng.hpp"

namespace sattn {

/// max |sa_forward - attention_forward(intersect_causal(M^sigma))|.
double sa_equivalence_error(const AttentionInputs& inp, const WindowSpec& spec, const Permutation& p,
                            double temperature = 1.0);

struct GradcheckResult {
  double dq = 0;  ///< ||analytic - fd||_inf / ||fd||_inf
  double dk = 0;
  double dv = 0;
  double worst() const noexcept;
};

/// Central differences of sum(upstream .* Y) with step h against
/// attention_backward. `perturb` adds a fixed offset to one analytic entry of
/// each gradient before comparing (a negative control).
GradcheckResult gradcheck_attention(const AttentionInputs& inp, const MaskMatrix& mask, const Matrix& upstream,
                                    double h = 1e-5, double temperature = 1.0, bool perturb = false);

/// Matrix with entries uniform in [lo, hi).
Matrix random_matrix(std::size_t rows, std::size_t cols, SeededRng& rng, double lo = -1.0, double hi = 1.0);

struct Measurement {
  std::string name;
  double value = 0;
};

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::vector<Measurement> values;
};

struct VerifyConfig {
  Seed seed = 0;
  /// Suites to run; empty means all of verify_suite_names().
  std::vector<std::string> only;
  bool perturb_backward = false;
};

/// equivalence, gradcheck, connprob, coverage, spectrum, variance, bias, bvdecomp.
const std::vector<std::string>& verify_suite_names();

/// Runs the selected suites at desk scale. Throws ConfigError for an unknown
/// suite name. Results are deterministic in `cfg.seed`.
std::vector<CheckResult> run_verify(const VerifyConfig& cfg);

/// Runs one suite with a seed derived from `root`.
std::vector<CheckResult> run_verify_suite(const std::string& suite, Seed root, bool perturb_backward = false);

}  // namespace sattn
