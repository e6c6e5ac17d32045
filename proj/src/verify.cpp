#include "sattn/verify.hpp"

#include <algorithm>
#include <cmath>

#include "sattn/connectivity.hpp"
#include "sattn/error.hpp"
#include "sattn/masks.hpp"
#include "sattn/numerics.hpp"
#include "sattn/permutation.hpp"
#include "sattn/reachability.hpp"
#include "sattn/spectral.hpp"
#include "sattn/stats.hpp"

namespace sattn {

namespace {

constexpr double kPerturbation = 1e-4;

double loss(const AttentionInputs& inp, const MaskMatrix& mask, const Matrix& upstream, double temperature) {
  const auto y = serial::attention_forward(inp, mask, {temperature, false}).y;
  double s = 0.0;
  for (std::size_t k = 0; k < y.data().size(); ++k) s += upstream.data()[k] * y.data()[k];
  return s;
}

// Perturbs each entry of inp.*member and compares against `analytic`.
double fd_error(AttentionInputs inp, Matrix AttentionInputs::*member, const MaskMatrix& mask,
                const Matrix& upstream, const Matrix& analytic, double h, double temperature) {
  Matrix& x = inp.*member;
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < x.data().size(); ++k) {
    const double orig = x.data()[k];
    x.data()[k] = orig + h;
    const double up = loss(inp, mask, upstream, temperature);
    x.data()[k] = orig - h;
    const double down = loss(inp, mask, upstream, temperature);
    x.data()[k] = orig;
    const double fd = (up - down) / (2.0 * h);
    err = std::max(err, std::abs(analytic.data()[k] - fd));
    scale = std::max(scale, std::abs(fd));
  }
  return scale > 0.0 ? err / scale : err;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

CheckResult check(const std::string& suite, const std::string& name, bool passed,
                  std::vector<Measurement> values) {
  return {suite, name, passed, std::move(values)};
}

std::vector<CheckResult> suite_equivalence(SeededRng& rng) {
  constexpr std::size_t configs = 30;
  double worst = 0.0;
  for (std::size_t c = 0; c < configs; ++c) {
    const std::size_t n = 2 + rng.uniform_below(31);
    const std::size_t dh = 1 + rng.uniform_below(8);
    const std::size_t w = 2 + rng.uniform_below(n - 1);
    const auto conv = rng.uniform_below(2) ? WindowConvention::SymmetricCircular : WindowConvention::CausalOneSided;
    auto inp = AttentionInputs::make(random_matrix(n, dh, rng), random_matrix(n, dh, rng), random_matrix(n, dh, rng));
    const Permutation p = sample_permutation(n, rng);
    worst = std::max(worst, sa_equivalence_error(inp, {w, conv}, p));
  }
  return {check("equivalence", "sa_forward_matches_masked_attention", worst <= 1e-12,
                {{"configs", static_cast<double>(configs)}, {"max_abs_error", worst}, {"tolerance", 1e-12}})};
}

std::vector<CheckResult> suite_gradcheck(SeededRng& rng, bool perturb) {
  constexpr std::size_t instances = 5, n = 8, dh = 4;
  GradcheckResult worst;
  for (std::size_t t = 0; t < instances; ++t) {
    auto inp = AttentionInputs::make(random_matrix(n, dh, rng), random_matrix(n, dh, rng), random_matrix(n, dh, rng));
    const auto mask = intersect_causal(build_stochastic_mask(n, {3, WindowConvention::SymmetricCircular},
                                                             sample_permutation(n, rng)));
    const auto r = gradcheck_attention(inp, mask, random_matrix(n, dh, rng), 1e-5, 1.0, perturb);
    worst.dq = std::max(worst.dq, r.dq);
    worst.dk = std::max(worst.dk, r.dk);
    worst.dv = std::max(worst.dv, r.dv);
  }
  return {check("gradcheck", "backward_matches_central_differences", worst.worst() <= 1e-6,
                {{"instances", static_cast<double>(instances)},
                 {"rel_error_dq", worst.dq},
                 {"rel_error_dk", worst.dk},
                 {"rel_error_dv", worst.dv},
                 {"tolerance", 1e-6}})};
}

std::vector<CheckResult> suite_connprob(SeededRng& rng) {
  std::vector<CheckResult> out;
  const auto ex = connection_probability_exhaustive(6, {3, WindowConvention::SymmetricCircular}, 0, 5);
  out.push_back(check("connprob", "exhaustive_n6_w3", ex.hits * 5 == ex.total * 2,
                      {{"hits", static_cast<double>(ex.hits)},
                       {"permutations", static_cast<double>(ex.total)},
                       {"probability", ex.value()},
                       {"analytic", 0.4}}));
  const auto mc = connection_probability_mc(64, 8, 20000, false, rng);
  out.push_back(check("connprob", "monte_carlo_n64_w8", std::abs(mc.estimate - mc.analytic) <= 3.0 * mc.std_error,
                      {{"estimate", mc.estimate}, {"std_error", mc.std_error}, {"analytic", mc.analytic}}));
  const auto causal = connection_probability_mc(64, 8, 2000, true, rng);
  const double rel = std::abs(causal.estimate - causal.analytic) / causal.analytic;
  out.push_back(check("connprob", "causal_density_n64_w8", rel <= 0.15,
                      {{"estimate", causal.estimate}, {"analytic", causal.analytic}, {"relative_error", rel}}));
  return out;
}

std::vector<CheckResult> suite_coverage(SeededRng& rng) {
  constexpr std::size_t n = 256, w = 16;
  const WindowSpec spec{w, WindowConvention::SymmetricCircular};
  const auto seeds = derive_seed_list(rng.next_u64(), 8);
  std::vector<CheckResult> out;

  const auto swa = simulate_reachability(n, spec, 20, RoutingMode::SWA, seeds);
  const auto swa_depth = layers_to_coverage(swa, 1.0);
  const std::size_t expected = (n - 1 + w - 2) / (w - 1);
  out.push_back(check("coverage", "swa_depth_closed_form", swa_depth && *swa_depth == expected,
                      {{"layers", swa_depth ? static_cast<double>(*swa_depth) : -1.0},
                       {"expected", static_cast<double>(expected)}}));

  const auto sa = simulate_reachability(n, spec, 6, RoutingMode::SA, seeds);
  std::vector<double> depths;
  for (const auto& d : layers_to_coverage_per_seed(sa, 1.0)) depths.push_back(d ? static_cast<double>(*d) : 1e9);
  const double med = median(depths);
  out.push_back(check("coverage", "sa_median_depth", med <= 4.0, {{"median_layers", med}, {"limit", 4.0}}));

  double worst_z = 0.0;
  bool ok = true;
  for (const auto& s : sa.expansion) {
    ok = ok && s.mean >= -3.0 * s.std_error;
    if (s.std_error > 0.0) worst_z = std::min(worst_z, s.mean / s.std_error);
  }
  out.push_back(check("coverage", "sa_expansion_bound", ok, {{"worst_z", worst_z}, {"limit", -3.0}}));
  return out;
}

std::vector<CheckResult> suite_spectrum(SeededRng& rng) {
  constexpr std::size_t n = 64, w = 8;
  std::vector<CheckResult> out;
  const auto circ = circulant_spectrum(n, w);
  out.push_back(check("spectrum", "circulant_dft_matches_dense", circ.dense_mismatch <= 1e-9,
                      {{"mismatch", circ.dense_mismatch}, {"lambda2_abs", circ.lambda2_abs}}));

  const Matrix base = transition_matrix(build_window_mask(n, {w, WindowConvention::SymmetricCircular}));
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const Matrix pm = permutation_matrix(sample_permutation(n, rng));
    const Matrix conj = matmul(matmul(pm.transposed(), base), pm);
    worst = std::max(worst, spectrum_mismatch(dense_eigenvalues(conj), circ.eigenvalues));
  }
  out.push_back(check("spectrum", "single_layer_similarity", worst <= 1e-9, {{"max_mismatch", worst}}));

  const auto mix = multilayer_mixing(128, w, 3, derive_seed_list(rng.next_u64(), 5));
  out.push_back(check("spectrum", "multilayer_mixing", mix.median_product_lambda2 < mix.circulant_lambda2_pow,
                      {{"median_product_lambda2", mix.median_product_lambda2},
                       {"circulant_lambda2_pow", mix.circulant_lambda2_pow}}));
  return out;
}

std::vector<CheckResult> suite_variance(SeededRng& rng) {
  const Matrix v = random_matrix(64, 4, rng);
  const auto rep = sa_variance_mc(v, 8, 10000, rng);
  const double rel = std::abs(rep.mc - rep.exact) / rep.exact;
  std::vector<CheckResult> out;
  out.push_back(check("variance", "monte_carlo_matches_closed_form", rel <= 0.05,
                      {{"mc", rep.mc},
                       {"mc_std_error", rep.mc_std_error},
                       {"exact", rep.exact},
                       {"relative_error", rel},
                       {"token_mc", rep.token_mc},
                       {"token_exact", rep.token_exact}}));
  bool ok = true;
  for (int t = 0; t < 20; ++t) {
    const auto r = sa_variance_exact(random_matrix(32, 3, rng, -2.0, 2.0), 4);
    ok = ok && r.exact <= r.sigma_v2 / 4.0 && r.sigma_v2 / 4.0 <= r.bound;
  }
  out.push_back(check("variance", "bound_chain", ok, {{"samples", 20.0}}));
  return out;
}

std::vector<CheckResult> suite_bias(SeededRng& rng) {
  const Matrix v = random_matrix(128, 4, rng);
  const auto rep = sa_bias_mc(v, {8, 16}, kUniformTemperature, 4000, rng);
  const double ratio = rep.points[1].deviation / rep.points[0].deviation;
  return {check("bias", "halves_when_w_doubles", ratio >= 0.3 && ratio <= 0.8,
                {{"deviation_w8", rep.points[0].deviation},
                 {"deviation_w16", rep.points[1].deviation},
                 {"std_error_w16", rep.points[1].std_error},
                 {"ratio", ratio},
                 {"exact_ratio", rep.points[1].exact / rep.points[0].exact}})};
}

std::vector<CheckResult> suite_bvdecomp(SeededRng& rng) {
  constexpr std::size_t n = 32, d = 4;
  auto inp = AttentionInputs::make(random_matrix(n, d, rng), random_matrix(n, d, rng), random_matrix(n, d, rng));
  GateParams g{random_matrix(d, d, rng), random_matrix(d, d, rng)};
  const auto rep = fusion_bv_decompose(inp, g, 4, 4000, rng);
  return {check("bvdecomp", "mse_equals_bias2_plus_variance",
                std::abs(rep.residual) <= 3.0 * rep.combined_std_error,
                {{"mse", rep.mse},
                 {"bias2", rep.bias2},
                 {"variance", rep.variance},
                 {"residual", rep.residual},
                 {"combined_std_error", rep.combined_std_error}})};
}

}  // namespace

double GradcheckResult::worst() const noexcept { return std::max({dq, dk, dv}); }

double sa_equivalence_error(const AttentionInputs& inp, const WindowSpec& spec, const Permutation& p,
                            double temperature) {
  const Matrix fast = sa_forward(inp, spec.w, p, spec.convention, temperature);
  const auto mask = intersect_causal(build_stochastic_mask(inp.n(), spec, p));
  const auto ref = attention_forward(inp, mask, {temperature, false}).y;
  return max_abs_diff(fast, ref);
}

GradcheckResult gradcheck_attention(const AttentionInputs& inp, const MaskMatrix& mask, const Matrix& upstream,
                                    double h, double temperature, bool perturb) {
  auto grads = attention_backward(inp, mask, upstream, {temperature, false});
  if (perturb) {
    grads.dq.data()[0] += kPerturbation;
    grads.dk.data()[0] += kPerturbation;
    grads.dv.data()[0] += kPerturbation;
  }
  GradcheckResult r;
  r.dq = fd_error(inp, &AttentionInputs::q, mask, upstream, grads.dq, h, temperature);
  r.dk = fd_error(inp, &AttentionInputs::k, mask, upstream, grads.dk, h, temperature);
  r.dv = fd_error(inp, &AttentionInputs::v, mask, upstream, grads.dv, h, temperature);
  return r;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, SeededRng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform(lo, hi);
  return m;
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"equivalence", "gradcheck", "connprob", "coverage",
                                              "spectrum",    "variance",  "bias",     "bvdecomp"};
  return names;
}

std::vector<CheckResult> run_verify_suite(const std::string& suite, Seed root, bool perturb_backward) {
  const auto& names = verify_suite_names();
  const auto it = std::find(names.begin(), names.end(), suite);
  if (it == names.end()) throw ConfigError("unknown verify suite '" + suite + "'");
  SeededRng rng(derive_seed(root, static_cast<std::uint64_t>(it - names.begin()) + 1, 0));
  if (suite == "equivalence") return suite_equivalence(rng);
  if (suite == "gradcheck") return suite_gradcheck(rng, perturb_backward);
  if (suite == "connprob") return suite_connprob(rng);
  if (suite == "coverage") return suite_coverage(rng);
  if (suite == "spectrum") return suite_spectrum(rng);
  if (suite == "variance") return suite_variance(rng);
  if (suite == "bias") return suite_bias(rng);
  return suite_bvdecomp(rng);
}

std::vector<CheckResult> run_verify(const VerifyConfig& cfg) {
  const auto& names = verify_suite_names();
  for (const auto& s : cfg.only) {
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      throw ConfigError("unknown verify suite '" + s + "'");
    }
  }
  std::vector<CheckResult> all;
  for (const auto& s : names) {
    if (!cfg.only.empty() && std::find(cfg.only.begin(), cfg.only.end(), s) == cfg.only.end()) continue;
    auto part = run_verify_suite(s, cfg.seed, cfg.perturb_backward);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace sattn
