#include "sattn/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "sattn/attention.hpp"
#include "sattn/connectivity.hpp"
#include "sattn/cost_model.hpp"
#include "sattn/error.hpp"
#include "sattn/masks.hpp"
#include "sattn/permutation.hpp"
#include "sattn/reachability.hpp"
#include "sattn/smallworld.hpp"
#include "sattn/spectral.hpp"
#include "sattn/stats.hpp"
#include "sattn/svg_chart.hpp"
#include "sattn/verify.hpp"

namespace sattn::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kMaxN = 8192;
constexpr std::size_t kMaxImageN = 512;
constexpr std::size_t kMaxSeeds = 10000;
constexpr std::size_t kMaxLayers = 10000;
constexpr std::size_t kMaxTrials = 100000000;
constexpr std::size_t kMaxD = 1024;

constexpr const char* kSchemas = R"(Output schemas (v1):
  coverage          csv  layer,mode,mean_coverage,min,median,max      json, svg
  connprob          json {n,w,causal,trials,estimate,stderr,analytic,passed}  csv
  smallworld        csv  mode,seed,clustering,path_length,clustering_random,path_length_random,small_worldness  json
  spectrum          json {n,w,eigenvalues,lambda2_abs,dense_mismatch,mixing}  csv index,real,imag,abs  svg
  maskviz           pgm  binary P5, row-major, one byte per cell (255 unmasked, 0 masked)  csv header 0..n-1 then 0/1 rows  svg
  cost              csv  n,mode,flops,doubling_ratio                  json, svg
  verify            json {seed,passed,checks:[{suite,name,passed,values}]}  csv suite,name,passed
  gradcheck         json {instances,n,dh,step,tolerance,rel_error_dq,rel_error_dk,rel_error_dv,passed}
  stats bias        csv  w,deviation,std_error,exact                  json
  stats variance    csv  n,w,trials,sigma_v2,b_max,exact,bound,mc,mc_std_error,token_exact,token_mc  json
  stats bvdecomp    csv  n,d,w,trials,mse,mse_std_error,bias2,bias2_gate_form,swa_bias2,variance,
                         variance_uniform_approx,dim_variance_ratio,residual,combined_std_error  json
CSV output ends with one '#' metadata line (command, parameters, seeds); JSON
carries the same data under "metadata"; SVG and PGM carry it as a comment.
Default output is stdout, or $SATTN_OUT_DIR/<command>.<ext> when that is set.
Exit codes: 0 success, 1 usage error, 2 verification failure.)";

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  int precision = 10;
};

struct SeedArgs {
  std::size_t count = 0;
  std::vector<std::uint64_t> list;

  std::vector<Seed> resolve(Seed root) const { return list.empty() ? derive_seed_list(root, count) : list; }

  std::string describe(Seed root) const {
    if (list.empty()) return "derive(root=" + std::to_string(root) + ",count=" + std::to_string(count) + ")";
    std::string s;
    for (std::size_t k = 0; k < list.size(); ++k) s += (k ? ";" : "") + std::to_string(list[k]);
    return s;
  }
};

using Meta = std::vector<std::pair<std::string, std::string>>;

std::string fmt(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

Json jnum(double v, int precision) {
  if (!std::isfinite(v)) return fmt(v, precision);
  return std::stod(fmt(v, precision));
}

std::string meta_line(const std::string& command, const Meta& meta) {
  std::string s = "sattn " + command;
  for (const auto& [k, v] : meta) s += " " + k + "=" + v;
  return s;
}

Json meta_json(const std::string& command, const Meta& meta) {
  Json j;
  j["command"] = command;
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

// Destination for one command's report.
class Sink {
 public:
  Sink(const Globals& g, const std::string& stem, const std::string& ext, std::ostream& fallback,
       std::ostream& err) {
    std::filesystem::path path;
    if (!g.out.empty()) {
      path = g.out;
    } else if (const char* dir = std::getenv(kOutDirEnv); dir != nullptr && *dir != '\0') {
      std::filesystem::create_directories(dir);
      path = std::filesystem::path(dir) / (stem + "." + ext);
    }
    if (path.empty()) {
      os_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw ConfigError("cannot open output file '" + path.string() + "'");
    os_ = file_.get();
    err << "wrote " << path.string() << '\n';
  }

  std::ostream& os() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

std::string choose_format(const Globals& g, const std::string& command, std::initializer_list<const char*> allowed) {
  if (g.format.empty()) return *allowed.begin();
  for (const char* a : allowed)
    if (g.format == a) return g.format;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw CLI::ValidationError("--format", command + " supports " + list);
}

double parse_temperature(const std::string& s) {
  if (s == "inf" || s == "uniform") return kUniformTemperature;
  std::size_t used = 0;
  double t = 0.0;
  try {
    t = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(t > 0.0)) throw ConfigError("--temperature must be a positive number or 'inf'");
  return t;
}

void check_window_args(std::size_t n, std::size_t w) {
  if (w > n) throw ConfigError("--w must not exceed --n");
}

void write_csv_rows(std::ostream& os, const std::string& header, const std::vector<std::vector<std::string>>& rows,
                    const std::string& meta) {
  os << header << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << '\n';
  }
  os << "# " << meta << '\n';
}

// ---------------------------------------------------------------- coverage

struct CoverageArgs {
  std::size_t n = 2048;
  std::size_t w = 32;
  std::size_t layers = 12;
  std::vector<std::string> modes{"swa", "sa"};
  std::string convention = "circular";
  SeedArgs seeds{10, {}};
};

int cmd_coverage(const Globals& g, const CoverageArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "coverage", {"csv", "json", "svg"});
  check_window_args(a.n, a.w);
  const WindowSpec spec{a.w, parse_convention(a.convention)};
  const auto seeds = a.seeds.resolve(g.seed);
  if (seeds.empty()) throw ConfigError("coverage: need at least one seed");

  std::vector<CoverageCurve> curves;
  for (const auto& m : a.modes) curves.push_back(simulate_reachability(a.n, spec, a.layers, parse_routing_mode(m), seeds));

  const Meta meta{{"n", std::to_string(a.n)},
                  {"w", std::to_string(a.w)},
                  {"layers", std::to_string(a.layers)},
                  {"convention", a.convention},
                  {"seed", std::to_string(g.seed)},
                  {"seeds", a.seeds.describe(g.seed)}};
  Sink sink(g, "coverage", format, out, err);
  const int p = g.precision;
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t l = 0; l <= a.layers; ++l)
      for (const auto& c : curves) {
        const auto& s = c.layers[l];
        rows.push_back({std::to_string(l), std::string(to_string(c.mode)), fmt(s.mean, p), fmt(s.min, p),
                        fmt(s.median, p), fmt(s.max, p)});
      }
    write_csv_rows(sink.os(), "layer,mode,mean_coverage,min,median,max", rows, meta_line("coverage", meta));
  } else if (format == "json") {
    Json j;
    j["metadata"] = meta_json("coverage", meta);
    Json rows = Json::array();
    for (std::size_t l = 0; l <= a.layers; ++l)
      for (const auto& c : curves) {
        const auto& s = c.layers[l];
        rows.push_back({{"layer", l},
                        {"mode", std::string(to_string(c.mode))},
                        {"mean_coverage", jnum(s.mean, p)},
                        {"min", jnum(s.min, p)},
                        {"median", jnum(s.median, p)},
                        {"max", jnum(s.max, p)}});
      }
    j["rows"] = rows;
    sink.os() << j.dump(2) << '\n';
  } else {
    std::vector<ChartSeries> series;
    for (const auto& c : curves) {
      ChartSeries s{std::string(to_string(c.mode)), {}, {}};
      for (std::size_t l = 0; l <= a.layers; ++l) {
        s.x.push_back(static_cast<double>(l));
        s.y.push_back(c.layers[l].mean);
      }
      series.push_back(std::move(s));
    }
    ChartOptions o;
    o.title = "Receptive-field coverage, n=" + std::to_string(a.n) + ", w=" + std::to_string(a.w);
    o.x_label = "layer";
    o.y_label = "mean coverage";
    o.precision = p;
    o.comment = meta_line("coverage", meta);
    write_line_chart(sink.os(), series, o);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- connprob

struct ConnprobArgs {
  std::size_t n = 256;
  std::size_t w = 16;
  std::size_t trials = 100000;
  bool causal = false;
};

int cmd_connprob(const Globals& g, const ConnprobArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "connprob", {"json", "csv"});
  check_window_args(a.n, a.w);
  if (a.n < 2) throw ConfigError("connprob: need n >= 2");
  SeededRng rng(derive_seed(g.seed, 0, 0));
  const auto est = connection_probability_mc(a.n, a.w, a.trials, a.causal, rng);

  bool ok = false;
  double tolerance = 0.0;
  if (a.causal) {
    tolerance = 0.15 * est.analytic;
    ok = est.analytic == 0.0 ? est.estimate == 0.0 : std::abs(est.estimate - est.analytic) <= tolerance;
  } else {
    tolerance = 3.0 * est.std_error;
    ok = std::abs(est.estimate - est.analytic) <= tolerance;
  }

  const Meta meta{{"seed", std::to_string(g.seed)}, {"criterion", a.causal ? "relative<=0.15" : "abs<=3*stderr"}};
  Sink sink(g, "connprob", format, out, err);
  const int p = g.precision;
  if (format == "json") {
    Json j;
    j["n"] = a.n;
    j["w"] = a.w;
    j["causal"] = a.causal;
    j["trials"] = a.trials;
    j["estimate"] = jnum(est.estimate, p);
    j["stderr"] = jnum(est.std_error, p);
    j["analytic"] = jnum(est.analytic, p);
    j["passed"] = ok;
    j["metadata"] = meta_json("connprob", meta);
    sink.os() << j.dump(2) << '\n';
  } else {
    write_csv_rows(sink.os(), "n,w,causal,trials,estimate,stderr,analytic,passed",
                   {{std::to_string(a.n), std::to_string(a.w), a.causal ? "1" : "0", std::to_string(a.trials),
                     fmt(est.estimate, p), fmt(est.std_error, p), fmt(est.analytic, p), ok ? "1" : "0"}},
                   meta_line("connprob", meta));
  }
  if (!ok) {
    err << "connprob: estimate " << fmt(est.estimate, p) << " deviates from " << fmt(est.analytic, p)
        << " by more than " << fmt(tolerance, p) << '\n';
    return kExitVerificationFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- smallworld

struct SmallworldArgs {
  std::size_t n = 1024;
  std::size_t w = 16;
  std::string convention = "circular";
  std::size_t baseline = 10;
  SeedArgs seeds{5, {}};
};

int cmd_smallworld(const Globals& g, const SmallworldArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "smallworld", {"csv", "json"});
  check_window_args(a.n, a.w);
  const WindowSpec spec{a.w, parse_convention(a.convention)};
  const auto seeds = a.seeds.resolve(g.seed);
  const MaskMatrix swa = build_window_mask(a.n, spec);

  struct Row {
    std::string mode;
    std::size_t seed_index;
    GraphMetrics m;
  };
  std::vector<Row> rows;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    SeededRng rng(seeds[s]);
    const Permutation sigma = sample_permutation(a.n, rng);
    const MaskMatrix sa = build_stochastic_mask(a.n, spec, sigma);
    rows.push_back({"swa", s, smallworld_metrics(swa, rng, a.baseline)});
    rows.push_back({"sa", s, smallworld_metrics(sa, rng, a.baseline)});
    rows.push_back({"fused", s, smallworld_metrics(mask_union(swa, sa), rng, a.baseline)});
  }

  const Meta meta{{"n", std::to_string(a.n)},
                  {"w", std::to_string(a.w)},
                  {"convention", a.convention},
                  {"baseline_samples", std::to_string(a.baseline)},
                  {"seed", std::to_string(g.seed)},
                  {"seeds", a.seeds.describe(g.seed)}};
  Sink sink(g, "smallworld", format, out, err);
  const int p = g.precision;
  if (format == "csv") {
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows)
      table.push_back({r.mode, std::to_string(r.seed_index), fmt(r.m.clustering, p), fmt(r.m.path_length, p),
                       fmt(r.m.clustering_random, p), fmt(r.m.path_length_random, p), fmt(r.m.small_worldness, p)});
    write_csv_rows(sink.os(),
                   "mode,seed,clustering,path_length,clustering_random,path_length_random,small_worldness", table,
                   meta_line("smallworld", meta));
  } else {
    Json j;
    j["metadata"] = meta_json("smallworld", meta);
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"mode", r.mode},
                     {"seed", r.seed_index},
                     {"clustering", jnum(r.m.clustering, p)},
                     {"path_length", jnum(r.m.path_length, p)},
                     {"clustering_random", jnum(r.m.clustering_random, p)},
                     {"path_length_random", jnum(r.m.path_length_random, p)},
                     {"small_worldness", jnum(r.m.small_worldness, p)}});
    j["rows"] = arr;
    sink.os() << j.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
  std::size_t n = 64;
  std::size_t w = 8;
  std::size_t depth = 3;
  SeedArgs seeds{20, {}};
};

int cmd_spectrum(const Globals& g, const SpectrumArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "spectrum", {"json", "csv", "svg"});
  check_window_args(a.n, a.w);
  if (a.n > 1024) throw ConfigError("spectrum: dense eigensolves are limited to n <= 1024");
  const auto rep = circulant_spectrum(a.n, a.w);
  const Meta meta{{"n", std::to_string(a.n)},
                  {"w", std::to_string(a.w)},
                  {"depth", std::to_string(a.depth)},
                  {"seed", std::to_string(g.seed)},
                  {"seeds", a.seeds.describe(g.seed)}};
  Sink sink(g, "spectrum", format, out, err);
  const int p = g.precision;
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k) {
      const auto z = rep.eigenvalues[k];
      rows.push_back({std::to_string(k), fmt(z.real(), p), fmt(z.imag(), p), fmt(std::abs(z), p)});
    }
    write_csv_rows(sink.os(), "index,real,imag,abs", rows, meta_line("spectrum", meta));
  } else if (format == "svg") {
    ChartSeries s{"|lambda_k|", {}, {}};
    for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k) {
      s.x.push_back(static_cast<double>(k));
      s.y.push_back(std::abs(rep.eigenvalues[k]));
    }
    ChartOptions o;
    o.title = "Circulant spectrum, n=" + std::to_string(a.n) + ", w=" + std::to_string(a.w);
    o.x_label = "index (sorted)";
    o.y_label = "|lambda|";
    o.precision = p;
    o.comment = meta_line("spectrum", meta);
    write_line_chart(sink.os(), {s}, o);
  } else {
    const auto mix = multilayer_mixing(a.n, a.w, a.depth, a.seeds.resolve(g.seed));
    Json j;
    j["n"] = a.n;
    j["w"] = a.w;
    Json eig = Json::array();
    for (const auto& z : rep.eigenvalues) eig.push_back({jnum(z.real(), p), jnum(z.imag(), p)});
    j["eigenvalues"] = eig;
    j["lambda2_abs"] = jnum(rep.lambda2_abs, p);
    j["dense_mismatch"] = jnum(rep.dense_mismatch, p);
    Json prod = Json::array();
    for (double v : mix.product_lambda2) prod.push_back(jnum(v, p));
    j["mixing"] = {{"depth", a.depth},
                   {"product_lambda2", prod},
                   {"median_product_lambda2", jnum(mix.median_product_lambda2, p)},
                   {"circulant_lambda2_pow", jnum(mix.circulant_lambda2_pow, p)}};
    j["metadata"] = meta_json("spectrum", meta);
    sink.os() << j.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- maskviz

struct MaskvizArgs {
  std::size_t n = 64;
  std::size_t w = 8;
  std::string mask = "sa";
  std::string convention = "circular";
};

int cmd_maskviz(const Globals& g, const MaskvizArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "maskviz", {"pgm", "csv", "svg"});
  check_window_args(a.n, a.w);
  if (format != "csv" && a.n > kMaxImageN) {
    throw ConfigError("maskviz: image output is limited to n <= " + std::to_string(kMaxImageN));
  }
  const WindowSpec sa_spec{a.w, parse_convention(a.convention)};
  SeededRng rng(derive_seed(g.seed, 0, 0));
  MaskMatrix m;
  if (a.mask == "causal") {
    m = full_causal_mask(a.n);
  } else if (a.mask == "swa") {
    m = build_window_mask(a.n, {a.w, WindowConvention::CausalOneSided});
  } else {
    const auto sa = intersect_causal(build_stochastic_mask(a.n, sa_spec, sample_permutation(a.n, rng)));
    m = a.mask == "sa" ? sa : mask_union(build_window_mask(a.n, {a.w, WindowConvention::CausalOneSided}), sa);
  }
  const Meta meta{{"mask", a.mask},
                  {"n", std::to_string(a.n)},
                  {"w", std::to_string(a.w)},
                  {"convention", a.convention},
                  {"seed", std::to_string(g.seed)}};
  Sink sink(g, "maskviz", format, out, err);
  if (format == "pgm") {
    write_mask_pgm(sink.os(), m, meta_line("maskviz", meta));
  } else if (format == "svg") {
    write_mask_svg(sink.os(), m, a.n <= 64 ? 8 : 2, meta_line("maskviz", meta));
  } else {
    write_mask_csv(sink.os(), m);
    sink.os() << "# " << meta_line("maskviz", meta) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- cost

struct CostArgs {
  std::vector<std::size_t> lengths{1024, 2048, 4096, 8192, 16384, 32768};
  std::size_t w = 256;
  std::size_t d = 64;
  std::size_t heads = 1;
  std::vector<std::string> modes{"full", "swa", "sa", "fused"};
};

int cmd_cost(const Globals& g, const CostArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "cost", {"csv", "json", "svg"});
  if (a.lengths.empty()) throw ConfigError("cost: need at least one length");
  struct Row {
    std::size_t n;
    CostMode mode;
    double flops;
    std::optional<double> ratio;
  };
  std::vector<Row> rows;
  for (std::size_t n : a.lengths)
    for (const auto& name : a.modes) {
      const CostMode mode = parse_cost_mode(name);
      const double flops = cost_model(n, a.w, a.d, mode, a.heads).total_flops();
      std::optional<double> ratio;
      const std::size_t half = n / 2;
      if (n % 2 == 0 && half > 0 && (mode == CostMode::Full || half >= a.w)) {
        ratio = flops / cost_model(half, a.w, a.d, mode, a.heads).total_flops();
      }
      rows.push_back({n, mode, flops, ratio});
    }

  std::string lengths;
  for (std::size_t n : a.lengths) lengths += (lengths.empty() ? "" : ";") + std::to_string(n);
  const Meta meta{{"w", std::to_string(a.w)},
                  {"d", std::to_string(a.d)},
                  {"heads", std::to_string(a.heads)},
                  {"lengths", lengths}};
  Sink sink(g, "cost", format, out, err);
  const int p = g.precision;
  if (format == "csv") {
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows)
      table.push_back({std::to_string(r.n), std::string(to_string(r.mode)), fmt(r.flops, p),
                       r.ratio ? fmt(*r.ratio, p) : ""});
    write_csv_rows(sink.os(), "n,mode,flops,doubling_ratio", table, meta_line("cost", meta));
  } else if (format == "json") {
    Json j;
    j["metadata"] = meta_json("cost", meta);
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"n", r.n},
                     {"mode", std::string(to_string(r.mode))},
                     {"flops", jnum(r.flops, p)},
                     {"doubling_ratio", r.ratio ? jnum(*r.ratio, p) : Json(nullptr)}});
    j["rows"] = arr;
    sink.os() << j.dump(2) << '\n';
  } else {
    std::map<std::string, ChartSeries> by_mode;
    std::vector<std::string> order;
    for (const auto& r : rows) {
      const std::string name(to_string(r.mode));
      if (!by_mode.count(name)) {
        order.push_back(name);
        by_mode[name].label = name;
      }
      by_mode[name].x.push_back(static_cast<double>(r.n));
      by_mode[name].y.push_back(r.flops);
    }
    std::vector<ChartSeries> series;
    for (const auto& name : order) series.push_back(by_mode[name]);
    ChartOptions o;
    o.title = "Attention FLOPs, w=" + std::to_string(a.w) + ", d=" + std::to_string(a.d);
    o.x_label = "sequence length n";
    o.y_label = "FLOPs";
    o.log_x = true;
    o.log_y = true;
    o.precision = p;
    o.comment = meta_line("cost", meta);
    write_line_chart(sink.os(), series, o);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::vector<std::string> only;
  bool perturb_backward = false;
};

int cmd_verify(const Globals& g, const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "verify", {"json", "csv"});
  VerifyConfig cfg;
  cfg.seed = g.seed;
  cfg.only = a.only;
  cfg.perturb_backward = a.perturb_backward;
  const auto results = run_verify(cfg);
  const bool all_ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });

  std::string suites;
  for (const auto& s : a.only) suites += (suites.empty() ? "" : ";") + s;
  const Meta meta{{"seed", std::to_string(g.seed)},
                  {"only", suites.empty() ? "all" : suites},
                  {"perturb_backward", a.perturb_backward ? "1" : "0"}};
  Sink sink(g, "verify", format, out, err);
  const int p = g.precision;
  if (format == "json") {
    Json j;
    j["seed"] = g.seed;
    j["passed"] = all_ok;
    Json checks = Json::array();
    for (const auto& r : results) {
      Json values = Json::object();
      for (const auto& m : r.values) values[m.name] = jnum(m.value, p);
      checks.push_back({{"suite", r.suite}, {"name", r.name}, {"passed", r.passed}, {"values", values}});
    }
    j["checks"] = checks;
    j["metadata"] = meta_json("verify", meta);
    sink.os() << j.dump(2) << '\n';
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results) rows.push_back({r.suite, r.name, r.passed ? "1" : "0"});
    write_csv_rows(sink.os(), "suite,name,passed", rows, meta_line("verify", meta));
  }
  for (const auto& r : results)
    if (!r.passed) err << "verify: FAILED " << r.suite << "/" << r.name << '\n';
  return all_ok ? kExitOk : kExitVerificationFailed;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::size_t instances = 20;
  std::size_t n = 8;
  std::size_t dh = 4;
  std::size_t w = 3;
  double h = 1e-5;
  double tolerance = 1e-6;
  bool perturb_backward = false;
};

int cmd_gradcheck(const Globals& g, const GradcheckArgs& a, std::ostream& out, std::ostream& err) {
  choose_format(g, "gradcheck", {"json"});
  check_window_args(a.n, a.w);
  SeededRng rng(derive_seed(g.seed, 0, 0));
  GradcheckResult worst;
  for (std::size_t t = 0; t < a.instances; ++t) {
    auto inp = AttentionInputs::make(random_matrix(a.n, a.dh, rng), random_matrix(a.n, a.dh, rng),
                                     random_matrix(a.n, a.dh, rng));
    const auto mask = intersect_causal(
        build_stochastic_mask(a.n, {a.w, WindowConvention::SymmetricCircular}, sample_permutation(a.n, rng)));
    const auto r = gradcheck_attention(inp, mask, random_matrix(a.n, a.dh, rng), a.h, 1.0, a.perturb_backward);
    worst.dq = std::max(worst.dq, r.dq);
    worst.dk = std::max(worst.dk, r.dk);
    worst.dv = std::max(worst.dv, r.dv);
  }
  const bool ok = worst.worst() <= a.tolerance;
  const int p = g.precision;
  Sink sink(g, "gradcheck", "json", out, err);
  Json j;
  j["instances"] = a.instances;
  j["n"] = a.n;
  j["dh"] = a.dh;
  j["step"] = jnum(a.h, p);
  j["tolerance"] = jnum(a.tolerance, p);
  j["rel_error_dq"] = jnum(worst.dq, p);
  j["rel_error_dk"] = jnum(worst.dk, p);
  j["rel_error_dv"] = jnum(worst.dv, p);
  j["passed"] = ok;
  j["metadata"] = meta_json("gradcheck", {{"seed", std::to_string(g.seed)},
                                          {"w", std::to_string(a.w)},
                                          {"perturb_backward", a.perturb_backward ? "1" : "0"}});
  sink.os() << j.dump(2) << '\n';
  return ok ? kExitOk : kExitVerificationFailed;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::size_t n = 0;
  std::size_t d = 4;
  std::size_t w = 8;
  std::vector<std::size_t> ws{16, 32};
  std::size_t trials = 10000;
  std::string temperature = "inf";
  double gate_scale = 1.0;
};

int cmd_stats_bias(const Globals& g, const StatsArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "stats bias", {"csv", "json"});
  const std::size_t n = a.n ? a.n : 256;
  for (std::size_t w : a.ws) check_window_args(n, w);
  const double tau = parse_temperature(a.temperature);
  SeededRng rng(derive_seed(g.seed, 0, 0));
  const Matrix v = random_matrix(n, a.d, rng);
  const auto rep = sa_bias_mc(v, a.ws, tau, a.trials, rng);
  const Meta meta{{"n", std::to_string(n)},
                  {"d", std::to_string(a.d)},
                  {"trials", std::to_string(a.trials)},
                  {"temperature", a.temperature},
                  {"seed", std::to_string(g.seed)}};
  Sink sink(g, "stats_bias", format, out, err);
  const int p = g.precision;
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : rep.points)
      rows.push_back({std::to_string(pt.w), fmt(pt.deviation, p), fmt(pt.std_error, p), fmt(pt.exact, p)});
    write_csv_rows(sink.os(), "w,deviation,std_error,exact", rows, meta_line("stats bias", meta));
  } else {
    Json j;
    j["metadata"] = meta_json("stats bias", meta);
    Json arr = Json::array();
    for (const auto& pt : rep.points)
      arr.push_back({{"w", pt.w},
                     {"deviation", jnum(pt.deviation, p)},
                     {"std_error", jnum(pt.std_error, p)},
                     {"exact", jnum(pt.exact, p)}});
    j["points"] = arr;
    sink.os() << j.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_stats_variance(const Globals& g, const StatsArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "stats variance", {"csv", "json"});
  const std::size_t n = a.n ? a.n : 64;
  check_window_args(n, a.w);
  if (a.trials < 100) throw ConfigError("stats variance: --trials must be >= 100");
  SeededRng rng(derive_seed(g.seed, 0, 0));
  const Matrix v = random_matrix(n, a.d, rng);
  const auto r = sa_variance_mc(v, a.w, a.trials, rng);
  const Meta meta{{"d", std::to_string(a.d)}, {"seed", std::to_string(g.seed)}};
  Sink sink(g, "stats_variance", format, out, err);
  const int p = g.precision;
  const std::vector<std::pair<std::string, double>> fields{
      {"sigma_v2", r.sigma_v2}, {"b_max", r.b_max},   {"exact", r.exact},
      {"bound", r.bound},       {"mc", r.mc},         {"mc_std_error", r.mc_std_error},
      {"token_exact", r.token_exact}, {"token_mc", r.token_mc}};
  if (format == "csv") {
    std::string header = "n,w,trials";
    std::vector<std::string> row{std::to_string(n), std::to_string(a.w), std::to_string(a.trials)};
    for (const auto& [k, val] : fields) {
      header += "," + k;
      row.push_back(fmt(val, p));
    }
    write_csv_rows(sink.os(), header, {row}, meta_line("stats variance", meta));
  } else {
    Json j;
    j["n"] = n;
    j["w"] = a.w;
    j["trials"] = a.trials;
    for (const auto& [k, val] : fields) j[k] = jnum(val, p);
    j["metadata"] = meta_json("stats variance", meta);
    sink.os() << j.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_stats_bvdecomp(const Globals& g, const StatsArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = choose_format(g, "stats bvdecomp", {"csv", "json"});
  const std::size_t n = a.n ? a.n : 32;
  check_window_args(n, a.w);
  SeededRng rng(derive_seed(g.seed, 0, 0));
  auto inp = AttentionInputs::make(random_matrix(n, a.d, rng), random_matrix(n, a.d, rng), random_matrix(n, a.d, rng));
  GateParams gates{random_matrix(a.d, a.d, rng, -a.gate_scale, a.gate_scale),
                   random_matrix(a.d, a.d, rng, -a.gate_scale, a.gate_scale)};
  const auto r = fusion_bv_decompose(inp, gates, a.w, a.trials, rng);
  const Meta meta{{"gate_scale", fmt(a.gate_scale, g.precision)}, {"seed", std::to_string(g.seed)}};
  Sink sink(g, "stats_bvdecomp", format, out, err);
  const int p = g.precision;
  const std::vector<std::pair<std::string, double>> fields{{"mse", r.mse},
                                                           {"mse_std_error", r.mse_std_error},
                                                           {"bias2", r.bias2},
                                                           {"bias2_gate_form", r.bias2_gate_form},
                                                           {"swa_bias2", r.swa_bias2},
                                                           {"variance", r.variance},
                                                           {"variance_uniform_approx", r.variance_uniform_approx},
                                                           {"dim_variance_ratio", r.dim_variance_ratio},
                                                           {"residual", r.residual},
                                                           {"combined_std_error", r.combined_std_error}};
  if (format == "csv") {
    std::string header = "n,d,w,trials";
    std::vector<std::string> row{std::to_string(n), std::to_string(a.d), std::to_string(a.w),
                                 std::to_string(a.trials)};
    for (const auto& [k, val] : fields) {
      header += "," + k;
      row.push_back(fmt(val, p));
    }
    write_csv_rows(sink.os(), header, {row}, meta_line("stats bvdecomp", meta));
  } else {
    Json j;
    j["n"] = n;
    j["d"] = a.d;
    j["w"] = a.w;
    j["trials"] = a.trials;
    for (const auto& [k, val] : fields) j[k] = jnum(val, p);
    j["metadata"] = meta_json("stats bvdecomp", meta);
    sink.os() << j.dump(2) << '\n';
  }
  return kExitOk;
}

void add_seed_options(CLI::App* cmd, SeedArgs& s) {
  auto* count = cmd->add_option("--seeds", s.count, "number of seeds derived from --seed")
                    ->capture_default_str()
                    ->check(CLI::Range(std::size_t{1}, kMaxSeeds));
  cmd->add_option("--seed-list", s.list, "explicit comma-separated seeds")->delimiter(',')->excludes(count);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic and sliding-window attention analysis toolkit", "sattn"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.footer(kSchemas);

  Globals g;
  app.add_option("--seed", g.seed, "root seed")->capture_default_str();
  app.add_option("--out", g.out, "output file (default: stdout or $SATTN_OUT_DIR)");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json", "svg", "pgm"}));
  app.add_option("--precision", g.precision, "significant digits in reports")
      ->capture_default_str()
      ->check(CLI::Range(1, 17));

  const auto n_range = CLI::Range(std::size_t{1}, kMaxN);
  const auto trial_range = CLI::Range(std::size_t{1}, kMaxTrials);
  const auto d_range = CLI::Range(std::size_t{1}, kMaxD);
  std::function<int()> action;

  CoverageArgs cov;
  auto* c_cov = app.add_subcommand("coverage", "receptive-field coverage per layer");
  c_cov->add_option("--n", cov.n)->capture_default_str()->check(n_range);
  c_cov->add_option("--w", cov.w)->capture_default_str()->check(n_range);
  c_cov->add_option("--layers", cov.layers)->capture_default_str()->check(CLI::Range(std::size_t{0}, kMaxLayers));
  c_cov->add_option("--modes", cov.modes, "swa, sa, fused")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::IsMember({"swa", "sa", "fused"}));
  c_cov->add_option("--convention", cov.convention)->capture_default_str()->check(CLI::IsMember({"circular", "causal"}));
  add_seed_options(c_cov, cov.seeds);
  c_cov->callback([&] { action = [&] { return cmd_coverage(g, cov, out, err); }; });

  ConnprobArgs cp;
  auto* c_cp = app.add_subcommand("connprob", "pairwise connection probability under random permutations");
  c_cp->add_option("--n", cp.n)->capture_default_str()->check(n_range);
  c_cp->add_option("--w", cp.w)->capture_default_str()->check(n_range);
  c_cp->add_option("--trials", cp.trials)->capture_default_str()->check(trial_range);
  c_cp->add_flag("--causal", cp.causal, "off-diagonal density of causal SA masks");
  c_cp->callback([&] { action = [&] { return cmd_connprob(g, cp, out, err); }; });

  SmallworldArgs sw;
  auto* c_sw = app.add_subcommand("smallworld", "clustering and path length of SWA, SA and their union");
  c_sw->add_option("--n", sw.n)->capture_default_str()->check(n_range);
  c_sw->add_option("--w", sw.w)->capture_default_str()->check(n_range);
  c_sw->add_option("--convention", sw.convention)->capture_default_str()->check(CLI::IsMember({"circular", "causal"}));
  c_sw->add_option("--baseline-samples", sw.baseline)->capture_default_str()->check(CLI::Range(10, 1000));
  add_seed_options(c_sw, sw.seeds);
  c_sw->callback([&] { action = [&] { return cmd_smallworld(g, sw, out, err); }; });

  SpectrumArgs sp;
  auto* c_sp = app.add_subcommand("spectrum", "circulant spectrum and multi-layer mixing");
  c_sp->add_option("--n", sp.n)->capture_default_str()->check(n_range);
  c_sp->add_option("--w", sp.w)->capture_default_str()->check(n_range);
  c_sp->add_option("--depth", sp.depth)->capture_default_str()->check(CLI::Range(std::size_t{1}, std::size_t{64}));
  add_seed_options(c_sp, sp.seeds);
  c_sp->callback([&] { action = [&] { return cmd_spectrum(g, sp, out, err); }; });

  MaskvizArgs mv;
  auto* c_mv = app.add_subcommand("maskviz", "render an attention mask");
  c_mv->add_option("--n", mv.n)->capture_default_str()->check(n_range);
  c_mv->add_option("--w", mv.w)->capture_default_str()->check(n_range);
  c_mv->add_option("--mask", mv.mask)->capture_default_str()->check(CLI::IsMember({"causal", "swa", "sa", "fused"}));
  c_mv->add_option("--convention", mv.convention, "SA window convention")
      ->capture_default_str()
      ->check(CLI::IsMember({"circular", "causal"}));
  c_mv->callback([&] { action = [&] { return cmd_maskviz(g, mv, out, err); }; });

  CostArgs co;
  auto* c_co = app.add_subcommand("cost", "analytic FLOP counts per sequence length");
  c_co->add_option("--lengths", co.lengths)->delimiter(',')->capture_default_str()->check(CLI::PositiveNumber);
  c_co->add_option("--w", co.w)->capture_default_str()->check(CLI::PositiveNumber);
  c_co->add_option("--d", co.d)->capture_default_str()->check(CLI::PositiveNumber);
  c_co->add_option("--heads", co.heads)->capture_default_str()->check(CLI::PositiveNumber);
  c_co->add_option("--modes", co.modes)
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::IsMember({"full", "swa", "sa", "fused"}));
  c_co->callback([&] { action = [&] { return cmd_cost(g, co, out, err); }; });

  VerifyArgs ve;
  auto* c_ve = app.add_subcommand("verify", "run the verification suites");
  c_ve->add_option("--only", ve.only, "comma-separated suites")->delimiter(',')->check(CLI::IsMember(verify_suite_names()));
  c_ve->add_flag("--perturb-backward", ve.perturb_backward, "inject a fault into the analytic gradients");
  c_ve->callback([&] { action = [&] { return cmd_verify(g, ve, out, err); }; });

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "finite-difference check of the attention backward pass");
  c_gc->add_option("--instances", gc.instances)->capture_default_str()->check(CLI::Range(1, 10000));
  c_gc->add_option("--n", gc.n)->capture_default_str()->check(CLI::Range(1, 64));
  c_gc->add_option("--dh", gc.dh)->capture_default_str()->check(CLI::Range(1, 64));
  c_gc->add_option("--w", gc.w)->capture_default_str()->check(CLI::Range(1, 64));
  c_gc->add_option("--step", gc.h, "finite-difference step")->capture_default_str()->check(CLI::PositiveNumber);
  c_gc->add_option("--tolerance", gc.tolerance)->capture_default_str()->check(CLI::PositiveNumber);
  c_gc->add_flag("--perturb-backward", gc.perturb_backward, "inject a fault into the analytic gradients");
  c_gc->callback([&] { action = [&] { return cmd_gradcheck(g, gc, out, err); }; });

  StatsArgs st;
  auto* c_st = app.add_subcommand("stats", "uniform-attention bias, variance and fusion decomposition");
  c_st->require_subcommand(1, 1);
  c_st->fallthrough();
  c_st->add_option("--n", st.n, "sequence length (default 256 / 64 / 32)")->check(n_range);
  c_st->add_option("--d", st.d)->capture_default_str()->check(d_range);
  c_st->add_option("--trials", st.trials)->capture_default_str()->check(trial_range);
  auto* c_bias = c_st->add_subcommand("bias", "deviation from mean(V) per window size");
  c_bias->add_option("--ws", st.ws)->delimiter(',')->capture_default_str()->check(n_range);
  c_bias->add_option("--temperature", st.temperature, "positive number or 'inf'")->capture_default_str();
  c_bias->callback([&] { action = [&] { return cmd_stats_bias(g, st, out, err); }; });
  auto* c_var = c_st->add_subcommand("variance", "closed-form and Monte-Carlo variance");
  c_var->add_option("--w", st.w)->capture_default_str()->check(n_range);
  c_var->callback([&] { action = [&] { return cmd_stats_variance(g, st, out, err); }; });
  auto* c_bv = c_st->add_subcommand("bvdecomp", "MSE of the gated fusion versus bias^2 + variance");
  c_bv->add_option("--w", st.w)->capture_default_str()->check(n_range);
  c_bv->add_option("--gate-scale", st.gate_scale, "gate weights uniform in [-s, s]")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_bv->callback([&] { action = [&] { return cmd_stats_bvdecomp(g, st, out, err); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    const CLI::App* target = subs.empty() ? &app : subs.front();
    if (!subs.empty() && !subs.front()->get_subcommands().empty()) target = subs.front()->get_subcommands().front();
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "sattn 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    return action();
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace sattn::cli
