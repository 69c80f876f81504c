// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
#include <fmt/format.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "oracles/dft.hpp"
#include "oracles/moments.hpp"
#include "oracles/qp.hpp"
#include "oracles/roughness.hpp"
#include "polishsense/eval.hpp"
#include "polishsense/features.hpp"
#include "polishsense/gbr.hpp"
#include "polishsense/gp.hpp"
#include "polishsense/io.hpp"
#include "polishsense/linear.hpp"
#include "polishsense/pipeline.hpp"
#include "polishsense/signal.hpp"
#include "polishsense/spectral.hpp"
#include "polishsense/surface.hpp"
#include "polishsense/svr.hpp"
#include "polishsense/tree.hpp"
#include "support/temp_dir.hpp"

using namespace polishsense;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failures so one criterion reports every broken sub-check.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(std::string s) { notes_.push_back(std::move(s)); }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::string out;
    const auto& items = ok() ? notes_ : failures_;
    for (std::size_t i = 0; i < items.size() && i < 6; ++i) out += (i ? "; " : "") + items[i];
    if (items.size() > 6) out += fmt::format("; +{} more", items.size() - 6);
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::abs(want);
}

int cli(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "polishsense");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, e);
  if (err) *err = e.str();
  return code;
}

// --- 1. spectral conventions ----------------------------------------------

void spectral_conventions(Checks& c) {
  const double rate = 10000.0;
  std::mt19937_64 gen(101);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);

  // 100 random frames, each with its own amplitude scale.
  std::vector<double> x(100 * 10000);
  for (std::size_t f = 0; f < 100; ++f) {
    const double s = scale(gen);
    for (std::size_t n = 0; n < 10000; ++n) x[f * 10000 + n] = s * normal(gen);
  }
  const Spectrogram spec = stft(x, rate, {});
  c.expect(spec.frames() == 100, "expected 100 frames");
  const auto w = oracle::hamming(10000);
  double worst = 0.0;
  for (Eigen::Index t = 0; t < spec.frames(); ++t) {
    long double time_energy = 0.0L;
    for (std::size_t n = 0; n < 10000; ++n) {
      const long double v = w[n] * x[static_cast<std::size_t>(t) * 10000 + n];
      time_energy += v * v;
    }
    const auto row = spec.power.row(t);
    const double freq_energy = (row(0) + row(8192) + 2.0 * row.segment(1, 8191).sum()) / 16384.0;
    worst = std::max(worst, rel_err(freq_energy, static_cast<double>(time_energy)));
  }
  c.expect(worst <= 1e-9, fmt::format("Parseval worst rel err {:.3e} > 1e-9", worst));
  c.note(fmt::format("Parseval worst rel err {:.2e} over 100 frames", worst));

  // Spot-check a frame against a direct DFT.
  std::vector<double> frame(10000);
  for (std::size_t n = 0; n < 10000; ++n) frame[n] = w[n] * x[n];
  double dft_worst = 0.0;
  for (std::size_t k : {0u, 1u, 999u, 1638u, 8192u}) {
    dft_worst = std::max(dft_worst, rel_err(spec.power(0, static_cast<Eigen::Index>(k)),
                                            oracle::dft_power(frame, 16384, k)));
  }
  c.expect(dft_worst <= 1e-8, fmt::format("FFT vs direct DFT rel err {:.3e}", dft_worst));

  // 1000 Hz sine in a full short run, truncated to 240 frames.
  VibrationRun run;
  run.manifest.run_id = "sine";
  run.manifest.sample_rate_hz = rate;
  run.manifest.sample_count = 3'600'000;
  run.samples.resize(run.manifest.sample_count);
  for (std::size_t i = 0; i < run.samples.size(); ++i) {
    run.samples[i] = std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) / rate) +
                     0.1 * normal(gen);
  }
  const Spectrogram s = stft(truncate_run(run), {});
  c.expect(s.frames() == 240, fmt::format("sine run has {} frames, expected 240", s.frames()));
  // Nearest bin by the oracle's own arithmetic.
  const double bin_hz = rate / 16384.0;
  const auto nearest = static_cast<Eigen::Index>(std::floor(1000.0 / bin_hz + 0.5));
  std::size_t hits = 0;
  for (Eigen::Index t = 0; t < s.frames(); ++t) {
    Eigen::Index arg;
    s.power.row(t).maxCoeff(&arg);
    hits += arg == nearest;
  }
  c.expect(hits == 240, fmt::format("argmax at nearest bin in {}/240 frames", hits));
  c.note(fmt::format("argmax = bin {} in {}/240 frames", nearest, hits));

  c.expect(s.bin_hz == 0.6103515625, fmt::format("bin_hz = {:.17g}", s.bin_hz));
  c.expect(std::round(s.bin_hz * 100.0) == 61.0, "bin_hz does not round to 0.61");
  c.note(fmt::format("bin_hz = {:.10f}", s.bin_hz));
}

// --- 2. surface oracle -----------------------------------------------------

void surface_oracle(Checks& c) {
  std::mt19937_64 gen(202);
  std::uniform_int_distribution<int> dim(1, 512);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> offset(-1e3, 1e3), pa(0.1, 10.0);
  double worst = 0.0, worst_shift = 0.0, worst_scale = 0.0;
  bool exact_pow2 = true;
  for (int trial = 0; trial < 50; ++trial) {
    Micrograph m;
    const int rows = trial == 0 ? 512 : dim(gen);
    const int cols = trial == 0 ? 512 : dim(gen);
    m.heights.resize(rows, cols);
    const double base = offset(gen), amp = std::exp(normal(gen));
    for (Eigen::Index i = 0; i < m.heights.size(); ++i) m.heights.data()[i] = base + amp * normal(gen);
    m.pixel_area = pa(gen);
    const double sa = areal_roughness(m);
    const double want = oracle::two_pass_sa(m.heights, m.pixel_area);
    if (want > 0.0) worst = std::max(worst, rel_err(sa, want));
    else c.expect(sa == 0.0, "Sa of a single cell must be 0");

    Micrograph shifted = m;
    shifted.heights.array() += offset(gen);
    if (sa > 0.0) worst_shift = std::max(worst_shift, rel_err(areal_roughness(shifted), sa));

    for (double k : {2.0, -0.5, 4.0}) {
      Micrograph scaled = m;
      scaled.heights *= k;
      exact_pow2 = exact_pow2 && areal_roughness(scaled) == std::abs(k) * sa;
    }
    const double k = -3.7;
    Micrograph scaled = m;
    scaled.heights *= k;
    if (sa > 0.0) worst_scale = std::max(worst_scale, rel_err(areal_roughness(scaled), std::abs(k) * sa));
  }
  c.expect(worst <= 1e-12, fmt::format("oracle rel err {:.3e} > 1e-12", worst));
  c.expect(worst_shift <= 1e-12, fmt::format("translation rel err {:.3e} > 1e-12", worst_shift));
  c.expect(exact_pow2, "power-of-two scaling not exact");
  c.expect(worst_scale <= 1e-12, fmt::format("scaling rel err {:.3e} > 1e-12", worst_scale));
  c.note(fmt::format("oracle {:.1e}, translation {:.1e}, scaling {:.1e} (exact for 2^k)", worst,
                     worst_shift, worst_scale));
}

// --- 3. moment oracle ------------------------------------------------------

void moment_oracle(Checks& c) {
  const std::vector<double> four = {1, 2, 3, 4};
  const Moments m = moments(four);
  c.expect(m.mean == 2.5 && m.variance == 1.25 && m.skewness == 0.0 && m.kurtosis == 1.64,
           fmt::format("{{1,2,3,4}} -> ({:.17g}, {:.17g}, {:.17g}, {:.17g})", m.mean, m.variance,
                       m.skewness, m.kurtosis));

  std::mt19937_64 gen(303);
  double worst = 0.0;
  const std::size_t sizes[] = {2, 3, 10, 1000, 100000, 1000000};
  int trial = 0;
  for (std::size_t n : sizes) {
    for (int kind = 0; kind < 3; ++kind, ++trial) {
      std::vector<double> x(n);
      std::exponential_distribution<double> e(0.5);
      std::lognormal_distribution<double> l(1.0, 0.6);
      std::gamma_distribution<double> g(3.0, 100.0);
      for (auto& v : x) v = kind == 0 ? e(gen) : kind == 1 ? 1e3 + l(gen) : g(gen);
      const Moments got = moments(x);
      const auto want = oracle::two_pass_moments(x);
      worst = std::max({worst, rel_err(got.mean, want.mean), rel_err(got.variance, want.variance)});
      // Skewness of a 2-point sample is exactly 0 and kurtosis exactly 1.
      if (std::abs(want.skewness) > 1e-6) worst = std::max(worst, rel_err(got.skewness, want.skewness));
      else c.expect(std::abs(got.skewness - want.skewness) < 1e-10, "near-zero skewness mismatch");
      worst = std::max(worst, rel_err(got.kurtosis, want.kurtosis));
    }
  }
  c.expect(worst <= 1e-10, fmt::format("worst rel err {:.3e} > 1e-10", worst));
  c.note(fmt::format("{{1,2,3,4}} exact; worst rel err {:.2e} on {} sequences up to 1e6", worst, trial));
}

// --- 4. model correctness --------------------------------------------------

Eigen::MatrixXd gaussian(std::mt19937_64& gen, Eigen::Index n, Eigen::Index p) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = d(gen);
  return x;
}

void model_suite(Checks& c) {
  std::mt19937_64 gen(404);

  // OLS orthogonality.
  double ortho = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd x = gaussian(gen, 30 + t, 1 + t % 6);
    const Eigen::VectorXd y = gaussian(gen, x.rows(), 1).col(0) * 5.0;
    const LinearModel m = fit_linear(x, y);
    Eigen::MatrixXd a(x.rows(), x.cols() + 1);
    a << Eigen::VectorXd::Ones(x.rows()), x;
    const Eigen::VectorXd r = y - (x * m.coef).array().matrix() - Eigen::VectorXd::Constant(x.rows(), m.intercept);
    ortho = std::max(ortho, (a.transpose() * r).lpNorm<Eigen::Infinity>());
  }
  c.expect(ortho < 1e-8, fmt::format("OLS orthogonality {:.3e}", ortho));

  // Ridge shrinkage.
  bool monotone = true;
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd x = gaussian(gen, 25, 8);
    const Eigen::VectorXd y = gaussian(gen, 25, 1).col(0);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const double norm = fit_ridge(x, y, lambda).coef.norm();
      monotone = monotone && norm <= prev;
      prev = norm;
    }
  }
  c.expect(monotone, "ridge coefficient norm not monotone in lambda");

  // GP interpolation.
  Eigen::MatrixXd gx(10, 1);
  Eigen::VectorXd gy(10);
  for (int i = 0; i < 10; ++i) {
    gx(i, 0) = 2.5 * i;
    gy(i) = std::sin(static_cast<double>(i)) + 0.3 * i;
  }
  const GpModel gp = fit_gp(gx, gy, {});
  double gp_err = 0.0;
  for (int i = 0; i < 10; ++i) gp_err = std::max(gp_err, std::abs(gp.predict(gx.row(i).transpose()) - gy(i)));
  c.expect(gp_err < 1e-6, fmt::format("GP interpolation error {:.3e}", gp_err));

  // Tree zero training error.
  double tree_err = 0.0;
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd x = gaussian(gen, 80, 3);
    const Eigen::VectorXd y = gaussian(gen, 80, 1).col(0);
    const RegressionTree tree = fit_tree(x, y);
    for (Eigen::Index i = 0; i < x.rows(); ++i) tree_err = std::max(tree_err, std::abs(tree.predict(x.row(i).transpose()) - y(i)));
  }
  c.expect(tree_err == 0.0, fmt::format("tree training error {:.3e}", tree_err));

  // Forest mean, exactly.
  {
    const Eigen::MatrixXd x = gaussian(gen, 24, 6);
    const Eigen::VectorXd y = gaussian(gen, 24, 1).col(0);
    const Forest f = fit_forest(x, y, {}, 42);
    const Eigen::MatrixXd q = gaussian(gen, 50, 6);
    bool exact = true;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      double sum = 0.0;
      for (const auto& t : f.trees) sum += t.predict(q.row(i).transpose());
      exact = exact && f.predict(q.row(i).transpose()) == sum / static_cast<double>(f.trees.size());
    }
    c.expect(exact, "forest prediction differs from the mean of its trees");
  }

  // SVR duality gap on 20 random instances of up to 50 points.
  std::uniform_int_distribution<int> rows(5, 50), cols(1, 10);
  int gap_fail = 0;
  double worst_gap = 0.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd x = gaussian(gen, t == 0 ? 50 : rows(gen), cols(gen));
    if (t % 4 == 3) x.col(0) *= 1e3;  // poorly scaled columns
    const Eigen::VectorXd y = x * gaussian(gen, x.cols(), 1).col(0) + 0.3 * gaussian(gen, x.rows(), 1).col(0);
    const SvrModel m = fit_svr(x, y, {});
    const double rel = m.duality_gap() / (1.0 + std::abs(m.primal_objective));
    worst_gap = std::max(worst_gap, rel);
    gap_fail += !(rel < 1e-6);
  }
  c.expect(gap_fail == 0, fmt::format("SVR gap test failed on {}/20 instances", gap_fail));

  // SVR vs dense QP oracle on up to 6 points.
  std::uniform_int_distribution<int> small(2, 6);
  std::uniform_real_distribution<double> cost(0.1, 10.0), eps(0.0, 0.5);
  double worst_obj = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = gaussian(gen, small(gen), 1 + t % 3);
    const Eigen::VectorXd y = 2.0 * x.col(0) + 0.5 * gaussian(gen, x.rows(), 1).col(0);
    SvrParams p;
    p.c = cost(gen);
    p.epsilon = eps(gen);
    const SvrModel m = fit_svr(x, y, p);
    const double want = oracle::svr_objective(x, y, p.c, p.epsilon);
    worst_obj = std::max(worst_obj, std::abs(m.primal_objective - want) / (1.0 + std::abs(want)));
  }
  c.expect(worst_obj <= 1e-5, fmt::format("SVR vs QP oracle objective differs by {:.3e}", worst_obj));

  // GBR monotone training MSE.
  {
    const Eigen::MatrixXd x = gaussian(gen, 60, 5);
    const Eigen::VectorXd y = x.col(0).array().square().matrix() + 0.2 * gaussian(gen, 60, 1).col(0);
    const GbrModel g = fit_gbr(x, y, {});
    double prev = std::numeric_limits<double>::infinity();
    bool mono = g.stages.size() == 100;
    for (std::size_t k = 0; k <= g.stages.size(); ++k) {
      double mse = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double r = y(i) - g.predict(x.row(i).transpose(), k);
        mse += r * r;
      }
      mse /= static_cast<double>(x.rows());
      mono = mono && mse <= prev;
      prev = mse;
    }
    c.expect(mono, "GBR training MSE increased over stages");
  }
  c.note(fmt::format("OLS {:.1e}, GP {:.1e}, tree 0, SVR gap {:.1e}, SVR-QP {:.1e}", ortho, gp_err,
                     worst_gap, worst_obj));
}

// --- shared 24-run campaign ------------------------------------------------

struct Campaign {
  fs::path root;
  double seconds = 0.0;
  std::string error;
};

Campaign run_campaign(const fs::path& root) {
  Campaign c{root};
  const auto t0 = Clock::now();
  std::string err;
  const fs::path data = root / "data";
  if (cli({"gen", "--seed", "42", "--out", data.string()}, &err) != 0 ||
      cli({"extract", "--data", data.string(), "--mode", "both"}, &err) != 0 ||
      cli({"evaluate", "--features", data.string(), "--models", "all", "--modes", "both", "--seed",
           "42"},
          &err) != 0) {
    c.error = err;
  }
  c.seconds = seconds_since(t0);
  return c;
}

// --- 5. LOOCV mechanics ----------------------------------------------------

void loocv_mechanics(Checks& c, const Campaign& camp) {
  c.expect(camp.error.empty(), "pipeline failed: " + camp.error);
  if (!camp.error.empty()) return;
  const FeatureTable table = load_feature_csv(camp.root / "data" / "features_separate.csv");
  c.expect(table.rows.size() == 24, fmt::format("{} runs, expected 24", table.rows.size()));
  const EvalReport r = loocv(table, ModelSpec::defaults(ModelKind::Tree));
  std::set<std::string> ids;
  for (const auto& f : r.fold_predictions) ids.insert(f.run_id);
  c.expect(r.fold_predictions.size() == 24 && ids.size() == 24,
           fmt::format("{} folds covering {} distinct runs", r.fold_predictions.size(), ids.size()));
  for (std::size_t i = 0; i < r.fold_predictions.size() && i < table.rows.size(); ++i) {
    c.expect(r.fold_predictions[i].run_id == table.rows[i].run_id, "fold order differs from run order");
  }

  // Hand-rolled oracle on 5 runs: refit a tree on the other four.
  const std::vector<std::size_t> pick = {0, 5, 11, 18, 23};
  std::vector<FeatureVector> subset;
  for (auto i : pick) subset.push_back(table.rows[i]);
  const EvalReport sr = loocv(subset, ModelSpec::defaults(ModelKind::Tree));
  const auto p = static_cast<Eigen::Index>(subset.front().values.size());
  std::size_t exact = 0;
  for (std::size_t held = 0; held < subset.size(); ++held) {
    Eigen::MatrixXd x(4, p);
    Eigen::VectorXd y(4);
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (i == held) continue;
      for (Eigen::Index j = 0; j < p; ++j) x(k, j) = subset[i].values[static_cast<std::size_t>(j)];
      y(k++) = subset[i].target;
    }
    const RegressionTree t = fit_tree(x, y);
    const Eigen::Map<const Eigen::VectorXd> q(subset[held].values.data(), p);
    exact += sr.fold_predictions[held].y_pred == t.predict(q);
  }
  c.expect(exact == 5, fmt::format("{}/5 fold predictions bit-identical to refits", exact));
  c.note(fmt::format("24 folds, each run once; 5-run refit oracle {}/5 bit-exact", exact));
}

// --- 6. planted-signal findings --------------------------------------------

nlohmann::json read_report(const fs::path& data, const char* stem) {
  return nlohmann::json::parse(io::read_text(data / "reports" / (std::string(stem) + ".json")));
}

void planted_signal(Checks& c, const Campaign& camp) {
  c.expect(camp.error.empty(), "pipeline failed: " + camp.error);
  if (!camp.error.empty()) return;
  const fs::path data = camp.root / "data";
  const auto tree_sep = read_report(data, "tree_separate");
  const auto tree_tog = read_report(data, "tree_together");
  const auto lin_sep = read_report(data, "linear_separate");
  const auto lin_tog = read_report(data, "linear_together");
  const double ts = tree_sep["mae"].get<double>(), tt = tree_tog["mae"].get<double>();
  const double ls = lin_sep["mae"].get<double>(), lt = lin_tog["mae"].get<double>();

  // Constant-mean baseline under the same leave-one-out protocol.
  const FeatureTable table = load_feature_csv(data / "features_separate.csv");
  const Eigen::VectorXd y = table.targets();
  const auto n = static_cast<double>(y.size());
  double baseline = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) baseline += std::abs(y(i) - (y.sum() - y(i)) / (n - 1.0));
  baseline /= n;

  const auto names = tree_sep["feature_names"].get<std::vector<std::string>>();
  const auto imp = tree_sep["importance_summary"].get<std::vector<double>>();
  double on_signal = 0.0, total = 0.0;
  for (std::size_t j = 0; j < imp.size(); ++j) {
    total += imp[j];
    const std::string band = names[j].substr(0, 6);
    if (band == "band02" || band == "band09" || band == "band12") on_signal += imp[j];
  }
  const double share = total > 0.0 ? on_signal / total : 0.0;

  c.expect(ts <= tt, fmt::format("(a) tree separate {:.4f} > together {:.4f}", ts, tt));
  c.expect(ts * 2.0 < baseline, fmt::format("(b) tree separate {:.4f} not < baseline {:.4f} / 2", ts, baseline));
  c.expect(share >= 0.8, fmt::format("(c) importance share on bands 2/9/12 {:.3f} < 0.8", share));
  c.expect(ls > lt, fmt::format("(d) linear separate {:.4f} <= together {:.4f}", ls, lt));
  c.note(fmt::format("(a) tree sep {:.4f} <= tog {:.4f}", ts, tt));
  c.note(fmt::format("(b) baseline {:.4f} = {:.2f}x tree sep", baseline, baseline / ts));
  c.note(fmt::format("(c) importance on bands 2/9/12 {:.1f}%", 100.0 * share));
  c.note(fmt::format("(d) linear sep {:.4f} > tog {:.4f}", ls, lt));
}

// --- 7. determinism --------------------------------------------------------

void determinism(Checks& c, const Campaign& first, const fs::path& second_root) {
  c.expect(first.error.empty(), "first pipeline failed: " + first.error);
  // A different worker count must not change any byte.
  setenv("POLISHSENSE_THREADS", "3", 1);
  const Campaign second = run_campaign(second_root);
  unsetenv("POLISHSENSE_THREADS");
  c.expect(second.error.empty(), "second pipeline failed: " + second.error);
  if (!first.error.empty() || !second.error.empty()) return;

  std::size_t compared = 0, csvs = 0, reports = 0;
  const fs::path a = first.root / "data", b = second.root / "data";
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    const fs::path other = b / rel;
    if (!fs::exists(other)) {
      c.expect(false, "missing in rerun: " + rel.string());
      continue;
    }
    c.expect(io::read_text(entry.path()) == io::read_text(other), "bytes differ: " + rel.string());
    ++compared;
    csvs += rel.string().starts_with("features_");
    reports += rel.parent_path() == "reports";
  }
  c.expect(csvs == 2, fmt::format("{} feature CSVs compared, expected 2", csvs));
  c.expect(reports == 14, fmt::format("{} reports compared, expected 14", reports));
  c.note(fmt::format("{} files byte-identical (2 feature CSVs, {} reports), rerun with 3 workers",
                     compared, reports));
}

struct Criterion {
  int number;
  const char* title;
  double budget_seconds;
};

bool report(const Criterion& cr, const Checks& c, double seconds) {
  const bool in_time = seconds < cr.budget_seconds;
  const bool pass = c.ok() && in_time;
  std::string detail = c.summary();
  if (!in_time) detail += fmt::format("{}runtime {:.1f}s exceeds {:.0f}s", detail.empty() ? "" : "; ", seconds, cr.budget_seconds);
  std::cout << fmt::format("{} criterion {}: {} [{:.1f}s] {}\n", pass ? "PASS" : "FAIL", cr.number,
                           cr.title, seconds, detail)
            << std::flush;
  return pass;
}

}  // namespace

int main() {
  bool all = true;
  auto timed = [&](const Criterion& cr, const std::function<void(Checks&)>& body,
                   double extra_seconds = 0.0) {
    Checks c;
    const auto t0 = Clock::now();
    try {
      body(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    all = report(cr, c, seconds_since(t0) + extra_seconds) && all;
  };

  timed({1, "spectral conventions", 10.0}, spectral_conventions);
  timed({2, "surface oracle", 5.0}, surface_oracle);
  timed({3, "moment oracle", 5.0}, moment_oracle);
  timed({4, "model correctness suite", 60.0}, model_suite);

  testing::TempDir first_dir("polishsense-accept-a");
  std::optional<Campaign> camp;
  // The campaign is built inside criterion 5, so its cost lands there.
  timed({5, "LOOCV mechanics", 30.0}, [&](Checks& c) {
    camp = run_campaign(first_dir.path());
    c.note(fmt::format("gen+extract+evaluate {:.1f}s", camp->seconds));
    loocv_mechanics(c, *camp);
  });
  const double campaign_seconds = camp ? camp->seconds : 0.0;
  // Criterion 6 covers the full pipeline run as well as its own checks.
  timed({6, "planted-signal findings", 300.0},
        [&](Checks& c) {
          if (!camp) throw std::runtime_error("campaign did not run");
          planted_signal(c, *camp);
        },
        campaign_seconds);
  {
    testing::TempDir second_dir("polishsense-accept-b");
    timed({7, "determinism", 600.0}, [&](Checks& c) {
      if (!camp) throw std::runtime_error("campaign did not run");
      determinism(c, *camp, second_dir.path());
    });
  }
  std::cout << (all ? "all acceptance criteria passed\n" : "some acceptance criteria FAILED\n");
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
