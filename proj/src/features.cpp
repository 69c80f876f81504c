#include "polishsense/features.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>
#include <sstream>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"

namespace polishsense {

std::string_view to_string(FeatureMode m) {
  return m == FeatureMode::Together ? "together" : "separate";
}

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "together") return FeatureMode::Together;
  if (s == "separate") return FeatureMode::Separate;
  throw ConfigError(fmt::format("unknown feature mode '{}' (expected together or separate)", s));
}

Moments moments(std::span<const double> x) {
  // Single-pass update of the central sums M2..M4 (Terriberry / Pebay).
  double n = 0.0, mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const double v : x) {
    const double n1 = n;
    n += 1.0;
    const double delta = v - mean;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean += delta_n;
    m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
    m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
    m2 += term1;
  }
  Moments out;
  if (x.empty()) return out;
  out.mean = mean;
  out.variance = m2 / n;
  if (out.variance == 0.0) return out;
  out.skewness = std::sqrt(n) * m3 / std::pow(m2, 1.5);
  out.kurtosis = n * m4 / (m2 * m2);
  return out;
}

std::vector<std::string> feature_names(FeatureMode mode, std::size_t bands) {
  static constexpr const char* kQuantifiers[] = {"mean", "variance", "skewness", "kurtosis"};
  std::vector<std::string> names;
  if (mode == FeatureMode::Together) {
    for (const char* q : kQuantifiers) names.push_back(fmt::format("all_{}", q));
    return names;
  }
  for (std::size_t b = 1; b <= bands; ++b) {
    for (const char* q : kQuantifiers) names.push_back(fmt::format("band{:02}_{}", b, q));
  }
  return names;
}

namespace {

void append(std::vector<double>& out, const Moments& m) {
  out.insert(out.end(), {m.mean, m.variance, m.skewness, m.kurtosis});
}

}  // namespace

FeatureVector extract_separate(const Eigen::MatrixXd& energies, std::string run_id, double target) {
  if (energies.rows() < 1) throw ConfigError("energy series needs at least one frame");
  FeatureVector fv;
  fv.run_id = std::move(run_id);
  fv.mode = FeatureMode::Separate;
  fv.target = target;
  fv.names = feature_names(FeatureMode::Separate, static_cast<std::size_t>(energies.cols()));
  std::vector<double> column(static_cast<std::size_t>(energies.rows()));
  for (Eigen::Index j = 0; j < energies.cols(); ++j) {
    for (Eigen::Index t = 0; t < energies.rows(); ++t) column[t] = energies(t, j);
    append(fv.values, moments(column));
  }
  return fv;
}

FeatureVector extract_together(const Eigen::MatrixXd& energies, std::string run_id, double target) {
  if (energies.rows() < 1) throw ConfigError("energy series needs at least one frame");
  FeatureVector fv;
  fv.run_id = std::move(run_id);
  fv.mode = FeatureMode::Together;
  fv.target = target;
  fv.names = feature_names(FeatureMode::Together, 0);
  // Frame-major pooling order.
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(energies.size()));
  for (Eigen::Index t = 0; t < energies.rows(); ++t) {
    for (Eigen::Index j = 0; j < energies.cols(); ++j) pooled.push_back(energies(t, j));
  }
  append(fv.values, moments(pooled));
  return fv;
}

FeatureVector extract(FeatureMode mode, const Eigen::MatrixXd& energies, std::string run_id,
                      double target) {
  return mode == FeatureMode::Together ? extract_together(energies, std::move(run_id), target)
                                       : extract_separate(energies, std::move(run_id), target);
}

Eigen::MatrixXd FeatureTable::design() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
    }
  }
  return x;
}

Eigen::VectorXd FeatureTable::targets() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].target;
  return y;
}

FeatureMode FeatureTable::mode() const {
  return !names.empty() && names.front().starts_with("all_") ? FeatureMode::Together
                                                             : FeatureMode::Separate;
}

FeatureTable make_table(std::vector<FeatureVector> rows) {
  if (rows.empty()) throw ConfigError("feature table is empty");
  FeatureTable table;
  table.names = rows.front().names;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (r.mode != rows.front().mode) throw ConfigError("feature vectors mix together and separate modes");
    if (r.names != table.names || r.values.size() != table.names.size()) {
      throw ConfigError(fmt::format("run '{}' has a different feature layout", r.run_id));
    }
    if (!seen.insert(r.run_id).second) {
      throw ConfigError(fmt::format("duplicate run_id '{}'", r.run_id));
    }
  }
  table.rows = std::move(rows);
  return table;
}

std::string to_csv(const FeatureTable& table) {
  std::string out = "run_id,target";
  for (const auto& n : table.names) out += "," + n;
  out += '\n';
  for (const auto& r : table.rows) {
    out += r.run_id;
    out += ',';
    out += io::format_double(r.target);
    for (const double v : r.values) {
      out += ',';
      out += io::format_double(v);
    }
    out += '\n';
  }
  return out;
}

FeatureTable parse_feature_csv(std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(fmt::format("{}: empty feature file", source));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = io::split(line, ',');
  if (header.size() < 3 || header[0] != "run_id" || header[1] != "target") {
    throw Error(fmt::format("{}: header must start with run_id,target and name features", source));
  }
  const std::vector<std::string> names(header.begin() + 2, header.end());
  const FeatureMode mode = names.front().starts_with("all_") ? FeatureMode::Together
                                                             : FeatureMode::Separate;
  std::vector<FeatureVector> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = io::split(line, ',');
    if (fields.size() != header.size()) {
      throw Error(fmt::format("{}:{}: expected {} fields, found {}", source, line_no, header.size(),
                              fields.size()));
    }
    const std::string ctx = fmt::format("{}:{}", source, line_no);
    FeatureVector fv;
    fv.run_id = fields[0];
    fv.mode = mode;
    fv.names = names;
    fv.target = io::parse_double(fields[1], ctx);
    for (std::size_t j = 2; j < fields.size(); ++j) fv.values.push_back(io::parse_double(fields[j], ctx));
    rows.push_back(std::move(fv));
  }
  return make_table(std::move(rows));
}

FeatureTable load_feature_csv(const std::filesystem::path& path) {
  return parse_feature_csv(io::read_text(path), path.string());
}

void save_feature_csv(const FeatureTable& table, const std::filesystem::path& path) {
  io::write_atomic(path, to_csv(table));
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& row) const {
  return (row - mean).array() / scale.array();
}

}  // namespace polishsense
