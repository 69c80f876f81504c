#include "polishsense/surface.hpp"

#include <fmt/format.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"

namespace polishsense {

namespace fs = std::filesystem;

void validate(const Micrograph& m) {
  if (m.heights.rows() < 1 || m.heights.cols() < 1) {
    throw ConfigError("micrograph must have at least one row and one column");
  }
  if (!m.heights.allFinite()) throw ConfigError("micrograph contains non-finite heights");
  if (!(m.pixel_area > 0.0) || !std::isfinite(m.pixel_area)) {
    throw ConfigError("micrograph pixel_area must be positive");
  }
}

double areal_roughness(const Micrograph& m) {
  validate(m);
  const auto& z = m.heights;
  const double cells = static_cast<double>(z.size());
  // Compensated sums keep the 512x512 case at full double accuracy.
  auto kahan_sum = [&](auto&& term) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double y = term(z(r, c)) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
      }
    }
    return sum;
  };
  const double mean = kahan_sum([](double h) { return h; }) / cells;
  const double area = cells * m.pixel_area;
  return kahan_sum([mean](double h) { return std::abs(h - mean); }) * m.pixel_area / area;
}

RoughnessTarget roughness_delta(const Micrograph& before, const Micrograph& after,
                                std::string run_id) {
  RoughnessTarget t;
  t.run_id = std::move(run_id);
  t.sa_before = areal_roughness(before);
  t.sa_after = areal_roughness(after);
  t.delta = std::abs(t.sa_after - t.sa_before);
  return t;
}

Micrograph load_micrograph(const fs::path& csv_path) {
  const std::string text = io::read_text(csv_path);
  std::vector<double> values;
  Eigen::Index rows = 0, cols = -1;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = io::split(line, ',');
    if (cols < 0) cols = static_cast<Eigen::Index>(fields.size());
    if (static_cast<Eigen::Index>(fields.size()) != cols) {
      throw Error(fmt::format("{}: row {} has {} columns, expected {}", csv_path.string(),
                              rows + 1, fields.size(), cols));
    }
    for (const auto& f : fields) {
      values.push_back(io::parse_double(f, csv_path.string()));
    }
    ++rows;
  }
  if (rows == 0) throw Error(fmt::format("{}: empty micrograph", csv_path.string()));

  Micrograph m;
  m.heights = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, cols);
  const fs::path sidecar = csv_path.parent_path() / "micrograph.json";
  if (fs::exists(sidecar)) {
    try {
      m.pixel_area = nlohmann::json::parse(io::read_text(sidecar)).value("pixel_area", 1.0);
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("{}: {}", sidecar.string(), e.what()));
    }
  }
  validate(m);
  return m;
}

void save_micrograph(const Micrograph& m, const fs::path& csv_path) {
  validate(m);
  std::string out;
  out.reserve(static_cast<std::size_t>(m.heights.size()) * 24);
  for (Eigen::Index r = 0; r < m.heights.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.heights.cols(); ++c) {
      if (c) out += ',';
      out += io::format_double(m.heights(r, c));
    }
    out += '\n';
  }
  io::write_atomic(csv_path, out);
  io::write_atomic(csv_path.parent_path() / "micrograph.json",
                   nlohmann::json{{"pixel_area", m.pixel_area}}.dump(2) + "\n");
}

}  // namespace polishsense
