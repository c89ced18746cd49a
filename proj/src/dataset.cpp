#include "oac/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oac/errors.hpp"

namespace oac {

Dataset Dataset::subset(std::span<const int> rows) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), dim());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels[i] = labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

std::pair<Dataset, Dataset> make_blobs(const BlobSpec& spec, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double spread = spec.separation / std::sqrt(2.0 * spec.dim);
  Eigen::MatrixXd means(spec.classes, spec.dim);
  for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = spread * normal(rng);

  auto draw = [&](int per_class) {
    Dataset d;
    d.num_classes = spec.classes;
    d.features.resize(static_cast<Eigen::Index>(per_class) * spec.classes, spec.dim);
    d.labels.resize(static_cast<std::size_t>(per_class) * spec.classes);
    Eigen::Index row = 0;
    for (int c = 0; c < spec.classes; ++c)
      for (int n = 0; n < per_class; ++n, ++row) {
        for (int j = 0; j < spec.dim; ++j) d.features(row, j) = means(c, j) + normal(rng);
        d.labels[static_cast<std::size_t>(row)] = c;
      }
    return d;
  };
  auto train = draw(spec.per_class);
  auto test = draw(spec.test_per_class);
  return {std::move(train), std::move(test)};
}

PartitionMode parse_partition(std::string_view name) {
  if (name == "homogeneous") return PartitionMode::homogeneous;
  if (name == "heterogeneous") return PartitionMode::heterogeneous;
  throw ConfigError("train.partition: expected homogeneous or heterogeneous, got '" + std::string(name) + "'");
}

std::string_view to_string(PartitionMode mode) {
  return mode == PartitionMode::homogeneous ? "homogeneous" : "heterogeneous";
}

std::vector<int> area_labels(int area, int classes) {
  const int width = (6 * classes + 9) / 10;
  const int start = (area - 1) * classes / 10;
  std::vector<int> out;
  for (int j = 0; j < width; ++j) out.push_back((start + j) % classes);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> partition(const Dataset& data, PartitionMode mode, int num_eds, int areas, Rng& rng) {
  if (num_eds < 1) throw PartitionError("partition: need at least one device");
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.num_classes));
  for (Eigen::Index i = 0; i < data.size(); ++i)
    by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])].push_back(static_cast<int>(i));
  for (auto& rows : by_class) std::shuffle(rows.begin(), rows.end(), rng);

  // holders[c] = devices that receive samples of class c.
  std::vector<std::vector<int>> holders(by_class.size());
  if (mode == PartitionMode::homogeneous) {
    for (auto& h : holders) {
      h.resize(static_cast<std::size_t>(num_eds));
      std::iota(h.begin(), h.end(), 0);
    }
  } else {
    if (areas < 1 || num_eds % areas != 0)
      throw PartitionError("partition: " + std::to_string(num_eds) + " devices do not split into " +
                           std::to_string(areas) + " areas");
    const int per_area = num_eds / areas;
    for (int k = 0; k < num_eds; ++k)
      for (int c : area_labels(k / per_area + 1, data.num_classes)) holders[static_cast<std::size_t>(c)].push_back(k);
  }

  std::vector<std::vector<int>> local(static_cast<std::size_t>(num_eds));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& rows = by_class[c];
    const auto& h = holders[c];
    if (rows.empty()) continue;
    if (h.empty() || rows.size() % h.size() != 0)
      throw PartitionError("partition: class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                           " samples, not divisible over " + std::to_string(h.size()) + " devices");
    const std::size_t share = rows.size() / h.size();
    for (std::size_t j = 0; j < h.size(); ++j)
      local[static_cast<std::size_t>(h[j])].insert(local[static_cast<std::size_t>(h[j])].end(),
                                                   rows.begin() + static_cast<std::ptrdiff_t>(j * share),
                                                   rows.begin() + static_cast<std::ptrdiff_t>((j + 1) * share));
  }
  for (auto& l : local) std::sort(l.begin(), l.end());
  return local;
}

}  // namespace oac
