#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "oac/random.hpp"

namespace oac {

// Labelled samples, one per row.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int num_classes = 10;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  Dataset subset(std::span<const int> rows) const;
};

// Gaussian class blobs: class c has mean m_c ~ N(0, s^2 I) with s chosen so
// the expected distance between two class means is `separation` noise
// standard deviations.
struct BlobSpec {
  int per_class = 1200;
  int test_per_class = 200;
  int dim = 64;
  int classes = 10;
  double separation = 4.0;
};

// (train, test), rows grouped by class.
std::pair<Dataset, Dataset> make_blobs(const BlobSpec& spec, std::uint64_t seed);

enum class PartitionMode { homogeneous, heterogeneous };

PartitionMode parse_partition(std::string_view name);
std::string_view to_string(PartitionMode mode);

// Labels held by devices in `area` (1-based): a window of 60 % of the
// classes starting at (area - 1) * classes / 10. For 10 classes this is
// {area-1, ..., area+4}.
std::vector<int> area_labels(int area, int classes);

// Disjoint row-index sets, one per device, covering the dataset.
// homogeneous: every class split evenly over all devices.
// heterogeneous: num_eds / areas devices per area; each class split evenly
// over the devices whose area holds it.
// Throws PartitionError when a split is not exact.
std::vector<std::vector<int>> partition(const Dataset& data, PartitionMode mode, int num_eds, int areas, Rng& rng);

}  // namespace oac
