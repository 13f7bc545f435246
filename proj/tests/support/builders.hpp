#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <regret/dataset.hpp>

namespace regret::testing {

/// One row for make_dataset; y < 0 means missing.
struct Row {
  std::vector<double> x;
  int d = 1;
  double pi1 = 1.0;
  int y = -1;
  int z = 0;
};

ObservationalDataset make_dataset(const std::vector<Row>& rows, bool with_z = false);

}  // namespace regret::testing
