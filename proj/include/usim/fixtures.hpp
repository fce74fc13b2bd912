#pragma once

#include <cstdint>
#include <string>

namespace usim::fixtures {

struct FixtureSpec {
  int grid_rows = 20, grid_cols = 20;  // 250 m cells
  int poi_count = 500;
  std::int64_t capacity_per_cell = 300;
  std::int64_t population_total = 100000;
  std::uint64_t seed = 7;
};

// Writes a complete synthetic dataset (marginals, salary bands, cells, POIs,
// catalogs, a 3-route transit feed and a grid road network) plus a ready
// config.json into `directory`. Deterministic for a given spec.
std::string write_fixture(const std::string& directory, const FixtureSpec& spec = {});

}  // namespace usim::fixtures
