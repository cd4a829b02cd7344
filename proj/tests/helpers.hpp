#pragma once

#include <unistd.h>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "linkq/dataset.hpp"
#include "linkq/rng.hpp"
#include "linkq/trace.hpp"

namespace linkq::test {

// Trace whose received slots carry the given RSSI values; negative entries
// mark lost slots.
inline AlignedTrace make_trace(const std::string& id, const std::vector<int>& rssi) {
  AlignedTrace t{id, "s-" + id, "d-" + id, 0, {}};
  for (int v : rssi) t.slots.push_back(v < 0 ? Slot{false, 0.0} : Slot{true, double(v)});
  return t;
}

inline AlignedTrace random_trace(const std::string& id, int length, double p_rx, Rng& rng) {
  AlignedTrace t{id, "s-" + id, "d-" + id, 0, {}};
  for (int i = 0; i < length; ++i) {
    if (rng.uniform() < p_rx)
      t.slots.push_back({true, double(1 + rng.below(127))});
    else
      t.slots.push_back({false, 0.0});
  }
  return t;
}

inline Dataset random_dataset(std::size_t n, std::size_t d, Rng& rng,
                              std::array<double, 3> mix = {1.0 / 3, 1.0 / 3, 1.0 / 3}) {
  std::vector<double> x(n * d);
  std::vector<LinkClass> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const std::size_t c = u < mix[0] ? 0 : (u < mix[0] + mix[1] ? 1 : 2);
    y[i] = class_at(c);
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = rng.normal(double(c) * (j + 1) * 0.7, 1.0);
  }
  return Dataset::from_matrix(std::move(x), d, std::move(y));
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("linkq-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace linkq::test
