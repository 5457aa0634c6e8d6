#include "onebit/dft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

namespace onebit {
namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface
// is. Plans are created once per shape under a lock and reused.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int length, int batch, Direction direction) {
    const Key key{length, batch, direction == Direction::forward};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    // Column-major grid: row n, column m lives at n + m * batch.
    Grid scratch(batch, length);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    int n[] = {length};
    fftw_plan plan = fftw_plan_many_dft(
        1, n, batch, data, nullptr, batch, 1, data, nullptr, batch, 1,
        direction == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  using Key = std::tuple<int, int, bool>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void unitary_dft_rows(Grid& grid, Direction direction) {
  const auto rows = static_cast<int>(grid.rows());
  const auto cols = static_cast<int>(grid.cols());
  if (rows == 0 || cols == 0) return;
  auto* data = reinterpret_cast<fftw_complex*>(grid.data());
  fftw_execute_dft(plan_cache().get(cols, rows, direction), data, data);
  grid *= 1.0 / std::sqrt(static_cast<double>(cols));
}

Grid unitary_dft_rows(const Grid& grid, Direction direction) {
  Grid out = grid;
  unitary_dft_rows(out, direction);
  return out;
}

CVector unitary_dft(const CVector& x, Direction direction) {
  Grid row = x.transpose();
  unitary_dft_rows(row, direction);
  return row.transpose();
}

CMatrix dft_matrix(int size) {
  CMatrix f(size, size);
  const double norm = 1.0 / std::sqrt(static_cast<double>(size));
  for (int v = 0; v < size; ++v) {
    for (int m = 0; m < size; ++m) {
      // Reduce the exponent first so large sizes keep full phase accuracy.
      const auto k = static_cast<long long>(v) * m % size;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / size;
      f(v, m) = std::polar(norm, angle);
    }
  }
  return f;
}

}  // namespace onebit
