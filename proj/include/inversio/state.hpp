#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace inversio {

enum class StateKind { Vector, SymMatrix, Cemetery };

// Where a killed path went. The numerical cemetery merges all of them.
enum class ExitCause { None, Origin, Boundary, Infinity };

constexpr std::size_t sym_size(std::size_t m) noexcept { return m * (m + 1) / 2; }

// Index of entry (i, j), i <= j, in the row-major upper triangle of an m x m matrix.
constexpr std::size_t sym_index(std::size_t m, std::size_t i, std::size_t j) noexcept {
  return i * m - i * (i - 1) / 2 + (j - i);
}

class State {
 public:
  State() = default;

  static State vector(std::vector<double> x);
  static State sym_matrix(std::size_t order, std::vector<double> upper);
  static State cemetery(ExitCause cause = ExitCause::None);
  // Same layout as `like`, new entries.
  static State like(const State& like, std::span<const double> data);

  StateKind kind() const noexcept { return kind_; }
  bool is_cemetery() const noexcept { return kind_ == StateKind::Cemetery; }
  ExitCause exit_cause() const noexcept { return cause_; }

  // n for vectors, m for symmetric matrices.
  std::size_t order() const noexcept { return order_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool operator==(const State&) const = default;

 private:
  StateKind kind_ = StateKind::Cemetery;
  std::size_t order_ = 0;
  std::vector<double> data_;
  ExitCause cause_ = ExitCause::None;
};

class TimeGrid {
 public:
  TimeGrid() = default;

  static TimeGrid uniform(double t_end, double dt);
  static TimeGrid explicit_points(std::vector<double> t);

  std::span<const double> times() const noexcept { return t_; }
  std::size_t size() const noexcept { return t_.size(); }
  double operator[](std::size_t k) const { return t_[k]; }
  double back() const { return t_.back(); }
  bool is_uniform() const noexcept { return step_ > 0.0; }
  // Uniform step, or 0 for explicit grids.
  double step() const noexcept { return step_; }

 private:
  friend class Path;
  std::vector<double> t_;
  double step_ = 0.0;
};

TimeGrid make_grid(double t_end, double dt);

// Grid times with states. Rows are stored only while the path is alive; every
// grid point from death_index() on is the cemetery.
class Path {
 public:
  Path() = default;
  Path(StateKind kind, std::size_t order, std::size_t dim);

  // Appends a live grid point. Times must increase strictly.
  void push(double t, std::span<const double> x);
  // Appends the first dead grid point; the path is closed afterwards.
  void kill(double t, ExitCause cause);
  // Extends a closed/alive path by dead points up to the given grid (used by
  // samplers on fixed grids so that size() matches the grid).
  void set_grid_tail(std::span<const double> remaining_times);
  void reserve(std::size_t rows);

  StateKind kind() const noexcept { return kind_; }
  std::size_t order() const noexcept { return order_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return t_.size(); }
  std::size_t live_size() const noexcept { return live_; }
  std::span<const double> times() const noexcept { return t_; }
  double time(std::size_t k) const { return t_[k]; }
  TimeGrid grid() const;

  bool is_cemetery(std::size_t k) const noexcept { return k >= live_; }
  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }
  State state(std::size_t k) const;

  // First dead grid time, +inf when the path survives the whole grid.
  double lifetime() const noexcept { return lifetime_; }
  std::optional<std::size_t> death_index() const noexcept;
  ExitCause exit_cause() const noexcept { return cause_; }
  bool closed() const noexcept { return lifetime_ < std::numeric_limits<double>::infinity(); }

 private:
  StateKind kind_ = StateKind::Vector;
  std::size_t order_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> t_;
  std::vector<double> values_;
  std::size_t live_ = 0;
  double lifetime_ = std::numeric_limits<double>::infinity();
  ExitCause cause_ = ExitCause::None;
};

}  // namespace inversio
