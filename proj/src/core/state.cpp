#include "inversio/state.hpp"

#include <cmath>

#include "inversio/errors.hpp"

namespace inversio {

State State::vector(std::vector<double> x) {
  State s;
  s.kind_ = StateKind::Vector;
  s.order_ = x.size();
  s.data_ = std::move(x);
  return s;
}

State State::sym_matrix(std::size_t order, std::vector<double> upper) {
  if (upper.size() != sym_size(order)) {
    throw InvalidArgument("symmetric matrix of order " + std::to_string(order) + " needs " +
                          std::to_string(sym_size(order)) + " upper-triangle entries");
  }
  State s;
  s.kind_ = StateKind::SymMatrix;
  s.order_ = order;
  s.data_ = std::move(upper);
  return s;
}

State State::cemetery(ExitCause cause) {
  State s;
  s.cause_ = cause;
  return s;
}

State State::like(const State& like, std::span<const double> data) {
  State s;
  s.kind_ = like.kind_;
  s.order_ = like.order_;
  s.data_.assign(data.begin(), data.end());
  return s;
}

TimeGrid TimeGrid::uniform(double t_end, double dt) {
  if (!std::isfinite(t_end) || !std::isfinite(dt) || t_end <= 0.0 || dt <= 0.0 || dt > t_end) {
    throw InvalidArgument("grid needs finite t_end > 0 and 0 < dt <= t_end");
  }
  TimeGrid g;
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  g.t_.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) g.t_[k] = static_cast<double>(k) * dt;
  g.step_ = dt;
  return g;
}

TimeGrid TimeGrid::explicit_points(std::vector<double> t) {
  if (t.empty() || t.front() != 0.0) throw InvalidArgument("grid must start at 0");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1]) || !std::isfinite(t[k])) {
      throw InvalidArgument("grid times must be finite and strictly increasing");
    }
  }
  TimeGrid g;
  g.t_ = std::move(t);
  return g;
}

TimeGrid make_grid(double t_end, double dt) { return TimeGrid::uniform(t_end, dt); }

Path::Path(StateKind kind, std::size_t order, std::size_t dim)
    : kind_(kind), order_(order), dim_(dim) {}

void Path::reserve(std::size_t rows) {
  t_.reserve(rows);
  values_.reserve(rows * dim_);
}

void Path::push(double t, std::span<const double> x) {
  if (closed()) throw InvalidArgument("cannot extend a killed path");
  t_.push_back(t);
  values_.insert(values_.end(), x.begin(), x.end());
  ++live_;
}

void Path::kill(double t, ExitCause cause) {
  if (live_ == 0) throw InvalidArgument("a path must start alive");
  if (closed()) return;
  t_.push_back(t);
  lifetime_ = t;
  cause_ = cause;
}

void Path::set_grid_tail(std::span<const double> remaining_times) {
  t_.insert(t_.end(), remaining_times.begin(), remaining_times.end());
}

TimeGrid Path::grid() const { return TimeGrid::explicit_points(t_); }

std::optional<std::size_t> Path::death_index() const noexcept {
  if (!closed()) return std::nullopt;
  return live_;
}

State Path::state(std::size_t k) const {
  if (is_cemetery(k)) return State::cemetery(cause_);
  std::vector<double> x(row(k).begin(), row(k).end());
  if (kind_ == StateKind::SymMatrix) return State::sym_matrix(order_, std::move(x));
  return State::vector(std::move(x));
}

}  // namespace inversio
