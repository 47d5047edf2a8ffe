#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mctrunc/lyapunov.hpp"
#include "mctrunc/model.hpp"

namespace mctrunc {

using RowFunction = std::function<std::vector<Transition>(const State&)>;

/// A chain given by a user row function. Rows are validated on every call:
/// entries finite and nonnegative, total within `tolerance` of one.
class UserModel : public ChainModel {
 public:
  UserModel(std::string name, std::size_t dimension, State seed, RowFunction row, double tolerance = 1e-12);

  std::string name() const override { return name_; }
  std::size_t dimension() const override { return dim_; }
  State seed() const override { return seed_; }
  void transitions(const State& x, std::vector<Transition>& out) const override;

  /// Lyapunov functions with analytic tail radii, supplied by the user.
  void set_lyapunov(DriftSpec spec) { spec_ = std::move(spec); }
  const DriftSpec& lyapunov() const { return spec_; }

 private:
  std::string name_;
  std::size_t dim_;
  State seed_;
  RowFunction row_;
  double tolerance_;
  DriftSpec spec_;
};

}  // namespace mctrunc
