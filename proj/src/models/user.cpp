#include "mctrunc/models/user.hpp"

#include "mctrunc/errors.hpp"
#include "mctrunc/state_space.hpp"

namespace mctrunc {

UserModel::UserModel(std::string name, std::size_t dimension, State seed, RowFunction row, double tolerance)
    : name_(std::move(name)), dim_(dimension), seed_(seed), row_(std::move(row)), tolerance_(tolerance) {
  if (!row_) throw ConfigError("user_model: row function is empty");
  if (dimension == 0 || dimension > State::kMaxDim) throw ConfigError("user_model: unsupported dimension");
  if (seed.dim() != dimension) throw ConfigError("user_model: seed dimension mismatch");
}

void UserModel::transitions(const State& x, std::vector<Transition>& out) const {
  for (const auto& t : normalize_row(x, row_(x), tolerance_)) out.push_back(t);
}

}  // namespace mctrunc
