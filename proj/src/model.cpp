#include "mctrunc/model.hpp"

namespace mctrunc {

double JumpModel::exit_rate(const State& x) const {
  std::vector<Rate> out;
  rates(x, out);
  double total = 0.0;
  for (const auto& r : out) {
    if (!(r.to == x)) total += r.rate;
  }
  return total;
}

}  // namespace mctrunc
