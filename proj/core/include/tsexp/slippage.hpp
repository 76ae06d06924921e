#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsexp/experiment.hpp"

namespace tsexp {

enum class OrderSide { kBuy, kSell };

struct TradeFill {
  std::string trade_ts;
  std::int64_t trade_ts_ns = 0;
  double price = 0.0;
  double volume_fraction = 0.0;
};

// One randomized execution experiment: an order assigned to method A
// (control) or B (treatment) at randomization time, filled by a sequence of
// trades whose volume fractions sum to one.
struct OrderRecord {
  std::string order_id;
  std::string ts;  // randomization time
  std::int64_t ts_ns = 0;
  OrderSide side = OrderSide::kBuy;
  double mid_price = 0.0;  // mid at randomization time
  bool method_b = false;   // method B = treatment
  std::vector<TradeFill> trades;
};

// Signed execution cost in basis points: Y = b * 10000 * (VWAP - mid) / mid
// with b = +1 for sells and -1 for buys. Volume fractions must be positive
// and sum to 1; deviations beyond 1e-6 are a hard error and are never
// repaired by renormalizing.
double compute_slippage(const OrderRecord& order);

struct SlippageSeries {
  UnitExperiment experiment;
  // Orders whose volume sums drift between 1e-9 and the 1e-6 hard limit.
  std::vector<std::string> warnings;
};

// Sort orders by (randomization time, order_id), index them t = 1..T, map
// method B to treatment and slippage to the outcome. The mechanism describes
// the historical assignment probabilities.
SlippageSeries orders_to_experiment(std::vector<OrderRecord> orders, std::string unit_id,
                                    const AssignmentMechanism& mechanism);

}  // namespace tsexp
