#include "tsexp/slippage.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tsexp/errors.hpp"

namespace tsexp {

namespace {

constexpr double kVolumeSumClean = 1e-9;
constexpr double kVolumeSumHardLimit = 1e-6;

double volume_sum_error(const OrderRecord& order) {
  double sum = 0.0;
  for (const auto& tr : order.trades) sum += tr.volume_fraction;
  return std::abs(sum - 1.0);
}

}  // namespace

double compute_slippage(const OrderRecord& order) {
  if (order.trades.empty())
    throw ValidationError("order '" + order.order_id + "': no trades");
  if (!(order.mid_price > 0.0))
    throw ValidationError("order '" + order.order_id + "': mid price must be positive");
  for (const auto& tr : order.trades) {
    if (!(tr.volume_fraction > 0.0))
      throw ValidationError("order '" + order.order_id + "': non-positive volume fraction");
    if (!std::isfinite(tr.price))
      throw ValidationError("order '" + order.order_id + "': non-finite trade price");
    if (tr.trade_ts_ns < order.ts_ns)
      throw ValidationError("order '" + order.order_id + "': trade before randomization time");
  }
  if (volume_sum_error(order) > kVolumeSumHardLimit)
    throw ValidationError("order '" + order.order_id + "': volume fractions sum to " +
                          std::to_string(1.0 + volume_sum_error(order)) + ", not 1");

  double vwap = 0.0;
  for (const auto& tr : order.trades) vwap += tr.volume_fraction * tr.price;
  const double r = 10000.0 * (vwap - order.mid_price) / order.mid_price;
  const double b = order.side == OrderSide::kSell ? 1.0 : -1.0;
  return b * r;
}

SlippageSeries orders_to_experiment(std::vector<OrderRecord> orders, std::string unit_id,
                                    const AssignmentMechanism& mechanism) {
  if (orders.empty()) throw ValidationError("orders_to_experiment: empty order list");

  std::set<std::string> ids;
  for (const auto& o : orders) {
    if (!ids.insert(o.order_id).second)
      throw ValidationError("orders_to_experiment: duplicate order_id '" + o.order_id + "'");
  }

  std::stable_sort(orders.begin(), orders.end(), [](const OrderRecord& a, const OrderRecord& b) {
    if (a.ts_ns != b.ts_ns) return a.ts_ns < b.ts_ns;
    return a.order_id < b.order_id;
  });

  std::vector<std::string> warnings;
  std::vector<double> y;
  std::vector<std::uint8_t> w;
  std::vector<std::string> timestamps;
  y.reserve(orders.size());
  w.reserve(orders.size());
  timestamps.reserve(orders.size());
  for (const auto& o : orders) {
    const double err = volume_sum_error(o);
    if (err > kVolumeSumClean && err <= kVolumeSumHardLimit)
      warnings.push_back("order '" + o.order_id + "': volume sum off by " + std::to_string(err));
    y.push_back(compute_slippage(o));
    w.push_back(o.method_b ? 1 : 0);
    timestamps.push_back(o.ts);
  }

  UnitExperiment e(std::move(unit_id), std::move(timestamps), std::move(y),
                   TreatmentPath(std::move(w)), mechanism);
  return SlippageSeries{std::move(e), std::move(warnings)};
}

}  // namespace tsexp
