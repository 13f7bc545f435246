#include "regret/types.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace regret {

Utility::Utility(double u00, double u01, double u10, double u11) {
  for (double v : {u00, u01, u10, u11}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("utility entries must be finite and nonnegative");
    }
  }
  u_[0][0] = u00;
  u_[0][1] = u01;
  u_[1][0] = u10;
  u_[1][1] = u11;
}

Utility Utility::cost(double fp_to_fn) {
  if (!std::isfinite(fp_to_fn) || fp_to_fn <= 0.0) {
    throw ConfigError("cost ratio must be positive");
  }
  const double fn = 1.0 / (1.0 + fp_to_fn);
  return {0.0, fn, 1.0 - fn, 0.0};
}

ClassPerf::ClassPerf(int y) : y_(y) {
  if (y != 0 && y != 1) throw ConfigError("class performance needs y in {0,1}");
}

PredictiveValue::PredictiveValue(int a) : a_(a) {
  if (a != 0 && a != 1) throw ConfigError("predictive value needs a in {0,1}");
}

namespace {

std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string measure_name(const PerformanceMeasure& m) {
  if (const auto* u = std::get_if<Utility>(&m)) {
    if (*u == Utility::accuracy()) return "accuracy";
    if (u->u(0, 0) == 0.0 && u->u(1, 1) == 0.0 && u->u(0, 1) > 0.0) {
      const double ratio = u->u(1, 0) / u->u(0, 1);
      if (std::abs(u->u(0, 1) + u->u(1, 0) - 1.0) < 1e-12) return "cost:" + fmt_number(ratio);
    }
    return "utility:" + fmt_number(u->u(0, 0)) + "," + fmt_number(u->u(0, 1)) + "," +
           fmt_number(u->u(1, 0)) + "," + fmt_number(u->u(1, 1));
  }
  if (const auto* c = std::get_if<ClassPerf>(&m)) return c->y() == 1 ? "tpr" : "fpr";
  return std::get<PredictiveValue>(m).a() == 1 ? "ppv" : "npv";
}

PerformanceMeasure parse_measure(const std::string& text) {
  if (text == "accuracy") return Utility::accuracy();
  if (text == "tpr") return ClassPerf(1);
  if (text == "fpr") return ClassPerf(0);
  if (text == "ppv") return PredictiveValue(1);
  if (text == "npv") return PredictiveValue(0);

  auto parse_numbers = [&](const std::string& body) {
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("malformed number in measure '" + text + "'");
      }
    }
    return out;
  };

  if (text.rfind("cost:", 0) == 0) {
    const auto nums = parse_numbers(text.substr(5));
    if (nums.size() != 1) throw ConfigError("cost measure takes one ratio: " + text);
    return Utility::cost(nums[0]);
  }
  if (text.rfind("utility:", 0) == 0) {
    const auto nums = parse_numbers(text.substr(8));
    if (nums.size() != 4) throw ConfigError("utility measure takes u00,u01,u10,u11: " + text);
    return Utility(nums[0], nums[1], nums[2], nums[3]);
  }
  throw ConfigError("unknown measure '" + text + "'");
}

std::array<PerformanceMeasure, 5> standard_measures() {
  return {Utility::accuracy(), ClassPerf(0), ClassPerf(1), PredictiveValue(0), PredictiveValue(1)};
}

std::string to_string(Method m) { return m == Method::delta ? "delta" : "baseline"; }

RegretInterval::RegretInterval(double lower, double upper, Method method, PerformanceMeasure measure)
    : lower_(lower), upper_(upper), method_(method), measure_(std::move(measure)) {
  if (!std::isfinite(lower) || !std::isfinite(upper)) {
    throw NumericError("regret interval endpoints must be finite");
  }
  // Closed forms evaluated at a degenerate set can cross by rounding only.
  if (lower_ > upper_) {
    if (lower_ - upper_ > 1e-9) throw NumericError("regret interval has lower > upper");
    upper_ = lower_;
  }
}

void RegretInterval::set_ci(double ci_lower, double ci_upper) {
  if (!(ci_lower <= ci_upper)) throw NumericError("confidence band has ci_lower > ci_upper");
  ci_lower_ = ci_lower;
  ci_upper_ = ci_upper;
}

}  // namespace regret
