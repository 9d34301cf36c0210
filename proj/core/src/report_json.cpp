#include "ifbs/report_json.hpp"

#include <cmath>

namespace ifbs {

namespace {

nlohmann::json real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

template <class T>
nlohmann::json optional(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return real(*v);
  } else {
    return *v;
  }
}

}  // namespace

nlohmann::json to_json(const ValidityReport& r) {
  nlohmann::json j;
  j["convergence_ok"] = r.convergence_ok;
  j["reasons"] = r.reasons;
  auto& g = j["guarantees"] = nlohmann::json::array();
  for (Guarantee x : r.guarantees) g.push_back(guarantee_name(x));
  j["verdict"] = r.verdict == Verdict::Analytic ? "analytic" : "horizon-only";
  j["alpha_lower"] = real(r.alpha_lower);
  j["alpha_upper"] = real(r.alpha_upper);
  j["sipm_ok"] = r.sipm_ok;
  j["sipm_reasons"] = r.sipm_reasons;
  return j;
}

nlohmann::json to_json(const ManifoldReport& r) {
  nlohmann::json j;
  j["D"] = r.d;
  j["E"] = r.e;
  j["omega"] = real(r.omega);
  j["e_threshold"] = real(r.e_threshold);
  j["K_sign"] = optional(r.k_sign);
  j["K_support"] = optional(r.k_support);
  j["bound_K_E"] = optional(r.bound_k_e);
  j["bound_K_D"] = optional(r.bound_k_d);
  j["window"] = {r.window_first, r.window_last};
  j["note"] = r.note;
  return j;
}

nlohmann::json to_json(const RateReport& r) {
  nlohmann::json j;
  j["fitted_rate"] = real(r.fitted_rate);
  j["fit_window"] = {r.fit_first, r.fit_last};
  j["r_squared"] = real(r.r_squared);
  j["theoretical_rate"] = optional(r.theoretical_rate);
  j["oscillation_count"] = r.oscillation_count;
  j["mean_oscillation_period"] = optional(r.mean_oscillation_period);
  return j;
}

nlohmann::json to_json(const ReferenceSolution& r) {
  nlohmann::json j;
  j["F_star"] = real(r.f_star);
  j["duality_gap"] = real(r.duality_gap);
  j["iterations"] = r.iterations;
  j["polished"] = r.polished;
  j["support_size"] = support_of(r.x_star).size();
  return j;
}

}  // namespace ifbs
