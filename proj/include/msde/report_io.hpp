#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "msde/experiment.hpp"

namespace msde {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const ErrorReport& report) {
  std::string out =
      "scheme,h_level,h,error,mc_std_error,eoc,proj_fraction,proj_total,overflow_count\n";
  for (const auto& c : report.cells) {
    out += to_string(c.scheme);
    out += ',';
    out += std::to_string(c.level);
    out += ',';
    out += detail::fmt_double(c.h);
    out += ',';
    out += detail::fmt_double(c.error);
    out += ',';
    out += detail::fmt_double(c.mc_std_error);
    out += ',';
    if (c.eoc) out += detail::fmt_double(*c.eoc);
    out += ',';
    out += detail::fmt_double(c.proj_fraction);
    out += ',';
    out += std::to_string(c.proj_total);
    out += ',';
    out += std::to_string(c.overflow_count);
    out += '\n';
  }
  return out;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["model"] = cfg.model.name;
  j["params"] = cfg.model.params;
  nlohmann::json schemes = nlohmann::json::array();
  for (SchemeId s : cfg.schemes) schemes.push_back(to_string(s));
  j["schemes"] = schemes;
  j["levels"] = cfg.levels;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.master_seed;
  // The worker count is deliberately omitted: results are independent of it,
  // and the echo must stay byte-identical across pool sizes.
  if (cfg.alpha_override) j["alpha"] = *cfg.alpha_override;
  const ReferenceSpec ref = cfg.reference.value_or(cfg.model.default_reference());
  switch (ref.kind) {
    case ReferenceSpec::Kind::gle_exact:
      j["reference"] = {{"kind", "gle_exact"}, {"quad_level", ref.quad_level}};
      break;
    case ReferenceSpec::Kind::gbm_exact:
      j["reference"] = {{"kind", "gbm_exact"}};
      break;
    case ReferenceSpec::Kind::numeric_fine:
      j["reference"] = {{"kind", "numeric_fine"},
                        {"fine_level", ref.fine_level},
                        {"fine_scheme", to_string(ref.fine_scheme)}};
      break;
  }
  return j;
}

inline nlohmann::json to_json(const ErrorReport& report) {
  nlohmann::json j;
  j["config"] = config_to_json(report.config);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json jc;
    jc["scheme"] = to_string(c.scheme);
    jc["h_level"] = c.level;
    jc["h"] = c.h;
    jc["error"] = std::isfinite(c.error) ? nlohmann::json(c.error) : nlohmann::json();
    jc["mc_std_error"] =
        std::isfinite(c.mc_std_error) ? nlohmann::json(c.mc_std_error) : nlohmann::json();
    if (c.eoc) jc["eoc"] = *c.eoc;
    jc["proj_fraction"] = c.proj_fraction;
    jc["proj_total"] = c.proj_total;
    jc["overflow_count"] = c.overflow_count;
    cells.push_back(jc);
  }
  j["cells"] = cells;
  nlohmann::json slopes;
  for (const auto& [s, slope] : report.fitted_slopes) slopes[to_string(s)] = slope;
  j["fitted_slopes"] = slopes;
  return j;
}

}  // namespace msde
