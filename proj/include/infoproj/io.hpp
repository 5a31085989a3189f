#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "infoproj/market.hpp"

namespace infoproj {

/// Parses an instance document {"k":int,"m":int,"payoff":[[...]],"probs":[...]},
/// validating shape first and then the type invariants (the constructors
/// report the first violated one).
inline MarketInstance parse_instance_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("instance file is not valid JSON: ") + e.what());
  }
  for (const char* field : {"k", "m", "payoff", "probs"})
    if (!doc.contains(field))
      throw std::invalid_argument(std::string("instance file is missing field \"") + field +
                                  "\"");
  const auto k = doc["k"].get<std::int64_t>();
  const auto m = doc["m"].get<std::int64_t>();
  if (k < 1 || m < 1) throw std::invalid_argument("instance needs k >= 1 and m >= 1");

  const auto& payoff_rows = doc["payoff"];
  if (!payoff_rows.is_array() || payoff_rows.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("\"payoff\" must be an array of k rows");
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(k * m));
  for (const auto& row : payoff_rows) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(m))
      throw std::invalid_argument("every payoff row must have m entries");
    for (const auto& v : row) entries.push_back(v.get<double>());
  }

  const auto& probs_field = doc["probs"];
  if (!probs_field.is_array() || probs_field.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("\"probs\" must be an array of k entries");
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(k));
  for (const auto& v : probs_field) probs.push_back(v.get<double>());

  PayoffMatrix payoff(static_cast<std::size_t>(k), static_cast<std::size_t>(m),
                      std::move(entries));
  MarketLaw law{ProbabilityVector(std::move(probs))};
  return MarketInstance(std::move(payoff), std::move(law));
}

inline MarketInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance_json(buffer.str());
}

inline std::string instance_to_json(const MarketInstance& instance) {
  nlohmann::json doc;
  doc["k"] = instance.states();
  doc["m"] = instance.assets();
  nlohmann::json payoff = nlohmann::json::array();
  for (std::size_t j = 0; j < instance.states(); ++j)
    payoff.push_back(instance.payoff().row(j));
  doc["payoff"] = std::move(payoff);
  doc["probs"] = instance.law().probs.values();
  return doc.dump(2);
}

inline void save_instance_file(const MarketInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json(instance) << "\n";
}

}  // namespace infoproj
