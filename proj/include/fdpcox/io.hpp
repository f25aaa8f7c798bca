/**
 * File formats: dataset CSV (columns time,event,z1..zd), transcript
 * JSON-lines (one released message per line), auditor and hazard-curve CSVs,
 * and JSON scenario configs mirroring the Scenario fields.
 *
 * Doubles are written in shortest round-trip form, so emitted files are
 * byte-stable across runs and parse back to identical values.
 */
#pragma once

#define FMT_HEADER_ONLY 1
#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "breslow.hpp"
#include "experiments.hpp"
#include "federation.hpp"
#include "sensitivity_audit.hpp"
#include "survival.hpp"

namespace fdpcox {

inline void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "time,event";
  for (int j = 1; j <= data.dimension(); ++j) out << fmt::format(",z{}", j);
  out << "\n";
  for (int i = 0; i < data.size(); ++i) {
    out << fmt::format("{},{}", data.time(i), data.event(i));
    const auto zi = data.z(i);
    for (int j = 0; j < data.dimension(); ++j) out << fmt::format(",{}", zi(j));
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
  auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
  };
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "time" || header[1] != "event")
    throw std::runtime_error("dataset header must be time,event,z1..zd");
  const int d = static_cast<int>(header.size()) - 2;
  Dataset data(d);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (static_cast<int>(fields.size()) != d + 2)
      throw std::runtime_error(
          fmt::format("{}:{}: expected {} fields", path, line_no, d + 2));
    VectorXd z(d);
    for (int j = 0; j < d; ++j) z(j) = std::stod(fields[2 + j]);
    data.append(std::stod(fields[0]), std::stoi(fields[1]), z);
  }
  data.finalize();
  return data;
}

inline const char* message_kind_label(MessageKind kind) {
  switch (kind) {
    case MessageKind::kVector: return "vector";
    case MessageKind::kScalar: return "scalar";
    case MessageKind::kTreeNodes: return "tree";
  }
  throw std::logic_error("unknown message kind");
}

inline nlohmann::json message_to_json(const Message& msg) {
  nlohmann::json j;
  j["round"] = msg.round;
  j["server"] = msg.server;
  j["kind"] = message_kind_label(msg.kind);
  j["sigma"] = msg.sigma;
  switch (msg.kind) {
    case MessageKind::kVector:
      j["payload"] = std::vector<double>(msg.vec.data(), msg.vec.data() + msg.vec.size());
      break;
    case MessageKind::kScalar:
      j["payload"] = msg.scalar;
      break;
    case MessageKind::kTreeNodes:
      j["payload"] = msg.nodes;
      break;
  }
  return j;
}

/** One message per line, in release order. */
inline void write_transcript_jsonl(const Transcript& transcript,
                                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  for (const Message& msg : transcript.messages()) out << message_to_json(msg) << "\n";
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

inline void write_audit_csv(const std::vector<SensitivityAuditRow>& rows,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "case,n,bound,max_observed,lower_witness\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{}\n", neighbor_case_label(r.neighbor_case), r.n,
                       r.bound, r.max_observed, r.lower_witness);
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

inline void write_hazard_csv(const std::vector<HazardCurvePoint>& curve,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "t,cumulative_hazard,survival\n";
  for (const auto& p : curve)
    out << fmt::format("{},{},{}\n", p.t, p.cumulative_hazard, p.survival);
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

inline EstimatorKind estimator_from_label(const std::string& label) {
  if (label == "cdp") return EstimatorKind::kCdp;
  if (label == "fdp-batched") return EstimatorKind::kFdpBatched;
  if (label == "fdp-interactive") return EstimatorKind::kFdpInteractive;
  throw std::invalid_argument("unknown estimator: " + label);
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["estimator"] = estimator_label(s.estimator);
  j["fit_beta"] = s.fit_beta;
  j["fit_hazard"] = s.fit_hazard;
  j["use_true_beta"] = s.use_true_beta;
  j["random_beta0"] = s.random_beta0;
  j["beta0"] = std::vector<double>(s.beta0.data(), s.beta0.data() + s.beta0.size());
  j["c_z"] = s.bounds.c_z;
  j["c_beta"] = s.bounds.c_beta;
  j["n_list"] = s.n_list;
  j["epsilon_list"] = s.epsilon_list;
  j["delta_list"] = s.delta_list;
  j["server_list"] = s.server_list;
  j["dimension_list"] = s.dimension_list;
  j["step_size_list"] = s.step_size_list;
  j["noise_constant_list"] = s.noise_constant_list;
  j["censoring_list"] = s.censoring_list;
  j["replications"] = s.replications;
  j["seed"] = s.seed;
  j["round_constant"] = s.round_constant;
  j["noise_multiplier"] = s.noise_multiplier;
  j["p_hat_noise_multiplier"] = s.p_hat_noise_multiplier;
  j["p_hat_fraction"] = s.p_hat_fraction;
  j["min_p_hat"] = s.min_p_hat;
  return j;
}

/**
 * Parse a scenario config.  A "preset" key selects a named preset as the
 * starting point; any other recognized key overrides that field.
 */
inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  if (j.contains("preset")) s = scenario_preset(j.at("preset").get<std::string>());
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("estimator"))
    s.estimator = estimator_from_label(j.at("estimator").get<std::string>());
  if (j.contains("fit_beta")) s.fit_beta = j.at("fit_beta").get<bool>();
  if (j.contains("fit_hazard")) s.fit_hazard = j.at("fit_hazard").get<bool>();
  if (j.contains("use_true_beta")) s.use_true_beta = j.at("use_true_beta").get<bool>();
  if (j.contains("random_beta0")) s.random_beta0 = j.at("random_beta0").get<bool>();
  if (j.contains("beta0")) {
    const auto v = j.at("beta0").get<std::vector<double>>();
    s.beta0 = Eigen::Map<const VectorXd>(v.data(), static_cast<int>(v.size()));
  }
  if (j.contains("c_z")) s.bounds.c_z = j.at("c_z").get<double>();
  if (j.contains("c_beta")) s.bounds.c_beta = j.at("c_beta").get<double>();
  if (j.contains("n_list")) s.n_list = j.at("n_list").get<std::vector<int>>();
  if (j.contains("epsilon_list"))
    s.epsilon_list = j.at("epsilon_list").get<std::vector<double>>();
  if (j.contains("delta_list"))
    s.delta_list = j.at("delta_list").get<std::vector<double>>();
  if (j.contains("server_list"))
    s.server_list = j.at("server_list").get<std::vector<int>>();
  if (j.contains("dimension_list"))
    s.dimension_list = j.at("dimension_list").get<std::vector<int>>();
  if (j.contains("step_size_list"))
    s.step_size_list = j.at("step_size_list").get<std::vector<double>>();
  if (j.contains("noise_constant_list"))
    s.noise_constant_list = j.at("noise_constant_list").get<std::vector<double>>();
  if (j.contains("censoring_list"))
    s.censoring_list = j.at("censoring_list").get<std::vector<double>>();
  if (j.contains("replications")) s.replications = j.at("replications").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("round_constant"))
    s.round_constant = j.at("round_constant").get<double>();
  if (j.contains("noise_multiplier"))
    s.noise_multiplier = j.at("noise_multiplier").get<double>();
  if (j.contains("p_hat_noise_multiplier"))
    s.p_hat_noise_multiplier = j.at("p_hat_noise_multiplier").get<double>();
  if (j.contains("p_hat_fraction"))
    s.p_hat_fraction = j.at("p_hat_fraction").get<double>();
  if (j.contains("min_p_hat")) s.min_p_hat = j.at("min_p_hat").get<double>();
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

}  // namespace fdpcox
