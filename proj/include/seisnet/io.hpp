#pragma once

// Network files, study configuration, provenance hashing and CSV output.
//
// Network JSON:
//   {
//     "nodes": [{"id": "B1", "x_km": 1.0, "y_km": 2.0, "c_median": 0.98,
//                "zeta": 0.69, "perfect": false}, ...],
//     "edges": [["B1", "B2"], ...],
//     "terminals": {"origins": [...], "destinations": [...]},   // or
//     "od_pairs": [["O", "D"], ...],
//     "epicenter": {"x_km": 0.0, "y_km": 0.0},
//     "seismic": {"sigma_eta": 0.265, "sigma_eps": 0.502},      // optional
//     "links": [{"from": "a", "to": "b", "c_median": .., "zeta": ..}]  // optional
//   }
// Terminal nodes are perfect unless "perfect": false is given explicitly.

#include "seisnet/fragility.hpp"
#include "seisnet/limit_state.hpp"
#include "seisnet/network.hpp"
#include "seisnet/subset_sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace seisnet {

struct NetworkFile {
  Network network;
  SeismicModel model;
  std::optional<TerminalSpec> terminals;
  std::vector<IdPair> od_pairs;
};

/// Every schema/invariant violation, one message each; empty when valid.
std::vector<std::string> validate_network_json(const nlohmann::json& doc);
/// Throws ValidationError listing the violations.
NetworkFile parse_network_json(const nlohmann::json& doc);
NetworkFile load_network_file(const std::string& path);
nlohmann::json to_json(const NetworkFile& file);

/// Reads a JSON document; throws ValidationError on I/O or parse failure.
nlohmann::json read_json_file(const std::string& path);

struct StudyConfig {
  LimitStateSpec limit_state;  ///< terminals filled from the network file when empty
  SsConfig ss;
  std::optional<MagnitudeGrid> grid;
  std::optional<DamageStateSet> damage_states;
  std::size_t reps = 1;
  std::optional<double> mw_ref;
  std::string csv_path;
  std::string json_path;
};

StudyConfig parse_study_config(const nlohmann::json& doc);
nlohmann::json to_json(const StudyConfig& config);
/// Cross-checks the study against the network (terminal ids, k range, SS params).
void validate_study(const StudyConfig& config, const NetworkFile& network);

/// "9.0:3.0:0.5" -> grid; intervals "9:7,7:5,5:3" or "one-span".
MagnitudeGrid parse_grid(const std::string& grid, const std::string& intervals = {});
/// "hazus-4" or "label=median:zeta,label=median:zeta,...".
DamageStateSet parse_damage_states(const std::string& text);

/// 64-bit FNV-1a of the canonical (key-sorted) JSON dump, as 16 hex digits.
std::string content_hash(const nlohmann::json& doc);

/// Fixed-format number rendering used for every CSV cell.
std::string format_number(double value);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace seisnet
