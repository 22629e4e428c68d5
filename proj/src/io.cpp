#include "seisnet/io.hpp"

#include "seisnet/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace seisnet {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += "\n";
    out += l;
  }
  return out;
}

bool is_id_pair(const json& v) {
  return v.is_array() && v.size() == 2 && v[0].is_string() && v[1].is_string();
}

std::set<std::string> terminal_ids(const json& doc) {
  std::set<std::string> ids;
  if (doc.contains("terminals") && doc["terminals"].is_object()) {
    for (const char* key : {"origins", "destinations"}) {
      const json& t = doc["terminals"];
      if (t.contains(key) && t[key].is_array()) {
        for (const auto& v : t[key]) {
          if (v.is_string()) ids.insert(v.get<std::string>());
        }
      }
    }
  }
  if (doc.contains("od_pairs") && doc["od_pairs"].is_array()) {
    for (const auto& p : doc["od_pairs"]) {
      if (is_id_pair(p)) {
        ids.insert(p[0].get<std::string>());
        ids.insert(p[1].get<std::string>());
      }
    }
  }
  return ids;
}

}  // namespace

std::vector<std::string> validate_network_json(const json& doc) {
  std::vector<std::string> errs;
  if (!doc.is_object()) return {"document: expected a JSON object"};

  std::set<std::string> ids;
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    errs.push_back("nodes: missing or not an array");
  } else if (doc["nodes"].empty()) {
    errs.push_back("nodes: empty");
  } else {
    const std::set<std::string> terminals = terminal_ids(doc);
    for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
      const json& n = doc["nodes"][i];
      const std::string where = "nodes[" + std::to_string(i) + "]";
      if (!n.is_object()) {
        errs.push_back(where + ": expected an object");
        continue;
      }
      if (!n.contains("id") || !n["id"].is_string() || n["id"].get<std::string>().empty()) {
        errs.push_back(where + ".id: missing or not a non-empty string");
      } else {
        const std::string id = n["id"].get<std::string>();
        if (!ids.insert(id).second) errs.push_back("duplicate node id: " + id);
      }
      for (const char* key : {"x_km", "y_km"}) {
        if (!n.contains(key) || !n[key].is_number()) {
          errs.push_back(where + "." + key + ": missing or not a number");
        }
      }
      if (n.contains("perfect") && !n["perfect"].is_boolean()) {
        errs.push_back(where + ".perfect: not a boolean");
      }
      const bool is_terminal =
          n.contains("id") && n["id"].is_string() && terminals.count(n["id"].get<std::string>());
      const bool perfect = n.contains("perfect") && n["perfect"].is_boolean()
                               ? n["perfect"].get<bool>()
                               : is_terminal;
      if (n.contains("c_median")) {
        if (!n["c_median"].is_number() || !(n["c_median"].get<double>() > 0.0)) {
          errs.push_back(where + ".c_median: must be a positive number");
        }
      } else if (!perfect) {
        errs.push_back(where + ".c_median: required for failure-prone nodes");
      }
      if (n.contains("zeta")) {
        if (!n["zeta"].is_number() || !(n["zeta"].get<double>() >= 0.0)) {
          errs.push_back(where + ".zeta: must be a non-negative number");
        }
      } else if (!perfect) {
        errs.push_back(where + ".zeta: required for failure-prone nodes");
      }
    }
  }

  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    errs.push_back("edges: missing or not an array");
  } else {
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < doc["edges"].size(); ++i) {
      const json& e = doc["edges"][i];
      const std::string where = "edges[" + std::to_string(i) + "]";
      if (!is_id_pair(e)) {
        errs.push_back(where + ": expected [id, id]");
        continue;
      }
      const auto a = e[0].get<std::string>();
      const auto b = e[1].get<std::string>();
      if (!ids.count(a)) errs.push_back(where + ": unknown node id " + a);
      if (!ids.count(b)) errs.push_back(where + ": unknown node id " + b);
      if (a == b) errs.push_back(where + ": self-loop on " + a);
      if (!seen.insert(std::minmax(a, b)).second) {
        errs.push_back(where + ": duplicate edge " + a + "-" + b);
      }
    }
  }

  if (doc.contains("terminals")) {
    const json& t = doc["terminals"];
    if (!t.is_object()) {
      errs.push_back("terminals: expected an object");
    } else {
      for (const char* key : {"origins", "destinations"}) {
        if (!t.contains(key) || !t[key].is_array() || t[key].empty()) {
          errs.push_back(std::string("terminals.") + key + ": missing or empty");
          continue;
        }
        for (const auto& v : t[key]) {
          if (!v.is_string()) {
            errs.push_back(std::string("terminals.") + key + ": ids must be strings");
          } else if (!ids.count(v.get<std::string>())) {
            errs.push_back(std::string("terminals.") + key + ": unknown node id " +
                           v.get<std::string>());
          }
        }
      }
    }
  }
  if (doc.contains("od_pairs")) {
    if (!doc["od_pairs"].is_array() || doc["od_pairs"].empty()) {
      errs.push_back("od_pairs: expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < doc["od_pairs"].size(); ++i) {
        const json& p = doc["od_pairs"][i];
        const std::string where = "od_pairs[" + std::to_string(i) + "]";
        if (!is_id_pair(p)) {
          errs.push_back(where + ": expected [origin, destination]");
          continue;
        }
        for (std::size_t s = 0; s < 2; ++s) {
          if (!ids.count(p[s].get<std::string>())) {
            errs.push_back(where + ": unknown node id " + p[s].get<std::string>());
          }
        }
      }
    }
  }
  if (!doc.contains("terminals") && !doc.contains("od_pairs")) {
    errs.push_back("terminals: neither terminals nor od_pairs given");
  }

  if (!doc.contains("epicenter") || !doc["epicenter"].is_object() ||
      !doc["epicenter"].contains("x_km") || !doc["epicenter"]["x_km"].is_number() ||
      !doc["epicenter"].contains("y_km") || !doc["epicenter"]["y_km"].is_number()) {
    errs.push_back("epicenter: expected {x_km, y_km}");
  }
  if (doc.contains("seismic")) {
    const json& s = doc["seismic"];
    if (!s.is_object()) {
      errs.push_back("seismic: expected an object");
    } else {
      for (const char* key : {"sigma_eta", "sigma_eps"}) {
        if (s.contains(key) && (!s[key].is_number() || !(s[key].get<double>() > 0.0))) {
          errs.push_back(std::string("seismic.") + key + ": must be a positive number");
        }
      }
    }
  }
  if (doc.contains("links")) {
    if (!doc["links"].is_array()) {
      errs.push_back("links: expected an array");
    } else {
      for (std::size_t i = 0; i < doc["links"].size(); ++i) {
        const json& l = doc["links"][i];
        const std::string where = "links[" + std::to_string(i) + "]";
        if (!l.is_object() || !l.contains("from") || !l["from"].is_string() ||
            !l.contains("to") || !l["to"].is_string()) {
          errs.push_back(where + ": expected {from, to, c_median, zeta}");
          continue;
        }
        for (const char* key : {"from", "to"}) {
          if (!ids.count(l[key].get<std::string>())) {
            errs.push_back(where + ": unknown node id " + l[key].get<std::string>());
          }
        }
        if (!l.contains("c_median") || !l["c_median"].is_number() ||
            !(l["c_median"].get<double>() > 0.0)) {
          errs.push_back(where + ".c_median: must be a positive number");
        }
        if (!l.contains("zeta") || !l["zeta"].is_number() || !(l["zeta"].get<double>() >= 0.0)) {
          errs.push_back(where + ".zeta: must be a non-negative number");
        }
      }
    }
  }
  return errs;
}

NetworkFile parse_network_json(const json& doc) {
  const auto errs = validate_network_json(doc);
  if (!errs.empty()) throw ValidationError(join_lines(errs));

  const std::set<std::string> terminals = terminal_ids(doc);
  std::vector<Component> nodes;
  for (const auto& n : doc["nodes"]) {
    Component c;
    c.id = n["id"].get<std::string>();
    c.position = {n["x_km"].get<double>(), n["y_km"].get<double>()};
    c.perfect = n.value("perfect", terminals.count(c.id) > 0);
    c.capacity_median = n.value("c_median", 1.0);
    c.capacity_log_std = n.value("zeta", 0.0);
    nodes.push_back(std::move(c));
  }
  std::vector<IdPair> edges;
  for (const auto& e : doc["edges"]) edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());

  Network net(std::move(nodes), edges);
  if (doc.contains("links")) {
    std::vector<UnreliableLink> links;
    for (const auto& l : doc["links"]) {
      links.push_back({l["from"].get<std::string>(), l["to"].get<std::string>(),
                       l["c_median"].get<double>(), l["zeta"].get<double>(),
                       l.value("id", std::string{})});
    }
    net = link_to_node_conversion(net, links);
  }

  SeismicModel model;
  model.epicenter = {doc["epicenter"]["x_km"].get<double>(), doc["epicenter"]["y_km"].get<double>()};
  if (doc.contains("seismic")) {
    model.sigma_eta = doc["seismic"].value("sigma_eta", model.sigma_eta);
    model.sigma_eps = doc["seismic"].value("sigma_eps", model.sigma_eps);
  }

  NetworkFile out{std::move(net), model, std::nullopt, {}};
  if (doc.contains("terminals")) {
    out.terminals = TerminalSpec{doc["terminals"]["origins"].get<std::vector<std::string>>(),
                                 doc["terminals"]["destinations"].get<std::vector<std::string>>()};
  }
  if (doc.contains("od_pairs")) {
    for (const auto& p : doc["od_pairs"]) {
      out.od_pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

NetworkFile load_network_file(const std::string& path) {
  return parse_network_json(read_json_file(path));
}

json to_json(const NetworkFile& file) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& c : file.network.nodes()) {
    json n = {{"id", c.id},
              {"x_km", c.position.x_km},
              {"y_km", c.position.y_km},
              {"perfect", c.perfect}};
    n["c_median"] = c.capacity_median;
    n["zeta"] = c.capacity_log_std;
    doc["nodes"].push_back(n);
  }
  doc["edges"] = json::array();
  for (const auto& [a, b] : file.network.edges()) {
    doc["edges"].push_back({file.network.node(a).id, file.network.node(b).id});
  }
  if (file.terminals) {
    doc["terminals"] = {{"origins", file.terminals->origins},
                        {"destinations", file.terminals->destinations}};
  }
  if (!file.od_pairs.empty()) {
    doc["od_pairs"] = json::array();
    for (const auto& [a, b] : file.od_pairs) doc["od_pairs"].push_back({a, b});
  }
  doc["epicenter"] = {{"x_km", file.model.epicenter.x_km}, {"y_km", file.model.epicenter.y_km}};
  doc["seismic"] = {{"sigma_eta", file.model.sigma_eta}, {"sigma_eps", file.model.sigma_eps}};
  return doc;
}

MagnitudeGrid parse_grid(const std::string& grid, const std::string& intervals) {
  double hi = 0.0;
  double lo = 0.0;
  double step = 0.0;
  char tail = 0;
  if (std::sscanf(grid.c_str(), "%lf:%lf:%lf%c", &hi, &lo, &step, &tail) != 3) {
    throw InvalidArgumentError("grid must look like 9.0:3.0:0.5, got '" + grid + "'");
  }
  std::vector<MagnitudeInterval> parts;
  if (!intervals.empty() && intervals != "one-span") {
    std::stringstream ss(intervals);
    std::string item;
    while (std::getline(ss, item, ',')) {
      MagnitudeInterval iv;
      if (std::sscanf(item.c_str(), "%lf:%lf%c", &iv.hi, &iv.lo, &tail) != 2) {
        throw InvalidArgumentError("interval must look like 9.0:7.0, got '" + item + "'");
      }
      parts.push_back(iv);
    }
  }
  return MagnitudeGrid(hi, lo, step, std::move(parts));
}

DamageStateSet parse_damage_states(const std::string& text) {
  if (text == "hazus-4") return DamageStateSet::hazus4();
  DamageStateSet set;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    DamageState d;
    char tail = 0;
    if (eq == std::string::npos || eq == 0 ||
        std::sscanf(item.c_str() + eq + 1, "%lf:%lf%c", &d.capacity_median, &d.capacity_log_std,
                    &tail) != 2) {
      throw InvalidArgumentError("damage state must look like label=median:zeta, got '" + item +
                                 "'");
    }
    d.label = item.substr(0, eq);
    set.states.push_back(d);
  }
  if (set.states.empty()) throw InvalidArgumentError("no damage states given");
  set.validate();
  return set;
}

StudyConfig parse_study_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("study config: expected a JSON object");
  StudyConfig c;
  try {
    if (doc.contains("limit_state")) {
      const json& ls = doc["limit_state"];
      c.limit_state.kind = parse_limit_state_kind(ls.value("kind", std::string("rp")));
      c.limit_state.aggregation = parse_aggregation(ls.value("aggregation", std::string("single")));
      c.limit_state.k = ls.value("k", std::size_t{1});
      c.limit_state.rp_weighting =
          parse_rp_weighting(ls.value("rp_weights", std::string("sample")));
    }
    if (doc.contains("ss")) {
      const json& s = doc["ss"];
      c.ss.n = s.value("n", c.ss.n);
      c.ss.p0 = s.value("p0", c.ss.p0);
      c.ss.t_f = s.value("t_f", c.ss.t_f);
      c.ss.max_levels = s.value("max_levels", c.ss.max_levels);
    }
    c.ss.seed = doc.value("seed", c.ss.seed);
    if (doc.contains("grid")) {
      const json& g = doc["grid"];
      std::vector<MagnitudeInterval> parts;
      if (g.contains("intervals")) {
        for (const auto& iv : g["intervals"]) {
          parts.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        }
      }
      c.grid.emplace(g.at("mw_max").get<double>(), g.at("mw_min").get<double>(),
                     g.at("step").get<double>(), std::move(parts));
    }
    if (doc.contains("damage_states")) {
      const json& d = doc["damage_states"];
      if (d.is_string()) {
        c.damage_states = parse_damage_states(d.get<std::string>());
      } else {
        DamageStateSet set;
        for (const auto& s : d) {
          set.states.push_back({s.at("label").get<std::string>(), s.at("c_median").get<double>(),
                                s.at("zeta").get<double>()});
        }
        set.validate();
        c.damage_states = set;
      }
    }
    c.reps = doc.value("reps", c.reps);
    if (doc.contains("mw_ref")) c.mw_ref = doc["mw_ref"].get<double>();
    if (doc.contains("outputs")) {
      c.csv_path = doc["outputs"].value("csv", std::string{});
      c.json_path = doc["outputs"].value("json", std::string{});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("study config: ") + e.what());
  }
  c.ss.validate();
  if (c.reps == 0) throw InvalidArgumentError("reps must be at least 1");
  return c;
}

json to_json(const StudyConfig& c) {
  json doc;
  doc["limit_state"] = {{"kind", to_string(c.limit_state.kind)},
                        {"aggregation", to_string(c.limit_state.aggregation)},
                        {"k", c.limit_state.k},
                        {"rp_weights", to_string(c.limit_state.rp_weighting)}};
  doc["ss"] = {{"n", c.ss.n}, {"p0", c.ss.p0}, {"t_f", c.ss.t_f}, {"max_levels", c.ss.max_levels}};
  doc["seed"] = c.ss.seed;
  if (c.grid) {
    json g = {{"mw_max", c.grid->mw_max()}, {"mw_min", c.grid->mw_min()}, {"step", c.grid->step()}};
    g["intervals"] = json::array();
    for (const auto& iv : c.grid->intervals()) g["intervals"].push_back({iv.hi, iv.lo});
    doc["grid"] = g;
  }
  if (c.damage_states) {
    doc["damage_states"] = json::array();
    for (const auto& d : c.damage_states->states) {
      doc["damage_states"].push_back(
          {{"label", d.label}, {"c_median", d.capacity_median}, {"zeta", d.capacity_log_std}});
    }
  }
  doc["reps"] = c.reps;
  if (c.mw_ref) doc["mw_ref"] = *c.mw_ref;
  doc["outputs"] = {{"csv", c.csv_path}, {"json", c.json_path}};
  return doc;
}

void validate_study(const StudyConfig& config, const NetworkFile& network) {
  config.ss.validate();
  LimitStateSpec spec = config.limit_state;
  if (spec.terminals.origins.empty() && network.terminals) spec.terminals = *network.terminals;
  if (spec.od_pairs.empty()) spec.od_pairs = network.od_pairs;
  spec.validate(network.network);
  if (config.limit_state.kind == LimitStateKind::binary) {
    throw InvalidArgumentError(
        "binary limit state cannot drive subset simulation: its intermediate quantiles are "
        "degenerate (all samples share the value 1)");
  }
}

std::string content_hash(const json& doc) {
  // json objects are key-sorted, so dump() is canonical.
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw DimensionMismatchError("CSV row has " + std::to_string(cells.size()) +
                                 " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out_ << '"';
      for (const char ch : c) {
        if (ch == '"') out_ << '"';
        out_ << ch;
      }
      out_ << '"';
    } else {
      out_ << c;
    }
  }
  out_ << '\n';
}

}  // namespace seisnet
