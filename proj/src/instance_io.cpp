// Copyright 2026 The benderskit Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "benderskit/instance_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace benderskit::power {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

OperationalProfile load_profile_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open profile CSV: " + path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty profile CSV: " + path);
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "period" || header[1] != "slice" ||
      header[2] != "hours" || header[3] != "weight") {
    throw ParseError(
        "profile CSV must start with columns period,slice,hours,weight");
  }
  OperationalProfile profile;
  std::vector<std::string> demand_cols, cf_cols;
  for (std::size_t k = 4; k < header.size(); ++k) {
    const std::string& col = header[k];
    if (col.rfind("demand:", 0) == 0) {
      demand_cols.push_back(col.substr(7));
      profile.demand[demand_cols.back()] = {};
    } else if (col.rfind("cf:", 0) == 0) {
      cf_cols.push_back(col);
      profile.capacity_factor[col] = {};
    } else {
      throw ParseError("unrecognised profile column: " + col);
    }
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("profile CSV line " + std::to_string(line_no) +
                       ": expected " + std::to_string(header.size()) +
                       " cells");
    }
    try {
      profile.slice_of.push_back(std::stoi(cells[1]));
      profile.hours.push_back(std::stod(cells[2]));
      profile.weight.push_back(std::stod(cells[3]));
      std::size_t k = 4;
      for (const auto& region : demand_cols) {
        profile.demand[region].push_back(std::stod(cells[k++]));
      }
      for (const auto& col : cf_cols) {
        profile.capacity_factor[col].push_back(std::stod(cells[k++]));
      }
    } catch (const std::exception&) {
      throw ParseError("profile CSV line " + std::to_string(line_no) +
                       ": numeric parse failure");
    }
  }
  return profile;
}

void save_profile_csv(const OperationalProfile& profile,
                      const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot write profile CSV: " + path);
  os << "period,slice,hours,weight";
  for (const auto& [region, series] : profile.demand) {
    os << ",demand:" << region;
  }
  for (const auto& [col, series] : profile.capacity_factor) os << "," << col;
  os << "\n";
  os.precision(12);
  for (int t = 0; t < profile.num_periods(); ++t) {
    os << t << "," << profile.slice_of[t] << "," << profile.hours[t] << ","
       << profile.weight[t];
    for (const auto& [region, series] : profile.demand) os << "," << series[t];
    for (const auto& [col, series] : profile.capacity_factor) {
      os << "," << series[t];
    }
    os << "\n";
  }
}

TechnologyData tech_from_json(const json& j, TechKind kind) {
  TechnologyData t;
  t.kind = kind;
  t.name = j.at("name").get<std::string>();
  if (kind == TechKind::Line) {
    t.region_from = j.at("from").get<std::string>();
    t.region_to = j.at("to").get<std::string>();
  } else {
    t.region = j.at("region").get<std::string>();
  }
  if (j.contains("kind")) t.kind = tech_kind_from_string(j.at("kind"));
  t.c_inv = j.at("c_inv").get<double>();
  if (j.contains("c_inv_stage")) {
    t.c_inv_stage = j.at("c_inv_stage").get<std::vector<double>>();
  }
  t.c_fix = j.value("c_fix", 0.0);
  t.x_hist = j.value("x_hist", 0.0);
  t.x_max = j.at("x_max").get<double>();
  t.lifetime_years = j.value("lifetime", 100.0);
  t.c_op = j.value("c_op", 0.0);
  t.e_g = j.value("emission_factor", 0.0);
  t.alpha_g = j.value("ramp_rate", 1.0);
  t.cf_column = j.value("cf_column", "");
  t.eta_se = j.value("eta", 1.0);
  t.gamma_se = j.value("power_ratio", 1.0);
  t.c_s = j.value("charge_cost", 0.0);
  return t;
}

json tech_to_json(const TechnologyData& t) {
  json j;
  j["name"] = t.name;
  j["kind"] = to_string(t.kind);
  if (t.kind == TechKind::Line) {
    j["from"] = t.region_from;
    j["to"] = t.region_to;
  } else {
    j["region"] = t.region;
  }
  j["c_inv"] = t.c_inv;
  if (!t.c_inv_stage.empty()) j["c_inv_stage"] = t.c_inv_stage;
  j["c_fix"] = t.c_fix;
  j["x_hist"] = t.x_hist;
  j["x_max"] = t.x_max;
  j["lifetime"] = t.lifetime_years;
  switch (t.kind) {
    case TechKind::Thermal:
    case TechKind::ThermalCcs:
      j["c_op"] = t.c_op;
      j["emission_factor"] = t.e_g;
      j["ramp_rate"] = t.alpha_g;
      break;
    case TechKind::Renewable:
      j["cf_column"] = t.cf_column;
      break;
    case TechKind::Storage:
      j["eta"] = t.eta_se;
      j["power_ratio"] = t.gamma_se;
      j["charge_cost"] = t.c_s;
      break;
    case TechKind::Line:
      break;
  }
  return j;
}

}  // namespace

InstanceData load_instance(const std::string& json_path) {
  std::ifstream is(json_path);
  if (!is) throw ParseError("cannot open instance: " + json_path);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError("instance JSON parse failure: " + std::string(e.what()));
  }
  try {
    InstanceData data;
    data.name = doc.value("name", fs::path(json_path).stem().string());
    for (const auto& r : doc.at("regions")) {
      data.topology.regions.push_back(r.get<std::string>());
    }
    for (const auto& j : doc.value("technologies", json::array())) {
      data.technologies.push_back(tech_from_json(j, TechKind::Thermal));
    }
    for (const auto& j : doc.value("storage", json::array())) {
      data.technologies.push_back(tech_from_json(j, TechKind::Storage));
    }
    for (const auto& j : doc.value("lines", json::array())) {
      data.technologies.push_back(tech_from_json(j, TechKind::Line));
    }
    const std::string csv_rel = doc.at("profiles").at("csv").get<std::string>();
    const fs::path csv_path = fs::path(json_path).parent_path() / csv_rel;
    data.profile = load_profile_csv(csv_path.string());

    const json& jt = doc.at("tree");
    data.tree.stages = jt.at("stages").get<int>();
    data.tree.kappa = jt.value("kappa", 5.0);
    if (jt.contains("uncertainties")) {
      for (const auto& [name, ju] : jt.at("uncertainties").items()) {
        data.tree.outcomes[name] =
            ju.at("outcomes").get<std::vector<std::vector<double>>>();
      }
    }
    const json& je = doc.at("economics");
    data.economics.discount_rate = je.value("discount_rate", 0.05);
    data.economics.shed_penalty = je.value("shed_penalty", 0.0);
    data.tree.root_co2_budget = je.value("co2_budget", 1e9);
    data.tree.root_co2_tax = je.value("co2_tax", 0.0);
    data.tree.root_demand_scale = je.value("demand_scale", 1.0);
    return data;
  } catch (const json::exception& e) {
    throw ParseError("instance JSON schema error: " + std::string(e.what()));
  }
}

std::string save_instance(const InstanceData& data, const std::string& dir) {
  fs::create_directories(dir);
  const std::string csv_name = data.name + "_profile.csv";
  save_profile_csv(data.profile, (fs::path(dir) / csv_name).string());

  json doc;
  doc["name"] = data.name;
  doc["regions"] = data.topology.regions;
  doc["technologies"] = json::array();
  doc["storage"] = json::array();
  doc["lines"] = json::array();
  for (const auto& t : data.technologies) {
    if (t.kind == TechKind::Storage) {
      doc["storage"].push_back(tech_to_json(t));
    } else if (t.kind == TechKind::Line) {
      doc["lines"].push_back(tech_to_json(t));
    } else {
      doc["technologies"].push_back(tech_to_json(t));
    }
  }
  doc["profiles"] = {{"csv", csv_name}};
  json ju = json::object();
  for (const auto& [name, lists] : data.tree.outcomes) {
    ju[name] = {{"outcomes", lists}};
  }
  doc["tree"] = {{"stages", data.tree.stages},
                 {"kappa", data.tree.kappa},
                 {"uncertainties", ju}};
  doc["economics"] = {{"discount_rate", data.economics.discount_rate},
                      {"shed_penalty", data.economics.shed_penalty},
                      {"co2_budget", data.tree.root_co2_budget},
                      {"co2_tax", data.tree.root_co2_tax},
                      {"demand_scale", data.tree.root_demand_scale}};

  const fs::path json_path = fs::path(dir) / (data.name + ".json");
  std::ofstream os(json_path);
  if (!os) throw ParseError("cannot write instance: " + json_path.string());
  os << doc.dump(2) << "\n";
  return json_path.string();
}

}  // namespace benderskit::power
