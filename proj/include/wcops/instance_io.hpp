// Copyright 2026 The wcops Authors. All rights reserved.
//
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

#pragma once

// JSON documents for CMDP instances:
//   {"L":int, "layers":[[state ids]], "actions":int,
//    "transitions":{"x,a":[probs over the next layer]}, "m":int}
// plus optional "T", "rewards":{"x,a":r} and "costs":{"x,a":[g_1..g_m]}
// carrying mean rewards/costs for the oracle tools.

#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "wcops/cmdp.hpp"

namespace wcops {

struct InstanceDocument {
  CmdpInstance instance;
  std::optional<PairVector> reward_means;
  std::optional<CostMatrix> cost_means;
};

inline std::string pair_key(std::size_t x, std::size_t a) {
  return std::to_string(x) + "," + std::to_string(a);
}

inline nlohmann::json to_json(const InstanceDocument& doc) {
  const auto& inst = doc.instance;
  const Layout& layout = inst.layout;
  nlohmann::json j;
  j["L"] = layout.num_layers();
  auto layers = nlohmann::json::array();
  for (std::size_t k = 0; k <= layout.num_layers(); ++k) {
    auto ids = nlohmann::json::array();
    for (std::size_t s = 0; s < layout.layer_size(k); ++s) ids.push_back(layout.first_state(k) + s);
    layers.push_back(ids);
  }
  j["layers"] = layers;
  j["actions"] = layout.num_actions();
  j["m"] = inst.num_constraints;
  j["T"] = inst.horizon;
  auto trans = nlohmann::json::object();
  for (std::size_t p = 0; p < layout.num_pairs(); ++p) {
    const auto row = inst.transitions.row(p);
    trans[pair_key(layout.pair_state(p), layout.pair_action(p))] =
        std::vector<double>(row.begin(), row.end());
  }
  j["transitions"] = trans;
  if (doc.reward_means) {
    auto r = nlohmann::json::object();
    for (std::size_t p = 0; p < layout.num_pairs(); ++p)
      r[pair_key(layout.pair_state(p), layout.pair_action(p))] = (*doc.reward_means)[p];
    j["rewards"] = r;
  }
  if (doc.cost_means) {
    auto c = nlohmann::json::object();
    for (std::size_t p = 0; p < layout.num_pairs(); ++p) {
      std::vector<double> g;
      for (const auto& gi : *doc.cost_means) g.push_back(gi[p]);
      c[pair_key(layout.pair_state(p), layout.pair_action(p))] = g;
    }
    j["costs"] = c;
  }
  return j;
}

inline nlohmann::json to_json(const CmdpInstance& instance) {
  return to_json(InstanceDocument{instance, std::nullopt, std::nullopt});
}

inline InstanceDocument instance_from_json(const nlohmann::json& j) {
  try {
    const auto L = j.at("L").get<std::size_t>();
    const auto& layers = j.at("layers");
    if (layers.size() != L + 1)
      throw StructuralError("\"layers\" must list L+1 layers");
    std::vector<std::size_t> sizes;
    std::size_t expected_id = 0;
    for (const auto& layer : layers) {
      sizes.push_back(layer.size());
      for (const auto& id : layer) {
        if (id.get<std::size_t>() != expected_id++)
          throw StructuralError("state ids must be numbered consecutively in layer order");
      }
    }
    InstanceDocument doc;
    auto& inst = doc.instance;
    inst.layout = Layout(sizes, j.at("actions").get<std::size_t>());
    inst.num_constraints = j.at("m").get<std::size_t>();
    inst.horizon = j.value("T", std::size_t{1});
    inst.transitions = TransitionModel(inst.layout);
    const Layout& layout = inst.layout;
    const auto& trans = j.at("transitions");
    for (std::size_t p = 0; p < layout.num_pairs(); ++p) {
      const auto key = pair_key(layout.pair_state(p), layout.pair_action(p));
      if (!trans.contains(key)) throw StructuralError("missing transition row " + key);
      const auto row = trans.at(key).get<std::vector<double>>();
      auto dst = inst.transitions.row(p);
      if (row.size() != dst.size())
        throw StructuralError("transition row " + key + " has wrong length");
      std::copy(row.begin(), row.end(), dst.begin());
    }
    if (j.contains("rewards")) {
      PairVector r(layout.num_pairs());
      for (std::size_t p = 0; p < layout.num_pairs(); ++p)
        r[p] = j.at("rewards").at(pair_key(layout.pair_state(p), layout.pair_action(p))).get<double>();
      doc.reward_means = std::move(r);
    }
    if (j.contains("costs")) {
      CmdpInstance& ci = doc.instance;
      CostMatrix c(ci.num_constraints, PairVector(layout.num_pairs()));
      for (std::size_t p = 0; p < layout.num_pairs(); ++p) {
        const auto g = j.at("costs")
                           .at(pair_key(layout.pair_state(p), layout.pair_action(p)))
                           .get<std::vector<double>>();
        if (g.size() != ci.num_constraints) throw StructuralError("cost entry needs m values");
        for (std::size_t i = 0; i < g.size(); ++i) c[i][p] = g[i];
      }
      doc.cost_means = std::move(c);
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance document: ") + e.what());
  }
}

inline InstanceDocument load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return instance_from_json(j);
}

}  // namespace wcops
