#pragma once

#include <string>

#include "htdml/boosted.hpp"

namespace htdml {

/// Metadata stored alongside a serialized model.
struct ModelMeta {
  HyperParams hyper;
  int iterations = 0;
  double final_objective = 0.0;
  std::string status = "none";
};

/// Versioned line-oriented text formats ("HTDML-LINEAR v1" and
/// "HTDML-GBRT v1"); floats use shortest round-trip formatting, trees are
/// serialized preorder as "N feat thr" / "L v1 ... vr" lines.
void save_model(const LinearMap& map, const ModelMeta& meta, const std::string& path);
void save_model(const BoostedMap& map, const ModelMeta& meta, const std::string& path);

struct LoadedModel {
  Mapping mapping;
  ModelMeta meta;
};

LoadedModel load_model(const std::string& path);

}  // namespace htdml
