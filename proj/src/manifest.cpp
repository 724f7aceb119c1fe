// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "masc/errors.hpp"

namespace masc {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& root, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || root.empty()) return path;
  return root / path;
}

const json& require(const json& obj, const char* field, std::size_t index) {
  if (!obj.contains(field))
    throw SchemaError("record " + std::to_string(index) + ": missing field '" + field + "'");
  return obj.at(field);
}

std::string require_string(const json& obj, const char* field, std::size_t index) {
  const auto& v = require(obj, field, index);
  if (!v.is_string())
    throw SchemaError("record " + std::to_string(index) + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

std::int64_t require_int(const json& obj, const char* field, std::size_t index) {
  const auto& v = require(obj, field, index);
  if (!v.is_number_integer())
    throw SchemaError("record " + std::to_string(index) + ": field '" + field + "' must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

std::string RecordKey::str() const {
  return method + "/" + concept_id + "/" + std::to_string(prompt_idx) + "/" + std::to_string(seed);
}

DatasetManifest parse_manifest(const std::string& json_text, const std::filesystem::path& root) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array())
    throw SchemaError("manifest must be an object with a 'records' array");

  DatasetManifest manifest;
  if (doc.contains("text_embedding_dir")) {
    if (!doc["text_embedding_dir"].is_string())
      throw SchemaError("'text_embedding_dir' must be a string");
    manifest.text_embedding_dir = resolve(root, doc["text_embedding_dir"].get<std::string>());
  }

  std::set<RecordKey> seen;
  std::vector<std::string> missing;
  std::set<std::string> missing_seen;
  const auto& records = doc["records"];
  manifest.records.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.is_object()) throw SchemaError("record " + std::to_string(i) + " is not an object");
    const auto& k = require(r, "key", i);
    if (!k.is_object()) throw SchemaError("record " + std::to_string(i) + ": 'key' must be an object");

    EvalRecord rec;
    rec.key.method = require_string(k, "method", i);
    rec.key.concept_id = require_string(k, "concept_id", i);
    rec.key.prompt_idx = require_int(k, "prompt_idx", i);
    rec.key.seed = require_int(k, "seed", i);
    if (!seen.insert(rec.key).second)
      throw SchemaError("duplicate record key " + rec.key.str() + " at record " + std::to_string(i));

    rec.ref_patch_path = resolve(root, require_string(r, "ref_patch_path", i));
    rec.gen_patch_path = resolve(root, require_string(r, "gen_patch_path", i));
    rec.ref_mask_path = resolve(root, require_string(r, "ref_mask_path", i));
    rec.gen_mask_path = resolve(root, require_string(r, "gen_mask_path", i));
    rec.prompt = require_string(r, "prompt", i);
    rec.subject_name = require_string(r, "subject_name", i);
    if (r.contains("ratings")) {
      const auto& ratings = r["ratings"];
      if (!ratings.is_object())
        throw SchemaError("record " + std::to_string(i) + ": 'ratings' must be an object");
      for (const auto& [name, value] : ratings.items()) {
        if (!value.is_number())
          throw SchemaError("record " + std::to_string(i) + ": rating '" + name + "' must be numeric");
        rec.ratings[name] = value.get<double>();
      }
    }

    for (const auto* p : {&rec.ref_patch_path, &rec.gen_patch_path, &rec.ref_mask_path, &rec.gen_mask_path}) {
      if (!std::filesystem::is_regular_file(*p) && missing_seen.insert(p->string()).second)
        missing.push_back(p->string());
    }
    manifest.records.push_back(std::move(rec));
  }
  if (!missing.empty()) throw MissingAssetError(std::move(missing));
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path, const std::filesystem::path& root) {
  std::ifstream in(path);
  if (!in) throw MissingAssetError({path.string()});
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto base = root.empty() ? path.parent_path() : root;
  return parse_manifest(buffer.str(), base);
}

}  // namespace masc
