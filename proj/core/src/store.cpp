#include <string>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/service.hpp"

namespace fednlp {

using nlohmann::json;

json store_to_json(const Store& store) {
  json docs = json::array();
  for (const auto& sd : store.documents) {
    json d = sd.doc;
    d["precomputed"] = sd.precomputed;
    docs.push_back(std::move(d));
  }
  return json{{"format_version", kStoreFormatVersion}, {"documents", std::move(docs)}, {"ffr", store.ffr}};
}

// Accepts either a store object or a bare corpus array (no precomputed data).
Store store_from_json(const json& j) {
  Store store;
  if (j.is_array()) {
    for (auto& d : parse_corpus(j)) store.documents.push_back({std::move(d), nullptr});
    return store;
  }
  if (!j.is_object()) throw SchemaError(0, "<root>", "store must be a JSON object or a corpus array");
  const auto version = j.find("format_version");
  if (version == j.end() || !version->is_number_integer())
    throw SchemaError(0, "format_version", "missing or not an integer");
  if (version->get<long long>() != kStoreFormatVersion) {
    throw VersionError("store", static_cast<unsigned>(version->get<long long>()), kStoreFormatVersion);
  }
  const auto docs = j.find("documents");
  if (docs == j.end() || !docs->is_array()) throw SchemaError(0, "documents", "missing or not an array");

  // parse_corpus validates every record; precomputed blocks are carried as-is.
  json bare = json::array();
  for (const auto& d : *docs) {
    json copy = d;
    if (copy.is_object()) copy.erase("precomputed");
    bare.push_back(std::move(copy));
  }
  auto parsed = parse_corpus(bare);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const json& rec = (*docs)[i];
    json pre = nullptr;
    if (auto it = rec.find("precomputed"); it != rec.end()) {
      if (!it->is_object() && !it->is_null()) throw SchemaError(i, "precomputed", "expected an object or null");
      pre = *it;
    }
    store.documents.push_back({std::move(parsed[i]), std::move(pre)});
  }
  if (auto it = j.find("ffr"); it != j.end() && !it->is_null()) store.ffr = parse_ffr(*it);
  return store;
}

void save_store(const Store& store, const std::filesystem::path& path) {
  write_file(path, store_to_json(store).dump(2) + "\n");
}

Store load_store(const std::filesystem::path& path) { return store_from_json(read_json_file(path)); }

}  // namespace fednlp
