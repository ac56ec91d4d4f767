#pragma once

#include <string>

#include <json.hpp>

namespace blowup {

using Json = nlohmann::ordered_json;

/// One named block of a verification report: a pass flag plus measured
/// quantities. Keys keep insertion order so serialized reports are stable.
struct ReportSection {
  std::string name;
  bool pass = true;
  Json data = Json::object();

  /// Records a named check; a false `ok` fails the whole section.
  void check(const std::string& key, bool ok) {
    data["checks"][key] = ok;
    pass = pass && ok;
  }

  Json to_json() const {
    Json j = Json::object();
    j["pass"] = pass;
    for (const auto& [k, v] : data.items()) j[k] = v;
    return j;
  }
};

}  // namespace blowup
