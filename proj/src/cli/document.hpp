#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace impactfrac::cli {

using Json = nlohmann::ordered_json;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

// Everything a subcommand emits. `header` carries tool, version, command,
// seed, method and convention flags; `config` the effective options.
struct Document {
  Json header = Json::object();
  Json config = Json::object();
  Json result = Json::object();
  std::vector<Table> tables;
};

enum class Format { Text, Csv, Json };

void render(const Document& doc, Format format, std::ostream& out);

/// Shortest decimal that round-trips; nan / inf / -inf for non-finite.
std::string format_number(double v);

}  // namespace impactfrac::cli
