#include "document.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace impactfrac::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string short_number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

std::string cell_text(const Json& v, bool full_precision) {
  if (v.is_null()) return "nan";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    const double d = v.get<double>();
    return full_precision ? format_number(d) : short_number(d);
  }
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (const auto& item : v) s += (s.empty() ? "" : "; ") + cell_text(item, full_precision);
    return s;
  }
  return v.dump();
}

// Flattens nested objects to dotted keys.
void flatten(const Json& v, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out, bool full_precision) {
  if (v.is_object()) {
    for (const auto& [k, item] : v.items()) {
      flatten(item, prefix.empty() ? k : prefix + "." + k, out, full_precision);
    }
    return;
  }
  out.emplace_back(prefix, cell_text(v, full_precision));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void render_text(const Document& doc, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> lines;
  flatten(doc.header, "", lines, false);
  flatten(doc.result, "", lines, false);
  std::size_t width = 0;
  for (const auto& [k, v] : lines) width = std::max(width, k.size());
  for (const auto& [k, v] : lines) {
    out << k << std::string(width - k.size(), ' ') << "  " << v << '\n';
  }
  for (const auto& table : doc.tables) {
    out << '\n' << table.name << '\n';
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> widths;
    for (const auto& c : table.columns) widths.push_back(c.size());
    for (const auto& row : table.rows) {
      std::vector<std::string> r;
      for (std::size_t j = 0; j < row.size(); ++j) {
        r.push_back(cell_text(row[j], false));
        widths[j] = std::max(widths[j], r.back().size());
      }
      cells.push_back(std::move(r));
    }
    auto emit = [&](const std::vector<std::string>& r) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (j) out << "  ";
        out << std::string(widths[j] - r[j].size(), ' ') << r[j];
      }
      out << '\n';
    };
    emit(table.columns);
    for (const auto& r : cells) emit(r);
  }
}

void render_csv(const Document& doc, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> lines;
  flatten(doc.header, "", lines, true);
  flatten(doc.result, "", lines, true);
  for (const auto& [k, v] : lines) out << "# " << k << ": " << v << '\n';
  for (std::size_t t = 0; t < doc.tables.size(); ++t) {
    const auto& table = doc.tables[t];
    if (t > 0) out << '\n';
    if (doc.tables.size() > 1) out << "# table: " << table.name << '\n';
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      out << (j ? "," : "") << csv_field(table.columns[j]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        out << (j ? "," : "") << csv_field(cell_text(row[j], true));
      }
      out << '\n';
    }
  }
}

void render_json(const Document& doc, std::ostream& out) {
  Json j = doc.header;
  j["config"] = doc.config;
  j["result"] = doc.result;
  if (!doc.tables.empty()) {
    Json tables = Json::object();
    for (const auto& table : doc.tables) {
      Json rows = Json::array();
      for (const auto& row : table.rows) {
        Json obj = Json::object();
        for (std::size_t c = 0; c < table.columns.size(); ++c) obj[table.columns[c]] = row[c];
        rows.push_back(std::move(obj));
      }
      tables[table.name] = std::move(rows);
    }
    j["tables"] = std::move(tables);
  }
  out << j.dump(2) << '\n';
}

}  // namespace

void render(const Document& doc, Format format, std::ostream& out) {
  switch (format) {
    case Format::Text: render_text(doc, out); break;
    case Format::Csv: render_csv(doc, out); break;
    case Format::Json: render_json(doc, out); break;
  }
}

}  // namespace impactfrac::cli
