#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "impactfrac/cli.hpp"
#include "impactfrac/error.hpp"

namespace impactfrac::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                  : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace

double parse_double(std::string_view text) {
  const std::string_view s = trim(text);
  std::string_view body = s;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size()) {
    fail(ErrorCode::InvalidArgument, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view spec) {
  std::vector<double> out;
  for (auto part : split(spec, ',')) out.push_back(parse_double(part));
  return out;
}

std::vector<double> parse_grid(std::string_view spec) {
  if (spec.find(':') == std::string_view::npos) return parse_list(spec);
  const auto parts = split(spec, ':');
  if (parts.size() != 3) fail(ErrorCode::InvalidArgument, "grid must be start:stop:step");
  const double a = parse_double(parts[0]);
  const double b = parse_double(parts[1]);
  const double step = parse_double(parts[2]);
  if (!(step > 0.0) || !(b >= a) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorCode::InvalidArgument, "grid needs start <= stop and a positive step");
  }
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
  if (count > 1000000) fail(ErrorCode::InvalidArgument, "grid has too many points");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

Counterfactual parse_counterfactual(std::string_view spec, Eigen::Index k) {
  std::string s = lower(trim(spec));
  bool clamp = false;
  if (const auto pos = s.find("+clamp"); pos != std::string::npos && pos + 6 == s.size()) {
    clamp = true;
    s.resize(pos);
  }
  if (s == "zero") return Counterfactual::zero();
  if (s == "identity") return Counterfactual::identity(clamp);
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  if (colon == std::string::npos) {
    fail(ErrorCode::InvalidArgument, "counterfactual must be zero, identity, scale:<a> or shift:<d>");
  }
  const std::string_view arg = std::string_view(s).substr(colon + 1);
  if (kind == "scale") return Counterfactual::scale(parse_double(arg), clamp);
  if (kind == "shift") {
    const auto offsets = parse_list(arg);
    if (offsets.size() == 1) return Counterfactual::shift(offsets[0], k, clamp);
    Eigen::VectorXd d(static_cast<Eigen::Index>(offsets.size()));
    for (std::size_t i = 0; i < offsets.size(); ++i) d[static_cast<Eigen::Index>(i)] = offsets[i];
    return Counterfactual::shift(d, clamp);
  }
  fail(ErrorCode::InvalidArgument, "unknown counterfactual '" + std::string(spec) + "'");
}

CsvData read_exposure_csv(std::istream& in) {
  CsvData data;
  std::string line;
  std::size_t line_no = 0;
  int weight_col = -1;
  std::vector<std::vector<double>> rows;
  std::vector<double> weights;
  std::size_t width = 0;

  auto where = [&line_no] { return "line " + std::to_string(line_no) + ": "; };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto fields = split(content, ',');

    if (width == 0) {
      width = fields.size();
      for (std::size_t j = 0; j < fields.size(); ++j) {
        std::string name = unquote(fields[j]);
        if (name.empty()) fail(ErrorCode::InvalidArgument, where() + "empty column name");
        if (lower(name) == "weight") {
          if (weight_col >= 0) fail(ErrorCode::InvalidArgument, where() + "duplicate weight column");
          weight_col = static_cast<int>(j);
        } else {
          data.columns.push_back(std::move(name));
        }
      }
      if (data.columns.empty()) fail(ErrorCode::InvalidArgument, where() + "no exposure columns");
      continue;
    }

    if (fields.size() != width) {
      fail(ErrorCode::InvalidArgument, where() + "expected " + std::to_string(width) +
                                           " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(data.columns.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v;
      try {
        v = parse_double(fields[j]);
      } catch (const Error&) {
        fail(ErrorCode::InvalidArgument,
             where() + "field " + std::to_string(j + 1) + " is not a decimal number");
      }
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, where() + "non-finite value");
      if (static_cast<int>(j) == weight_col) {
        weights.push_back(v);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (width == 0) fail(ErrorCode::InvalidArgument, "CSV input has no header row");

  data.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(data.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (weight_col >= 0) {
    data.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  }
  return data;
}

CsvData read_exposure_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open data file '" + path + "'");
  return read_exposure_csv(in);
}

namespace {

std::string scalar_token(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

}  // namespace

std::vector<std::string> parse_config_text(std::string_view text) {
  std::vector<std::string> tokens;
  const std::string_view body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
    }
    const nlohmann::json& cfg = doc.contains("config") ? doc["config"] : doc;
    if (!cfg.is_object()) fail(ErrorCode::InvalidArgument, "config must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      if (value.is_null()) continue;
      if (value.is_array()) {
        for (const auto& item : value) tokens.push_back("--" + key + "=" + scalar_token(item));
      } else {
        tokens.push_back("--" + key + "=" + scalar_token(value));
      }
    }
    return tokens;
  }

  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::InvalidArgument,
           "config line " + std::to_string(line_no) + " is not of the form key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + " has no key");
    tokens.push_back("--" + key + "=" + unquote(line.substr(eq + 1)));
  }
  return tokens;
}

std::vector<std::string> read_config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace impactfrac::cli
