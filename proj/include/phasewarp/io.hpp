#pragma once

// File formats: GridFunction CSV (`t,value`), TrialSet JSON-lines or plain
// text, and run-directory helpers.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/point_process.hpp"

namespace phasewarp {

/// Output directory exists and is not empty, and overwriting was not asked for.
class OutputExists : public Error {
 public:
  using Error::Error;
};

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

/// Keys keep their order when `j` is an ordered_json.
template <class Json>
void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

// ---------------------------------------------------------------------------
// GridFunction CSV

/// Columns sharing the grid of the first; header `t,<names...>`.
inline std::string columns_to_csv(const std::vector<std::string>& names,
                                  const std::vector<const GridFunction*>& cols) {
  if (names.size() != cols.size() || cols.empty()) {
    throw InvalidArgument("columns_to_csv: need one name per column");
  }
  const std::size_t n = cols.front()->size();
  for (const auto* c : cols) {
    if (c->size() != n) throw InvalidArgument("columns_to_csv: columns differ in size");
  }
  std::string out = "t";
  for (const auto& name : names) out += "," + name;
  out += "\n";
  for (std::size_t k = 0; k < n; ++k) {
    out += format_double(GridFunction::node(k, n));
    for (const auto* c : cols) out += "," + format_double((*c)[k]);
    out += "\n";
  }
  return out;
}

inline std::string grid_to_csv(const GridFunction& f) { return columns_to_csv({"value"}, {&f}); }

inline void write_grid_csv(const std::filesystem::path& path, const GridFunction& f) {
  write_text(path, grid_to_csv(f));
}

/// Parses `t,value` CSV. Node times must match the uniform grid k/(N-1).
inline GridFunction grid_from_csv(std::string_view text, const std::string& source = "<csv>") {
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError(source + ": empty file");
  if (lines.front().find_first_of("0123456789") != std::string_view::npos &&
      lines.front().substr(0, 1) != "t") {
    throw DataError(source + ": missing header 't,value'");
  }
  std::vector<double> ts;
  std::vector<double> vs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::size_t comma = line.find(',');
    const auto t = comma == std::string_view::npos ? std::nullopt : parse_double(line.substr(0, comma));
    const auto v = comma == std::string_view::npos ? std::nullopt : parse_double(line.substr(comma + 1));
    if (!t || !v) throw DataError(source + ":" + std::to_string(i + 1) + ": unparseable row");
    ts.push_back(*t);
    vs.push_back(*v);
  }
  if (vs.size() < 2) throw DataError(source + ": need at least two rows");
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (std::abs(ts[k] - GridFunction::node(k, ts.size())) > 1e-9) {
      throw DataError(source + ":" + std::to_string(k + 2) + ": t is not on the uniform grid");
    }
  }
  try {
    return GridFunction(std::move(vs));
  } catch (const InvalidArgument& e) {
    throw DataError(source + ": " + e.what());
  }
}

inline GridFunction read_grid_csv(const std::filesystem::path& path) {
  return grid_from_csv(read_text(path), path.string());
}

// ---------------------------------------------------------------------------
// TrialSet files

/// Trials as read from disk, before range checks.
struct RawTrials {
  std::vector<std::vector<double>> events;
  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> labels;
  /// 1-based source line of each trial.
  std::vector<std::size_t> lines;
};

/// JSON-lines (`{"trial_id", "label", "events"}` per line) when the first
/// non-blank character is '{', otherwise whitespace-separated plain text
/// with one trial per line (an empty line is an empty trial).
inline RawTrials parse_raw_trials(std::string_view text, const std::string& source) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw DataError(source + ": file contains no trials");
  const auto lines = split_lines(text);
  RawTrials raw;
  auto fail = [&](std::size_t line, const std::string& msg) {
    throw DataError(source + ":" + std::to_string(line) + ": " + msg);
  };

  if (text[first] == '{') {
    std::vector<std::optional<std::string>> labels;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].find_first_not_of(" \t") == std::string_view::npos) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::exception&) {
        fail(i + 1, "invalid JSON");
      }
      if (!rec.is_object() || !rec.contains("events") || !rec["events"].is_array()) {
        fail(i + 1, "record needs an \"events\" array");
      }
      std::vector<double> ev;
      for (const auto& e : rec["events"]) {
        if (!e.is_number()) fail(i + 1, "event times must be numbers");
        ev.push_back(e.get<double>());
      }
      std::string id = std::to_string(raw.events.size());
      if (rec.contains("trial_id")) {
        const auto& tid = rec["trial_id"];
        if (tid.is_string()) {
          id = tid.get<std::string>();
        } else if (tid.is_number_integer()) {
          id = std::to_string(tid.get<long long>());
        } else if (!tid.is_null()) {
          fail(i + 1, "trial_id must be a string");
        }
      }
      std::optional<std::string> label;
      if (rec.contains("label") && !rec["label"].is_null()) {
        if (!rec["label"].is_string()) fail(i + 1, "label must be a string or null");
        label = rec["label"].get<std::string>();
      }
      raw.events.push_back(std::move(ev));
      raw.ids.push_back(std::move(id));
      labels.push_back(std::move(label));
      raw.lines.push_back(i + 1);
    }
    bool any = false;
    for (const auto& l : labels) any = any || l.has_value();
    if (any) {
      raw.labels.emplace();
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) fail(raw.lines[i], "label missing while other trials are labeled");
        raw.labels->push_back(*labels[i]);
      }
    }
    return raw;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<double> ev;
    std::string_view rest = lines[i];
    while (true) {
      const std::size_t b = rest.find_first_not_of(" \t,");
      if (b == std::string_view::npos) break;
      rest.remove_prefix(b);
      const std::size_t e = std::min(rest.find_first_of(" \t,"), rest.size());
      const auto v = parse_double(rest.substr(0, e));
      if (!v) fail(i + 1, "cannot parse '" + std::string(rest.substr(0, e)) + "' as a number");
      ev.push_back(*v);
      rest.remove_prefix(e);
    }
    raw.events.push_back(std::move(ev));
    raw.ids.push_back(std::to_string(i));
    raw.lines.push_back(i + 1);
  }
  return raw;
}

inline TrialSet trial_set_from_raw(RawTrials raw, const std::string& source) {
  TrialSet ts;
  for (std::size_t i = 0; i < raw.events.size(); ++i) {
    for (double e : raw.events[i]) {
      if (!(e >= 0.0 && e <= 1.0)) {
        throw DataError(source + ":" + std::to_string(raw.lines[i]) + ": event time " +
                        format_double(e) + " outside [0,1]");
      }
    }
    ts.trials.emplace_back(std::move(raw.events[i]));
  }
  ts.ids = std::move(raw.ids);
  ts.labels = std::move(raw.labels);
  return ts;
}

inline TrialSet read_trial_set(const std::filesystem::path& path) {
  const std::string source = path.string();
  return trial_set_from_raw(parse_raw_trials(read_text(path), source), source);
}

inline std::string trial_set_to_jsonl(const TrialSet& ts) {
  ts.validate();
  std::string out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out += "{\"trial_id\":" + nlohmann::json(ts.ids[i]).dump() + ",\"label\":";
    out += ts.labels ? nlohmann::json((*ts.labels)[i]).dump() : "null";
    out += ",\"events\":[";
    const auto ev = ts.trials[i].events();
    for (std::size_t k = 0; k < ev.size(); ++k) {
      if (k) out += ",";
      out += format_double(ev[k]);
    }
    out += "]}\n";
  }
  return out;
}

inline void write_trial_set(const std::filesystem::path& path, const TrialSet& ts) {
  write_text(path, trial_set_to_jsonl(ts));
}

// ---------------------------------------------------------------------------
// Run directories

/// Creates `dir`. An existing non-empty directory is an error unless
/// `force`, in which case its contents are removed first.
inline void prepare_output_dir(const std::filesystem::path& dir, bool force) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir)) {
      throw OutputExists("'" + dir.string() + "' exists and is not a directory");
    }
    if (!fs::is_empty(dir)) {
      if (!force) {
        throw OutputExists("'" + dir.string() + "' is not empty; pass --force to overwrite");
      }
      for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
    }
  }
  fs::create_directories(dir);
}

/// A file-name-safe version of a trial id.
inline std::string safe_file_stem(std::string_view id) {
  std::string s(id);
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) c = '_';
  }
  if (s.empty() || s == "." || s == "..") s = "trial_" + s;
  return s;
}

}  // namespace phasewarp
