#include <cstdio>
#include <iomanip>
#include <sstream>

#include "c2b/error.hpp"
#include "c2b/evaluate.hpp"

namespace c2b {

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.3f%%", *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string render(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += c + 1 == row.size() ? row[c] : pad(row[c], width[c] + 2);
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

nlohmann::json report_json(const MetricsReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"name", r.name()},
                    {"model", r.model},
                    {"chat", r.chat},
                    {"environment", to_string(r.environment)},
                    {"retention", r.retention},
                    {"auc", r.auc},
                    {"dice", r.dice},
                    {"iou", r.iou},
                    {"samples", r.samples},
                    {"auc_undefined", r.auc_undefined}});
  }
  nlohmann::json over = nlohmann::json::array();
  for (const auto& o : report.over) {
    over.push_back({{"name", o.name},
                    {"retention", o.retention},
                    {"auc_percent", optional_json(o.auc)},
                    {"dice_percent", optional_json(o.dice)},
                    {"iou_percent", optional_json(o.iou)}});
  }
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : report.queries) {
    nlohmann::json e = {{"id", q.id}, {"query", q.query}};
    if (!q.semantic.empty() || q.t2s_fallback) {
      e["semantic"] = q.semantic;
      e["t2s_fallback"] = q.t2s_fallback;
    }
    queries.push_back(std::move(e));
  }
  return {{"rows", rows}, {"over", over}, {"queries", queries}, {"t2s_fallbacks", report.t2s_fallbacks}};
}

std::string format_table(const std::vector<MetricRow>& rows) {
  std::vector<std::vector<std::string>> cells{{"Text/Metrics", "Auc", "Dice", "mIou"}};
  for (const auto& r : rows) cells.push_back({r.name(), fixed(r.auc), fixed(r.dice), fixed(r.iou)});
  return render(cells);
}

std::string format_paired_table(const std::vector<MetricRow>& left, const std::vector<MetricRow>& right,
                                const std::string& left_label, const std::string& right_label) {
  const auto over = over_deltas(left, right);
  std::vector<std::vector<std::string>> cells{
      {"", "Auc", "", "", "Dice", "", "", "mIou", "", ""},
      {"Text/Metrics", left_label, right_label, "over", left_label, right_label, "over", left_label, right_label,
       "over"}};
  for (std::size_t i = 0; i < left.size(); ++i) {
    const auto& a = left[i];
    const auto& b = right[i];
    cells.push_back({a.name(), fixed(a.auc), fixed(b.auc), percent(over[i].auc), fixed(a.dice), fixed(b.dice),
                     percent(over[i].dice), fixed(a.iou), fixed(b.iou), percent(over[i].iou)});
  }
  return render(cells);
}

std::string format_report(const MetricsReport& report) {
  const auto plain = report.rows_for(false);
  const auto chat = report.rows_for(true);
  std::string env = plain.empty() ? "" : std::string(to_string(plain.front().environment));
  std::string out = "environment: " + env + "\n";
  if (chat.empty()) return out + format_table(plain);
  return out + format_paired_table(plain, chat, "non-chat", "chat");
}

}  // namespace c2b
