#include "glidernav/flowcmp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "glidernav/error.hpp"
#include "text_util.hpp"

namespace glidernav {

namespace {

constexpr std::string_view kCsvHeader = "t,source,u,v,along,cross";

ComparisonRow make_row(double t, FlowSourceKind kind, const FlowVector& f, double bearing) {
  auto s = decompose_shore(f, bearing);
  return {t, kind, f.u, f.v, s.along, s.cross};
}

struct Fix {
  double t;
  LatLon pos;
};

LatLon position_at(const std::vector<Fix>& fixes, double t) {
  if (t <= fixes.front().t) return fixes.front().pos;
  if (t >= fixes.back().t) return fixes.back().pos;
  auto hi = std::upper_bound(fixes.begin(), fixes.end(), t, [](double x, const Fix& f) { return x < f.t; });
  auto lo = hi - 1;
  double span = hi->t - lo->t;
  double w = span > 0.0 ? (t - lo->t) / span : 1.0;
  return {lo->pos.lat + w * (hi->pos.lat - lo->pos.lat), lo->pos.lon + w * (hi->pos.lon - lo->pos.lon)};
}

// Linear interpolation of a time-sorted series, clamped at the ends.
FlowVector series_at(const std::vector<const ComparisonRow*>& series, double t) {
  if (t <= series.front()->t) return {series.front()->u, series.front()->v};
  if (t >= series.back()->t) return {series.back()->u, series.back()->v};
  auto hi = std::upper_bound(series.begin(), series.end(), t,
                             [](double x, const ComparisonRow* r) { return x < r->t; });
  const ComparisonRow* b = *hi;
  const ComparisonRow* a = *(hi - 1);
  double span = b->t - a->t;
  double w = span > 0.0 ? (t - a->t) / span : 1.0;
  return {a->u + w * (b->u - a->u), a->v + w * (b->v - a->v)};
}

std::vector<const ComparisonRow*> rows_of(const ComparisonTable& table, FlowSourceKind kind) {
  std::vector<const ComparisonRow*> out;
  for (const auto& r : table.rows) {
    if (r.source == kind) out.push_back(&r);
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC-4180 records; LF or CRLF line ends.
std::vector<std::vector<std::string>> csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t i = 0;
  auto end_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(fields));
    fields.clear();
    any = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      if (!field.empty()) throw ParseError("stray quote in CSV field");
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')) {
      if (c == '\r') ++i;
      end_record();
    } else {
      field += c;
      any = true;
    }
    ++i;
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any || !field.empty() || !fields.empty()) end_record();
  return records;
}

}  // namespace

std::string_view to_string(FlowSourceKind kind) {
  switch (kind) {
    case FlowSourceKind::kGlider: return "glider";
    case FlowSourceKind::kModel: return "model";
    case FlowSourceKind::kFused: return "fused";
  }
  return "model";
}

FlowSourceKind flow_source_kind(std::string_view name) {
  if (name == "glider") return FlowSourceKind::kGlider;
  if (name == "model") return FlowSourceKind::kModel;
  if (name == "fused") return FlowSourceKind::kFused;
  throw ParseError(fmt::format("unknown flow source '{}'", name));
}

ComparisonTable build_table(const std::vector<SurfacingEvent>& events, const FlowSource& model,
                            const FusionState& fusion, double shore_bearing_deg, double lattice_dt) {
  if (events.empty()) throw RangeError("no surfacing events to compare");
  if (!(lattice_dt > 0.0) || !std::isfinite(lattice_dt)) throw RangeError("lattice_dt must be positive");
  for (std::size_t k = 1; k < events.size(); ++k) {
    if (events[k].t_end < events[k - 1].t_end) throw RangeError("surfacing events are not time-ordered");
  }
  fusion.validate();

  std::vector<Fix> fixes{{events.front().t_start, events.front().start_pos}};
  for (const auto& ev : events) fixes.push_back({ev.t_end, ev.gps_pos});

  ComparisonTable table;
  for (const auto& ev : events) {
    table.rows.push_back(make_row(ev.mid_time(), FlowSourceKind::kGlider, ev.flow_estimate, shore_bearing_deg));
  }

  const double t_begin = std::min(events.front().t_start, events.front().t_end);
  const double t_final = events.back().t_end + kForecastExtension;
  std::vector<double> lattice;
  for (long long k = 0;; ++k) {
    double t = t_begin + static_cast<double>(k) * lattice_dt;
    if (t >= t_final - 1e-6) break;
    lattice.push_back(t);
  }
  lattice.push_back(t_final);

  FusionState state = fusion;
  std::size_t next = 0;
  for (double t : lattice) {
    while (next < events.size() && events[next].t_end <= t) {
      try {
        state = update_residual(state, events[next], model);
      } catch (const DomainError&) {
      }
      ++next;
    }
    LatLon p = position_at(fixes, t);
    FlowVector m = model.sample(p, t, OutOfDomain::kClamp);
    table.rows.push_back(make_row(t, FlowSourceKind::kModel, m, shore_bearing_deg));
    FlowVector f = fused_sample(state, model, p, t, OutOfDomain::kClamp);
    table.rows.push_back(make_row(t, FlowSourceKind::kFused, f, shore_bearing_deg));
  }

  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    if (a.t != b.t) return a.t < b.t;
    return static_cast<int>(a.source) < static_cast<int>(b.source);
  });
  return table;
}

std::vector<StrongFlowAlert> detect_strong_flow(const ComparisonTable& table, double threshold) {
  if (!(threshold > 0.0)) throw RangeError("strong-flow threshold must be positive");
  auto fused = rows_of(table, FlowSourceKind::kFused);
  auto model = rows_of(table, FlowSourceKind::kModel);
  std::vector<StrongFlowAlert> alerts;
  if (fused.empty()) return alerts;
  for (const auto& r : table.rows) {
    if (r.source != FlowSourceKind::kGlider) continue;
    double g = std::hypot(r.u, r.v);
    double f = series_at(fused, r.t).speed();
    if (g > threshold && f > threshold) {
      double m = model.empty() ? 0.0 : series_at(model, r.t).speed();
      alerts.push_back({r.t, g, f, m});
    }
  }
  return alerts;
}

std::string emit_csv(const ComparisonTable& table) {
  if (table.rows.empty()) throw RangeError("empty comparison table");
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : table.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.t, csv_field(to_string(r.source)), r.u, r.v, r.along, r.cross);
  }
  return out;
}

ComparisonTable parse_csv(std::string_view bytes) {
  auto records = csv_records(bytes);
  if (records.empty()) throw ParseError("empty CSV");
  const std::vector<std::string> header{"t", "source", "u", "v", "along", "cross"};
  if (records.front() != header) throw ParseError("unexpected CSV header");
  ComparisonTable table;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& f = records[k];
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 6) throw ParseError(fmt::format("CSV record {} has {} fields", k + 1, f.size()));
    table.rows.push_back({detail::to_double(f[0]), flow_source_kind(f[1]), detail::to_double(f[2]),
                          detail::to_double(f[3]), detail::to_double(f[4]), detail::to_double(f[5])});
  }
  return table;
}

std::string emit_svg(const ComparisonTable& table) {
  if (table.rows.empty()) throw RangeError("empty comparison table");
  constexpr double kWidth = 900, kLeft = 70, kRight = 20, kTop = 30, kPanel = 240, kGap = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double height = kTop + 2 * kPanel + kGap + 40;

  double t_min = table.rows.front().t, t_max = t_min;
  for (const auto& r : table.rows) {
    t_min = std::min(t_min, r.t);
    t_max = std::max(t_max, r.t);
  }
  const double t_span = t_max > t_min ? t_max - t_min : 1.0;
  auto x_of = [&](double t) { return kLeft + (t - t_min) / t_span * plot_w; };

  auto fused = rows_of(table, FlowSourceKind::kFused);
  double rule_t = 0.0;
  if (!fused.empty()) {
    rule_t = fused.back()->t - kForecastExtension;
  } else {
    rule_t = t_min;
    for (const auto& r : table.rows) rule_t = std::max(rule_t, r.t);
  }

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, height, kWidth, height);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  struct Series {
    FlowSourceKind kind;
    const char* color;
  };
  const Series series[] = {{FlowSourceKind::kGlider, "#d62728"},
                           {FlowSourceKind::kModel, "#1f77b4"},
                           {FlowSourceKind::kFused, "#2ca02c"}};

  for (int panel = 0; panel < 2; ++panel) {
    const bool along = panel == 0;
    const double top = kTop + panel * (kPanel + kGap);
    double y_max = 1e-3;
    for (const auto& r : table.rows) y_max = std::max(y_max, std::fabs(along ? r.along : r.cross));
    y_max *= 1.1;
    auto y_of = [&](double val) { return top + kPanel / 2 - val / y_max * (kPanel / 2); };

    svg += fmt::format("<g class=\"panel\" id=\"{}\">\n", along ? "along" : "cross");
    svg += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"#888\"/>\n",
        kLeft, top, plot_w, kPanel);
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ccc\"/>\n", kLeft,
                       y_of(0), kLeft + plot_w, y_of(0));
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{} (m/s)</text>\n", kLeft, top - 8,
                       along ? "along-shore" : "cross-shore");
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3f}</text>\n", kLeft - 4, top + 10,
                       y_max);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3f}</text>\n", kLeft - 4,
                       top + kPanel, -y_max);

    for (const auto& s : series) {
      std::string points;
      for (const auto& r : table.rows) {
        if (r.source != s.kind) continue;
        if (!points.empty()) points += ' ';
        points += fmt::format("{:.2f},{:.2f}", x_of(r.t), y_of(along ? r.along : r.cross));
      }
      if (points.empty()) continue;
      svg += fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                         to_string(s.kind), s.color, points);
    }
    svg += fmt::format(
        "<line class=\"last-surfacing\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"black\" stroke-dasharray=\"6,4\"/>\n",
        x_of(rule_t), top, top + kPanel);
    svg += "</g>\n";
  }

  double legend_y = kTop + 2 * kPanel + kGap + 25;
  double legend_x = kLeft;
  for (const auto& s : series) {
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>"
        "<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n",
        legend_x, legend_y - 4, legend_x + 24, legend_y - 4, s.color, legend_x + 30, legend_y, to_string(s.kind));
    legend_x += 110;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace glidernav
