#include "hullspace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "hullspace/error.hpp"

namespace hullspace {

DiversityReport sparseness_at_centre(const std::vector<LatentVector>& designs) {
  if (designs.empty()) throw Error(ErrorKind::kInvalidArgument, "sparseness needs at least one design");
  DiversityReport report;
  report.n = designs.size();
  const double n = static_cast<double>(designs.size());
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    double sum = 0.0;
    for (const auto& x : designs) sum += x[d];
    report.centroid[d] = sum / n;
  }
  double total = 0.0;
  for (const auto& x : designs) total += distance(report.centroid, x);
  report.sc = total / n;
  return report;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidArgument, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

namespace {

LatentVector read_latent(const json& j) {
  if (!j.is_array() || j.size() != kLatentDim) throw Error(ErrorKind::kLogIntegrity, "malformed latent in log");
  LatentVector x;
  for (std::size_t d = 0; d < kLatentDim; ++d) x[d] = j[d].get<double>();
  return x;
}

double seconds(std::int64_t ms) { return static_cast<double>(ms) / 1000.0; }

void fold_rem(const std::vector<SessionEvent>& events, std::int64_t end, DesignHistory& h) {
  struct Slot {
    std::string id;
    LatentVector latent;
  };
  std::array<std::optional<Slot>, 5> slots;
  std::map<std::string, double> evaluated;
  std::vector<std::int64_t> view_times;
  json visited = json::array();
  for (const auto& e : events) {
    const json& p = e.payload;
    if (e.kind == event_kind::kViewed) {
      view_times.push_back(e.t_ms);
      visited.push_back({{"design_id", p.at("design_id")}, {"u", p.at("u")}, {"v", p.at("v")}, {"t", e.t_ms}});
    } else if (e.kind == event_kind::kEvaluated) {
      const std::string id = p.at("design_id").get<std::string>();
      if (!evaluated.count(id)) h.explored_cw.push_back(p.at("cw").get<double>());
      evaluated[id] = p.at("cw").get<double>();
    } else if (e.kind == event_kind::kSelected) {
      const auto slot = p.at("slot").get<std::size_t>();
      if (slot < 1 || slot > 5) throw Error(ErrorKind::kLogIntegrity, "selected event with a bad slot");
      slots[slot - 1] = Slot{p.at("design_id").get<std::string>(), read_latent(p.at("latent"))};
    }
  }
  for (std::size_t k = 0; k < view_times.size(); ++k) {
    const std::int64_t stop = k + 1 < view_times.size() ? view_times[k + 1] : end;
    h.per_design_times.push_back(seconds(stop - view_times[k]));
  }
  h.designs_explored = view_times.size();
  for (const auto& s : slots) {
    if (!s) continue;
    h.preferred.push_back(s->latent);
    if (const auto it = evaluated.find(s->id); it != evaluated.end()) h.preferred_cw.push_back(it->second);
  }
  h.mode_specific = json{{"visited", visited}};
}

void fold_generations(const std::vector<SessionEvent>& events, std::int64_t end, DesignHistory& h) {
  std::vector<std::pair<std::int64_t, std::size_t>> generations;
  json trajectory = json::array();
  json weights = json::array();
  json sliders = json::array();
  if (h.mode == Mode::kSaem) {
    trajectory.push_back({{"lower", std::vector<double>(kLatentDim, 0.0)},
                          {"upper", std::vector<double>(kLatentDim, 1.0)}});
  }
  for (const auto& e : events) {
    const json& p = e.payload;
    if (e.kind == event_kind::kGenerationShown) {
      const json& designs = p.at("designs");
      generations.emplace_back(e.t_ms, designs.size());
      for (const auto& d : designs) h.explored_cw.push_back(d.at("cw").get<double>());
    } else if (e.kind == event_kind::kSelected) {
      h.preferred.push_back(read_latent(p.at("latent")));
      h.preferred_cw.push_back(p.at("cw").get<double>());
      if (h.mode == Mode::kSaem) trajectory.push_back(p.at("bounds_after"));
      if (h.mode == Mode::kAem) {
        weights.push_back({{"interaction", p.at("interaction")},
                           {"gamma1", p.at("weights_used").at("gamma1")},
                           {"gamma2", p.at("weights_used").at("gamma2")}});
      }
    } else if (e.kind == event_kind::kWeightsChanged) {
      sliders.push_back({{"t", e.t_ms}, {"gamma1", p.at("gamma1")}, {"gamma2", p.at("gamma2")}});
    }
  }
  for (std::size_t g = 0; g < generations.size(); ++g) {
    const std::int64_t stop = g + 1 < generations.size() ? generations[g + 1].first : end;
    const std::size_t count = generations[g].second;
    const double each = count ? seconds(stop - generations[g].first) / static_cast<double>(count) : 0.0;
    for (std::size_t k = 0; k < count; ++k) h.per_design_times.push_back(each);
    h.designs_explored += count;
  }
  if (h.mode == Mode::kSaem) {
    h.mode_specific = json{{"bounds_trajectory", trajectory}};
  } else {
    h.mode_specific = json{{"weight_history", weights}, {"slider_changes", sliders}};
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

json DesignHistory::to_json() const {
  json preferred_json = json::array();
  for (const auto& x : preferred) preferred_json.push_back(x.values);
  return json{{"session_id", session_id},
              {"participant_id", participant_id},
              {"mode", std::string(hullspace::to_string(mode))},
              {"completed", completed},
              {"total_time", total_time},
              {"per_design_times", per_design_times},
              {"designs_explored", designs_explored},
              {"explored_cw", explored_cw},
              {"preferred", preferred_json},
              {"preferred_cw", preferred_cw},
              {"rationale_counts",
               {{"form", rationale_counts[0]}, {"performance", rationale_counts[1]}, {"both", rationale_counts[2]}}},
              {"interactions", interactions},
              {"mode_specific", mode_specific}};
}

DesignHistory aggregate_history(const std::vector<SessionEvent>& events) {
  check_log_integrity(events);
  DesignHistory h;
  try {
    const json& spec = events.front().payload.at("spec");
    h.session_id = spec.at("session_id").get<std::string>();
    h.participant_id = spec.at("participant_id").get<std::string>();
    h.mode = mode_from_string(spec.at("mode").get<std::string>());
    h.completed = events.back().kind == event_kind::kTerminated;
    const std::int64_t start = events.front().t_ms;
    const std::int64_t end = events.back().t_ms;
    h.total_time = seconds(end - start);
    for (const auto& e : events) {
      if (e.kind != event_kind::kSelected) continue;
      ++h.rationale_counts[static_cast<std::size_t>(rationale_from_string(e.payload.at("rationale").get<std::string>()))];
      ++h.interactions;
    }
    if (h.mode == Mode::kRem) {
      fold_rem(events, end, h);
    } else {
      fold_generations(events, end, h);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kLogIntegrity, std::string("malformed event payload: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kLogIntegrity) throw;
    throw Error(ErrorKind::kLogIntegrity, e.what());
  }
  return h;
}

CrossModeReport cross_mode_report(const std::vector<std::vector<SessionEvent>>& logs) {
  CrossModeReport report;
  for (const auto& log : logs) {
    const DesignHistory h = aggregate_history(log);
    if (!h.completed || h.preferred.empty()) continue;
    ModeSessionRow row;
    row.session_id = h.session_id;
    row.participant_id = h.participant_id;
    row.mode = h.mode;
    row.total_time = h.total_time;
    row.designs_explored = h.designs_explored;
    row.preferred_count = h.preferred.size();
    row.sc_preferred = sparseness_at_centre(h.preferred).sc;
    if (!h.preferred_cw.empty()) {
      row.mean_preferred_cw =
          std::accumulate(h.preferred_cw.begin(), h.preferred_cw.end(), 0.0) / static_cast<double>(h.preferred_cw.size());
      row.min_preferred_cw = *std::min_element(h.preferred_cw.begin(), h.preferred_cw.end());
    }
    report.rows.push_back(std::move(row));
  }
  std::string missing;
  for (const Mode mode : kAllModes) {
    ModeDistribution& dist = report.modes[static_cast<std::size_t>(mode)];
    dist.mode = mode;
    std::vector<double> times, scs, cws;
    for (const auto& row : report.rows) {
      if (row.mode != mode) continue;
      times.push_back(row.total_time);
      scs.push_back(row.sc_preferred);
      if (row.mean_preferred_cw) cws.push_back(*row.mean_preferred_cw);
    }
    dist.sessions = times.size();
    if (times.empty()) {
      missing += (missing.empty() ? "" : ", ") + std::string(to_string(mode));
      continue;
    }
    dist.median_total_time = median(times);
    dist.median_sc = median(scs);
    if (!cws.empty()) dist.median_preferred_cw = median(cws);
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kMissingMode, "no completed session for mode(s): " + missing);
  }
  return report;
}

std::string CrossModeReport::to_csv() const {
  std::string out =
      "session_id,participant_id,mode,total_time_s,designs_explored,preferred_count,sc_preferred,"
      "mean_preferred_cw,min_preferred_cw\n";
  for (const auto& r : rows) {
    out += r.session_id + "," + r.participant_id + "," + std::string(to_string(r.mode)) + "," +
           format_number(r.total_time) + "," + std::to_string(r.designs_explored) + "," +
           std::to_string(r.preferred_count) + "," + format_number(r.sc_preferred) + "," +
           format_optional(r.mean_preferred_cw) + "," + format_optional(r.min_preferred_cw) + "\n";
  }
  return out;
}

std::string CrossModeReport::to_text() const {
  std::ostringstream out;
  out << "mode   sessions  median time (s)  median SC  median preferred Cw\n";
  for (const auto& m : modes) {
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %8zu  %15.1f  %9.4f  %s\n", std::string(to_string(m.mode)).c_str(),
                  m.sessions, m.median_total_time, m.median_sc,
                  m.median_preferred_cw ? format_number(*m.median_preferred_cw).c_str() : "n/a");
    out << line;
  }
  return out.str();
}

}  // namespace hullspace
