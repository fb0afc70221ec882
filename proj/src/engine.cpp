#include "hullspace/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hullspace/error.hpp"
#include "hullspace/metrics.hpp"

namespace hullspace {

namespace fs = std::filesystem;

std::int64_t SystemClock::now_ms() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::map<std::string, Mode> validate_questionnaire(const json& answers) {
  if (!answers.is_object()) throw Error(ErrorKind::kMalformedAnswers, "answers must be a JSON object");
  std::map<std::string, Mode> out;
  std::vector<std::string> missing, invalid, unknown;
  for (const char* item : kQuestionnaireItems) {
    if (!answers.contains(item)) {
      missing.emplace_back(item);
      continue;
    }
    const json& a = answers.at(item);
    if (a.is_string() && (a == "REM" || a == "SAEM" || a == "AEM")) {
      out[item] = mode_from_string(a.get<std::string>());
    } else {
      invalid.emplace_back(item);
    }
  }
  for (const auto& item : answers.items()) {
    if (std::find_if(kQuestionnaireItems.begin(), kQuestionnaireItems.end(),
                     [&](const char* k) { return item.key() == k; }) == kQuestionnaireItems.end()) {
      unknown.push_back(item.key());
    }
  }
  if (missing.empty() && invalid.empty() && unknown.empty()) return out;
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  std::string message = "malformed questionnaire:";
  if (!missing.empty()) message += " missing " + list(missing) + ";";
  if (!invalid.empty()) message += " answers must be REM, SAEM or AEM for " + list(invalid) + ";";
  if (!unknown.empty()) message += " unknown items " + list(unknown) + ";";
  throw Error(ErrorKind::kMalformedAnswers, message);
}

std::optional<Mode> Participant::next_mode() const {
  for (const Mode m : mode_order) {
    if (!completed.count(m)) return m;
  }
  return std::nullopt;
}

json Participant::to_json() const {
  json order = json::array();
  json done = json::array();
  for (const Mode m : mode_order) {
    order.push_back(std::string(to_string(m)));
    if (completed.count(m)) done.push_back(std::string(to_string(m)));
  }
  json sess = json::object();
  for (const auto& [m, sid] : sessions) sess[std::string(to_string(m))] = sid;
  json q = nullptr;
  if (questionnaire) {
    q = json::object();
    for (const auto& [item, m] : *questionnaire) q[item] = std::string(to_string(m));
  }
  return json{{"participant_id", id},
              {"seed", seed},
              {"mode_order", order},
              {"completed", done},
              {"sessions", sess},
              {"questionnaire", q}};
}

Participant Participant::from_json(const json& j) {
  try {
    Participant p;
    p.id = j.at("participant_id").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    const auto order = j.at("mode_order").get<std::vector<std::string>>();
    if (order.size() != 3) throw Error(ErrorKind::kInvalidArgument, "mode order needs three modes");
    for (std::size_t i = 0; i < 3; ++i) p.mode_order[i] = mode_from_string(order[i]);
    for (const auto& m : j.at("completed")) p.completed.insert(mode_from_string(m.get<std::string>()));
    for (const auto& [m, sid] : j.at("sessions").items()) p.sessions[mode_from_string(m)] = sid.get<std::string>();
    if (!j.at("questionnaire").is_null()) p.questionnaire = validate_questionnaire(j.at("questionnaire"));
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed participant record: ") + e.what());
  }
}

std::array<Mode, 3> random_mode_order(std::uint64_t seed) {
  std::vector<Mode> modes{Mode::kRem, Mode::kSaem, Mode::kAem};
  std::mt19937_64 rng(derive_seed(seed, 0x6f72646572ULL));
  shuffle(modes, rng);
  return {modes[0], modes[1], modes[2]};
}

std::string participant_id_for(std::uint64_t seed) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "p%012llx",
                static_cast<unsigned long long>(derive_seed(seed, 0x7061727469ULL) & 0xffffffffffffULL));
  return buf;
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string TelemetryArchive::to_json_text() const {
  json j = json::object();
  for (const auto& [path, content] : files) j[path] = content;
  return json{{"files", j}}.dump(1);
}

void TelemetryArchive::write_to(const std::string& directory) const {
  for (const auto& [path, content] : files) {
    const fs::path target = fs::path(directory) / path;
    fs::create_directories(target.parent_path());
    write_file_atomic(target, content);
  }
}

TelemetryArchive build_archive(const std::vector<Participant>& participants,
                               const std::vector<std::vector<SessionEvent>>& logs) {
  TelemetryArchive archive;
  for (const auto& log : logs) {
    const DesignHistory h = aggregate_history(log);
    const std::string base = "sessions/" + h.session_id;
    archive.files[base + ".jsonl"] = to_jsonl(log);
    const std::string sc = h.preferred.empty() ? "" : number(sparseness_at_centre(h.preferred).sc);
    archive.files[base + ".csv"] =
        "session_id,participant_id,mode,completed,total_time_s,designs_explored,interactions,preferred_count,"
        "sc_preferred,rationale_form,rationale_performance,rationale_both\n" +
        h.session_id + "," + h.participant_id + "," + std::string(to_string(h.mode)) + "," +
        (h.completed ? "true" : "false") + "," + number(h.total_time) + "," + std::to_string(h.designs_explored) +
        "," + std::to_string(h.interactions) + "," + std::to_string(h.preferred.size()) + "," + sc + "," +
        std::to_string(h.rationale_counts[0]) + "," + std::to_string(h.rationale_counts[1]) + "," +
        std::to_string(h.rationale_counts[2]) + "\n";
    std::string times = "index,time_s\n";
    for (std::size_t i = 0; i < h.per_design_times.size(); ++i) {
      times += std::to_string(i) + "," + number(h.per_design_times[i]) + "\n";
    }
    archive.files[base + ".times.csv"] = times;
  }
  std::vector<Participant> sorted = participants;
  std::sort(sorted.begin(), sorted.end(), [](const Participant& a, const Participant& b) { return a.id < b.id; });
  json people = json::array();
  for (const auto& p : sorted) people.push_back(p.to_json());
  json listing = json::array();
  for (const auto& [path, content] : archive.files) {
    listing.push_back({{"path", path}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
  }
  archive.files["manifest.json"] =
      json{{"format", "hullspace-telemetry"}, {"version", 1}, {"participants", people}, {"files", listing}}.dump(2) +
      "\n";
  return archive;
}

Engine::Engine(PlatformConfig config, std::shared_ptr<const CwPredictor> predictor, std::shared_ptr<Clock> clock,
               std::string data_dir)
    : config_(std::move(config)),
      predictor_(std::move(predictor)),
      clock_(std::move(clock)),
      data_dir_(std::move(data_dir)) {
  if (!predictor_ || !clock_) throw Error(ErrorKind::kInvalidArgument, "engine needs a predictor and a clock");
  if (!data_dir_.empty()) {
    fs::create_directories(fs::path(data_dir_) / "participants");
    fs::create_directories(fs::path(data_dir_) / "sessions");
    recover();
  }
}

void Engine::recover() {
  for (const auto& entry : fs::directory_iterator(fs::path(data_dir_) / "participants")) {
    if (entry.path().extension() != ".json") continue;
    Participant p = Participant::from_json(json::parse(read_file(entry.path())));
    participants_[p.id] = std::move(p);
  }
  for (const auto& entry : fs::directory_iterator(fs::path(data_dir_) / "sessions")) {
    if (entry.path().extension() != ".jsonl") continue;
    std::string text = read_file(entry.path());
    // A crash can leave a partial last line; it never reached the session.
    if (!text.empty() && text.back() != '\n') text.erase(text.find_last_of('\n') + 1);
    const auto events = parse_jsonl(text);
    if (events.empty()) continue;
    auto l = std::make_shared<Live>();
    l->session = replay_session(events, predictor_);
    l->log_path = entry.path().string();
    const fs::path meta = fs::path(entry.path()).replace_extension(".meta.json");
    l->wall_start = fs::exists(meta) ? json::parse(read_file(meta)).at("wall_start_ms").get<std::int64_t>()
                                     : clock_->now_ms() - l->session->last_timestamp();
    write_file_atomic(entry.path(), to_jsonl(events));
    attach_log(*l);
    const SessionSpec& spec = l->session->spec();
    sessions_[spec.session_id] = l;
    // The participant record may predate the last events of its sessions.
    if (const auto it = participants_.find(spec.participant_id); it != participants_.end()) {
      Participant& p = it->second;
      const bool linked = p.sessions.emplace(spec.mode, spec.session_id).second;
      const bool done = l->session->terminated() && p.completed.insert(spec.mode).second;
      if (linked || done) persist_participant(p);
    }
  }
}

void Engine::persist_participant(const Participant& p) const {
  if (data_dir_.empty()) return;
  write_file_atomic(fs::path(data_dir_) / "participants" / (p.id + ".json"), p.to_json().dump(2) + "\n");
}

void Engine::attach_log(Live& l) const {
  Live* target = &l;
  const std::string path = l.log_path;
  l.session->set_listener([target, path](const SessionEvent& e) {
    if (!path.empty()) {
      std::ofstream out(path, std::ios::binary | std::ios::app);
      out << e.to_json().dump() << '\n';
      out.flush();
      if (!out) throw Error(ErrorKind::kIo, "cannot append to " + path);
    }
    target->changed.notify_all();
  });
}

Participant Engine::create_participant(std::optional<std::uint64_t> seed) {
  std::lock_guard lock(mutex_);
  std::uint64_t s = 0;
  if (seed) {
    s = *seed;
    if (participants_.count(participant_id_for(s))) {
      throw Error(ErrorKind::kInvalidArgument, "a participant with seed " + std::to_string(s) + " exists");
    }
  } else {
    for (std::uint64_t k = participants_.size();; ++k) {
      s = derive_seed(config_.server.seed, k);
      if (!participants_.count(participant_id_for(s))) break;
    }
  }
  Participant p;
  p.id = participant_id_for(s);
  p.seed = s;
  p.mode_order = random_mode_order(s);
  persist_participant(p);
  participants_[p.id] = p;
  return p;
}

Participant Engine::participant(const std::string& participant_id) const {
  std::lock_guard lock(mutex_);
  const auto it = participants_.find(participant_id);
  if (it == participants_.end()) throw Error(ErrorKind::kUnknownId, "unknown participant '" + participant_id + "'");
  return it->second;
}

std::vector<Participant> Engine::participants() const {
  std::lock_guard lock(mutex_);
  std::vector<Participant> out;
  for (const auto& [id, p] : participants_) out.push_back(p);
  return out;
}

std::string Engine::start_mode(const std::string& participant_id, Mode mode) {
  SessionSpec spec;
  {
    std::lock_guard lock(mutex_);
    const auto it = participants_.find(participant_id);
    if (it == participants_.end()) throw Error(ErrorKind::kUnknownId, "unknown participant '" + participant_id + "'");
    const Participant& p = it->second;
    const auto next = p.next_mode();
    if (!next) throw Error(ErrorKind::kOrdering, "all three modes are complete");
    if (*next != mode) {
      throw Error(ErrorKind::kOrdering, "the next mode for this participant is " + std::string(to_string(*next)) +
                                            ", not " + std::string(to_string(mode)));
    }
    if (const auto s = p.sessions.find(mode); s != p.sessions.end()) return s->second;
    spec.session_id = p.id + "-" + lower(to_string(mode));
    spec.participant_id = p.id;
    spec.mode = mode;
    const auto index = static_cast<std::size_t>(std::find(kAllModes, kAllModes + 3, mode) - kAllModes);
    spec.seed = derive_seed(p.seed, index + 1);
    spec.config = mode_config(config_, mode);
    if (mode == Mode::kRem && spec.config.at("pool_seed").is_null()) spec.config["pool_seed"] = config_.server.seed;
  }

  // Built outside the lock: a REM pool can take seconds.
  auto l = std::make_shared<Live>();
  l->session = open_session(spec, predictor_, 0);
  l->wall_start = clock_->now_ms();
  if (!data_dir_.empty()) {
    const fs::path base = fs::path(data_dir_) / "sessions" / spec.session_id;
    l->log_path = base.string() + ".jsonl";
    write_file_atomic(base.string() + ".meta.json", json{{"wall_start_ms", l->wall_start}}.dump() + "\n");
    write_file_atomic(l->log_path, to_jsonl(l->session->events()));
  }
  attach_log(*l);

  std::lock_guard lock(mutex_);
  Participant& p = participants_.at(participant_id);
  if (const auto s = p.sessions.find(mode); s != p.sessions.end()) return s->second;
  p.sessions[mode] = spec.session_id;
  sessions_[spec.session_id] = l;
  persist_participant(p);
  return spec.session_id;
}

std::shared_ptr<Engine::Live> Engine::live(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorKind::kUnknownId, "unknown session '" + session_id + "'");
  return it->second;
}

json Engine::session_state(const std::string& session_id) const {
  const auto l = live(session_id);
  std::lock_guard lock(l->mutex);
  json j = l->session->state();
  const std::int64_t elapsed = l->session->terminated() ? l->session->last_timestamp()
                                                        : std::max<std::int64_t>(0, clock_->now_ms() - l->wall_start);
  j["participant_id"] = l->session->spec().participant_id;
  j["event_count"] = l->session->events().size();
  j["elapsed_ms"] = elapsed;
  j["guidance_ms"] = kSessionGuidanceMs;
  j["over_guidance"] = elapsed > kSessionGuidanceMs;
  return j;
}

json Engine::act(const std::string& session_id, const json& action) {
  const auto l = live(session_id);
  json response;
  bool finished = false;
  {
    std::lock_guard lock(l->mutex);
    const std::int64_t t = std::max(clock_->now_ms() - l->wall_start, l->session->last_timestamp());
    response = l->session->act(action, t);
    finished = l->session->terminated();
  }
  if (finished) {
    std::lock_guard lock(mutex_);
    Participant& p = participants_.at(l->session->spec().participant_id);
    if (p.completed.insert(l->session->mode()).second) persist_participant(p);
  }
  return response;
}

json Engine::query(const std::string& session_id, const json& request) const {
  const auto l = live(session_id);
  std::lock_guard lock(l->mutex);
  return l->session->query(request);
}

json Engine::summary(const std::string& session_id) const {
  const auto l = live(session_id);
  std::lock_guard lock(l->mutex);
  return l->session->summary();
}

std::vector<SessionEvent> Engine::events(const std::string& session_id) const {
  const auto l = live(session_id);
  std::lock_guard lock(l->mutex);
  return l->session->events();
}

std::vector<SessionEvent> Engine::wait_events(const std::string& session_id, std::uint64_t since,
                                              std::chrono::milliseconds timeout) const {
  const auto l = live(session_id);
  std::unique_lock lock(l->mutex);
  l->changed.wait_for(lock, timeout, [&] { return l->session->events().size() > since; });
  const auto& all = l->session->events();
  if (all.size() <= since) return {};
  return {all.begin() + static_cast<std::ptrdiff_t>(since), all.end()};
}

std::vector<std::string> Engine::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, l] : sessions_) out.push_back(id);
  return out;
}

void Engine::submit_questionnaire(const std::string& participant_id, const json& answers) {
  std::lock_guard lock(mutex_);
  const auto it = participants_.find(participant_id);
  if (it == participants_.end()) throw Error(ErrorKind::kUnknownId, "unknown participant '" + participant_id + "'");
  if (it->second.next_mode()) {
    throw Error(ErrorKind::kPrematureQuestionnaire, "the questionnaire opens after all three modes are complete");
  }
  it->second.questionnaire = validate_questionnaire(answers);
  persist_participant(it->second);
}

TelemetryArchive Engine::export_telemetry(const std::optional<std::string>& participant_id) const {
  std::vector<Participant> people;
  if (participant_id) {
    people.push_back(participant(*participant_id));
  } else {
    people = participants();
  }
  std::vector<std::vector<SessionEvent>> logs;
  for (const auto& p : people) {
    for (const auto& [mode, sid] : p.sessions) logs.push_back(events(sid));
  }
  return build_archive(people, logs);
}

}  // namespace hullspace
