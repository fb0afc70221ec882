// Command-line front end: sampling, Cw evaluation, surrogate training,
// simulated sessions, the study server and cross-mode reports.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hullspace/config.hpp"
#include "hullspace/engine.hpp"
#include "hullspace/error.hpp"
#include "hullspace/metrics.hpp"
#include "hullspace/server.hpp"
#include "hullspace/sim.hpp"

namespace fs = std::filesystem;
using namespace hullspace;

namespace {

PlatformConfig config_from(const std::string& path) { return path.empty() ? PlatformConfig{} : load_config(path); }

LatentVector parse_latent(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(std::stod(item));
  if (values.size() == 1) return LatentVector::filled(values[0]);
  if (values.size() != kLatentDim) {
    throw Error(ErrorKind::kInvalidArgument, "a latent needs 20 comma-separated values (or one to fill all)");
  }
  LatentVector x;
  std::copy(values.begin(), values.end(), x.values.begin());
  return x;
}

std::shared_ptr<const GprModel> load_or_train(const PlatformConfig& config, const std::string& override_path) {
  const std::string path = override_path.empty() ? config.surrogate.model_path : override_path;
  if (fs::exists(path)) {
    std::cerr << "loading surrogate " << path << "\n";
    return std::make_shared<GprModel>(GprModel::load(path));
  }
  std::cerr << "training surrogate on " << config.surrogate.samples << " designs (seed " << config.surrogate.seed
            << ")\n";
  auto training = train_surrogate_pipeline(config.surrogate.samples, config.surrogate.seed, config.surrogate.pipeline);
  std::cerr << training.report.to_csv();
  training.model.save(path);
  std::cerr << "saved " << path << "\n";
  return std::make_shared<GprModel>(std::move(training.model));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

HttpServer* active_server = nullptr;

void on_signal(int) {
  if (active_server) active_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ship-hull design-space exploration platform"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate hulls from latents or feasible random samples");
  std::string gen_latent, gen_out;
  std::size_t gen_count = 1;
  std::uint64_t gen_seed = 1;
  gen->add_option("--latent", gen_latent, "20 comma-separated values in [0,1], or one value for all");
  gen->add_option("--count", gen_count, "number of feasible samples when no latent is given");
  gen->add_option("--seed", gen_seed, "sampling seed");
  gen->add_option("--out", gen_out, "directory for offset tables (default: print to stdout)");

  // cw
  auto* cw = app.add_subcommand("cw", "Direct Cw of an offset table or a latent");
  std::string cw_offsets, cw_latent;
  double cw_froude = 0.28;
  cw->add_option("--offsets", cw_offsets, "offset table file")->check(CLI::ExistingFile);
  cw->add_option("--latent", cw_latent, "latent (see generate)");
  cw->add_option("--froude", cw_froude, "Froude number");

  // train
  auto* train = app.add_subcommand("train", "Train the GPR surrogate and write the holdout report");
  std::size_t train_samples = 0;
  std::uint64_t train_seed = 0;
  std::string train_out, train_report;
  train->add_option("--samples", train_samples, "feasible training designs (default from config)");
  train->add_option("--seed", train_seed, "pipeline seed (default from config)");
  train->add_option("--out", train_out, "model file (default from config)");
  train->add_option("--report", train_report, "holdout report CSV");

  // sim
  auto* sim = app.add_subcommand("sim", "Simulated participants");
  sim->require_subcommand(1);
  auto* sim_run = sim->add_subcommand("run", "Play one session with a scripted policy");
  std::string sim_mode = "rem", sim_policy = "mixed:0.5", sim_out = "sim-out", sim_surrogate;
  std::uint64_t sim_seed = 1;
  std::size_t sim_interactions = 20;
  sim_run->add_option("--mode", sim_mode, "rem | saem | aem")->required();
  sim_run->add_option("--policy", sim_policy, "novelty | performance | mixed:<alpha>");
  sim_run->add_option("--seed", sim_seed, "session and policy seed");
  sim_run->add_option("--out", sim_out, "archive directory");
  sim_run->add_option("--surrogate", sim_surrogate, "model file (trained and written when missing)");
  sim_run->add_option("--interactions", sim_interactions, "SAEM/AEM interactions");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the study server");
  std::string serve_host, serve_data, serve_surrogate;
  int serve_port = -1;
  std::int64_t serve_seed = -1;
  serve->add_option("--host", serve_host, "bind address (default from config)");
  serve->add_option("--port", serve_port, "port (default from config; 0 picks one)");
  serve->add_option("--data-dir", serve_data, "persistence directory (default from config)");
  serve->add_option("--seed", serve_seed, "server seed (default from config)");
  serve->add_option("--surrogate", serve_surrogate, "model file (trained and written when missing)");

  // report
  auto* report = app.add_subcommand("report", "Cross-mode report over session logs");
  std::vector<std::string> report_inputs;
  std::string report_csv;
  report->add_option("inputs", report_inputs, "JSONL logs or directories searched recursively")->required();
  report->add_option("--csv", report_csv, "write the per-session table here");

  // config
  auto* dump = app.add_subcommand("config", "Print the effective configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    PlatformConfig config = config_from(config_path);

    if (*gen) {
      std::vector<DesignRecord> records;
      if (!gen_latent.empty()) {
        records.push_back(make_design_record("latent", parse_latent(gen_latent), config.generator));
      } else {
        records = sample_constrained(gen_count, gen_seed, config.generator);
      }
      for (const auto& r : records) {
        if (gen_out.empty()) {
          write_offsets(std::cout, r.geometry);
        } else {
          write_text(fs::path(gen_out) / (r.id + ".offsets"), to_offsets_text(r.geometry));
        }
        std::cerr << design_to_json(r).dump() << "\n";
      }
    } else if (*cw) {
      OffsetTable table;
      if (!cw_offsets.empty()) {
        std::ifstream in(cw_offsets);
        table = read_offsets(in);
      } else if (!cw_latent.empty()) {
        table = generate(parse_latent(cw_latent), config.generator);
      } else {
        throw Error(ErrorKind::kInvalidArgument, "give --offsets or --latent");
      }
      const CwResult result = evaluate_cw(table, FlowConditions::for_hull(table, cw_froude), config.evaluator.thin_ship);
      std::cout.precision(10);
      std::cout << "cw " << result.cw << "\nwetted_surface " << result.wetted_surface << "\nresistance "
                << result.resistance << "\ndegenerate " << (result.degenerate ? "true" : "false") << "\n";
    } else if (*train) {
      const std::size_t samples = train_samples ? train_samples : config.surrogate.samples;
      const std::uint64_t seed = train->count("--seed") ? train_seed : config.surrogate.seed;
      const std::string out = train_out.empty() ? config.surrogate.model_path : train_out;
      auto training = train_surrogate_pipeline(samples, seed, config.surrogate.pipeline);
      training.model.save(out);
      std::cout << training.report.to_csv();
      if (!train_report.empty()) write_text(train_report, training.report.to_csv());
    } else if (*sim_run) {
      std::string upper = sim_mode;
      for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      const Mode mode = mode_from_string(upper);
      auto model = load_or_train(config, sim_surrogate);
      auto predictor = std::make_shared<GprPredictor>(model);
      SessionSpec spec;
      spec.mode = mode;
      spec.seed = sim_seed;
      spec.participant_id = "sim-" + std::to_string(sim_seed);
      spec.session_id = spec.participant_id + "-" + sim_mode;
      spec.config = mode_config(config, mode);
      SimOptions options;
      options.interactions = sim_interactions;
      const Policy policy = Policy::parse(sim_policy, sim_seed);
      auto session = run_session(policy, spec, predictor, options);
      const TelemetryArchive archive = build_archive({}, {session->events()});
      archive.write_to(sim_out);
      const DesignHistory h = aggregate_history(session->events());
      std::cout << "session " << spec.session_id << " policy " << policy.name() << " events "
                << session->events().size() << " designs " << h.designs_explored << " sc "
                << sparseness_at_centre(h.preferred).sc << "\narchive " << sim_out << "\n";
    } else if (*serve) {
      if (!serve_host.empty()) config.server.host = serve_host;
      if (serve_port >= 0) config.server.port = serve_port;
      if (!serve_data.empty()) config.server.data_dir = serve_data;
      if (serve_seed >= 0) config.server.seed = static_cast<std::uint64_t>(serve_seed);
      auto model = load_or_train(config, serve_surrogate);
      auto engine = std::make_shared<Engine>(config, std::make_shared<GprPredictor>(model),
                                             std::make_shared<SystemClock>(), config.server.data_dir);
      HttpServer server(engine);
      const int port = server.bind(config.server.host, config.server.port);
      active_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << config.server.host << ":" << port << " (data in "
                << config.server.data_dir << ")" << std::endl;
      server.listen();
      active_server = nullptr;
    } else if (*report) {
      std::vector<std::vector<SessionEvent>> logs;
      auto add = [&](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        logs.push_back(parse_jsonl(buf.str()));
      };
      for (const auto& input : report_inputs) {
        if (fs::is_directory(input)) {
          std::vector<fs::path> files;
          for (const auto& e : fs::recursive_directory_iterator(input)) {
            if (e.path().extension() == ".jsonl") files.push_back(e.path());
          }
          std::sort(files.begin(), files.end());
          for (const auto& f : files) add(f);
        } else {
          add(input);
        }
      }
      const CrossModeReport r = cross_mode_report(logs);
      std::cout << r.to_text();
      if (!report_csv.empty()) write_text(report_csv, r.to_csv());
    } else if (*dump) {
      std::cout << json(config).dump(2) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
