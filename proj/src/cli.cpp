#include "attackmap/cli.hpp"

#include <csignal>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "attackmap/analysis.hpp"
#include "attackmap/ingest.hpp"
#include "attackmap/report.hpp"
#include "attackmap/service.hpp"

namespace attackmap::cli {

namespace {

struct Options {
  std::string model_path;
  std::string hazard;
  std::string profile;
  std::string scenario_path;
  std::string output_path;
  std::string listen = "127.0.0.1:8080";
  std::string cors_origin = "*";
  std::size_t max_depth = kDefaultMaxDepth;
  std::size_t thin_threshold = kDefaultThinThreshold;
  bool merged = false;
  bool json = false;
  bool fail_on_uncovered = false;
  bool hide_protections = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string profile_or_combined(const Options& options) {
  return options.profile.empty() ? std::string(kCombinedProfile) : options.profile;
}

PipelineOptions pipeline(const Options& options) { return {options.max_depth, options.thin_threshold}; }

void print_findings(const std::vector<Finding>& findings, std::ostream& err) {
  for (const auto& f : findings) {
    err << to_string(f.severity) << ' ' << f.code;
    if (!f.subject.empty()) err << " [" << f.subject << ']';
    err << ": " << f.message << '\n';
  }
}

Model load(const Options& options) { return load_model_file(options.model_path); }

Scenario load_scenario(const Options& options) {
  if (options.scenario_path.empty()) return {};
  return parse_scenario(read_text_file(options.scenario_path));
}

void write_output(const Options& options, const std::string& text, std::ostream& out) {
  if (options.output_path.empty() || options.output_path == "-") {
    out << text;
    return;
  }
  std::ofstream file(options.output_path, std::ios::binary | std::ios::trunc);
  if (!file) throw NotFoundError("E-IO", options.output_path, "cannot write '" + options.output_path + "'");
  file << text;
  if (!file) throw NotFoundError("E-IO", options.output_path, "failed writing '" + options.output_path + "'");
}

int cmd_validate(const Options& options, std::ostream& out, std::ostream& err) {
  const auto outcome = parse_model_document(read_text_file(options.model_path));
  print_findings(outcome.findings, err);
  std::size_t errors = 0;
  for (const auto& f : outcome.findings) errors += f.severity == Severity::error;
  out << errors << " errors, " << outcome.findings.size() - errors << " warnings\n";
  return errors ? kInvalid : kOk;
}

void print_hazard_node(const Model& model, const HazardNode& node, int depth, std::ostream& out) {
  const auto losses = resolve_losses(model, node.id);
  const Hazard* hazard = model.find_hazard(node.id);
  out << std::string(depth * 2, ' ') << node.id << "  losses={";
  bool first = true;
  for (const auto& loss : losses) {
    out << (first ? "" : ",") << loss;
    first = false;
  }
  out << "}";
  if (const auto* mapping = model.find_mapping(node.id)) {
    out << "  targets={";
    for (std::size_t i = 0; i < mapping->targets.size(); ++i) out << (i ? "," : "") << mapping->targets[i];
    out << "}";
  }
  if (hazard && !hazard->description.empty()) out << "  " << hazard->description;
  out << '\n';
  for (const auto& child : node.children) print_hazard_node(model, child, depth + 1, out);
}

int cmd_hazards(const Options& options, std::ostream& out) {
  const Model model = load(options);
  for (const auto& root : hazard_tree(model)) print_hazard_node(model, root, 0, out);
  return kOk;
}

int cmd_chains(const Options& options, std::ostream& out) {
  const Model model = load(options);
  const Scenario scenario = load_scenario(options);
  const auto chains = hazard_chains(model, options.hazard, profile_or_combined(options),
                                    options.scenario_path.empty() ? nullptr : &scenario, pipeline(options));
  if (options.json) {
    out << chains_json(chains, options.thin_threshold).dump(2) << '\n';
  } else {
    out << chain_table(chains, model);
  }
  return kOk;
}

int cmd_analyze(const Options& options, std::ostream& out) {
  const Model model = load(options);
  const auto analysis = analyze_model(model, profile_or_combined(options), pipeline(options));
  if (options.json) {
    out << full_report(model, analysis);
  } else {
    out << "profile: " << analysis.profile << "\n";
    for (const auto& [hazard, chains] : analysis.chains) {
      out << "\nHazard " << hazard << " (" << chains.size() << " chains)\n";
      out << chain_table(chains, model);
    }
    const auto& s = analysis.coverage.summary;
    out << "\ncoverage: unpreventable=" << s.unpreventable << " unprotected=" << s.unprotected << " thin=" << s.thin
        << " defended=" << s.defended << "\n";
    for (const auto& chain : analysis.coverage.detection_required)
      out << "detection required: " << chain.hazard << ' ' << chain_path(chain) << '\n';
    out << "\nprotection ranking:\n";
    for (std::size_t i = 0; i < analysis.ranking.entries.size(); ++i) {
      const auto& e = analysis.ranking.entries[i];
      out << "  " << i + 1 << ". " << e.protection << "  chains_broken=" << e.chains_broken
          << "  weighted_score=" << e.weighted_score << '\n';
    }
    out << "greedy cut:";
    for (const auto& id : analysis.ranking.greedy_cut) out << ' ' << id;
    out << '\n';
  }
  const auto& s = analysis.coverage.summary;
  if (options.fail_on_uncovered && s.unpreventable + s.unprotected > 0) return kUncovered;
  return kOk;
}

int cmd_whatif(const Options& options, std::ostream& out) {
  const Model model = load(options);
  const Scenario scenario = load_scenario(options);
  const auto delta = what_if(model, options.hazard, profile_or_combined(options), scenario, pipeline(options));
  out << delta_json(delta).dump(2) << '\n';
  return kOk;
}

int cmd_export_dot(const Options& options, std::ostream& out) {
  if (options.merged && !options.hazard.empty()) throw UsageError("--hazard and --merged are mutually exclusive");
  const Model model = load(options);
  const std::string profile = profile_or_combined(options);
  const auto opts = pipeline(options);

  std::map<HazardId, CoverageReport, NaturalLess> per_hazard;
  AttackGraph graph;
  if (!options.hazard.empty()) {
    const auto chains = hazard_chains(model, options.hazard, profile, nullptr, opts);
    per_hazard[options.hazard] = coverage(chains, opts.thin_threshold);
    graph = build_graph(options.hazard, chains);
  } else {
    const auto analysis = analyze_model(model, profile, opts);
    for (const auto& [hazard, chains] : analysis.chains) per_hazard[hazard] = coverage(chains, opts.thin_threshold);
    graph = analysis.merged_graph();
  }
  DotOptions dot;
  dot.show_protections = !options.hide_protections;
  dot.highlight = default_highlight();
  dot.edge_classes = edge_classes(graph, per_hazard);
  write_output(options, to_dot(graph, model, dot), out);
  return kOk;
}

int cmd_report(const Options& options, std::ostream& out) {
  const Model model = load(options);
  const auto analysis = analyze_model(model, profile_or_combined(options), pipeline(options));
  write_output(options, full_report(model, analysis), out);
  return kOk;
}

std::function<void()> g_stop;

int cmd_serve(const Options& options, std::ostream& out, std::ostream& err) {
  Model model = load(options);
  const auto [host, port] = parse_listen_address(options.listen);
  ServiceConfig config;
  config.cors_origin = options.cors_origin;
  config.defaults = pipeline(options);
  Service service(std::move(model), config);
  HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    err << "cannot listen on " << options.listen << '\n';
    return kInvalid;
  }
  out << "listening on " << host << ':' << bound << std::endl;
  g_stop = [&server] { server.stop(); };
  std::signal(SIGINT, [](int) {
    if (g_stop) g_stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_stop) g_stop();
  });
  server.listen_after_bind();
  g_stop = nullptr;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attack-graph analysis of a cyber infrastructure security model", "attackmap"};
  app.require_subcommand(1);
  Options options;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("model", options.model_path, "Model file (JSON)")->required();
    sub->add_option("--max-depth", options.max_depth, "Maximum hops per chain")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--thin-threshold", options.thin_threshold, "Protections below which a chain is thin")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Validate a model file");
  add_common(validate_cmd);

  auto* hazards_cmd = app.add_subcommand("hazards", "Print the hazard tree with resolved losses");
  add_common(hazards_cmd);

  auto* chains_cmd = app.add_subcommand("chains", "Enumerate attack chains for one hazard");
  add_common(chains_cmd);
  chains_cmd->add_option("--hazard", options.hazard, "Hazard id")->required();
  chains_cmd->add_option("--profile", options.profile, "Attacker profile id (default: all profiles combined)");
  chains_cmd->add_option("--scenario", options.scenario_path, "What-if scenario file (JSON)");
  chains_cmd->add_flag("--json", options.json, "Emit JSON instead of a table");

  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze every mapped hazard");
  add_common(analyze_cmd);
  analyze_cmd->add_option("--profile", options.profile, "Attacker profile id (default: all profiles combined)");
  analyze_cmd->add_flag("--fail-on-uncovered", options.fail_on_uncovered,
                        "Exit 1 when an unprotected or unpreventable chain exists");
  analyze_cmd->add_flag("--json", options.json, "Emit the JSON report instead of text");

  auto* whatif_cmd = app.add_subcommand("whatif", "Compare a scenario against the baseline");
  add_common(whatif_cmd);
  whatif_cmd->add_option("--hazard", options.hazard, "Hazard id")->required();
  whatif_cmd->add_option("--profile", options.profile, "Attacker profile id (default: all profiles combined)");
  whatif_cmd->add_option("--scenario", options.scenario_path, "What-if scenario file (JSON)")->required();

  auto* dot_cmd = app.add_subcommand("export-dot", "Write an attack graph as DOT");
  add_common(dot_cmd);
  dot_cmd->add_option("--hazard", options.hazard, "Hazard id");
  dot_cmd->add_flag("--merged", options.merged, "Merged graph over all mapped hazards (default)");
  dot_cmd->add_option("--profile", options.profile, "Attacker profile id (default: all profiles combined)");
  dot_cmd->add_flag("--no-protections", options.hide_protections, "Omit protection edge labels");
  dot_cmd->add_option("-o,--output", options.output_path, "Output file (default: stdout)");

  auto* report_cmd = app.add_subcommand("report", "Write the JSON report bundle");
  add_common(report_cmd);
  report_cmd->add_option("--profile", options.profile, "Attacker profile id (default: all profiles combined)");
  report_cmd->add_option("-o,--output", options.output_path, "Output file (default: stdout)");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the read-only HTTP API");
  add_common(serve_cmd);
  serve_cmd->add_option("--listen", options.listen, "host:port")->capture_default_str();
  serve_cmd->add_option("--cors-origin", options.cors_origin, "Access-Control-Allow-Origin value")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(options, out, err);
    if (hazards_cmd->parsed()) return cmd_hazards(options, out);
    if (chains_cmd->parsed()) return cmd_chains(options, out);
    if (analyze_cmd->parsed()) return cmd_analyze(options, out);
    if (whatif_cmd->parsed()) return cmd_whatif(options, out);
    if (dot_cmd->parsed()) return cmd_export_dot(options, out);
    if (report_cmd->parsed()) return cmd_report(options, out);
    if (serve_cmd->parsed()) return cmd_serve(options, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ModelError& e) {
    print_findings(e.findings(), err);
    return kInvalid;
  } catch (const NotFoundError& e) {
    err << "error " << e.code() << " [" << e.subject() << "]: " << e.what() << '\n';
    return kInvalid;
  } catch (const InvalidArgumentError& e) {
    err << "error " << e.code() << ": " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}

}  // namespace attackmap::cli
