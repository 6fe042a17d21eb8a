#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "holofg/io.hpp"
#include "holofg/rng.hpp"
#include "holofg/transform.hpp"

namespace {

using namespace holofg;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

// "7" or "0..99" (inclusive).
SeedRange parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  SeedRange r;
  try {
    if (dots == std::string::npos) {
      r.first = r.last = std::stoull(text);
    } else {
      r.first = std::stoull(text.substr(0, dots));
      r.last = std::stoull(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("seeds", "expected N or A..B");
  }
  if (r.last < r.first) {
    throw CLI::ValidationError("seeds", "range end before start");
  }
  return r;
}

int worker_count(std::size_t jobs) {
  if (const char* env = std::getenv("HOLOFG_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min<std::size_t>(n, jobs);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<std::size_t>(hw ? hw : 1, jobs));
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int exit_code_for(Verdict v) {
  return v == Verdict::Pass ? kExitPass : kExitFail;
}

HolantReport verify_variant(const GraphVariant& graph,
                            const TransformVariant& transforms,
                            const Tolerances& tol) {
  if (std::holds_alternative<ClassicalFactorGraph>(graph)) {
    if (!std::holds_alternative<ClassicalTransformSet>(transforms)) {
      throw ParseError("classical graph paired with quantum transforms");
    }
    return verify_classical_holant(std::get<ClassicalFactorGraph>(graph),
                                   std::get<ClassicalTransformSet>(transforms),
                                   tol);
  }
  if (!std::holds_alternative<QuantumTransformSet>(transforms)) {
    throw ParseError("quantum graph paired with classical transforms");
  }
  return verify_quantum_holant(std::get<QuantumFactorGraph>(graph),
                               std::get<QuantumTransformSet>(transforms), tol);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holographic transformations on classical and quantum factor "
               "graphs"};
  app.require_subcommand(1);

  Tolerances tol;
  app.add_option("--tol-psd", tol.psd, "relative PSD eigenvalue floor");
  app.add_option("--tol-commute", tol.commute, "commutation residual bound");
  app.add_option("--tol-inverse", tol.inverse,
                 "per-edge inverse-condition bound");
  app.add_option("--tol-discrepancy", tol.discrepancy_quantum,
                 "quantum Holant discrepancy bound");
  app.add_option("--tol-discrepancy-classical", tol.discrepancy_classical,
                 "classical Holant discrepancy bound");
  app.add_option("--tol-biorth", tol.biorthogonality,
                 "classical biorthogonality bound");

  // z
  auto* z_cmd = app.add_subcommand("z", "print the partition function");
  std::string z_graph_path;
  z_cmd->add_option("graph", z_graph_path, "graph document")->required();

  // transform
  auto* t_cmd =
      app.add_subcommand("transform", "write the transformed graph tables");
  std::string t_graph_path, t_transform_path, t_out;
  t_cmd->add_option("graph", t_graph_path, "graph document")->required();
  t_cmd->add_option("transforms", t_transform_path, "transform document")
      ->required();
  t_cmd->add_option("-o,--output", t_out, "output path")->required();

  // verify
  auto* v_cmd = app.add_subcommand(
      "verify", "check the transformed partition function; with --family, "
                "generate and verify a seed batch");
  std::string v_graph_path, v_transform_path, v_report, v_family, v_seeds;
  GenParams v_params;
  v_cmd->add_option("graph", v_graph_path, "graph document");
  v_cmd->add_option("transforms", v_transform_path, "transform document");
  v_cmd->add_option("--report", v_report, "write a report document here");
  v_cmd->add_option("--family", v_family,
                    "generated family: DIAGONAL, DEG1, PAULI, IDENTITY");
  v_cmd->add_option("--seeds", v_seeds, "seed or inclusive range A..B");
  v_cmd->add_option("--variables", v_params.variables, "generated variables");
  v_cmd->add_option("--factors", v_params.factors, "generated factors");
  v_cmd->add_option("--max-dim", v_params.max_dim, "max variable dimension");
  v_cmd->add_option("--dim-limit", v_params.dim_limit,
                    "total dimension cap for generated instances");

  // gen
  auto* g_cmd =
      app.add_subcommand("gen", "emit a generated graph and transform pair");
  std::string g_family, g_out;
  std::uint64_t g_seed = 0;
  GenParams g_params;
  g_cmd->add_option("--family", g_family, "DIAGONAL, DEG1, PAULI, IDENTITY")
      ->required();
  g_cmd->add_option("--seed", g_seed, "instance seed")->required();
  g_cmd->add_option("--variables", g_params.variables, "variable count");
  g_cmd->add_option("--factors", g_params.factors, "factor count");
  g_cmd->add_option("--max-dim", g_params.max_dim, "max variable dimension");
  g_cmd->add_option("--dim-limit", g_params.dim_limit,
                    "total dimension cap");
  g_cmd->add_option("-o,--output", g_out,
                    "output prefix (writes <prefix>.graph.json and "
                    "<prefix>.transforms.json)")
      ->required();

  // check
  auto* c_cmd = app.add_subcommand("check", "product-law checks");
  std::string c_what;
  std::uint64_t c_seed = 0;
  int c_trials = 100;
  c_cmd->add_option("what", c_what, "star-dist or odot-witness")->required();
  c_cmd->add_option("--seed", c_seed, "random seed");
  c_cmd->add_option("--trials", c_trials, "number of trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (z_cmd->parsed()) {
      const GraphVariant g = parse_graph(z_graph_path, tol);
      double z = 0.0;
      if (std::holds_alternative<ClassicalFactorGraph>(g)) {
        z = z_classical(std::get<ClassicalFactorGraph>(g));
      } else {
        z = z_quantum(std::get<QuantumFactorGraph>(g), tol);
      }
      json out = z;
      std::cout << out.dump() << "\n";
      return kExitPass;
    }

    if (t_cmd->parsed()) {
      const GraphVariant g = parse_graph(t_graph_path, tol);
      const TransformVariant ts = parse_transforms(t_transform_path);
      if (std::holds_alternative<ClassicalFactorGraph>(g)) {
        const auto out = classical_transform(
            std::get<ClassicalFactorGraph>(g),
            std::get<ClassicalTransformSet>(ts), tol);
        write_json_file(t_out, transformed_to_json(out));
      } else {
        const auto out = transform_graph(std::get<QuantumFactorGraph>(g),
                                         std::get<QuantumTransformSet>(ts),
                                         tol);
        write_json_file(t_out, transformed_to_json(out));
      }
      return kExitPass;
    }

    if (v_cmd->parsed()) {
      if (!v_family.empty()) {
        // Batch mode over generated instances.
        const Family family = family_from_name(v_family);
        const SeedRange range =
            parse_seed_range(v_seeds.empty() ? "0" : v_seeds);
        const std::size_t count =
            static_cast<std::size_t>(range.last - range.first + 1);

        std::vector<HolantReport> reports(count);
        std::vector<std::string> errors(count);
        std::atomic<std::size_t> next{0};
        auto work = [&]() {
          while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count) return;
            try {
              const Instance inst =
                  gen_instance(family, v_params, range.first + k);
              reports[k] =
                  verify_quantum_holant(inst.graph, inst.transforms, tol);
            } catch (const Error& e) {
              errors[k] = e.what();
            }
          }
        };
        std::vector<std::thread> pool;
        const int workers = worker_count(count);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();

        bool all_pass = true;
        json per_seed = json::array();
        for (std::size_t k = 0; k < count; ++k) {
          const std::uint64_t seed = range.first + k;
          if (!errors[k].empty()) {
            throw NumericError("seed " + std::to_string(seed) + ": " +
                               errors[k]);
          }
          const HolantReport& r = reports[k];
          all_pass = all_pass && r.verdict == Verdict::Pass;
          ReportMeta meta;
          meta.seed = seed;
          meta.tolerances = tol;
          per_seed.push_back(report_to_json(r, meta));
          std::cout << "seed " << seed << ": " << verdict_name(r.verdict)
                    << " discrepancy " << r.discrepancy << "\n";
        }
        if (!v_report.empty()) {
          json doc;
          doc["format_version"] = kFormatVersion;
          doc["kind"] = "batch_report";
          doc["tool_version"] = kToolVersion;
          doc["family"] = family_name(family);
          doc["all_pass"] = all_pass;
          doc["wall_clock_seconds"] = seconds_since(t0);
          doc["reports"] = std::move(per_seed);
          write_json_file(v_report, doc);
        }
        return all_pass ? kExitPass : kExitFail;
      }

      if (v_graph_path.empty() || v_transform_path.empty()) {
        std::cerr << "verify needs either graph+transforms or --family\n";
        return kExitUsage;
      }
      const GraphVariant g = parse_graph(v_graph_path, tol);
      const TransformVariant ts = parse_transforms(v_transform_path);
      const HolantReport report = verify_variant(g, ts, tol);
      std::cout << verdict_name(report.verdict) << " discrepancy "
                << report.discrepancy << "\n";
      for (const std::string& f : report.failures) {
        std::cout << "  " << f << "\n";
      }
      if (!v_report.empty()) {
        ReportMeta meta;
        meta.tolerances = tol;
        meta.wall_clock_seconds = seconds_since(t0);
        write_json_file(v_report, report_to_json(report, meta));
      }
      return exit_code_for(report.verdict);
    }

    if (g_cmd->parsed()) {
      const Instance inst =
          gen_instance(family_from_name(g_family), g_params, g_seed);
      write_json_file(g_out + ".graph.json", graph_to_json(inst.graph));
      write_json_file(g_out + ".transforms.json",
                      transforms_to_json(inst.transforms));
      return kExitPass;
    }

    if (c_cmd->parsed()) {
      if (c_what == "star-dist") {
        Rng rng(c_seed);
        const SpaceLabel a = SpaceLabel::base("A", 2);
        const SpaceLabel b = SpaceLabel::base("B", 2);
        const SpaceLabel c = SpaceLabel::base("C", 2);
        double worst = 0.0;
        for (int k = 0; k < c_trials; ++k) {
          const LabeledOperator lab({a, b}, rng.random_psd(4));
          const LabeledOperator lbc({b, c}, rng.random_psd(4));
          worst = std::max(worst, check_star_distributivity(lab, lbc, tol));
        }
        std::cout << "star distributivity: max residual " << worst << " over "
                  << c_trials << " trials\n";
        return worst <= tol.commute ? kExitPass : kExitFail;
      }
      if (c_what == "odot-witness") {
        const auto w = find_odot_nondistributivity(c_seed, c_trials);
        if (w.has_value()) {
          std::cout << "odot non-distributivity witness at trial " << w->trial
                    << ": relative discrepancy " << w->discrepancy << "\n";
          return kExitPass;
        }
        std::cout << "no witness in " << c_trials << " trials\n";
        return kExitFail;
      }
      std::cerr << "unknown check: " << c_what << "\n";
      return kExitUsage;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitUsage;
}
