#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "hopart/io.hpp"
#include "hopart/metrics.hpp"
#include "hopart/oracle.hpp"
#include "hopart/pipeline.hpp"
#include "hopart/rng.hpp"

namespace hopart::cli {
namespace {

struct InstanceArgs {
  std::string hypergraph;
  std::string topology;
  bool hmetis = false;
  std::optional<double> epsilon;
};

void add_instance_options(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("-g,--hypergraph", a.hypergraph, "hypergraph file")->required();
  cmd->add_option("-t,--topology", a.topology, "topology file")->required();
  cmd->add_flag("--hmetis", a.hmetis, "read the hypergraph as hMETIS .hgr");
  cmd->add_option("--epsilon", a.epsilon, "replace capacities by the (1+eps) balance limit");
}

io::InstanceBundle load_instance(const InstanceArgs& a) {
  const std::string text = io::read_file(a.hypergraph);
  const bool hgr = a.hmetis || (a.hypergraph.size() > 4 && a.hypergraph.ends_with(".hgr"));
  Hypergraph h = hgr ? io::parse_hmetis(text) : io::parse_hypergraph(text);
  MfsTopology t = io::parse_topology(io::read_file(a.topology));
  if (a.epsilon) t = t.with_imbalance_capacities(h.total_weight(), *a.epsilon);
  return io::make_bundle(std::move(h), std::move(t));
}

struct SolverArgs {
  std::uint64_t seed = 1;
  std::size_t seeds = 4;
  double alpha0 = 0.5;
  double dalpha = 3.0;
  std::optional<std::size_t> nfinal;
  std::size_t assign_budget = assign::SearchBudget{}.max_nodes;
  std::size_t max_solutions = assign::SearchBudget{}.max_solutions;
  long assign_time_ms = 0;
  double stall_delta = 0.02;
  double rho = 0.3;
  bool no_deep_backtrack = false;
  std::string jitter = "nodes";
  std::string ops = "mv,ex,rep,del";
  std::optional<std::size_t> max_replicas;
  std::optional<std::size_t> allow_zero_gain;
  long time_limit_ms = 0;
};

void add_solver_options(CLI::App* cmd, SolverArgs& a) {
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("--seeds", a.seeds, "parallel assignment runs")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha0", a.alpha0, "initial penalty exponent");
  cmd->add_option("--dalpha", a.dalpha, "penalty exponent growth (0 keeps alpha fixed)");
  cmd->add_option("--nfinal", a.nfinal, "coarsening target size");
  cmd->add_option("--assign-budget", a.assign_budget, "search nodes per assignment run");
  cmd->add_option("--assign-solutions", a.max_solutions, "complete solutions per assignment run");
  cmd->add_option("--assign-time", a.assign_time_ms, "wall clock per assignment run in ms (0: off)");
  cmd->add_option("--stall-delta", a.stall_delta, "relative improvement that counts as a stall")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--rho", a.rho, "resume depth fraction after a stall")->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--no-deep-backtrack", a.no_deep_backtrack);
  cmd->add_option("--jitter", a.jitter, "heat perturbation per seed")
      ->check(CLI::IsMember({"nodes", "fpgas", "none"}));
  cmd->add_option("--ops", a.ops, "refinement operations: subset of mv,ex,rep,del, or none")
      ->check(CLI::Validator(
          [](std::string& text) {
            try {
              refine::OpSet::parse(text);
            } catch (const std::invalid_argument& e) {
              return std::string(e.what());
            }
            return std::string();
          },
          "OPS"));
  cmd->add_option("--max-replicas", a.max_replicas, "applied replicates per level");
  cmd->add_option("--allow-zero-gain", a.allow_zero_gain, "zero-gain applications allowed per level");
  cmd->add_option("--time-limit", a.time_limit_ms, "overall wall clock in ms, checked between phases");
}

PartitionConfig make_config(const SolverArgs& a) {
  PartitionConfig c;
  c.seed = a.seed;
  c.num_seeds = a.seeds;
  c.coarsening.alpha0 = a.alpha0;
  c.coarsening.delta_alpha = a.dalpha;
  c.coarsening.n_final = a.nfinal;
  c.budget.max_nodes = a.assign_budget;
  c.budget.max_solutions = a.max_solutions;
  c.budget.wall_clock = std::chrono::milliseconds(a.assign_time_ms);
  c.budget.stall_delta = a.stall_delta;
  c.budget.rho = a.rho;
  c.budget.deep_backtracking = !a.no_deep_backtrack;
  c.jitter = a.jitter == "fpgas"  ? assign::Jitter::fpgas
             : a.jitter == "none" ? assign::Jitter::none
                                  : assign::Jitter::nodes;
  c.refinement.ops = refine::OpSet::parse(a.ops);
  if (a.max_replicas) c.refinement.max_replicas = *a.max_replicas;
  if (a.allow_zero_gain) {
    c.refinement.allow_zero_gain = true;
    c.refinement.zero_gain_budget = *a.allow_zero_gain;
  }
  c.time_limit = std::chrono::milliseconds(a.time_limit_ms);
  return c;
}

void add_generator_options(CLI::App* cmd, io::GeneratorConfig& g) {
  cmd->add_option("--vertices", g.vertices);
  cmd->add_option("--edges", g.edges);
  cmd->add_option("--fpgas", g.fpgas);
  cmd->add_option("--types", g.types);
  cmd->add_option("--extra-links", g.extra_links);
  cmd->add_option("--max-fanout", g.max_fanout);
  cmd->add_option("--hub-share", g.hub_share);
  cmd->add_option("--locality", g.locality);
  cmd->add_option("--spare", g.spare, "spare capacity fraction");
  cmd->add_option("--heterogeneity", g.heterogeneity);
  cmd->add_option("--hop-max", g.hop_max);
  cmd->add_option("--io-factor", g.io_factor);
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_file(path, text);
  }
}

std::string report_text(const MetricsReport& report) {
  std::ostringstream s;
  write_report(s, report);
  return s.str();
}

int partition_status_code(PartitionStatus status) {
  switch (status) {
    case PartitionStatus::ok: return kOk;
    case PartitionStatus::no_solution: return kNoSolution;
    case PartitionStatus::budget_exhausted_no_solution: return kBudgetExhausted;
  }
  return kUsage;
}

struct BenchRow {
  std::string instance;
  std::string arm;
  std::uint64_t seed;
  Weight thd;
  std::size_t cut;
  double runtime_ms;
  std::size_t replicas;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hop-distance-driven hypergraph partitioner for multi-FPGA systems", "hopart"};
  app.require_subcommand(1);

  InstanceArgs inst;
  SolverArgs solver;
  std::string solution_path;
  std::string report_path;

  auto* partition_cmd = app.add_subcommand("partition", "partition an instance");
  add_instance_options(partition_cmd, inst);
  add_solver_options(partition_cmd, solver);
  partition_cmd->add_option("-o,--out", solution_path, "solution file (default: stdout)");
  partition_cmd->add_option("-r,--report", report_path, "metrics report file (default: stderr)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "metrics for a solution");
  add_instance_options(evaluate_cmd, inst);
  evaluate_cmd->add_option("-s,--solution", solution_path)->required();

  auto* validate_cmd = app.add_subcommand("validate", "list constraint violations of a solution");
  add_instance_options(validate_cmd, inst);
  validate_cmd->add_option("-s,--solution", solution_path)->required();

  io::GeneratorConfig gen;
  std::string prefix;
  auto* gen_cmd = app.add_subcommand("gen", "write a random instance");
  gen_cmd->add_option("--seed", gen.seed);
  add_generator_options(gen_cmd, gen);
  gen_cmd->add_option("-o,--out", prefix, "output prefix: writes PREFIX.hg and PREFIX.topo")->required();

  bool replicate_mode = false;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force reference results");
  add_instance_options(oracle_cmd, inst);
  oracle_cmd->add_flag("--replicate", replicate_mode, "best single replicate for --solution");
  oracle_cmd->add_option("-s,--solution", solution_path);

  std::size_t bench_instances = 10;
  std::vector<std::uint64_t> bench_seeds{1};
  std::string arms_text = "mv,ex;mv,ex,rep;mv,ex,rep,del";
  std::string csv_path;
  io::GeneratorConfig bench_gen;
  bench_gen.vertices = 400;
  bench_gen.edges = 400;
  bench_gen.fpgas = 4;
  auto* bench_cmd = app.add_subcommand("bench", "partition a generated suite under several configurations");
  bench_cmd->add_option("--instances", bench_instances, "generated instances");
  bench_cmd->add_option("--run-seeds", bench_seeds, "solver seeds per instance and arm")->delimiter(',');
  bench_cmd->add_option("--arms", arms_text, "configurations separated by ';', each an --ops value");
  add_generator_options(bench_cmd, bench_gen);
  add_solver_options(bench_cmd, solver);
  bench_cmd->add_option("-o,--out", csv_path, "CSV file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*partition_cmd) {
      const auto bundle = load_instance(inst);
      const auto result = partition(bundle.hypergraph, bundle.topology, make_config(solver));
      if (result.status != PartitionStatus::ok) {
        err << (result.status == PartitionStatus::no_solution ? "no solution" : "assignment budget exhausted without a solution")
            << '\n';
        return partition_status_code(result.status);
      }
      emit(solution_path, io::write_solution(result.placement), out);
      const auto report = evaluate(bundle.hypergraph, bundle.topology, result.placement);
      emit(report_path, report_text(report), report_path.empty() ? err : out);
      return report.violation_count == 0 ? kOk : kViolations;
    }
    if (*evaluate_cmd || *validate_cmd) {
      const auto bundle = load_instance(inst);
      const auto p = io::parse_solution(io::read_file(solution_path), bundle.hypergraph.num_vertices());
      const auto violations = validate(bundle.hypergraph, bundle.topology, p);
      if (*evaluate_cmd) out << report_text(evaluate(bundle.hypergraph, bundle.topology, p));
      write_violations(*evaluate_cmd ? err : out, violations);
      if (*validate_cmd && violations.empty()) out << "ok\n";
      return violations.empty() ? kOk : kViolations;
    }
    if (*gen_cmd) {
      const auto bundle = io::gen_instance(gen);
      io::write_file(prefix + ".hg", io::write_hypergraph(bundle.hypergraph));
      io::write_file(prefix + ".topo", io::write_topology(bundle.topology));
      return kOk;
    }
    if (*oracle_cmd) {
      const auto bundle = load_instance(inst);
      if (replicate_mode) {
        if (solution_path.empty()) throw std::invalid_argument("--replicate needs --solution");
        const auto p = io::parse_solution(io::read_file(solution_path), bundle.hypergraph.num_vertices());
        const auto best = oracle::best_single_replication(bundle.hypergraph, bundle.topology, p);
        if (!best) {
          out << "no feasible replicate\n";
          return kNoSolution;
        }
        out << "vertex=" << best->vertex << " fpga=" << best->fpga << " gain=" << best->gain << '\n';
        return kOk;
      }
      const auto best = oracle::exhaustive_partition(bundle.hypergraph, bundle.topology);
      if (!best.placement) {
        err << "no solution\n";
        return kNoSolution;
      }
      out << io::write_solution(*best.placement);
      err << "total_hop_distance=" << best.total_hop_distance << '\n';
      return kOk;
    }
    if (*bench_cmd) {
      std::vector<std::string> arms;
      for (std::size_t start = 0; start <= arms_text.size();) {
        const auto end = std::min(arms_text.find(';', start), arms_text.size());
        if (end > start) arms.push_back(arms_text.substr(start, end - start));
        start = end + 1;
      }
      if (arms.empty()) throw std::invalid_argument("--arms is empty");
      std::vector<BenchRow> rows;
      const std::uint64_t base = derive_seed(solver.seed, static_cast<std::uint64_t>(SeedStream::generator));
      for (std::size_t i = 0; i < bench_instances; ++i) {
        io::GeneratorConfig g = bench_gen;
        g.seed = derive_seed(base, i);
        const auto bundle = io::gen_instance(g);
        for (const auto& arm : arms) {
          for (std::uint64_t seed : bench_seeds) {
            SolverArgs a = solver;
            a.ops = arm;
            a.seed = seed;
            const auto start = std::chrono::steady_clock::now();
            const auto result = partition(bundle.hypergraph, bundle.topology, make_config(a));
            const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
            BenchRow row{"gen-" + std::to_string(i), arm, seed, -1, 0, elapsed.count(), 0};
            if (result.status == PartitionStatus::ok) {
              row.thd = result.total_hop_distance;
              row.cut = cut_size(bundle.hypergraph, result.placement);
              row.replicas = result.placement.replica_count();
            }
            rows.push_back(row);
          }
        }
      }
      std::ostringstream csv;
      csv << "instance,arm,seed,thd,cut,runtime_ms,replicas\n";
      for (const auto& r : rows) {
        csv << r.instance << ",\"" << r.arm << "\"," << r.seed << ',' << r.thd << ',' << r.cut << ','
            << std::fixed << std::setprecision(2) << r.runtime_ms << ',' << r.replicas << '\n';
      }
      // Ratios against the first arm on the same instance and seed; rows whose
      // baseline is 0 or failed are left out of the mean.
      csv << "\narm,mean_thd,mean_ratio\n";
      std::map<std::pair<std::string, std::uint64_t>, Weight> baseline;
      for (const auto& r : rows) {
        if (r.arm == arms.front()) baseline[{r.instance, r.seed}] = r.thd;
      }
      for (const auto& arm : arms) {
        double thd_sum = 0.0;
        double ratio_sum = 0.0;
        std::size_t n = 0;
        std::size_t ratios = 0;
        for (const auto& r : rows) {
          if (r.arm != arm || r.thd < 0) continue;
          thd_sum += static_cast<double>(r.thd);
          ++n;
          const Weight b = baseline[{r.instance, r.seed}];
          if (b > 0) {
            ratio_sum += static_cast<double>(r.thd) / static_cast<double>(b);
            ++ratios;
          }
        }
        csv << '"' << arm << "\"," << std::setprecision(4) << (n ? thd_sum / n : 0.0) << ','
            << (ratios ? ratio_sum / ratios : 0.0) << '\n';
      }
      emit(csv_path, csv.str(), out);
      return kOk;
    }
  } catch (const io::ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const std::ios_base::failure& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace hopart::cli
