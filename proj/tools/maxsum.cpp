// Command-line driver: parse UAI models, compute exact optima and upper
// bounds (MBE, MBE-MM, FGLP, JGLP), and run AND/OR branch-and-bound with
// mini-bucket style heuristics.
//
// Exit codes: 0 success, 1 usage error, 2 parse error, 3 capacity error,
// 4 stopped by the time limit with a usable result.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "maxsum/maxsum.hpp"

namespace fs = std::filesystem;
using namespace maxsum;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitTimeout = 4;

struct Options {
  std::string input;
  std::string evid;
  std::string order_file;
  std::string save_order;
  std::string trace_path;
  std::string alg = "mbe";
  int z = 2;
  double time_limit = 3600.0;
  double lp_time = 30.0;
  double eps = 1e-8;
  int max_sweeps = INT_MAX;
  std::uint64_t seed = 42;
  int restarts = 1;
  std::uint64_t memory = kDefaultMemoryBudget;
  bool brute = false;
  bool no_prune = false;
  std::vector<int> z_list;
};

GraphicalModel load_model(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw parse_error(0, "cannot open '" + o.input + "'");
  GraphicalModel m = parse_uai(in);
  if (!o.evid.empty()) {
    std::ifstream ein(o.evid);
    if (!ein) throw parse_error(0, "cannot open '" + o.evid + "'");
    m = condition(m, parse_evidence(ein, m));
  }
  return m;
}

EliminationOrder load_order(const Options& o, const GraphicalModel& m) {
  EliminationOrder order;
  if (!o.order_file.empty()) {
    std::ifstream in(o.order_file);
    if (!in) throw parse_error(0, "cannot open '" + o.order_file + "'");
    order = parse_order(in, m);
  } else {
    order = best_min_fill_order(m, o.seed, o.restarts);
  }
  if (!o.save_order.empty())
    std::ofstream(o.save_order) << format_order(order) << "\n";
  return order;
}

StopRule lp_stop(const Options& o) {
  if (o.lp_time <= 0) return StopRule{.max_sweeps = 0};
  return StopRule{.max_sweeps = o.max_sweeps, .time_limit = o.lp_time,
                  .eps = o.eps};
}

void write_trace(const std::string& path, const BoundTrace& trace,
                 const char* column) {
  if (path.empty()) return;
  std::ofstream out(path);
  TraceWriter w(out, column);
  for (const TracePoint& p : trace) w.row(p.elapsed, p.bound);
}

std::string fmt_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_time(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void print_assignment(const Assignment& x) {
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (v) std::printf(" ");
    std::printf("%d", x[VarId(v)]);
  }
  if (x.size()) std::printf("\n");
}

int cmd_bound(const Options& o) {
  GraphicalModel m = load_model(o);
  EliminationOrder order = load_order(o, m);

  double bound = 0;
  bool timed_out = false;
  BoundTrace trace;

  if (o.alg == "mbe") {
    bound = mini_bucket_elim(m, order, o.z, o.memory).bound;
    trace.push_back(TracePoint{0.0, bound});
  } else if (o.alg == "mbe-mm") {
    bound = mbe_mm(m, order, o.z, o.memory).bound;
    trace.push_back(TracePoint{0.0, bound});
  } else if (o.alg == "fglp") {
    StopRule stop{.max_sweeps = o.max_sweeps, .time_limit = o.time_limit,
                  .eps = o.eps};
    FglpResult r = fglp(m, stop);
    bound = r.trace.back().bound;
    trace = std::move(r.trace);
    timed_out = r.timed_out;
  } else if (o.alg == "jglp") {
    StopRule stop{.max_sweeps = o.max_sweeps, .time_limit = o.time_limit,
                  .eps = o.eps};
    JoinGraph jg = join_graph_structuring(m, order, o.z, o.memory);
    JglpResult r = jglp(jg, stop);
    bound = r.trace.back().bound;
    trace = std::move(r.trace);
    timed_out = r.timed_out;
  } else if (o.alg == "fglp+mbe") {
    FglpResult pre = fglp(m, lp_stop(o));
    BoundResult r = mini_bucket_elim(pre.model, order, o.z, o.memory);
    bound = r.bound;
    trace = std::move(pre.trace);
    trace.push_back(
        TracePoint{trace.back().elapsed + 1e-9, bound});  // final MBE pass
    timed_out = pre.timed_out;
  } else {
    throw usage_error("unknown --alg '" + o.alg + "'");
  }

  write_trace(o.trace_path, trace, "bound_ln");
  std::printf("%s\n", format_result_line("bound", bound).c_str());
  return timed_out ? kExitTimeout : 0;
}

HeuristicScheme scheme_from(const std::string& name) {
  if (name == "mbe") return HeuristicScheme::kMbe;
  if (name == "mbe-mm") return HeuristicScheme::kMbeMm;
  if (name == "fglp+mbe") return HeuristicScheme::kFglpMbe;
  if (name == "jglp") return HeuristicScheme::kJglp;
  throw usage_error("unknown --heur '" + name + "'");
}

int cmd_solve(const Options& o) {
  GraphicalModel m = load_model(o);
  EliminationOrder order = load_order(o, m);

  BuiltHeuristic bh =
      build_heuristic(m, order, o.z, scheme_from(o.alg), lp_stop(o), o.memory);
  StopRule stop{.time_limit = o.time_limit};
  SearchResult r = aobb(bh.model, bh.pt, bh.table, stop,
                        AobbOptions{.prune = !o.no_prune});

  write_trace(o.trace_path, r.stats.trace, "best_value_ln");
  std::printf("%s %s %llu %s\n", r.stats.timed_out ? "TIMEOUT" : "SOLVED",
              fmt_time(r.stats.elapsed).c_str(),
              static_cast<unsigned long long>(r.stats.nodes),
              fmt_value(r.value).c_str());
  if (r.argmax.full()) print_assignment(r.argmax);
  return r.stats.timed_out ? kExitTimeout : 0;
}

int cmd_exact(const Options& o) {
  GraphicalModel m = load_model(o);
  double value = 0;
  Assignment argmax;
  if (o.brute) {
    OptResult r = brute_force_opt(m);
    value = r.value;
    argmax = r.argmax;
  } else {
    EliminationOrder order = load_order(o, m);
    EliminationResult r = bucket_elimination(m, order, o.memory);
    value = r.value;
    argmax = std::move(r.argmax);
  }
  std::printf("%s\n", format_result_line("exact", value).c_str());
  print_assignment(argmax);
  return 0;
}

int cmd_compare(const Options& o) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.input))
    if (entry.is_regular_file() && entry.path().extension() == ".uai")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<int> zs = o.z_list.empty() ? std::vector<int>{1, 2, 3} : o.z_list;

  std::printf(
      "instance,n,k,w,z,exact,mbe,mbe_time,mbe_mm,mbe_mm_time,"
      "fglp,fglp_time,jglp,jglp_time\n");

  for (const fs::path& path : files) {
    GraphicalModel m;
    try {
      std::ifstream in(path);
      m = parse_uai(in);
    } catch (const parse_error& e) {
      std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
      continue;
    }
    EliminationOrder order = best_min_fill_order(m, o.seed, o.restarts);

    int k = 1;
    for (std::size_t v = 0; v < m.num_vars(); ++v)
      k = std::max(k, m.card(VarId(v)));

    std::string exact_cell = "OOM";
    try {
      exact_cell = fmt_value(bucket_elimination(m, order, o.memory).value);
    } catch (const capacity_error&) {
    }

    StopRule stop{.max_sweeps = o.max_sweeps, .time_limit = o.time_limit,
                  .eps = o.eps};

    // FGLP does not depend on z; run it once per instance
    detail::Stopwatch fglp_clock;
    FglpResult fr = fglp(m, stop);
    std::string fglp_cell = fmt_value(fr.trace.back().bound);
    std::string fglp_time = fmt_time(fglp_clock.elapsed());

    for (int z : zs) {
      auto run = [&](auto&& fn) -> std::pair<std::string, std::string> {
        detail::Stopwatch clock;
        try {
          double b = fn();
          return {fmt_value(b), fmt_time(clock.elapsed())};
        } catch (const capacity_error&) {
          return {"OOM", "OOM"};
        } catch (const infeasible_z_error&) {
          return {"NA", "NA"};
        }
      };
      auto [mbe_cell, mbe_time] =
          run([&] { return mini_bucket_elim(m, order, z, o.memory).bound; });
      auto [mm_cell, mm_time] =
          run([&] { return mbe_mm(m, order, z, o.memory).bound; });
      auto [jglp_cell, jglp_time] = run([&] {
        JoinGraph jg = join_graph_structuring(m, order, z, o.memory);
        return jglp(jg, stop).trace.back().bound;
      });

      std::printf("%s,%zu,%d,%d,%d,%s,%s,%s,%s,%s,%s,%s,%s,%s\n",
                  path.filename().c_str(), m.num_vars(), k, order.width, z,
                  exact_cell.c_str(), mbe_cell.c_str(), mbe_time.c_str(),
                  mm_cell.c_str(), mm_time.c_str(), fglp_cell.c_str(),
                  fglp_time.c_str(), jglp_cell.c_str(), jglp_time.c_str());
    }
  }
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool needs_z) {
  cmd->add_option("input", o.input, "input file or directory")->required();
  cmd->add_option("--evid", o.evid, "evidence file (.uai.evid)");
  cmd->add_option("--order", o.order_file,
                  "elimination order file (whitespace-separated ids)");
  cmd->add_option("--save-order", o.save_order,
                  "dump the elimination order used to this path");
  if (needs_z) cmd->add_option("-z", o.z, "mini-bucket size bound (z)");
  cmd->add_option("--time-limit", o.time_limit, "wall-clock limit, seconds");
  cmd->add_option("--lp-time", o.lp_time,
                  "time for the iterative LP phase of hybrid schemes; 0 skips it");
  cmd->add_option("--eps", o.eps, "convergence epsilon per sweep");
  cmd->add_option("--max-sweeps", o.max_sweeps,
                  "sweep cap for iterative schemes");
  cmd->add_option("--seed", o.seed, "ordering seed");
  cmd->add_option("--restarts", o.restarts,
                  "min-fill restarts; best (width, seed) order wins");
  cmd->add_option("--memory", o.memory, "table byte budget");
  cmd->add_option("--trace", o.trace_path, "trace CSV output path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "max-sum (MPE/MAP) bounds and AND/OR branch-and-bound over UAI models"};
  app.require_subcommand(1);

  Options ob, os, oe, oc;

  CLI::App* bound = app.add_subcommand("bound", "upper-bound the optimum");
  add_common(bound, ob, true);
  bound->add_option("--alg", ob.alg, "mbe | mbe-mm | fglp | jglp | fglp+mbe");

  CLI::App* solve =
      app.add_subcommand("solve", "AND/OR branch-and-bound search");
  add_common(solve, os, true);
  os.alg = "mbe-mm";
  solve->add_option("--heur", os.alg, "mbe | mbe-mm | fglp+mbe | jglp");
  solve->add_flag("--no-prune", os.no_prune, "disable pruning (debugging)");

  CLI::App* exact = app.add_subcommand("exact", "exact optimum and argmax");
  add_common(exact, oe, false);
  exact->add_flag("--brute", oe.brute, "brute-force enumeration oracle");

  CLI::App* compare =
      app.add_subcommand("compare", "CSV of bounds over a directory");
  add_common(compare, oc, false);
  oc.time_limit = 5.0;
  compare->add_option("-z", oc.z_list, "z values (repeatable; default 1 2 3)");

  try {
    app.parse(argc, argv);
    if (bound->parsed()) return cmd_bound(ob);
    if (solve->parsed()) return cmd_solve(os);
    if (exact->parsed()) return cmd_exact(oe);
    if (compare->parsed()) return cmd_compare(oc);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const parse_error& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitParse;
  } catch (const capacity_error& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return kExitCapacity;
  } catch (const infeasible_z_error& e) {
    std::fprintf(stderr, "infeasible z: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
