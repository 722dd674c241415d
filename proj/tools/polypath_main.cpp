// polypath command-line front end: solve systems from total-degree starts,
// track user-supplied start data, and benchmark the batched evaluation
// stages.  Output is line-delimited JSON, one self-describing object per
// line.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "polypath/parallel.hpp"
#include "polypath/tracker.hpp"
#include "polypath/xprec_io.hpp"

using json = nlohmann::ordered_json;
using namespace polypath;

namespace {

struct Options {
  std::string system_file;
  std::string start_system_file;
  std::string start_solutions_file;
  std::string output_file;
  std::string log_file;
  std::string precision = "d";
  std::string gamma_str;
  std::string path_range;
  std::string simd = "auto";
  uint64_t seed = 0;
  double tol_residual = -1.0;
  double tol_update = -1.0;
  int max_newton = -1;
  double h_init = -1.0, h_min = -1.0, h_max = -1.0;
  uint32_t batch = 64;
  unsigned workers = 0;
  std::vector<uint64_t> sweep;
};

Precision parse_precision(const std::string& s) {
  if (s == "d") return Precision::d;
  if (s == "dd") return Precision::dd;
  if (s == "qd") return Precision::qd;
  throw CLI::ValidationError("--precision must be one of d, dd, qd");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<uint64_t, uint64_t> parse_range(const std::string& s) {
  size_t dots = s.find("..");
  if (dots == std::string::npos)
    throw std::runtime_error("--path-range must look like a..b");
  uint64_t lo = std::stoull(s.substr(0, dots));
  uint64_t hi = std::stoull(s.substr(dots + 2));
  if (hi < lo) throw std::runtime_error("--path-range: empty range");
  return {lo, hi};
}

TrackConfig make_track_config(const Options& opt, Precision level) {
  TrackConfig cfg = TrackConfig::defaults(level);
  if (opt.tol_residual > 0) cfg.residual_tol = opt.tol_residual;
  if (opt.tol_update > 0) cfg.update_tol = opt.tol_update;
  if (opt.max_newton > 0) cfg.max_newton = opt.max_newton;
  if (opt.h_init > 0) cfg.h_init = opt.h_init;
  if (opt.h_min > 0) cfg.h_min = opt.h_min;
  if (opt.h_max > 0) cfg.h_max = opt.h_max;
  cfg.batch = opt.batch;
  cfg.workers = opt.workers == 0 ? default_worker_count() : opt.workers;
  cfg.validate();
  return cfg;
}

void apply_simd(const std::string& s) {
  if (s == "auto")
    set_simd_mode(SimdMode::automatic);
  else if (s == "scalar")
    set_simd_mode(SimdMode::scalar);
  else if (s == "avx2")
    set_simd_mode(SimdMode::avx2);
  else
    throw std::runtime_error("--simd must be auto, scalar or avx2");
}

template <class R>
Cplx<R> resolve_gamma(const Options& opt) {
  if (!opt.gamma_str.empty()) {
    size_t comma = opt.gamma_str.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("--gamma must look like re,im");
    double re = 0.0, im = 0.0;
    if (!parse_decimal(opt.gamma_str.substr(0, comma), re) ||
        !parse_decimal(opt.gamma_str.substr(comma + 1), im))
      throw std::runtime_error("--gamma: malformed numbers");
    return Cplx<R>{R{re}, R{im}};
  }
  return convert_cplx<R>(random_gamma(opt.seed));
}

struct OutputStreams {
  std::ofstream file;
  std::ostream* out = &std::cout;
  std::ofstream log;

  explicit OutputStreams(const Options& opt) {
    if (!opt.output_file.empty()) {
      file.open(opt.output_file);
      if (!file) throw std::runtime_error("cannot open output file: " + opt.output_file);
      out = &file;
    }
    if (!opt.log_file.empty()) {
      log.open(opt.log_file);
      if (!log) throw std::runtime_error("cannot open log file: " + opt.log_file);
    }
  }
};

template <class R>
const char* record_class(const PathRecord<R>& r) {
  if (r.status == PathStatus::success) return "converged";
  if (r.reason == FailReason::diverged) return "diverged";
  return "failed";
}

template <class R>
json record_json(const PathRecord<R>& r) {
  json jx = json::array();
  for (const Cplx<R>& z : r.x) jx.push_back({to_decimal(z.re), to_decimal(z.im)});
  json j;
  j["type"] = "solution";
  j["path"] = r.path_id;
  j["start"] = r.path_id;
  j["x"] = std::move(jx);
  j["residual"] = to_double(r.residual);
  j["status"] = record_class(r);
  j["annotation"] = fail_reason_name(r.reason);
  j["steps"] = r.stats.steps;
  j["newton"] = r.stats.newton_iters;
  j["rejections"] = r.stats.rejections;
  j["wall_ms"] = r.wall_ms;
  return j;
}

template <class R>
void emit_solutions(const SolutionSet<R>& sol, const Options& opt, Precision level,
                    Cplx<R> gamma, const char* command, double wall_ms, std::ostream& out) {
  uint64_t converged = 0, diverged = 0, failed = 0;
  std::vector<double> resid;
  for (const auto& r : sol.paths) {
    out << record_json(r).dump() << "\n";
    std::string cls = record_class(r);
    if (cls == "converged") {
      ++converged;
      resid.push_back(to_double(r.residual));
    } else if (cls == "diverged") {
      ++diverged;
    } else {
      ++failed;
    }
  }
  std::sort(resid.begin(), resid.end());
  json s;
  s["type"] = "summary";
  s["command"] = command;
  s["precision"] = precision_name(level);
  s["gamma"] = {to_double(gamma.re), to_double(gamma.im)};
  s["seed"] = opt.seed;
  s["paths"] = sol.paths.size();
  s["converged"] = converged;
  s["diverged"] = diverged;
  s["failed"] = failed;
  if (!resid.empty()) {
    s["residual_min"] = resid.front();
    s["residual_max"] = resid.back();
    s["residual_median"] = resid[resid.size() / 2];
  }
  s["batches"] = sol.batches;
  s["corrector_rounds"] = sol.total_rounds;
  s["wall_ms"] = wall_ms;
  out << s.dump() << "\n";
}

ProgressSink make_log_sink(std::ofstream& log) {
  return [&log](const StepEvent& ev) {
    json j;
    j["type"] = "step";
    j["path"] = ev.path_id;
    j["t"] = ev.t;
    j["h"] = ev.h;
    j["newton"] = ev.newton_iters;
    j["status"] = ev.status;
    j["accepted"] = ev.accepted;
    log << j.dump() << "\n";
  };
}

int cmd_solve(const Options& opt) {
  PolySystem f = parse_system(read_file(opt.system_file));
  Precision level = parse_precision(opt.precision);
  apply_simd(opt.simd);
  OutputStreams os(opt);

  uint64_t lo = 0, hi = UINT64_MAX;
  if (!opt.path_range.empty()) std::tie(lo, hi) = parse_range(opt.path_range);

  return with_precision(level, [&](auto tag) -> int {
    using R = decltype(tag);
    Cplx<R> gamma = resolve_gamma<R>(opt);
    auto [g, sd] = total_degree_start<R>(f);
    auto h = make_homotopy<R>(f, std::move(g), gamma);
    TrackConfig cfg = make_track_config(opt, level);
    ProgressSink sink;
    if (os.log.is_open()) sink = make_log_sink(os.log);
    auto t0 = std::chrono::steady_clock::now();
    SolutionSet<R> sol =
        track_all<R>(h, sd, cfg, os.log.is_open() ? &sink : nullptr, lo, hi);
    double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit_solutions(sol, opt, level, gamma, "solve", ms, *os.out);
    return 0;
  });
}

int cmd_track(const Options& opt) {
  PolySystem f = parse_system(read_file(opt.system_file));
  PolySystem g = parse_system(read_file(opt.start_system_file));
  std::vector<size_t> cand_lines;
  auto cands = parse_solutions(read_file(opt.start_solutions_file), g.dim, &cand_lines);
  Precision level = parse_precision(opt.precision);
  apply_simd(opt.simd);
  OutputStreams os(opt);

  uint64_t lo = 0, hi = UINT64_MAX;
  if (!opt.path_range.empty()) std::tie(lo, hi) = parse_range(opt.path_range);

  return with_precision(level, [&](auto tag) -> int {
    using R = decltype(tag);
    Cplx<R> gamma = resolve_gamma<R>(opt);
    StartLoadReport<R> rep = load_start_data<R>(g, cands);
    for (const auto& rej : rep.rejected) {
      json w;
      w["type"] = "warning";
      w["kind"] = "start-rejected";
      w["index"] = rej.index;
      w["line"] = cand_lines[rej.index];
      w["residual"] = rej.residual;
      *os.out << w.dump() << "\n";
    }
    if (rep.data.count == 0) {
      std::cerr << "polypath: all start solutions were rejected\n";
      return 3;
    }
    auto h = make_homotopy<R>(f, std::move(g), gamma);
    TrackConfig cfg = make_track_config(opt, level);
    ProgressSink sink;
    if (os.log.is_open()) sink = make_log_sink(os.log);
    auto t0 = std::chrono::steady_clock::now();
    SolutionSet<R> sol =
        track_all<R>(h, rep.data, cfg, os.log.is_open() ? &sink : nullptr, lo, hi);
    double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit_solutions(sol, opt, level, gamma, "track", ms, *os.out);
    return 0;
  });
}

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

int cmd_bench(const Options& opt) {
  PolySystem f = parse_system(read_file(opt.system_file));
  Precision level = parse_precision(opt.precision);
  apply_simd(opt.simd);
  OutputStreams os(opt);
  std::vector<uint64_t> sweep = opt.sweep;
  if (sweep.empty()) sweep = {10, 20, 50, 100, 200, 500, 1000};

  return with_precision(level, [&](auto tag) -> int {
    using R = decltype(tag);
    Cplx<R> gamma = resolve_gamma<R>(opt);
    auto [g, sd] = total_degree_start<R>(f);
    auto h = make_homotopy<R>(f, std::move(g), gamma);
    unsigned workers = opt.workers == 0 ? default_worker_count() : opt.workers;

    uint64_t state = opt.seed * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL;
    auto next_unit = [&state]() {
      state += 0x9e3779b97f4a7c15ULL;
      uint64_t z = state;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      z ^= z >> 31;
      return 2.0 * (static_cast<double>(z >> 11) * 0x1p-53) - 1.0;
    };

    std::cerr << "#evals        mon        sum      coeff      total   [ms, "
              << precision_name(level) << "]\n";
    for (uint64_t n : sweep) {
      BatchWorkspace<R> ws(h.plan, static_cast<uint32_t>(n));
      std::vector<Cplx<R>> x(h.plan.dim);
      for (uint64_t j = 0; j < n; ++j) {
        for (uint32_t v = 0; v < h.plan.dim; ++v)
          x[v] = Cplx<R>{R{next_unit()}, R{next_unit()}};
        ws.set_point(static_cast<uint32_t>(j), x);
        ws.set_t(static_cast<uint32_t>(j), R{0.5 * (next_unit() + 1.0)});
      }
      using clock = std::chrono::steady_clock;
      auto ms = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
      };
      // untimed warm-up pass: fault in the workspace pages
      eval_system_batch(h.plan, ws, workers);
      const uint32_t grain = parallel_grain<R>();
      auto t0 = clock::now();
      parallel_for(
          static_cast<uint32_t>(n), workers,
          [&](uint32_t lo2, uint32_t hi2) { eval_coefficients(h.plan, ws, lo2, hi2); }, grain);
      auto t1 = clock::now();
      parallel_for(
          static_cast<uint32_t>(n), workers,
          [&](uint32_t lo2, uint32_t hi2) { eval_monomials(h.plan, ws, lo2, hi2); }, grain);
      auto t2 = clock::now();
      parallel_for(
          static_cast<uint32_t>(n), workers,
          [&](uint32_t lo2, uint32_t hi2) { sum_batch(h.plan, ws, lo2, hi2); }, grain);
      auto t3 = clock::now();

      uint64_t sum_hash = fnv1a(ws.sys.raw().data(), ws.sys.raw().size() * sizeof(double));
      sum_hash = fnv1a(ws.jac.raw().data(), ws.jac.raw().size() * sizeof(double), sum_hash);

      json row;
      row["type"] = "bench";
      row["evals"] = n;
      row["mon_ms"] = ms(t1, t2);
      row["sum_ms"] = ms(t2, t3);
      row["coeff_ms"] = ms(t0, t1);
      row["total_ms"] = ms(t0, t3);
      char cs[24];
      std::snprintf(cs, sizeof cs, "%016llx", static_cast<unsigned long long>(sum_hash));
      row["checksum"] = cs;
      *os.out << row.dump() << "\n";
      std::fprintf(stderr, "%6llu %10.3f %10.3f %10.3f %10.3f\n",
                   static_cast<unsigned long long>(n), ms(t1, t2), ms(t2, t3), ms(t0, t1),
                   ms(t0, t3));
    }
    (void)gamma;
    return 0;
  });
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--precision", opt.precision, "arithmetic level: d, dd or qd")
      ->check(CLI::IsMember({"d", "dd", "qd"}));
  cmd->add_option("--seed", opt.seed, "seed for the gamma constant and random data");
  cmd->add_option("--gamma", opt.gamma_str, "fixed gamma as re,im (unit modulus)");
  cmd->add_option("--tol-residual", opt.tol_residual, "corrector residual tolerance");
  cmd->add_option("--tol-update", opt.tol_update, "corrector update tolerance");
  cmd->add_option("--max-newton", opt.max_newton, "corrector iterations per step");
  cmd->add_option("--h-init", opt.h_init, "initial step size");
  cmd->add_option("--h-min", opt.h_min, "minimal step size before a path fails");
  cmd->add_option("--h-max", opt.h_max, "maximal step size");
  cmd->add_option("--batch", opt.batch, "lockstep batch width");
  cmd->add_option("--workers", opt.workers,
                  "worker threads (default: POLYPATH_WORKERS or hardware)");
  cmd->add_option("--path-range", opt.path_range, "half-open start index range a..b");
  cmd->add_option("--output", opt.output_file, "write records to this file instead of stdout");
  cmd->add_option("--log", opt.log_file, "write per-step progress records to this file");
  cmd->add_option("--simd", opt.simd, "kernel selection: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "polypath: solve polynomial systems by tracking homotopy paths in lockstep batches"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* solve = app.add_subcommand("solve", "track all total-degree start paths");
  solve->add_option("system", opt.system_file, "target system file")->required();
  add_common(solve, opt);

  CLI::App* track = app.add_subcommand("track", "track user-supplied start solutions");
  track->add_option("system", opt.system_file, "target system file")->required();
  track->add_option("start-system", opt.start_system_file, "start system file")->required();
  track->add_option("start-solutions", opt.start_solutions_file, "start solutions file")
      ->required();
  add_common(track, opt);

  CLI::App* bench = app.add_subcommand("bench-eval", "time the three evaluation stages");
  bench->add_option("system", opt.system_file, "system file")->required();
  bench->add_option("--sweep", opt.sweep, "batch sizes to time")->delimiter(',');
  add_common(bench, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // malformed invocation is a configuration error
  }

  try {
    if (app.got_subcommand(solve)) return cmd_solve(opt);
    if (app.got_subcommand(track)) return cmd_track(opt);
    return cmd_bench(opt);
  } catch (const ParseError& e) {
    std::cerr << "polypath: parse error at line " << e.line << ", column " << e.col << ": "
              << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "polypath: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "polypath: " << e.what() << "\n";
    return 1;
  }
}
