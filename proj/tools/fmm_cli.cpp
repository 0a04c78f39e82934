#include "fmm/fmm.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace fmm;

namespace {

struct ScalingFlags {
  std::vector<std::string> modes{"none"};
  double tau = 1.0;
  std::size_t max_steps = 100;
  bool pow2 = false;
  std::string first_step = "O";

  ScalingConfig build(const std::string& mode) const {
    ScalingConfig c = parse_scaling(mode);
    if (!c.fixed_steps) c.max_steps = max_steps;
    c.tau = tau;
    c.pow2_round = pow2;
    if (first_step == "O" || first_step == "o") c.first_step = StepKind::O;
    else if (first_step == "I" || first_step == "i") c.first_step = StepKind::I;
    else throw std::invalid_argument("--first-step must be O or I");
    return c;
  }
  std::vector<ScalingConfig> all() const {
    std::vector<ScalingConfig> out;
    for (const auto& m : modes) out.push_back(build(m));
    return out;
  }
};

void add_scaling_flags(CLI::App* cmd, ScalingFlags& f, bool multi) {
  if (multi)
    cmd->add_option("--scaling", f.modes,
                    "Scaling modes: none, outside, inside, outside-inside, inside-outside, repeated, repeated(k)");
  else
    cmd->add_option("--scaling", f.modes.front(), "Scaling mode")->capture_default_str();
  cmd->add_option("--tau", f.tau, "Stop-test tolerance for repeated scaling")->capture_default_str();
  cmd->add_option("--max-steps", f.max_steps, "Step cap for repeated scaling")->capture_default_str();
  cmd->add_flag("--pow2", f.pow2, "Round scaling factors to powers of two");
  cmd->add_option("--first-step", f.first_step, "First step of repeated scaling (O or I)")->capture_default_str();
}

struct ModeFlags {
  bool strict = false, fast = false, check_finite = false;
  EngineOptions options() const {
    if (strict && fast) throw std::invalid_argument("--strict and --fast are exclusive");
    EngineOptions o;
    o.mode = fast ? SummationMode::fast : SummationMode::strict;
    o.check_finite = check_finite;
    return o;
  }
};

void add_mode_flags(CLI::App* cmd, ModeFlags& f) {
  cmd->add_flag("--strict", f.strict, "Ascending-order summation (default)");
  cmd->add_flag("--fast", f.fast, "Blocked summation in the leaf kernel");
  cmd->add_flag("--check-finite", f.check_finite, "Reject NaN/Inf inputs");
}

// CSV sink: a file when --out is given, stdout otherwise. Each row is flushed.
class CsvSink {
public:
  explicit CsvSink(const std::string& path) {
    if (!path.empty()) {
      const auto parent = std::filesystem::path(path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open " + path);
    }
  }
  void line(const std::string& s) {
    std::ostream& o = file_ ? *file_ : std::cout;
    o << s << '\n';
    o.flush();
  }

private:
  std::unique_ptr<std::ofstream> file_;
};

RecursionPlan resolve_plan(AlgorithmRegistry& reg, const std::string& plan, const std::string& algo,
                           std::size_t levels) {
  const Resolver r = std::ref(reg);
  if (!plan.empty()) return parse_plan(plan, r);
  return Stationary{r(algo), levels};
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_g17(v[i]);
  return s;
}

int cmd_validate(const std::string& target) {
  AlgorithmTriple t;
  try {
    if (target.size() > 4 && target.compare(target.size() - 4, 4, ".fmm") == 0) t = load_algorithm_file(target);
    else t = catalog_lookup(target)->triple();
  } catch (const ParseError& e) {
    std::cerr << target << ": " << e.what() << "\n";
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << target << ": " << e.what() << "\n";
    return 2;
  } catch (const UnknownAlgorithm& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const ValidationResult res = validate(t);
  if (res.ok()) {
    std::cout << t.name << ": valid <" << t.m0 << "," << t.k0 << "," << t.n0 << "> rank " << t.u.cols() << "\n";
    return 0;
  }
  std::cout << t.name << ": " << res.violations.size() << " violated triples (i j k: got expected)\n";
  for (const auto& v : res.violations)
    std::cout << "  " << v.i << " " << v.j << " " << v.k << ": " << to_string(v.sum) << " " << v.expected << "\n";
  return 1;
}

int cmd_analyze(AlgorithmRegistry& reg, const std::string& target, const std::vector<std::size_t>& levels, bool csv,
                bool dnc, const std::string& plan_text, std::size_t plan_k) {
  if (!plan_text.empty()) {
    const RecursionPlan plan = parse_plan(plan_text, std::ref(reg));
    const auto rep = analyze_plan(plan, plan_k, dnc);
    if (csv) {
      std::cout << "plan,K,delta_max,xi_max,leaf_k,bound_coefficient\n";
      std::cout << '"' << print_plan(plan) << "\"," << plan_k << "," << rep.delta_max << "," << to_string(rep.xi_max)
                << "," << rep.leaf_k << "," << to_string(rep.bound_coefficient) << "\n";
    } else {
      std::cout << "plan " << print_plan(plan) << "\nK " << plan_k << "\ndelta_max " << rep.delta_max << "\nxi_max "
                << to_string(rep.xi_max) << "\nleaf_k " << rep.leaf_k << "\nbound_coefficient "
                << to_string(rep.bound_coefficient) << "\n";
    }
    return 0;
  }
  const AlgorithmPtr alg = reg(target);
  const StabilityReport rep = analyze(*alg, dnc);
  if (csv) {
    std::cout << csv_header() << ",L,flops_ratio,stab_ratio\n";
    for (std::size_t L : levels) {
      const auto [f, s] = tradeoff_point(rep, L);
      std::cout << to_csv_row(rep) << "," << L << "," << format_decimal(f) << "," << format_decimal(s) << "\n";
    }
  } else {
    std::cout << to_key_value(rep);
    for (std::size_t L : levels) {
      const auto [f, s] = tradeoff_point(rep, L);
      std::cout << "tradeoff L=" << L << " " << to_string(f) << " " << to_string(s) << "\n";
    }
  }
  return 0;
}

int cmd_scale(const Matrix& a, const Matrix& b, const ScalingConfig& cfg) {
  ScalingTrace tr;
  const ScalingState st = apply_scaling(a, b, cfg, &tr);
  std::cout << "mode " << describe(cfg) << "\n"
            << "initial_norms " << format_g17(tr.initial_norm_a) << " " << format_g17(tr.initial_norm_b) << "\n";
  for (std::size_t t = 0; t < tr.steps.size(); ++t) {
    const auto& s = tr.steps[t];
    std::cout << "step " << t + 1 << " " << (s.kind == StepKind::O ? "O" : "I");
    if (s.kind == StepKind::O) std::cout << " r [" << join_doubles(s.r) << "] s [" << join_doubles(s.s) << "]";
    else std::cout << " p [" << join_doubles(s.r) << "]";
    std::cout << " norms " << format_g17(s.norm_a) << " " << format_g17(s.norm_b) << " verdict "
              << (s.verdict == StopVerdict::untested ? "untested"
                  : s.verdict == StopVerdict::stop   ? "stop"
                                                     : "continue")
              << "\n";
  }
  std::cout << "steps_taken " << st.steps_taken << "\n";
  if (cfg.mode == ScalingMode::repeated && !cfg.fixed_steps) std::cout << "cap_reached " << tr.cap_reached << "\n";
  std::cout << "d_a [" << join_doubles(st.d_a) << "]\nd_b [" << join_doubles(st.d_b) << "]\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast matrix multiplication: algorithms, stability analysis, scaling and experiments"};
  app.require_subcommand(1);
  AlgorithmRegistry reg;

  std::string target;
  auto* validate_cmd = app.add_subcommand("validate", "Check an algorithm file (or catalog name) exactly");
  validate_cmd->add_option("algorithm", target, "Path to a .fmm file or catalog name")->required();

  std::vector<std::size_t> an_levels{1};
  bool an_csv = false, an_dnc = false;
  std::string an_plan;
  std::size_t an_k = 0;
  auto* analyze_cmd = app.add_subcommand("analyze", "Stability quantities of an algorithm or plan");
  analyze_cmd->add_option("algorithm", target, "Catalog name, classical:MxKxN or a .fmm path");
  analyze_cmd->add_option("--algo", target, "Same as the positional argument");
  analyze_cmd->add_option("--levels", an_levels, "Levels for the tradeoff point");
  analyze_cmd->add_flag("--csv", an_csv, "CSV output");
  analyze_cmd->add_flag("--dnc", an_dnc, "Charge divide-and-conquer summation counts");
  analyze_cmd->add_option("--plan", an_plan, "Analyze a plan descriptor instead");
  analyze_cmd->add_option("--k", an_k, "Inner dimension for plan analysis");

  std::string gen_dist = "u01", out;
  std::size_t m = 512, k = 512, n = 512;
  std::uint64_t seed = 1;
  bool text = false;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random pair A, B");
  gen_cmd->add_option("--dist", gen_dist, "1|u01, u11, 2, 3")->capture_default_str();
  gen_cmd->add_option("--m", m)->capture_default_str();
  gen_cmd->add_option("--k", k)->capture_default_str();
  gen_cmd->add_option("--n", n)->capture_default_str();
  gen_cmd->add_option("--seed", seed)->capture_default_str();
  gen_cmd->add_option("--out", out, "Output prefix; writes <prefix>A.bin and <prefix>B.bin")->required();
  gen_cmd->add_flag("--text", text, "Write the text format (.txt) instead");

  std::string path_a, path_b, plan_text, algo = "strassen";
  std::size_t levels = 1;
  bool check = false;
  ScalingFlags mul_scaling;
  ModeFlags mul_mode;
  auto* mul_cmd = app.add_subcommand("multiply", "Multiply two matrix files");
  mul_cmd->add_option("a", path_a, "Left factor")->required();
  mul_cmd->add_option("b", path_b, "Right factor")->required();
  mul_cmd->add_option("--plan", plan_text, "Plan descriptor, e.g. strassen:L=2");
  mul_cmd->add_option("--algo", algo, "Algorithm when no plan is given")->capture_default_str();
  mul_cmd->add_option("--levels", levels, "Levels when no plan is given")->capture_default_str();
  mul_cmd->add_option("--out", out, "Output path");
  mul_cmd->add_flag("--text", text, "Write the text format");
  mul_cmd->add_flag("--check", check, "Compare against the extended-precision reference");
  add_scaling_flags(mul_cmd, mul_scaling, false);
  add_mode_flags(mul_cmd, mul_mode);

  ExperimentSpec spec;
  std::string bench_dist = "u01";
  std::vector<std::size_t> bench_levels{1, 2, 3, 4};
  ScalingFlags bench_scaling;
  ModeFlags bench_mode;
  std::string bench_out;
  auto add_bench = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--algo", spec.algo)->capture_default_str();
    cmd->add_option("--m", spec.m)->capture_default_str();
    cmd->add_option("--k", spec.k)->capture_default_str();
    cmd->add_option("--n", spec.n)->capture_default_str();
    cmd->add_option("--dist", bench_dist)->capture_default_str();
    cmd->add_option("--seed", spec.seed)->capture_default_str();
    cmd->add_option("--levels", bench_levels)->capture_default_str();
    cmd->add_option("--reps", spec.reps)->capture_default_str();
    cmd->add_option("--out", bench_out, "CSV path (stdout if omitted)");
    add_scaling_flags(cmd, bench_scaling, true);
    add_mode_flags(cmd, bench_mode);
    return cmd;
  };
  auto* berr_cmd = add_bench("bench-error", "Error of scaled fast products against the reference, as CSV");
  auto* bperf_cmd = add_bench("bench-perf", "Median timings and effective GFLOPS, as CSV");

  ScalingFlags sc_flags;
  std::string sc_dist = "u01";
  auto* scale_cmd = app.add_subcommand("scale", "Dry run of a scaling mode, printing its trace");
  scale_cmd->add_option("a", path_a, "Left factor (random pair if omitted)");
  scale_cmd->add_option("b", path_b, "Right factor");
  scale_cmd->add_option("--dist", sc_dist)->capture_default_str();
  scale_cmd->add_option("--m", m)->capture_default_str();
  scale_cmd->add_option("--k", k)->capture_default_str();
  scale_cmd->add_option("--n", n)->capture_default_str();
  scale_cmd->add_option("--seed", seed)->capture_default_str();
  add_scaling_flags(scale_cmd, sc_flags, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return cmd_validate(target);

    if (analyze_cmd->parsed()) {
      if (an_plan.empty() && target.empty()) throw std::invalid_argument("analyze needs an algorithm or --plan");
      if (!an_plan.empty() && an_k == 0) throw std::invalid_argument("--plan needs --k");
      return cmd_analyze(reg, target, an_levels, an_csv, an_dnc, an_plan, an_k);
    }

    if (gen_cmd->parsed()) {
      const auto [a, b] = generate_pair(parse_distribution(gen_dist), m, k, n, seed);
      const std::string ext = text ? ".txt" : ".bin";
      save_matrix(out + "A" + ext, a, text);
      save_matrix(out + "B" + ext, b, text);
      std::cout << out << "A" << ext << " " << out << "B" << ext << "\n";
      return 0;
    }

    if (mul_cmd->parsed()) {
      const Matrix a = load_matrix(path_a), b = load_matrix(path_b);
      const RecursionPlan plan = resolve_plan(reg, plan_text, algo, levels);
      const ScalingConfig cfg = mul_scaling.build(mul_scaling.modes.front());
      std::size_t steps = 0;
      const Matrix c = scaled_multiply(a, b, plan, cfg, mul_mode.options(), nullptr, &steps);
      if (!out.empty()) save_matrix(out, c, text);
      else write_text(std::cout, c);
      if (check) {
        const ReferenceMatrix ref = multiply_reference(a, b);
        std::optional<double> bound;
        if (mul_mode.options().mode == SummationMode::strict) {
          const auto padded = pad_dims(a.rows(), a.cols(), b.cols(), plan);
          bound = plan_bound(plan, padded[1], max_norm(a), max_norm(b));
        }
        const ErrorReport er = compare(c, ref, bound);
        std::cerr << "plan " << print_plan(plan) << "\nscaling " << describe(cfg) << "\nsteps_taken " << steps
                  << "\nmax_abs_err " << format_g17(er.max_abs_err) << "\nmax_rel_err "
                  << format_g17(er.max_rel_err) << "\nzero_reference_entries " << er.zero_reference_entries << "\n";
        if (er.bound)
          std::cerr << "bound " << format_g17(*er.bound) << "\nwithin_bound "
                    << (er.max_abs_err <= *er.bound ? "yes" : "no") << "\n";
      }
      return 0;
    }

    if (berr_cmd->parsed() || bperf_cmd->parsed()) {
      spec.dist = parse_distribution(bench_dist);
      spec.levels = bench_levels;
      spec.scalings = bench_scaling.all();
      spec.engine = bench_mode.options();
      if (spec.m == 0 || spec.k == 0 || spec.n == 0) throw std::invalid_argument("dimensions must be positive");
      if (spec.levels.empty()) throw std::invalid_argument("--levels must not be empty");
      CsvSink sink(bench_out);
      if (berr_cmd->parsed()) {
        sink.line(error_csv_header());
        bench_error(spec, std::ref(reg), [&](const ErrorRow& r) { sink.line(to_csv(r)); });
      } else {
        sink.line(perf_csv_header());
        bench_perf(spec, std::ref(reg), [&](const PerfRow& r) { sink.line(to_csv(r)); });
      }
      return 0;
    }

    if (scale_cmd->parsed()) {
      Matrix a, b;
      if (!path_a.empty()) {
        if (path_b.empty()) throw std::invalid_argument("scale needs both matrix paths");
        a = load_matrix(path_a);
        b = load_matrix(path_b);
      } else {
        std::tie(a, b) = generate_pair(parse_distribution(sc_dist), m, k, n, seed);
      }
      return cmd_scale(a, b, sc_flags.build(sc_flags.modes.front()));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
