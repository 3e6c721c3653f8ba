#pragma once

#include "nnq/nnq.hpp"

#include "json.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace nnq::cli {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string subcommand;  // meb | pd | dksg | zhlg | deblur | bench | selftest

  // instance sources
  std::string generate = "unit-cube";  // cloud kind when generating
  long n = 100, d = 2;                 // cloud sizes (pd splits n across hulls)
  double shift = 4;                    // shifted-cubes slide
  std::string points;                  // CSV cloud (meb/dksg/zhlg)
  std::string p_path, q_path;          // PD cloud CSVs
  double mu = 16, rho = 2;             // zhlg weights

  // deblur
  std::string image;    // original PGM (with --self-blur)
  std::string blurred;  // observed PGM (without)
  std::string psf = "turbulence";
  double sigma = 1, radius = 1;
  bool self_blur = false;
  double sparsify_threshold = -1;  // <0 → off
  std::string output_image;        // deblurred PGM path ("" → not written)

  // driver overrides (0 / negative → defaults)
  long tau = 0, beta0 = 0, beta1 = 15;
  double tol_v = -1, tol_primal = -1;
  std::uint64_t seed = 0;

  bool oracle = false, trace = false, no_timings = false;
  std::string output;                    // result JSON ("" → stdout)
  std::string trace_output = "trace.csv";

  // bench
  std::string bench_problem = "meb";
  std::string n_list = "100", d_list = "2";
  long reps = 5;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

inline std::vector<long> parse_long_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stol(item));
  }
  require(!out.empty(), "empty list: " + text);
  return out;
}

inline double relative_gap(double got, double reference) {
  return std::abs(got - reference) / (1 + std::abs(reference));
}

template <typename Scalar>
json aggregate_json(const RatioAggregate<Scalar>& a) {
  return json{{"mean", a.mean}, {"median", a.median}, {"max", a.max}, {"count", a.count}};
}

}  // namespace detail

// Everything needed to solve and report on one instance.
struct Instance {
  Problem<double> problem;
  IndexList initial_active;
  json descriptor;  // family-specific identification for the result JSON

  std::optional<PointCloud<double>> cloud;       // meb / dksg / zhlg
  std::optional<PointCloud<double>> cloud_q;     // pd second hull
  std::optional<ImageGrid<double>> original;     // deblur ground truth
  std::optional<BlurOperator<double>> blur_op;   // deblur operator
  Index graph_vertices = 0;
};

template <typename Scalar>
DriverConfig<Scalar> driver_config(const RunConfig& cfg) {
  DriverConfig<Scalar> dc;
  if (cfg.tau > 0) dc.tau = cfg.tau;
  if (cfg.beta0 > 0) dc.beta0 = cfg.beta0;
  if (cfg.beta1 > 0) dc.beta1 = cfg.beta1;
  if (cfg.tol_v > 0) dc.tol.reduced_cost = Scalar(cfg.tol_v);
  if (cfg.tol_primal > 0) dc.tol.primal = Scalar(cfg.tol_primal);
  dc.record_trace = cfg.trace;
  dc.record_iterates = cfg.oracle || cfg.trace;
  return dc;
}

inline PointCloud<double> load_or_generate_cloud(const RunConfig& cfg) {
  if (!cfg.points.empty()) return PointCloud<double>{read_cloud_csv<double>(cfg.points), {}};
  const auto kind = parse_cloud_kind(cfg.generate);
  require(kind.has_value(), "unknown cloud kind: " + cfg.generate);
  return generate_cloud<double>(*kind, cfg.n, cfg.d, cfg.shift, cfg.seed);
}

inline Instance build_instance(const RunConfig& cfg) {
  Instance inst;
  if (cfg.subcommand == "meb") {
    inst.cloud = load_or_generate_cloud(cfg);
    inst.problem = build_meb(*inst.cloud);
    inst.initial_active = init_meb(*inst.cloud);
    inst.descriptor = {{"family", "meb"},
                       {"n", inst.cloud->size()},
                       {"d", inst.cloud->dim()}};
  } else if (cfg.subcommand == "pd") {
    PointCloud<double> p, q;
    if (!cfg.p_path.empty() || !cfg.q_path.empty()) {
      require(!cfg.p_path.empty() && !cfg.q_path.empty(), "pd: need both --p and --q");
      p.points = read_cloud_csv<double>(cfg.p_path);
      q.points = read_cloud_csv<double>(cfg.q_path);
    } else {
      PointCloud<double> both =
          generate_cloud<double>(CloudKind::shifted_cubes, cfg.n, cfg.d, cfg.shift, cfg.seed);
      require(both.second.has_value(), "pd: generator returned a single cloud");
      p.points = both.points;
      q.points = *both.second;
    }
    inst.problem = build_pd(p, q);
    inst.initial_active = init_pd(p.size(), q.size());
    inst.descriptor = {{"family", "pd"},
                       {"m", p.size()},
                       {"n", q.size()},
                       {"d", p.dim()}};
    inst.cloud = std::move(p);
    inst.cloud_q = std::move(q);
  } else if (cfg.subcommand == "dksg" || cfg.subcommand == "zhlg") {
    inst.cloud = load_or_generate_cloud(cfg);
    const Index n = inst.cloud->size();
    inst.graph_vertices = n;
    const Index nu = n * (n - 1) / 2;
    DriverConfig<double> rc = driver_config<double>(cfg).resolved(nu);
    if (cfg.subcommand == "dksg") {
      inst.problem = build_dksg(*inst.cloud);
      inst.initial_active = init_dksg(*inst.cloud, rc.beta0, cfg.seed);
      inst.descriptor = {{"family", "dksg"}, {"n", n}, {"d", inst.cloud->dim()}};
    } else {
      inst.problem = build_zhlg(*inst.cloud, cfg.mu, cfg.rho);
      inst.initial_active = init_zhlg(n, rc.beta0, cfg.seed);
      inst.descriptor = {{"family", "zhlg"},
                         {"n", n},
                         {"d", inst.cloud->dim()},
                         {"mu", cfg.mu},
                         {"rho", cfg.rho}};
    }
  } else if (cfg.subcommand == "deblur") {
    ImageGrid<double> observed;
    ImageGeometry geom;
    if (cfg.self_blur) {
      require(!cfg.image.empty(), "deblur --self-blur: need --image");
      ImageGrid<double> original = read_pgm<double>(cfg.image);
      if (cfg.sparsify_threshold >= 0) sparsify(original, cfg.sparsify_threshold);
      geom = {original.rows, original.cols};
      inst.blur_op = cfg.psf == "out-of-focus"
                         ? build_outoffocus_psf<double>(cfg.radius, geom)
                         : build_turbulence_psf<double>(cfg.sigma, geom);
      observed = blur(*inst.blur_op, original);
      inst.original = std::move(original);
    } else {
      require(!cfg.blurred.empty(), "deblur: need --blurred (or --image with --self-blur)");
      observed = read_pgm<double>(cfg.blurred);
      geom = {observed.rows, observed.cols};
      inst.blur_op = cfg.psf == "out-of-focus"
                         ? build_outoffocus_psf<double>(cfg.radius, geom)
                         : build_turbulence_psf<double>(cfg.sigma, geom);
    }
    inst.problem = build_nnls(*inst.blur_op, observed);
    DriverConfig<double> rc = driver_config<double>(cfg).resolved(inst.problem.dim);
    inst.initial_active = init_deblur(inst.problem, rc.tau, rc.beta0, cfg.seed);
    inst.descriptor = {{"family", "nnls"},
                       {"rows", geom.rows},
                       {"cols", geom.cols},
                       {"psf", cfg.psf},
                       {"psf_param", cfg.psf == "out-of-focus" ? cfg.radius : cfg.sigma}};
  } else {
    require(false, "unknown subcommand: " + cfg.subcommand);
  }
  inst.descriptor["nu"] = inst.problem.dim;
  inst.descriptor["seed"] = cfg.seed;
  return inst;
}

// Solve one built instance and assemble the result JSON. Timings are wall
// clock: Gram assembly is timed by the caller, solve and oracle here.
inline json run_instance(Instance& inst, const RunConfig& cfg, double build_seconds) {
  const DriverConfig<double> dc = driver_config<double>(cfg);
  const DriverConfig<double> rc = dc.resolved(inst.problem.dim);

  const auto t0 = detail::clock::now();
  SolveResult<double> result = solve(inst.problem, inst.initial_active, dc);
  const double solve_seconds = detail::seconds_since(t0);

  const IndexList support = support_of(result.primal, rc.tol.support);
  const KktReport<double> kkt = check_kkt(inst.problem, result.primal, result.certificate, rc.tol);

  json out;
  out["schema"] = 1;
  out["problem"] = inst.descriptor;
  out["status"] = to_string(result.status);
  out["objective"] = result.objective;
  if (inst.problem.objective_offset != 0) {
    out["objective_offset"] = inst.problem.objective_offset;
    out["objective_total"] = result.objective + inst.problem.objective_offset;
  }
  out["iterations"] = result.iterations;
  out["support_size"] = static_cast<Index>(support.size());
  out["nnz_pct"] = 100.0 * static_cast<double>(support.size()) / static_cast<double>(inst.problem.dim);
  out["parameters"] = {{"tau", rc.tau},
                       {"beta0", rc.beta0},
                       {"beta1", rc.beta1},
                       {"tol_v", rc.tol.reduced_cost},
                       {"tol_primal", rc.tol.primal}};
  out["kkt"] = {{"ok", kkt.ok()},
                {"min_reduced_cost", kkt.min_reduced_cost},
                {"min_primal", kkt.min_primal},
                {"ineq_violation", kkt.ineq_violation},
                {"eq_violation", kkt.eq_violation},
                {"comp_ineq", kkt.comp_ineq},
                {"comp_bound", kkt.comp_bound}};

  // family payloads
  if (inst.problem.label == Family::meb) {
    const VectorX<double> center = meb_center(*inst.cloud, result.primal);
    const double radius = meb_radius(result.objective);
    double max_dist = 0;
    for (Index i = 0; i < inst.cloud->size(); ++i)
      max_dist = std::max(max_dist, (inst.cloud->points.row(i).transpose() - center).norm());
    out["payload"] = {{"radius", radius},
                      {"max_point_distance", max_dist},
                      {"center", std::vector<double>(center.begin(), center.end())}};
  } else if (inst.problem.label == Family::pd) {
    out["payload"] = {{"distance", pd_distance(result.objective)}};
  } else if (inst.problem.label == Family::dksg || inst.problem.label == Family::zhlg) {
    EdgeIndex edges(inst.graph_vertices);
    json list = json::array();
    for (Index e : support) {
      const auto [i, j] = edges.decode(e);
      list.push_back({i + 1, j + 1, result.primal[e]});
    }
    out["payload"] = {{"edges", std::move(list)}};
  } else if (inst.problem.label == Family::nnls) {
    const ImageGeometry geom = inst.blur_op->geometry;
    ImageGrid<double> recovered = devectorize(result.primal, geom);
    json payload;
    if (inst.original) payload["relative_mse"] = relative_mse(recovered, *inst.original);
    if (!cfg.output_image.empty()) {
      write_pgm(cfg.output_image, recovered);
      payload["output_image"] = cfg.output_image;
    }
    out["payload"] = std::move(payload);
  }

  double oracle_seconds = -1;
  if (cfg.oracle) {
    if (inst.problem.dim <= kFullOracleDimCap) {
      const auto t1 = detail::clock::now();
      SolveResult<double> star = full_oracle(inst.problem);
      oracle_seconds = detail::seconds_since(t1);
      ConvergenceReport<double> conv =
          convergence_report(result.trace, star.primal, star.objective);
      out["oracle"] = {{"objective", star.objective},
                       {"status", to_string(star.status)},
                       {"relative_gap", detail::relative_gap(result.objective, star.objective)},
                       {"gap_ratio", detail::aggregate_json(conv.gap)},
                       {"move_ratio", detail::aggregate_json(conv.move)},
                       {"cosine_ratio", detail::aggregate_json(conv.cosine)},
                       {"lambda", conv.lambda},
                       {"lambda_fraction", conv.lambda_fraction}};
    } else {
      out["oracle"] = {{"skipped", "dimension exceeds dense-solve cap"}};
    }
  }

  if (cfg.trace) {
    std::ofstream tf(cfg.trace_output);
    require(tf.good(), "cannot open trace output: " + cfg.trace_output);
    write_trace_csv(tf, result.trace);
    out["trace_csv"] = cfg.trace_output;
  }

  if (!cfg.no_timings) {
    json t = {{"build_seconds", build_seconds}, {"solve_seconds", solve_seconds}};
    if (oracle_seconds >= 0) t["oracle_seconds"] = oracle_seconds;
    out["timings"] = std::move(t);
  }
  return out;
}

inline void emit(const json& payload, const std::string& path, std::ostream& fallback) {
  if (path.empty()) {
    fallback << payload.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  require(f.good(), "cannot open output: " + path);
  f << payload.dump(2) << '\n';
}

// ---- bench: seeded (n, d) grid, averaged over repetitions ----

inline int bench(const RunConfig& cfg, std::ostream& out_stream, std::ostream& err_stream) {
  try {
    const std::vector<long> ns = detail::parse_long_list(cfg.n_list);
    const std::vector<long> ds = detail::parse_long_list(cfg.d_list);
    require(cfg.reps >= 1, "bench: need --reps >= 1");

    std::ofstream file;
    std::ostream* sink = &out_stream;
    if (!cfg.output.empty()) {
      file.open(cfg.output);
      require(file.good(), "cannot open output: " + cfg.output);
      sink = &file;
    }
    *sink << "problem,n,d,seed,solvennq_time,oracle_time,iterations,nnz,nnz_pct,objective,rel_gap\n";
    sink->precision(12);

    for (long n : ns)
      for (long d : ds) {
        double sum_time = 0, sum_oracle = 0, sum_iter = 0, sum_nnz = 0, sum_obj = 0, sum_gap = 0;
        int oracle_runs = 0;
        for (long rep = 0; rep < cfg.reps; ++rep) {
          RunConfig one = cfg;
          one.subcommand = cfg.bench_problem;
          one.n = n;
          one.d = d;
          one.seed = cfg.seed + static_cast<std::uint64_t>(rep);
          one.trace = false;
          if (one.subcommand == "deblur") {
            // synthetic side-n image, self-blurred
            one.self_blur = true;
          }
          Instance inst;
          if (one.subcommand == "deblur") {
            ImageGrid<double> original = synthetic_sparse_image<double>(n, n, 0.1, one.seed);
            ImageGeometry geom{original.rows, original.cols};
            inst.blur_op = one.psf == "out-of-focus"
                               ? build_outoffocus_psf<double>(one.radius, geom)
                               : build_turbulence_psf<double>(one.sigma, geom);
            ImageGrid<double> observed = blur(*inst.blur_op, original);
            inst.problem = build_nnls(*inst.blur_op, observed);
            DriverConfig<double> rc = driver_config<double>(one).resolved(inst.problem.dim);
            inst.initial_active = init_deblur(inst.problem, rc.tau, rc.beta0, one.seed);
            inst.original = std::move(original);
          } else {
            inst = build_instance(one);
          }

          const DriverConfig<double> dc = driver_config<double>(one);
          const auto t0 = detail::clock::now();
          SolveResult<double> result = solve(inst.problem, inst.initial_active, dc);
          sum_time += detail::seconds_since(t0);
          sum_iter += result.iterations;
          const DriverConfig<double> rc = dc.resolved(inst.problem.dim);
          sum_nnz += static_cast<double>(support_of(result.primal, rc.tol.support).size());
          sum_obj += result.objective;
          if (cfg.oracle && inst.problem.dim <= kFullOracleDimCap) {
            const auto t1 = detail::clock::now();
            SolveResult<double> star = full_oracle(inst.problem);
            sum_oracle += detail::seconds_since(t1);
            sum_gap += detail::relative_gap(result.objective, star.objective);
            ++oracle_runs;
          }
        }
        const double r = static_cast<double>(cfg.reps);
        const double nu = [&] {
          RunConfig probe = cfg;
          probe.subcommand = cfg.bench_problem;
          if (probe.subcommand == "deblur") return static_cast<double>(n) * n;
          if (probe.subcommand == "dksg" || probe.subcommand == "zhlg")
            return static_cast<double>(n) * (n - 1) / 2;
          if (probe.subcommand == "pd") return static_cast<double>(n);
          return static_cast<double>(n);  // meb
        }();
        *sink << cfg.bench_problem << ',' << n << ',' << d << ',' << cfg.seed << ','
              << sum_time / r << ',';
        if (oracle_runs > 0) *sink << sum_oracle / oracle_runs;
        *sink << ',' << sum_iter / r << ',' << sum_nnz / r << ','
              << 100.0 * (sum_nnz / r) / nu << ',' << sum_obj / r << ',';
        if (oracle_runs > 0) *sink << sum_gap / oracle_runs;
        *sink << '\n';
      }
    return 0;
  } catch (const std::exception& e) {
    json err = {{"schema", 1}, {"error", e.what()}};
    err_stream << err.dump(2) << '\n';
    return 1;
  }
}

// ---- selftest: small deterministic battery, one line per check ----

namespace detail {

struct SelftestSink {
  std::ostream& out;
  int failures = 0;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!ok && !detail.empty()) out << " (" << detail << ")";
    out << '\n';
    if (!ok) ++failures;
  }
};

}  // namespace detail

inline int selftest(std::ostream& out) {
  detail::SelftestSink sink{out};
  try {
    {
      // MEB of {0, 1} on the line: f* = −1/4, radius 1/2
      PointCloud<double> cloud;
      cloud.points = MatrixX<double>(2, 1);
      cloud.points << 0, 1;
      Problem<double> p = build_meb(cloud);
      SolveResult<double> r = solve(p, init_meb(cloud), DriverConfig<double>{});
      sink.check("meb-two-points", std::abs(r.objective + 0.25) < 1e-9 &&
                                       std::abs(meb_radius(r.objective) - 0.5) < 1e-9);
    }
    {
      // unit equilateral triangle: circumradius 1/√3, f* = −1/3
      PointCloud<double> cloud;
      cloud.points = MatrixX<double>(3, 2);
      cloud.points << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2;
      Problem<double> p = build_meb(cloud);
      SolveResult<double> r = solve(p, init_meb(cloud), DriverConfig<double>{});
      sink.check("meb-equilateral", std::abs(r.objective + 1.0 / 3) < 1e-8);
    }
    {
      // singleton hulls (0,0) and (3,4): squared distance 25
      PointCloud<double> p, q;
      p.points = MatrixX<double>::Zero(1, 2);
      q.points = MatrixX<double>(1, 2);
      q.points << 3, 4;
      Problem<double> prob = build_pd(p, q);
      SolveResult<double> r = solve(prob, init_pd(1, 1), DriverConfig<double>{});
      sink.check("pd-singletons", std::abs(r.objective - 25) < 1e-9 &&
                                      std::abs(pd_distance(r.objective) - 5) < 1e-9);
    }
    {
      // seeded DKSG instance agrees with the one-shot dense solve
      PointCloud<double> cloud = generate_cloud<double>(CloudKind::unit_cube, 8, 2, 0, 11);
      Problem<double> p = build_dksg(cloud);
      DriverConfig<double> dc;
      const DriverConfig<double> rc = dc.resolved(p.dim);
      SolveResult<double> r = solve(p, init_dksg(cloud, rc.beta0, 11), dc);
      SolveResult<double> star = full_oracle(p);
      const bool ok = r.status == SolveStatus::converged ||
                      r.status == SolveStatus::beta1_fallback_converged;
      sink.check("dksg-oracle-gap", ok && detail::relative_gap(r.objective, star.objective) < 1e-6);
      const KktReport<double> kkt = check_kkt(p, r.primal, r.certificate, rc.tol);
      sink.check("dksg-kkt", kkt.ok());

      SolveResult<double> again = solve(p, init_dksg(cloud, rc.beta0, 11), dc);
      sink.check("determinism", again.objective == r.objective &&
                                    again.iterations == r.iterations);
    }
    {
      // tiny deblur round trip
      ImageGrid<double> original = synthetic_sparse_image<double>(8, 8, 0.12, 5);
      ImageGeometry geom{8, 8};
      BlurOperator<double> op = build_turbulence_psf<double>(1.0, geom);
      ImageGrid<double> observed = blur(op, original);
      Problem<double> p = build_nnls(op, observed);
      DriverConfig<double> dc;
      const DriverConfig<double> rc = dc.resolved(p.dim);
      SolveResult<double> r = solve(p, init_deblur(p, rc.tau, rc.beta0, 5), dc);
      ImageGrid<double> recovered = devectorize(r.primal, geom);
      sink.check("deblur-roundtrip", relative_mse(recovered, original) < 1e-3);

      const VectorX<double> row_sums = op.matrix * VectorX<double>::Ones(op.matrix.cols());
      sink.check("psf-row-stochastic",
                 (row_sums.array() - 1).abs().maxCoeff() < 1e-12);
    }
  } catch (const std::exception& e) {
    sink.check("selftest-exception", false, e.what());
  }
  out << (sink.failures == 0 ? "selftest: all checks passed\n"
                             : "selftest: " + std::to_string(sink.failures) + " check(s) failed\n");
  return sink.failures == 0 ? 0 : 1;
}

// Top-level dispatch used by the binary; never throws.
inline int run(const RunConfig& cfg, std::ostream& out_stream, std::ostream& err_stream) {
  if (cfg.subcommand == "selftest") return selftest(out_stream);
  if (cfg.subcommand == "bench") return bench(cfg, out_stream, err_stream);
  try {
    const auto t0 = detail::clock::now();
    Instance inst = build_instance(cfg);
    const double build_seconds = detail::seconds_since(t0);
    json result = run_instance(inst, cfg, build_seconds);
    emit(result, cfg.output, out_stream);
    return 0;
  } catch (const std::exception& e) {
    json err = {{"schema", 1}, {"error", e.what()}};
    err_stream << err.dump(2) << '\n';
    return 1;
  }
}

}  // namespace nnq::cli
