// nnq: solve non-negative quadratic programs with an iterative active-set
// driver over an interior-point subsolver. Subcommands cover the five built-in
// problem families plus bench and selftest.

#include "nnq/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

void add_driver_flags(CLI::App* sub, nnq::cli::RunConfig& cfg) {
  sub->add_option("--tau", cfg.tau, "rebuild width (0: 4 ln^2 nu)");
  sub->add_option("--beta0", cfg.beta0, "shrink threshold on |E_r| (0: 3 tau)");
  sub->add_option("--beta1", cfg.beta1, "iteration after which rebuilds stop");
  sub->add_option("--tol-v", cfg.tol_v, "reduced-cost tolerance base");
  sub->add_option("--tol-primal", cfg.tol_primal, "primal feasibility tolerance base");
  sub->add_option("--seed", cfg.seed, "RNG seed for generation and initialization");
  sub->add_flag("--oracle", cfg.oracle, "also solve in one dense subsolve and compare");
  sub->add_flag("--trace", cfg.trace, "write a per-iteration CSV");
  sub->add_option("--trace-output", cfg.trace_output, "trace CSV path");
  sub->add_option("--output", cfg.output, "result JSON path (default stdout)");
  sub->add_flag("--no-timings", cfg.no_timings, "omit timings from the result JSON");
}

void add_cloud_flags(CLI::App* sub, nnq::cli::RunConfig& cfg) {
  sub->add_option("--generate", cfg.generate, "unit-cube | near-sphere | shifted-cubes");
  sub->add_option("--n", cfg.n, "number of points");
  sub->add_option("--d", cfg.d, "dimension");
  sub->add_option("--s", cfg.shift, "shifted-cubes slide distance");
  sub->add_option("--points", cfg.points, "point cloud CSV (overrides --generate)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-negative quadratic programming via iterative active sets"};
  app.require_subcommand(1);
  nnq::cli::RunConfig cfg;

  CLI::App* meb = app.add_subcommand("meb", "minimum enclosing ball of a point cloud");
  add_cloud_flags(meb, cfg);
  add_driver_flags(meb, cfg);

  CLI::App* pd = app.add_subcommand("pd", "distance between two convex hulls");
  pd->add_option("--p", cfg.p_path, "first hull point CSV");
  pd->add_option("--q", cfg.q_path, "second hull point CSV");
  pd->add_option("--n", cfg.n, "generated total point count (split across hulls)");
  pd->add_option("--d", cfg.d, "dimension");
  pd->add_option("--s", cfg.shift, "cube separation along axis 0");
  add_driver_flags(pd, cfg);

  CLI::App* dksg = app.add_subcommand("dksg", "fit a complete-graph edge weighting (dot-product model)");
  add_cloud_flags(dksg, cfg);
  add_driver_flags(dksg, cfg);

  CLI::App* zhlg = app.add_subcommand("zhlg", "fit a complete-graph edge weighting (degree-regularized model)");
  add_cloud_flags(zhlg, cfg);
  zhlg->add_option("--mu", cfg.mu, "degree deviation weight");
  zhlg->add_option("--rho", cfg.rho, "ridge weight");
  add_driver_flags(zhlg, cfg);

  CLI::App* deblur = app.add_subcommand("deblur", "non-negative least-squares image deblurring");
  deblur->add_option("--image", cfg.image, "original PGM (used with --self-blur)");
  deblur->add_option("--blurred", cfg.blurred, "observed blurred PGM");
  deblur->add_flag("--self-blur", cfg.self_blur, "blur --image first, then recover it");
  deblur->add_option("--psf", cfg.psf, "turbulence | out-of-focus");
  deblur->add_option("--sigma", cfg.sigma, "turbulence Gaussian width (>= 1)");
  deblur->add_option("--radius", cfg.radius, "out-of-focus disc radius (>= 1)");
  deblur->add_option("--sparsify-threshold", cfg.sparsify_threshold,
                     "zero out pixels at or below this intensity first");
  deblur->add_option("--output-image", cfg.output_image, "deblurred PGM path");
  add_driver_flags(deblur, cfg);

  CLI::App* bench = app.add_subcommand("bench", "seeded grid of instances, averaged CSV rows");
  bench->add_option("--problem", cfg.bench_problem, "meb | pd | dksg | zhlg | deblur");
  bench->add_option("--n-list", cfg.n_list, "comma-separated point counts");
  bench->add_option("--d-list", cfg.d_list, "comma-separated dimensions");
  bench->add_option("--reps", cfg.reps, "repetitions per cell");
  bench->add_option("--s", cfg.shift, "cube separation (pd)");
  add_driver_flags(bench, cfg);

  app.add_subcommand("selftest", "run the built-in smoke battery");

  CLI11_PARSE(app, argc, argv);

  cfg.subcommand = app.get_subcommands().front()->get_name();
  return nnq::cli::run(cfg, std::cout, std::cerr);
}
