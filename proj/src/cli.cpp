#include "xtomo/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "xtomo/datamodel.hpp"
#include "xtomo/error.hpp"
#include "xtomo/memory.hpp"
#include "xtomo/operator.hpp"
#include "xtomo/parallel.hpp"
#include "xtomo/phantom.hpp"
#include "xtomo/recon.hpp"

namespace xtomo::cli {

namespace {

struct Options {
  std::string config;
  std::string model = "siddon";
  std::string in;
  std::string out;
  std::string mask;
  std::string init;
  std::string trace;
  std::string analytic;
  int iters = 500;
  double tol = 1e-6;
  double step = 0.0;
  bool nonneg = false;
  std::uint64_t seed = 1;
  int threads = 0;
  int trials = 20;
  int repeat = 3;
  int supersample = 4;
};

ProjectorPair make_pair(const Options& o, const CtConfig& cfg) {
  return ProjectorPair(parse_model(o.model), cfg.geometry, cfg.volume);
}

LsConfig ls_config(const Options& o) {
  LsConfig c;
  c.maxIters = o.iters;
  c.tol = o.tol;
  if (o.step > 0.0) c.step = o.step;
  c.nonneg = o.nonneg;
  c.validate();
  return c;
}

void require_geometry(const ProjectionSet& y, const Geometry& g, const std::string& path) {
  if (!(y.geometry() == g)) throw Error(ErrorCode::SpecMismatch, "'" + path + "' geometry differs from --config");
}

void require_volume(const Volume& x, const VolumeSpec& v, const std::string& path) {
  if (!(x.spec() == v)) throw Error(ErrorCode::SpecMismatch, "'" + path + "' volume spec differs from --config");
}

void write_trace(const std::string& path, const std::vector<double>& trace) {
  std::ostringstream text;
  text.precision(17);
  text << "iteration,cost\n";
  for (std::size_t i = 0; i < trace.size(); ++i) text << i << ',' << trace[i] << '\n';
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << text.str();
  }
  std::filesystem::rename(tmp, path);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run_bench(const Options& o, const CtConfig& cfg, std::ostream& out) {
  const ProjectorPair P = make_pair(o, cfg);
  const std::size_t volumeBytes = cfg.volume.size() * sizeof(float);
  const std::size_t projectionBytes = cfg.geometry.size() * sizeof(float);

  std::vector<double> forwardTimes, backTimes;
  std::size_t forwardPeak = 0, backPeak = 0;
  for (int r = 0; r < o.repeat; ++r) {
    {
      const std::size_t baseline = memory::current_bytes();
      memory::reset_peak();
      Volume x(cfg.volume);
      std::mt19937_64 rng(o.seed);
      std::uniform_real_distribution<float> uniform(0.0f, 0.02f);
      for (auto& v : x.values()) v = uniform(rng);
      const auto t0 = std::chrono::steady_clock::now();
      const ProjectionSet y = P.forward(x);
      forwardTimes.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      forwardPeak = std::max(forwardPeak, memory::peak_bytes() - baseline);
    }
    {
      const std::size_t baseline = memory::current_bytes();
      memory::reset_peak();
      ProjectionSet y(cfg.geometry);
      std::mt19937_64 rng(o.seed);
      std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
      for (auto& v : y.values()) v = uniform(rng);
      const auto t0 = std::chrono::steady_clock::now();
      const Volume x = P.adjoint(y);
      backTimes.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      backPeak = std::max(backPeak, memory::peak_bytes() - baseline);
    }
  }
  const double budget = double(volumeBytes + projectionBytes);
  out << "model: " << o.model << '\n'
      << "threads: " << max_threads() << '\n'
      << "repeat: " << o.repeat << '\n'
      << "forward_median_s: " << median(forwardTimes) << '\n'
      << "backproject_median_s: " << median(backTimes) << '\n'
      << "volume_bytes: " << volumeBytes << '\n'
      << "projection_bytes: " << projectionBytes << '\n'
      << "forward_peak_bytes: " << forwardPeak << '\n'
      << "backproject_peak_bytes: " << backPeak << '\n'
      << "peak_ratio: " << double(std::max(forwardPeak, backPeak)) / budget << '\n';
  return 0;
}

int dispatch(const std::string& verb, const Options& o, std::ostream& out) {
  const CtConfig cfg = load_config(o.config);

  if (verb == "adjoint-check") {
    const AdjointReport r = adjoint_check(make_pair(o, cfg), o.trials, o.seed);
    out << "maxRelErr: " << r.maxRelErr << '\n' << "trials: " << o.trials << '\n'
        << "seed: " << r.seed << '\n' << "generator: " << r.generator << '\n';
    return r.maxRelErr < 1e-5 ? 0 : 1;
  }
  if (verb == "bench") return run_bench(o, cfg, out);

  if (verb == "phantom") {
    const EllipsoidPhantom ph = o.in.empty() ? desk_phantom() : EllipsoidPhantom::load(o.in);
    const Volume x = rasterize(ph, cfg.volume, o.supersample);
    if (!o.analytic.empty()) {
      const ProjectionSet y = analytic_project(ph, cfg.geometry);
      write_array(y, o.analytic);
      out << o.analytic << '\n';
    }
    write_array(x, o.out);
    out << o.out << '\n';
    return 0;
  }

  const ProjectorPair P = make_pair(o, cfg);
  if (verb == "project") {
    const Volume x = read_volume(o.in);
    require_volume(x, cfg.volume, o.in);
    write_array(P.forward(x), o.out);
  } else if (verb == "backproject") {
    const ProjectionSet y = read_projections(o.in);
    require_geometry(y, cfg.geometry, o.in);
    write_array(P.adjoint(y), o.out);
  } else if (verb == "fbp") {
    const ProjectionSet y = read_projections(o.in);
    require_geometry(y, cfg.geometry, o.in);
    write_array(fbp_parallel(y, cfg.volume, P), o.out);
  } else if (verb == "recon-ls") {
    const ProjectionSet y = read_projections(o.in);
    require_geometry(y, cfg.geometry, o.in);
    std::optional<Volume> x0;
    if (!o.init.empty()) {
      x0 = read_volume(o.init);
      require_volume(*x0, cfg.volume, o.init);
    }
    const LsResult r = reconstruct_ls(y, P, ls_config(o), x0);
    if (!o.trace.empty()) write_trace(o.trace, r.costTrace);
    write_array(r.x, o.out);
  } else if (verb == "refine") {
    const AngleMask mask = AngleMask::load(o.mask);
    // Either the full measurement or just its kept views.
    ProjectionSet y = read_projections(o.in);
    if (y.geometry() == cfg.geometry) y = apply_mask(y, mask);
    else require_geometry(y, apply_mask(cfg.geometry, mask), o.in);
    const Volume x0 = read_volume(o.init);
    require_volume(x0, cfg.volume, o.init);
    const LsResult r = refine_data_consistency(x0, y, mask, P, ls_config(o));
    if (!o.trace.empty()) write_trace(o.trace, r.costTrace);
    write_array(r.x, o.out);
  } else if (verb == "complete") {
    const AngleMask mask = AngleMask::load(o.mask);
    const ProjectionSet y = read_projections(o.in);
    require_geometry(y, cfg.geometry, o.in);
    const Volume x = read_volume(o.init);
    require_volume(x, cfg.volume, o.init);
    write_array(complete_sinogram(x, y, mask, P), o.out);
  }
  if (!o.trace.empty() && (verb == "recon-ls" || verb == "refine")) out << o.trace << '\n';
  out << o.out << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matched forward/back projectors and reference reconstruction for X-ray CT", "xtomo"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* sub, bool needsModel) {
    sub->add_option("--config", o.config, "geometry/volume configuration (JSON)")->required()->check(CLI::ExistingFile);
    if (needsModel) sub->add_option("--model", o.model, "projector model")->check(CLI::IsMember({"siddon", "sf"}));
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  };
  auto io = [&](CLI::App* sub) {
    sub->add_option("--in", o.in, "input header")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output header")->required();
  };
  auto ls = [&](CLI::App* sub) {
    sub->add_option("--iters", o.iters, "maximum iterations")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.tol, "relative gradient-norm tolerance")->check(CLI::NonNegativeNumber);
    sub->add_option("--step", o.step, "explicit step size (default: automatic)")->check(CLI::PositiveNumber);
    sub->add_flag("--nonneg", o.nonneg, "project iterates onto x >= 0");
    sub->add_option("--trace", o.trace, "write per-iteration cost CSV");
  };

  const std::pair<const char*, const char*> simple[] = {
      {"project", "forward project a volume"},
      {"backproject", "apply the matched transpose to projections"},
      {"fbp", "parallel-beam filtered backprojection"},
  };
  for (const auto& [name, help] : simple) {
    auto* sub = app.add_subcommand(name, help);
    common(sub, true);
    io(sub);
  }
  {
    auto* sub = app.add_subcommand("recon-ls", "least-squares gradient descent");
    common(sub, true);
    io(sub);
    ls(sub);
    sub->add_option("--init", o.init, "initial volume header")->check(CLI::ExistingFile);
  }
  {
    auto* sub = app.add_subcommand("refine", "data-consistency refinement on kept views");
    common(sub, true);
    io(sub);
    ls(sub);
    sub->add_option("--mask", o.mask, "JSON array of 0/1 per view")->required()->check(CLI::ExistingFile);
    sub->add_option("--init", o.init, "initial volume header")->required()->check(CLI::ExistingFile);
  }
  {
    auto* sub = app.add_subcommand("complete", "fill masked views by forward projection");
    common(sub, true);
    io(sub);
    sub->add_option("--mask", o.mask, "JSON array of 0/1 per view")->required()->check(CLI::ExistingFile);
    sub->add_option("--init", o.init, "volume to project")->required()->check(CLI::ExistingFile);
  }
  {
    auto* sub = app.add_subcommand("phantom", "rasterize an ellipsoid phantom");
    common(sub, false);
    sub->add_option("--in", o.in, "phantom JSON (default: built-in desk phantom)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output volume header")->required();
    sub->add_option("--supersample", o.supersample, "sub-samples per voxel axis")->check(CLI::PositiveNumber);
    sub->add_option("--analytic", o.analytic, "also write exact projections to this header");
  }
  {
    auto* sub = app.add_subcommand("adjoint-check", "matched-transpose inner-product test");
    common(sub, true);
    sub->add_option("--trials", o.trials, "random trials")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "random seed");
  }
  {
    auto* sub = app.add_subcommand("bench", "time forward/backprojection and report array memory");
    common(sub, true);
    sub->add_option("--repeat", o.repeat, "repetitions")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "random seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    set_num_threads(o.threads);
    return dispatch(verb, o, out);
  } catch (const Error& e) {
    err << "xtomo " << verb << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "xtomo " << verb << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace xtomo::cli
