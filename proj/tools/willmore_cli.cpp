// willmore_cli: branch-point analysis of conformal immersions.
// Exit codes: 0 success, 2 inconsistent verdict, 1 error.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "willmore/io.hpp"

namespace fs = std::filesystem;
using namespace willmore;
using io::json;

namespace {

struct Options {
  std::string config, report, out = ".";
  int levels = 0;  // 0 keeps the config value
  double tol_zero = -1;
  bool with_potentials = false;
};

PipelineConfig configured(const Options& o) {
  PipelineConfig c = io::load_config(o.config);
  if (o.levels > 0) c.levels = o.levels;
  if (o.tol_zero >= 0) c.tolerance.tol_zero = o.tol_zero;
  if (o.with_potentials) c.with_potentials = true;
  return c;
}

void emit(const json& j, const Options& o, const std::string& file) {
  fs::create_directories(o.out);
  std::ofstream(fs::path(o.out) / file) << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
}

int verdict_code(const Classification& c) { return c.verdict == Verdict::inconsistent ? 2 : 0; }

int cmd_generate(const Options& o) {
  const PipelineConfig c = configured(o);
  if (c.samples) throw std::invalid_argument("generate needs a catalog surface, not imported samples");
  fs::create_directories(o.out);
  for (int l = 0; l < c.levels; ++l) {
    SurfaceSpec sp = c.surface;
    sp.grid = c.surface.grid.refined(l);
    const ImmersionField f = catalog_surface(sp);
    const fs::path p = fs::path(o.out) / (sp.name + "_level" + std::to_string(l) + ".csv");
    std::ofstream os(p);
    io::write_samples_csv(f.phi, os);
    std::cout << p.string() << '\n';
  }
  return 0;
}

int cmd_analyze(const Options& o) {
  const PipelineReport R = run_pipeline(configured(o));
  fs::create_directories(o.out);
  io::write_profiles(R.finest(), o.out);
  emit(io::to_json(R), o, "report.json");
  return verdict_code(R.classification);
}

int cmd_residues(const Options& o) {
  PipelineConfig c = configured(o);
  c.with_expansion = false;
  c.with_potentials = false;
  const PipelineReport R = run_pipeline(c);
  json j = {{"schema", io::kReportSchema}, {"levels", json::array()}};
  for (const auto& L : R.levels) j["levels"].push_back({{"grid", io::to_json(L.grid)}, {"residues", io::to_json(L.report)}});
  j["classification"] = io::to_json(R.classification);
  emit(j, o, "residues.json");
  return verdict_code(R.classification);
}

// Energy and δ profile only; works for surfaces without a branch point.
int cmd_energy(const Options& o) {
  const PipelineConfig c = configured(o);
  json levels = json::array();
  for (int l = 0; l < c.levels; ++l) {
    const ImmersionField f = [&] {
      if (c.samples) return sampled_surface(*c.samples);
      SurfaceSpec sp = c.surface;
      sp.grid = c.surface.grid.refined(l);
      return catalog_surface(sp);
    }();
    const Differentiator D(f.grid());
    const Jets J = differentiate(f, D);
    const PolarGrid& g = f.grid();
    const double ctol = c.conformal_tol.value_or(f.exact ? kConformalDefectTol : std::max(kConformalDefectTol, 10 * g.ds() * g.ds()));
    const FrameField F = frame_and_gauss(f, J, conformal_factor(f, J), ctol);
    const CurvatureField C = curvature(f, J, F, D);
    const DeltaProfile d = delta_profile(C);
    levels.push_back({{"grid", io::to_json(f.grid())}, {"energy", willmore_energy(C)}, {"delta_integral", d.integral}, {"conformal_defect", F.max_defect}});
    if (c.samples) break;
  }
  emit({{"schema", io::kReportSchema}, {"levels", levels}}, o, "energy.json");
  return 0;
}

int cmd_fit(const Options& o) {
  PipelineConfig c = configured(o);
  c.with_expansion = true;
  const PipelineReport R = run_pipeline(c);
  const json full = io::to_json(R.finest());
  json j = {{"schema", io::kReportSchema}, {"grid", full["grid"]}, {"theta0", R.finest().report.theta0}, {"a", R.finest().report.gamma.a}};
  for (const char* k : {"phi_fit", "h_fit", "constants"})
    if (full.contains(k)) j[k] = full[k];
  j["notes"] = full["notes"];
  emit(j, o, "fit.json");
  return 0;
}

int cmd_classify(const Options& o) {
  std::ifstream in(o.report);
  if (!in) throw std::invalid_argument("cannot open report " + o.report);
  const Classification c = io::classify_report(json::parse(in), o.tol_zero >= 0 ? std::optional<double>(o.tol_zero) : std::nullopt);
  emit(io::to_json(c), o, "classification.json");
  return verdict_code(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch-point residues, asymptotics and removability for conformal immersions"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* s, bool config) {
    if (config) s->add_option("--config", o.config, "JSON config")->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "output directory");
    s->add_option("--tol-zero", o.tol_zero, "zero threshold for the modified first residue");
  };
  auto* gen = app.add_subcommand("generate", "emit catalog samples as CSV");
  auto* ana = app.add_subcommand("analyze", "full pipeline, JSON report and CSV profiles");
  auto* res = app.add_subcommand("residues", "residues only");
  auto* ene = app.add_subcommand("energy", "Willmore energy and δ profile");
  auto* fit = app.add_subcommand("fit", "asymptotic expansion fits");
  auto* cls = app.add_subcommand("classify", "re-classify a saved report");
  for (auto* s : {gen, ana, res, ene, fit}) {
    common(s, true);
    s->add_option("--levels", o.levels, "refinement levels")->check(CLI::PositiveNumber);
  }
  for (auto* s : {ana, fit}) s->add_flag("--with-potentials", o.with_potentials, "solve and verify the potential system");
  common(cls, false);
  cls->add_option("--report", o.report, "saved report.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (*gen) return cmd_generate(o);
    if (*ana) return cmd_analyze(o);
    if (*res) return cmd_residues(o);
    if (*ene) return cmd_energy(o);
    if (*fit) return cmd_fit(o);
    return cmd_classify(o);
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
