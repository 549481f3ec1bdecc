// ccn: train inner codes, run BLER sweeps, RS self-test, normal approximation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ccn/ccn.hpp"

namespace {

constexpr int kExitConfig = 2;

void echo(const char* what, const ccn::Json& config, std::uint64_t seed) {
  std::cout << what << " config: " << config.dump() << "\n" << "seed: " << seed << "\n";
}

std::string threshold_tag(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

// curve.csv -> curve_tau0.5.csv
std::string per_threshold_path(const std::string& out, double tau) {
  const std::filesystem::path p(out);
  const std::string name = p.stem().string() + "_tau" + threshold_tag(tau) + p.extension().string();
  return (p.parent_path() / name).string();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ccn::ConfigError("cannot open output file: " + path);
  return os;
}

struct TrainArgs {
  std::string config;
  std::string model_out;
  std::string log_out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  ccn::TrainJob job = ccn::load_train_job(a.config);
  if (!a.model_out.empty()) job.model_out = a.model_out;
  if (!a.log_out.empty()) job.log_out = a.log_out;
  if (a.seed) job.config.seed = *a.seed;
  if (a.epochs) job.config.epochs = *a.epochs;
  if (job.model_out.empty()) throw ccn::ConfigError("no model output path (set model_out or --model-out)");
  echo("train", ccn::to_json(job), job.config.seed);

  std::optional<std::ofstream> log;
  if (!job.log_out.empty()) {
    log.emplace(open_output(job.log_out));
    ccn::write_train_log_header(*log);
  }
  const std::size_t total = job.config.total_steps();
  auto on_row = [&](const ccn::TrainLogRow& row) {
    if (log) {
      ccn::write_train_log_row(*log, row);
      log->flush();
    }
    if (!a.quiet && row.val_ser)
      std::cerr << "step " << row.step << "/" << total << "  loss " << row.loss << "  val_ser " << *row.val_ser << "\n";
  };
  try {
    const ccn::TrainResult r = ccn::train_inner(job.config, on_row);
    ccn::save_model(r.model, job.model_out);
    std::cout << "steps: " << r.steps << "\n";
    if (r.steps > 0) std::cout << "loss: " << r.first_window_loss << " -> " << r.trailing_window_loss << "\n";
    std::cout << "model: " << job.model_out << "\n";
  } catch (const ccn::TrainingAborted& e) {
    const std::string rescue = job.model_out + ".last_good";
    ccn::save_model(e.last_good(), rescue);
    std::cerr << "error: " << e.what() << "\nlast good model written to " << rescue << "\n";
    return 1;
  }
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool quiet = false;
};

int run_sweep_cmd(const SweepArgs& a) {
  ccn::SweepJob job = ccn::load_sweep_job(a.config);
  if (a.seed) job.seed = *a.seed;
  if (a.workers) job.workers = *a.workers;
  echo("sweep", ccn::to_json(job), job.seed);
  const ccn::SweepConfig cfg = ccn::build_sweep_config(job);

  std::vector<std::string> paths;
  if (cfg.thresholds.size() == 1) {
    paths.push_back(a.out);
  } else {
    for (double t : cfg.thresholds) paths.push_back(per_threshold_path(a.out, t));
  }
  // Fail on unwritable outputs before simulating.
  for (const auto& p : paths) open_output(p);

  auto progress = [&](std::size_t, const ccn::CurvePoint& p) {
    if (!a.quiet)
      std::cerr << "Eb/N0 " << p.ebn0_db << " dB  bler " << p.bler << "  (" << p.block_errors << "/" << p.blocks << ")\n";
  };
  const ccn::SweepResult r = ccn::run_sweep(cfg, progress);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::ofstream os = open_output(paths[i]);
    ccn::write_curve_csv(os, r.curves[i]);
    std::cout << "wrote " << paths[i] << "\n";
  }
  return 0;
}

struct SelftestArgs {
  std::size_t small_trials = 10'000;
  std::size_t large_trials = 1'000;
  std::uint64_t seed = 1;
};

int run_selftest(const SelftestArgs& a) {
  std::cout << "rs-selftest small_trials=" << a.small_trials << " large_trials=" << a.large_trials << "\nseed: " << a.seed
            << "\n";
  bool ok = true;
  std::uint64_t suite = 0;
  auto report = [&](const ccn::RsCode& rs, ccn::RadiusCase c, std::size_t trials) {
    ccn::RandomStream rng(a.seed, {static_cast<std::uint64_t>(ccn::StreamTag::kSelfTest), suite++});
    const auto res = ccn::run_radius_case(rs, c, trials, rng);
    ok = ok && res.all_corrected();
    std::cout << "RS(" << rs.n() << "," << rs.k() << ") e=" << c.errors << " r=" << c.erasures << ": " << res.corrected
              << "/" << res.trials << (res.all_corrected() ? " PASS" : " FAIL") << "\n";
  };
  const ccn::RsCode small(ccn::GfField::gf16(), 11);
  for (const auto& c : ccn::all_radius_cases(small)) report(small, c, a.small_trials);
  const ccn::RsCode large(ccn::GfField::gf256(), 223);
  for (const auto& c : {ccn::RadiusCase{8, 0}, ccn::RadiusCase{16, 0}, ccn::RadiusCase{10, 12}, ccn::RadiusCase{0, 32}})
    report(large, c, a.large_trials);
  std::cout << (ok ? "all suites passed" : "some suites failed") << "\n";
  return ok ? 0 : 1;
}

struct NaArgs {
  std::size_t n = 0;
  double rate = 0.0;
  std::string channel = "biawgn";
  std::string ebn0;
  std::string out;
};

int run_na(const NaArgs& a) {
  const ccn::NaChannel ch = ccn::parse_na_channel(a.channel);
  const std::vector<double> grid = ccn::parse_grid(a.ebn0);
  std::optional<std::ofstream> file;
  if (!a.out.empty()) file.emplace(open_output(a.out));
  std::ostream& os = file ? *file : std::cout;
  if (file) std::cout << "na n=" << a.n << " rate=" << a.rate << " channel=" << a.channel << " ebn0=" << a.ebn0 << "\n";
  os << "ebn0_db,epsilon,capacity,dispersion,reliable\n";
  char buf[160];
  for (double e : grid) {
    const auto r = ccn::normal_approximation(a.n, a.rate, ch, e);
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%d\n", e, r.epsilon, r.cv.capacity, r.cv.dispersion,
                  r.reliable ? 1 : 0);
    os << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concatenated Reed-Solomon + neural autoencoder codes"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train an inner autoencoder from a JSON config");
  t->add_option("--config", train.config, "Train config (JSON)")->required()->check(CLI::ExistingFile);
  t->add_option("--model-out", train.model_out, "Model output path (overrides model_out)");
  t->add_option("--log-out", train.log_out, "CSV training log path (overrides log_out)");
  t->add_option("--seed", train.seed, "Override the config seed");
  t->add_option("--epochs", train.epochs, "Override the epoch count");
  t->add_flag("--quiet", train.quiet, "No progress on stderr");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "Monte Carlo BLER/BER sweep over Eb/N0");
  s->add_option("--config", sweep.config, "Sweep config (JSON)")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sweep.out, "Output CSV; with several thresholds, <stem>_tau<t>.csv per threshold")->required();
  s->add_option("--seed", sweep.seed, "Override the config seed");
  s->add_option("--workers", sweep.workers, "Worker threads (output does not depend on it)")->check(CLI::PositiveNumber);
  s->add_flag("--quiet", sweep.quiet, "No progress on stderr");

  SelftestArgs self;
  auto* r = app.add_subcommand("rs-selftest", "Randomized RS decoding-radius suites");
  r->add_option("--small-trials", self.small_trials, "Patterns per (e, r) for RS(15,11)");
  r->add_option("--large-trials", self.large_trials, "Patterns per (e, r) for RS(255,223)");
  r->add_option("--seed", self.seed, "Seed");

  NaArgs na;
  auto* n = app.add_subcommand("na", "Normal-approximation BLER table");
  n->add_option("--n", na.n, "Blocklength (channel uses)")->required()->check(CLI::PositiveNumber);
  n->add_option("--rate", na.rate, "Rate in bits per channel use")->required()->check(CLI::Range(0.0, 1.0));
  n->add_option("--channel", na.channel, "biawgn or awgn")->check(CLI::IsMember({"biawgn", "awgn"}));
  n->add_option("--ebn0", na.ebn0, "Eb/N0 grid in dB: start:step:stop or a comma list")->required();
  n->add_option("--out", na.out, "Write the table to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*t) return run_train(train);
    if (*s) return run_sweep_cmd(sweep);
    if (*r) return run_selftest(self);
    if (*n) return run_na(na);
  } catch (const ccn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ccn::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
