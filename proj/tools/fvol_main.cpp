#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fvol/fvol.h"

namespace {

struct Failure {
  fvol_status status;
};

void check(fvol_status s) {
  if (s != FVOL_OK) throw Failure{s};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() { Free(p); }
};

fvol_mode mode_of(const std::string& m) {
  if (m == "complete") return FVOL_MODE_COMPLETE;
  if (m == "simplified") return FVOL_MODE_SIMPLIFIED;
  return FVOL_MODE_IMPUTED;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional kernel estimation of conditional volatility with responses missing at random"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(fvol_version()));

  // Every setting below mirrors a config-file key; flags override the file.
  std::string config_path;
  std::map<std::string, std::string> settings;
  app.add_option("--config", config_path, "Config file (key = value, see README)")->check(CLI::ExistingFile);
  auto setting = [&](CLI::App* a, const std::string& flag, const std::string& key, const std::string& help) {
    return a->add_option_function<std::string>(flag, [&settings, key](const std::string& v) { settings[key] = v; },
                                               help);
  };
  setting(&app, "--seed", "seed", "Master random seed");
  setting(&app, "--threads", "threads", "Worker threads");
  setting(&app, "--level", "level", "CI level nu (0.05 gives 95% intervals)");
  setting(&app, "--mode", "mode", "complete|simplified|imputed")
      ->check(CLI::IsMember({"complete", "simplified", "imputed"}));
  for (const char* h : {"h1", "h2", "h3", "h4"})
    setting(&app, std::string("--") + h, h, std::string("Bandwidth ") + h + ": auto or a positive number");
  setting(&app, "--cv-grid-size", "cv-grid-size", "Number of cross-validation candidates");
  setting(&app, "--cv-quantile-range", "cv-quantile-range", "Candidate quantile levels 'low,high'");
  setting(&app, "--knn-override", "knn-override", "Fallback neighbor count for empty kernel balls (0 = off)");
  setting(&app, "--kernel", "kernel", "quadratic|triangular|uniform");
  setting(&app, "--semimetric", "semimetric", "l2 | deriv_l2:<order> | pca:<k>");
  setting(&app, "--tau-denominator", "tau-denominator", "bandwidth|literal");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo study");
  std::string sim_out;
  setting(sim, "--model", "simulate.model", "Error model 1..4");
  setting(sim, "--n", "simulate.n", "Sample size");
  setting(sim, "--eta", "simulate.eta", "MAR strength");
  setting(sim, "--B", "simulate.B", "Replications");
  setting(sim, "--J", "simulate.J", "Evaluation curves");
  setting(sim, "--grid-size", "simulate.grid-size", "Points per curve");
  sim->add_option("--out", sim_out, "Report CSV")->required();

  auto* ingest = app.add_subcommand("ingest", "Align hourly predictor prices with daily responses");
  std::string hourly, daily, curves_out, responses_out, rv_out;
  std::optional<std::string> rv_hourly;
  double ingest_zeta = 0;
  ingest->add_option("--hourly", hourly, "Hourly predictor CSV (timestamp,price)")->required();
  ingest->add_option("--daily", daily, "Daily response CSV (date,close)")->required();
  ingest->add_option("--rv-hourly", rv_hourly, "Hourly response CSV used for realized volatility");
  ingest->add_option("--curves-out", curves_out, "Curve CSV")->required();
  ingest->add_option("--responses-out", responses_out, "Response CSV")->required();
  ingest->add_option("--rv-out", rv_out, "Realized volatility CSV");
  ingest->add_option("--zeta", ingest_zeta, "Inject MAR responses with this strength (0 = none)");

  auto* est = app.add_subcommand("estimate", "Conditional variance and confidence intervals");
  std::string est_curves, est_responses, est_out;
  std::optional<std::string> est_eval;
  est->add_option("--curves", est_curves, "Curve CSV")->required();
  est->add_option("--responses", est_responses, "Response CSV (id,y,delta)")->required();
  est->add_option("--eval", est_eval, "Curves to estimate at (default: the sample curves)");
  est->add_option("--out", est_out, "Estimates CSV")->required();

  auto* rv = app.add_subcommand("rv", "Daily realized volatility from hourly prices");
  std::string rv_in, rv_file;
  rv->add_option("--hourly", rv_in, "Hourly CSV (timestamp,price)")->required();
  rv->add_option("--out", rv_file, "Output CSV")->required();

  auto* report = app.add_subcommand("report", "Finance pipeline: estimate, SE quartiles and coverage");
  std::string rep_out;
  report->add_option("--hourly", hourly, "Hourly predictor CSV")->required();
  report->add_option("--daily", daily, "Daily response CSV")->required();
  report->add_option("--rv-hourly", rv_hourly, "Hourly response CSV used for realized volatility");
  setting(report, "--zeta", "finance.zeta", "MAR strength (0 = fully observed)");
  report->add_option("--out", rep_out, "Report CSV")->required();

  auto* synth = app.add_subcommand("synth", "Write synthetic finance input files");
  std::size_t days = 500;
  double sigma = 2.0, fx_sd = 0.133;
  std::string fx_out, daily_out, gas_out;
  synth->add_option("--days", days, "Calendar days");
  synth->add_option("--sigma", sigma, "Daily commodity volatility (percent)");
  synth->add_option("--fx-sd", fx_sd, "Hourly FX return standard deviation (percent)");
  synth->add_option("--fx-out", fx_out, "FX hourly CSV")->required();
  synth->add_option("--daily-out", daily_out, "Commodity daily CSV")->required();
  synth->add_option("--gas-out", gas_out, "Commodity hourly CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    Handle<fvol_config, fvol_config_free> cfg;
    check(fvol_config_new(&cfg.p));
    if (!config_path.empty()) check(fvol_config_load(cfg.p, config_path.c_str()));
    for (const auto& [k, v] : settings) check(fvol_config_set(cfg.p, k.c_str(), v.c_str()));
    const auto setting_or = [&](const std::string& key, const std::string& fallback) {
      const auto it = settings.find(key);
      return it == settings.end() ? fallback : it->second;
    };

    if (*sim) {
      Handle<fvol_sim_report, fvol_sim_report_free> r;
      check(fvol_simulate(cfg.p, &r.p));
      check(fvol_sim_report_write_csv(r.p, sim_out.c_str()));
      double mise = 0;
      for (auto [m, name] : {std::pair{FVOL_MODE_COMPLETE, "complete"}, {FVOL_MODE_SIMPLIFIED, "simplified"},
                             {FVOL_MODE_IMPUTED, "imputed"}})
        if (fvol_sim_report_mise(r.p, m, &mise, nullptr, nullptr, nullptr) == FVOL_OK)
          std::printf("%-10s MISE %.4f\n", name, mise);
      double eff = 0;
      if (fvol_sim_report_efficiency(r.p, &eff) == FVOL_OK) std::printf("efficiency %.2f%%\n", eff);
    } else if (*ingest) {
      Handle<fvol_finance, fvol_finance_free> f;
      check(fvol_finance_ingest(hourly.c_str(), daily.c_str(), rv_hourly ? rv_hourly->c_str() : nullptr, &f.p));
      std::size_t kept = 0, dropped = 0;
      check(fvol_finance_days(f.p, &kept, &dropped));
      std::uint64_t seed = std::strtoull(setting_or("seed", "1").c_str(), nullptr, 10);
      check(fvol_finance_write_dataset(f.p, curves_out.c_str(), responses_out.c_str(), ingest_zeta, seed));
      if (!rv_out.empty()) check(fvol_finance_write_rv(f.p, rv_out.c_str()));
      std::printf("days kept %zu, dropped %zu\n", kept, dropped);
      for (std::size_t i = 0; i < dropped; ++i) {
        const char* date = nullptr;
        const char* reason = nullptr;
        check(fvol_finance_dropped(f.p, i, &date, &reason));
        std::fprintf(stderr, "dropped %s: %s\n", date, reason);
      }
    } else if (*est) {
      Handle<fvol_dataset, fvol_dataset_free> d;
      check(fvol_dataset_load_csv(est_curves.c_str(), est_responses.c_str(), &d.p));
      Handle<fvol_estimator, fvol_estimator_free> e;
      check(fvol_estimator_new(d.p, cfg.p, &e.p));
      const double level = std::strtod(setting_or("level", "0.05").c_str(), nullptr);
      check(fvol_estimator_write_csv(e.p, est_eval ? est_eval->c_str() : nullptr,
                                     mode_of(setting_or("mode", "imputed")), level, est_out.c_str()));
    } else if (*rv) {
      check(fvol_rv_from_hourly_csv(rv_in.c_str(), rv_file.c_str()));
    } else if (*report) {
      Handle<fvol_finance, fvol_finance_free> f;
      check(fvol_finance_ingest(hourly.c_str(), daily.c_str(), rv_hourly ? rv_hourly->c_str() : nullptr, &f.p));
      Handle<fvol_pipeline_report, fvol_pipeline_report_free> r;
      check(fvol_pipeline_run(f.p, cfg.p, -1.0, &r.p));
      check(fvol_pipeline_report_write_csv(r.p, rep_out.c_str()));
      fvol_pipeline_summary s{};
      check(fvol_pipeline_summary_get(r.p, &s));
      std::printf("days %zu  missing %.1f%%  SE Q25 %.4f  Q50 %.4f  Q75 %.4f  MSE %.4f  coverage %.3f\n", s.days,
                  100 * s.missing_rate, s.se_q25, s.se_q50, s.se_q75, s.mse, s.coverage);
    } else if (*synth) {
      const std::uint64_t seed = std::strtoull(setting_or("seed", "1").c_str(), nullptr, 10);
      check(fvol_synthesize_finance(days, sigma, fx_sd, seed, fx_out.c_str(), daily_out.c_str(), gas_out.c_str()));
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "fvol: %s\n", fvol_last_error());
    return static_cast<int>(f.status) == 99 ? 99 : 2;
  }
  return 0;
}
