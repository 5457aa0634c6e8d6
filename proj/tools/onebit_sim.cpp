// onebit-sim: Monte-Carlo driver for one-bit massive MIMO-OFDM detection.
//
//   onebit-sim ber      --config scenario.cfg --seed 7 --out ber.csv
//   onebit-sim converge --config fig.cfg --out trace.csv
//   onebit-sim sweep-k  --values 1,2,4,8 --snr 30 --out k.csv
//   onebit-sim sweep-n  --values 64,128,256 -K 1 --out n.csv
//   onebit-sim selftest
//
// Command-line flags override keys read from --config.

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "onebit/onebit.hpp"

namespace {

struct FlagSpec {
  const char* flags;
  const char* key;
  const char* help;
};

constexpr FlagSpec kScenarioFlags[] = {
    {"-N,--antennas", "antennas", "Base-station antennas N"},
    {"-K,--users", "users", "Single-antenna users K"},
    {"-V,--subcarriers", "subcarriers", "OFDM subcarriers V"},
    {"-M,--order", "order", "Square QAM order M"},
    {"--snr", "snr", "Comma-separated SNR grid in dB"},
    {"--pdp", "pdp", "Delay profile: sds, lds or a profile file"},
    {"--quant", "quant", "Quantization: ztq or prq"},
    {"--detector", "detector", "mrc, zf, pqnd, pqnd_zf, obox, nm or ml"},
    {"--detectors", "detectors", "Comma-separated detectors for converge"},
    {"--alpha", "alpha", "Step size override"},
    {"--alpha-for", "alpha_for", "Per-detector steps, e.g. obox:0.009,nm:1"},
    {"--iterations", "iterations", "Iteration count T"},
    {"--damping-snr", "damping_snr", "Damping SNR in dB, or 'none'"},
    {"--final-norm", "final_norm", "Norm projection at the last iteration (true/false)"},
    {"--sigma-tau-sq", "sigma_tau_sq", "Fixed PRQ threshold variance"},
    {"--freeze-thresholds", "freeze_thresholds", "One threshold draw per SNR point"},
    {"--frames", "frames", "Monte-Carlo frames per point"},
    {"--seed", "seed", "Random seed"},
    {"--cp-length", "cp_length", "Cyclic prefix length (echo only)"},
    {"--workers", "workers", "Worker threads (default: $ONEBIT_WORKERS or all cores)"},
};

struct ScenarioOptions {
  std::string config_path;
  std::string out_path;
  std::map<std::string, std::string> values;
};

void add_scenario_options(CLI::App& cmd, ScenarioOptions& opts) {
  cmd.add_option("--config", opts.config_path, "key=value scenario file")->check(CLI::ExistingFile);
  cmd.add_option("--out", opts.out_path, "CSV output path (default: stdout)");
  for (const auto& spec : kScenarioFlags) {
    cmd.add_option(spec.flags, opts.values[spec.key], spec.help);
  }
}

onebit::SystemConfig build_config(CLI::App& cmd, const ScenarioOptions& opts) {
  onebit::SystemConfig config;
  if (!opts.config_path.empty()) config = onebit::load_config(opts.config_path);
  for (const auto& spec : kScenarioFlags) {
    std::string flag = spec.flags;
    flag = flag.substr(flag.find("--"));
    if (cmd.count(flag) > 0) onebit::apply_setting(config, spec.key, opts.values.at(spec.key));
  }
  return config;
}

std::vector<int> parse_values(const std::string& text) {
  std::vector<int> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw onebit::ConfigError("--values: '" + item + "' is not an integer");
    }
  }
  return values;
}

template <class Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw onebit::ConfigError("cannot write " + path);
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit massive MIMO-OFDM link simulator", "onebit-sim"};
  app.require_subcommand(1);

  ScenarioOptions ber_opts;
  ScenarioOptions conv_opts;
  ScenarioOptions sweep_k_opts;
  ScenarioOptions sweep_n_opts;
  std::string sweep_k_values;
  std::string sweep_n_values;

  auto* ber = app.add_subcommand("ber", "BER against SNR for one detector");
  add_scenario_options(*ber, ber_opts);
  auto* converge = app.add_subcommand("converge", "Per-iteration likelihood and BER traces");
  add_scenario_options(*converge, conv_opts);
  auto* sweep_k = app.add_subcommand("sweep-k", "BER against the number of users");
  add_scenario_options(*sweep_k, sweep_k_opts);
  sweep_k->add_option("--values", sweep_k_values, "Comma-separated K values")->required();
  auto* sweep_n = app.add_subcommand("sweep-n", "BER against the number of antennas");
  add_scenario_options(*sweep_n, sweep_n_opts);
  sweep_n->add_option("--values", sweep_n_values, "Comma-separated N values")->required();
  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*selftest) {
      return onebit::report_selftest(std::cout) ? 0 : 1;
    }
    if (*ber) {
      const auto config = build_config(*ber, ber_opts);
      const auto rows = onebit::run_ber(config);
      emit(ber_opts.out_path, [&](std::ostream& out) { onebit::write_ber_csv(out, rows); });
    } else if (*converge) {
      const auto config = build_config(*converge, conv_opts);
      const auto rows = onebit::run_convergence(config);
      emit(conv_opts.out_path,
           [&](std::ostream& out) { onebit::write_convergence_csv(out, rows); });
    } else if (*sweep_k) {
      const auto config = build_config(*sweep_k, sweep_k_opts);
      const auto rows =
          onebit::run_sweep(config, onebit::SweepAxis::users, parse_values(sweep_k_values));
      emit(sweep_k_opts.out_path, [&](std::ostream& out) { onebit::write_ber_csv(out, rows); });
    } else if (*sweep_n) {
      const auto config = build_config(*sweep_n, sweep_n_opts);
      const auto rows =
          onebit::run_sweep(config, onebit::SweepAxis::antennas, parse_values(sweep_n_values));
      emit(sweep_n_opts.out_path, [&](std::ostream& out) { onebit::write_ber_csv(out, rows); });
    }
  } catch (const onebit::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const onebit::OracleScopeError& e) {
    std::cerr << "guard: " << e.what() << '\n';
    return 1;
  } catch (const onebit::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
