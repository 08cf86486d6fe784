// Command-line front end: train, select, audit, toy, golden, synth.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mfpb/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-attribute fairness-aware boosting"};
  app.require_subcommand(1);

  mfpb::RunConfig run;
  std::string mode = "multi_fair";
  std::string preference = "1,1,1";
  auto* train = app.add_subcommand("train", "Train an ensemble and write model.json and bundle.json");
  train->add_option("--schema", run.schema_path, "Schema JSON")->required();
  train->add_option("--data", run.data_path, "Data CSV")->required();
  train->add_option("--rounds", run.rounds, "Number of boosting rounds")->capture_default_str();
  train->add_option("--mode", mode, "multi_fair or vanilla")->capture_default_str();
  train->add_option("--preference", preference, "Preference over (O1,O2,O3), e.g. 0.43,0.3,0.27")->capture_default_str();
  train->add_option("--test-fraction", run.test_fraction, "Held-out test fraction")->capture_default_str();
  train->add_option("--seed", run.seed, "Split seed")->capture_default_str();
  train->add_option("--burn-in", run.burn_in, "Ignore rounds <= this when building the front")->capture_default_str();
  train->add_option("--output-dir", run.output_dir, "Where to write model.json and bundle.json")->capture_default_str();
  bool no_timestamp = false;
  train->add_flag("--no-timestamp", no_timestamp, "Omit meta.created_at from the bundle");

  std::string bundle_path;
  std::string select_pref;
  auto* sel = app.add_subcommand("select", "Re-select a round from a stored bundle");
  sel->add_option("--bundle", bundle_path, "Bundle JSON")->required();
  sel->add_option("--preference", select_pref, "Preference over (O1,O2,O3)")->required();

  std::string predictions, schema, data;
  auto* aud = app.add_subcommand("audit", "Fairness report for external predictions");
  aud->add_option("--predictions", predictions, "CSV with a prediction column and optional score column")->required();
  aud->add_option("--schema", schema, "Schema JSON")->required();
  aud->add_option("--data", data, "Data CSV")->required();

  std::string format = "table";
  auto* toy = app.add_subcommand("toy", "Print the four-classifier toy table and check its orderings");
  toy->add_option("--format", format, "table or json")->capture_default_str();

  std::size_t golden_count = 20;
  std::uint64_t golden_seed = 7;
  std::string golden_out = "golden.json";
  auto* golden = app.add_subcommand("golden", "Emit (preference, expected round) cases for a bundle");
  golden->add_option("--bundle", bundle_path, "Bundle JSON")->required();
  golden->add_option("--count", golden_count, "Number of cases")->capture_default_str();
  golden->add_option("--seed", golden_seed, "Seed for random preferences")->capture_default_str();
  golden->add_option("--output", golden_out, "Output file")->capture_default_str();

  mfpb::SynthParams synth_params;
  std::string synth_csv = "synth.csv", synth_schema = "synth.schema.json";
  auto* synth = app.add_subcommand("synth", "Write the synthetic biased fixture");
  synth->add_option("--n", synth_params.n)->capture_default_str();
  synth->add_option("--imbalance-ratio", synth_params.imbalance_ratio)->capture_default_str();
  synth->add_option("--bias", synth_params.bias_strength)->capture_default_str();
  synth->add_option("--attributes", synth_params.k_attrs)->capture_default_str();
  synth->add_option("--seed", synth_params.seed)->capture_default_str();
  synth->add_option("--csv", synth_csv)->capture_default_str();
  synth->add_option("--schema", synth_schema)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? mfpb::kExitOk : mfpb::kExitUsage;
  }

  try {
    if (*train) {
      run.mode = mfpb::parse_mode(mode);
      run.preference = mfpb::parse_preference(preference);
      run.threads = mfpb::threads_from_env();
      run.timestamp = !no_timestamp;
      return mfpb::cmd_train(run, std::cout);
    }
    if (*sel) return mfpb::cmd_select(bundle_path, mfpb::parse_preference(select_pref), std::cout);
    if (*aud) return mfpb::cmd_audit(predictions, schema, data, std::cout);
    if (*toy) return mfpb::cmd_toy(format, std::cout);
    if (*golden) return mfpb::cmd_golden(bundle_path, golden_count, golden_seed, golden_out, std::cout);
    if (*synth) return mfpb::cmd_synth(synth_params, synth_csv, synth_schema, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mfpb::kExitUsage;
  }
  return mfpb::kExitUsage;
}
