// Command-line frontend: ingest, split, train, evaluate, predict, synth.
//
// Every run is reproducible: all randomness flows through the three named
// seeds (--seed-split, --seed-init, --seed-shuffle), and identical
// configurations produce byte-identical output files. Options may also be
// given in a JSON config file (--config); values from the file override
// conflicting flags and the effective configuration is echoed into the
// training report.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical divergence.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <nsft/nsft.hpp>

namespace {

struct RunConfig {
  std::string input;             // positional input path ("-" = stdin for predict)
  std::string out;               // --out
  std::string model_path;        // --model
  std::string report_path;       // --report
  std::string truth_model_path;  // --truth-model (synth)
  std::string config_path;       // --config
  std::string part = "test";     // --part (evaluate)

  std::vector<std::uint32_t> dims;            // empty until --dims / header sniff
  std::vector<double> ratios{0.2, 0.2, 0.6};  // train:valid:test proportions

  int rank = 3;
  int arm_width = 1;
  double lambda_a = 1e-4;
  double lambda_b = 1e-4;
  double lambda_c = 1e-4;
  bool no_bias = false;
  std::vector<double> init_range{0.2, 1.0};

  int max_epochs = 100;
  double tol = 1e-5;
  std::string gradient_mode = "paper";

  std::uint64_t seed_split = 0;
  std::uint64_t seed_init = 0;
  std::uint64_t seed_shuffle = 0;

  double density = 1.0;  // synth
  double noise = 0.0;    // synth, Gaussian sigma
};

void require(bool ok, const std::string& message) {
  if (!ok) throw nsft::config_error(message);
}

// Splits "a<sep>b<sep>c" into doubles; used for --ratios and --init-range.
std::vector<double> parse_number_list(const std::string& text, char sep,
                                      const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) next = text.size();
    const char* first = text.data() + pos;
    const char* last = text.data() + next;
    double v = 0.0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last)
      throw nsft::config_error(what + ": bad number '" +
                               std::string(first, last) + "'");
    out.push_back(v);
    pos = next + 1;
  }
  return out;
}

std::vector<std::uint32_t> parse_dims_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const char* first = text.data() + pos;
    const char* last = text.data() + next;
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last)
      throw nsft::config_error("--dims: bad dimension '" +
                               std::string(first, last) + "'");
    out.push_back(v);
    pos = next + 1;
  }
  if (out.size() != 3)
    throw nsft::config_error("--dims: expected three values I,J,K");
  return out;
}

nsft::Dims to_dims(const std::vector<std::uint32_t>& v) {
  require(v.size() == 3, "dims: expected three values I,J,K");
  require(v[0] > 0 && v[1] > 0 && v[2] > 0, "dims: all dimensions must be positive");
  return nsft::Dims{v[0], v[1], v[2]};
}

// Proportions like 2:2:6 are accepted and normalized to sum to 1.
nsft::SplitRatios to_ratios(const std::vector<double>& v) {
  require(v.size() == 3, "ratios: expected three values train:valid:test");
  require(v[0] > 0 && v[1] > 0 && v[2] > 0, "ratios: all parts must be positive");
  const double sum = v[0] + v[1] + v[2];
  return nsft::SplitRatios{v[0] / sum, v[1] / sum, v[2] / sum};
}

nsft::GradientMode to_gradient_mode(const std::string& name) {
  if (name == "paper") return nsft::GradientMode::paper;
  if (name == "full") return nsft::GradientMode::full;
  throw nsft::config_error("gradient-mode: expected 'paper' or 'full', got '" +
                           name + "'");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nsft::data_error("cannot open input file '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw nsft::data_error("cannot open output file '" + path + "'");
  return out;
}

// Values from the config file override flags. Arrays are used where flags
// take delimited lists (dims, ratios, init_range); list-valued keys also
// accept the flag syntax as a string.
void apply_config_file(RunConfig& rc) {
  if (rc.config_path.empty()) return;
  std::ifstream in(rc.config_path);
  if (!in) throw nsft::data_error("cannot open config file '" + rc.config_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw nsft::config_error("config file '" + rc.config_path +
                             "': " + e.what());
  }
  if (!j.is_object())
    throw nsft::config_error("config file: top level must be a JSON object");

  auto number_list = [](const nlohmann::json& v, char sep, const std::string& key) {
    if (v.is_string())
      return parse_number_list(v.get<std::string>(), sep, "config key " + key);
    return v.get<std::vector<double>>();
  };

  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "input") rc.input = value.get<std::string>();
      else if (key == "out") rc.out = value.get<std::string>();
      else if (key == "model") rc.model_path = value.get<std::string>();
      else if (key == "report") rc.report_path = value.get<std::string>();
      else if (key == "truth_model") rc.truth_model_path = value.get<std::string>();
      else if (key == "part") rc.part = value.get<std::string>();
      else if (key == "dims") {
        if (value.is_string()) rc.dims = parse_dims_list(value.get<std::string>());
        else rc.dims = value.get<std::vector<std::uint32_t>>();
      }
      else if (key == "ratios") rc.ratios = number_list(value, ':', key);
      else if (key == "rank") rc.rank = value.get<int>();
      else if (key == "arm_width") rc.arm_width = value.get<int>();
      else if (key == "lambda_a") rc.lambda_a = value.get<double>();
      else if (key == "lambda_b") rc.lambda_b = value.get<double>();
      else if (key == "lambda_c") rc.lambda_c = value.get<double>();
      else if (key == "no_bias") rc.no_bias = value.get<bool>();
      else if (key == "init_range") rc.init_range = number_list(value, ',', key);
      else if (key == "max_epochs") rc.max_epochs = value.get<int>();
      else if (key == "tol") rc.tol = value.get<double>();
      else if (key == "gradient_mode") rc.gradient_mode = value.get<std::string>();
      else if (key == "seed_split") rc.seed_split = value.get<std::uint64_t>();
      else if (key == "seed_init") rc.seed_init = value.get<std::uint64_t>();
      else if (key == "seed_shuffle") rc.seed_shuffle = value.get<std::uint64_t>();
      else if (key == "density") rc.density = value.get<double>();
      else if (key == "noise") rc.noise = value.get<double>();
      else throw nsft::config_error("config file: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw nsft::config_error("config file: bad value for '" + key +
                               "': " + e.what());
    }
  }
}

// Effective configuration as echoed into report headers.
nlohmann::json config_json(const RunConfig& rc, const std::string& subcommand) {
  const nsft::SplitRatios ratios = to_ratios(rc.ratios);
  return nlohmann::json{
      {"subcommand", subcommand},
      {"input", rc.input},
      {"dims", rc.dims},
      {"ratios", {ratios.train, ratios.valid, ratios.test}},
      {"rank", rc.rank},
      {"arm_width", rc.arm_width},
      {"lambda_a", rc.lambda_a},
      {"lambda_b", rc.lambda_b},
      {"lambda_c", rc.lambda_c},
      {"no_bias", rc.no_bias},
      {"init_range", rc.init_range},
      {"max_epochs", rc.max_epochs},
      {"tol", rc.tol},
      {"gradient_mode", rc.gradient_mode},
      {"seed_split", rc.seed_split},
      {"seed_init", rc.seed_init},
      {"seed_shuffle", rc.seed_shuffle},
      {"model", rc.model_path},
      {"report", rc.report_path},
      {"out", rc.out},
  };
}

// Reads a tensor file; dims come from --dims when given, otherwise from the
// `# dims I J K` header written by ingest/synth.
nsft::ParseResult load_tensor(const RunConfig& rc) {
  require(!rc.input.empty(), "missing input tensor file");
  nsft::Dims dims;
  if (!rc.dims.empty()) {
    dims = to_dims(rc.dims);
  } else {
    std::ifstream probe = open_input(rc.input);
    if (!nsft::sniff_dims(probe, dims))
      throw nsft::config_error(
          "tensor dims unknown: pass --dims I,J,K or use a file with a "
          "'# dims' header");
  }
  std::ifstream in = open_input(rc.input);
  return nsft::parse_wsdream(in, dims);
}

nsft::NsftModel load_model_file(const std::string& path) {
  require(!path.empty(), "missing --model file");
  std::ifstream in = open_input(path);
  return nsft::load_model(in);
}

void cmd_ingest(const RunConfig& rc) {
  require(!rc.input.empty(), "ingest: missing input file");
  require(!rc.dims.empty(), "ingest: --dims I,J,K is required");
  require(!rc.out.empty(), "ingest: --out is required");
  const nsft::Dims dims = to_dims(rc.dims);
  std::ifstream in = open_input(rc.input);
  const nsft::ParseResult parsed = nsft::parse_wsdream(in, dims);

  std::ofstream out = open_output(rc.out);
  nsft::write_wsdream(out, parsed.tensor);

  const double volume = static_cast<double>(dims.volume());
  nlohmann::json summary{
      {"type", "ingest"},
      {"data_lines", parsed.data_lines},
      {"entries", parsed.tensor.size()},
      {"dropped_nonpositive", parsed.dropped_nonpositive},
      {"raw_density", static_cast<double>(parsed.data_lines) / volume},
      {"density", parsed.tensor.density()},
  };
  std::cout << summary.dump() << '\n';
}

void cmd_split(const RunConfig& rc) {
  require(!rc.out.empty(), "split: --out is required");
  const nsft::ParseResult parsed = load_tensor(rc);
  const nsft::DataSplit split =
      nsft::split(parsed.tensor, to_ratios(rc.ratios), rc.seed_split);

  std::ofstream out = open_output(rc.out);
  nsft::write_split_manifest(out, split);

  nlohmann::json summary{{"type", "split"},
                         {"train", split.train.size()},
                         {"valid", split.valid.size()},
                         {"test", split.test.size()}};
  std::cout << summary.dump() << '\n';
}

void cmd_train(const RunConfig& rc) {
  require(!rc.model_path.empty(), "train: --model output path is required");
  require(rc.init_range.size() == 2,
          "init-range: expected two values low,high");

  const nsft::ParseResult parsed = load_tensor(rc);
  const nsft::DataSplit split =
      nsft::split(parsed.tensor, to_ratios(rc.ratios), rc.seed_split);

  nsft::NsftModel model =
      nsft::init_model(parsed.tensor.dims(), rc.rank, rc.arm_width, rc.seed_init,
                       rc.init_range[0], rc.init_range[1]);
  model.lambda_core = rc.lambda_a;
  model.lambda_factor = rc.lambda_b;
  model.lambda_bias = rc.lambda_c;
  model.use_bias = !rc.no_bias;

  nsft::TrainConfig tc;
  tc.max_epochs = rc.max_epochs;
  tc.tol = rc.tol;
  tc.shuffle_seed = rc.seed_shuffle;
  tc.gradient_mode = to_gradient_mode(rc.gradient_mode);

  const nsft::TrainReport report = nsft::train(model, split, tc);

  {
    std::ofstream out = open_output(rc.model_path);
    nsft::save_model(out, model);
  }
  if (!rc.report_path.empty()) {
    std::ofstream out = open_output(rc.report_path);
    nlohmann::json header{{"type", "header"},
                          {"config", config_json(rc, "train")},
                          {"split",
                           {{"train", split.train.size()},
                            {"valid", split.valid.size()},
                            {"test", split.test.size()}}}};
    out << header.dump() << '\n';
    nsft::write_report(out, report);
  }

  nlohmann::json summary{
      {"type", "train"},
      {"epochs", report.epochs.size()},
      {"stop_reason", nsft::to_string(report.stop_reason)},
      {"converged_at", report.converged_at ? nlohmann::json(*report.converged_at)
                                           : nlohmann::json()},
      {"final_valid_rmse", report.epochs.empty()
                               ? nlohmann::json()
                               : nlohmann::json(report.epochs.back().valid_rmse)},
  };
  std::cout << summary.dump() << '\n';
}

void cmd_evaluate(const RunConfig& rc) {
  const nsft::NsftModel model = load_model_file(rc.model_path);
  const nsft::ParseResult parsed = load_tensor(rc);

  nsft::EvalResult result;
  if (rc.part == "all") {
    result = nsft::evaluate(model, parsed.tensor);
  } else if (rc.part == "train" || rc.part == "valid" || rc.part == "test") {
    const nsft::DataSplit split =
        nsft::split(parsed.tensor, to_ratios(rc.ratios), rc.seed_split);
    const nsft::SparseTensor& set = rc.part == "train"  ? split.train
                                    : rc.part == "valid" ? split.valid
                                                         : split.test;
    result = nsft::evaluate(model, set);
  } else {
    throw nsft::config_error(
        "evaluate: --part must be one of train, valid, test, all");
  }

  nlohmann::json record{
      {"mae", result.mae}, {"rmse", result.rmse}, {"count", result.count}};
  if (!rc.out.empty()) {
    std::ofstream out = open_output(rc.out);
    out << record.dump() << '\n';
  }
  std::cout << record.dump() << '\n';
}

void cmd_predict(const RunConfig& rc) {
  const nsft::NsftModel model = load_model_file(rc.model_path);
  require(!rc.input.empty(), "predict: missing query file (use '-' for stdin)");

  std::ifstream file;
  if (rc.input != "-") file = open_input(rc.input);
  std::istream& in = rc.input == "-" ? std::cin : file;

  std::ofstream out_file;
  if (!rc.out.empty()) out_file = open_output(rc.out);
  std::ostream& out = rc.out.empty() ? std::cout : out_file;

  std::string line;
  std::uint64_t line_no = 0;
  std::string buf;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = nsft::detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::string_view tok[4];
    if (nsft::detail::fields(body, tok, 4) != 3)
      throw nsft::parse_error("query line " + std::to_string(line_no) +
                              ": expected three fields i j k");
    nsft::EntryIndex q;
    q.i = nsft::detail::parse_index(tok[0], line_no, "user index");
    q.j = nsft::detail::parse_index(tok[1], line_no, "service index");
    q.k = nsft::detail::parse_index(tok[2], line_no, "time index");

    buf.clear();
    buf += std::to_string(q.i);
    buf += ' ';
    buf += std::to_string(q.j);
    buf += ' ';
    buf += std::to_string(q.k);
    buf += ' ';
    nsft::detail::append_double(buf, nsft::predict(model, q));
    buf += '\n';
    out << buf;
  }
}

void cmd_synth(const RunConfig& rc) {
  require(!rc.dims.empty(), "synth: --dims I,J,K is required");
  require(!rc.out.empty(), "synth: --out is required");
  require(rc.init_range.size() == 2,
          "init-range: expected two values low,high");

  nsft::SyntheticSpec spec;
  spec.dims = to_dims(rc.dims);
  spec.rank = rc.rank;
  spec.arm_width = rc.arm_width;
  spec.seed = rc.seed_init;
  spec.density = rc.density;
  spec.noise_sigma = rc.noise;
  spec.low = rc.init_range[0];
  spec.high = rc.init_range[1];
  nsft::validate(spec);

  const nsft::NsftModel truth = nsft::generate_ground_truth(spec);
  const nsft::SparseTensor tensor = nsft::sample_observations(truth, spec);

  std::ofstream out = open_output(rc.out);
  nsft::write_wsdream(out, tensor);
  if (!rc.truth_model_path.empty()) {
    std::ofstream model_out = open_output(rc.truth_model_path);
    nsft::save_model(model_out, truth);
  }

  nlohmann::json summary{{"type", "synth"},
                         {"entries", tensor.size()},
                         {"density", tensor.density()}};
  std::cout << summary.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse QoS tensor completion: snowflake-core factorization "
               "with non-negative multiplicative training"};
  app.require_subcommand(1);
  RunConfig rc;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", rc.config_path,
                    "JSON config file; overrides conflicting flags");
  };
  auto add_dims = [&](CLI::App* sub) {
    sub->add_option_function<std::string>(
        "--dims", [&](const std::string& s) { rc.dims = parse_dims_list(s); },
        "tensor dimensions I,J,K");
  };
  auto add_ratios = [&](CLI::App* sub) {
    sub->add_option_function<std::string>(
        "--ratios",
        [&](const std::string& s) {
          rc.ratios = parse_number_list(s, ':', "--ratios");
        },
        "train:valid:test proportions, e.g. 2:2:6 (normalized to sum to 1)");
    sub->add_option("--seed-split", rc.seed_split, "seed for the split shuffle");
  };
  auto add_model_shape = [&](CLI::App* sub) {
    sub->add_option("--rank", rc.rank, "number of latent factor columns R");
    sub->add_option("--arm-width", rc.arm_width,
                    "core arm width F (0 = diagonal core)");
    sub->add_option_function<std::string>(
        "--init-range",
        [&](const std::string& s) {
          rc.init_range = parse_number_list(s, ',', "--init-range");
        },
        "uniform parameter range low,high (low > 0)");
  };

  CLI::App* ingest = app.add_subcommand(
      "ingest", "Normalize a raw observation file into the tensor format");
  ingest->add_option("input", rc.input, "raw observation file");
  add_dims(ingest);
  ingest->add_option("--out", rc.out, "normalized tensor file to write");
  add_config(ingest);

  CLI::App* split_cmd =
      app.add_subcommand("split", "Write a frozen train/valid/test manifest");
  split_cmd->add_option("input", rc.input, "tensor file");
  add_dims(split_cmd);
  add_ratios(split_cmd);
  split_cmd->add_option("--out", rc.out, "manifest file to write");
  add_config(split_cmd);

  CLI::App* train_cmd =
      app.add_subcommand("train", "Split a tensor and fit a model");
  train_cmd->add_option("input", rc.input, "tensor file");
  add_dims(train_cmd);
  add_ratios(train_cmd);
  add_model_shape(train_cmd);
  train_cmd->add_option("--lambda-a", rc.lambda_a, "core regularization weight");
  train_cmd->add_option("--lambda-b", rc.lambda_b,
                        "factor matrix regularization weight");
  train_cmd->add_option("--lambda-c", rc.lambda_c, "bias regularization weight");
  train_cmd->add_flag("--no-bias", rc.no_bias, "disable the additive bias terms");
  train_cmd->add_option("--max-epochs", rc.max_epochs, "epoch limit");
  train_cmd->add_option("--tol", rc.tol,
                        "stop when the validation RMSE change drops below this");
  train_cmd->add_option("--gradient-mode", rc.gradient_mode,
                        "arm handling in factor updates: paper|full")
      ->check(CLI::IsMember({"paper", "full"}));
  train_cmd->add_option("--seed-init", rc.seed_init,
                        "seed for parameter initialization");
  train_cmd->add_option("--seed-shuffle", rc.seed_shuffle,
                        "seed for per-epoch entry shuffling");
  train_cmd->add_option("--model", rc.model_path, "model file to write");
  train_cmd->add_option("--report", rc.report_path,
                        "epoch report file to write (JSON lines)");
  add_config(train_cmd);

  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "Score a model on a tensor or split part");
  eval_cmd->add_option("input", rc.input, "tensor file");
  add_dims(eval_cmd);
  add_ratios(eval_cmd);
  eval_cmd->add_option("--model", rc.model_path, "model file to read");
  eval_cmd->add_option("--part", rc.part,
                       "evaluation set: train|valid|test|all");
  eval_cmd->add_option("--out", rc.out, "metrics record file to write");
  add_config(eval_cmd);

  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Predict values for i j k query lines");
  predict_cmd->add_option("input", rc.input, "query file ('-' = stdin)");
  predict_cmd->add_option("--model", rc.model_path, "model file to read");
  predict_cmd->add_option("--out", rc.out, "prediction file (default stdout)");
  add_config(predict_cmd);

  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Generate a ground-truth model and sampled observations");
  add_dims(synth_cmd);
  add_model_shape(synth_cmd);
  synth_cmd->add_option("--seed-init", rc.seed_init, "generator seed");
  synth_cmd->add_option("--density", rc.density,
                        "fraction of cells to sample, in (0,1]");
  synth_cmd->add_option("--noise", rc.noise,
                        "Gaussian noise sigma (observations stay positive)");
  synth_cmd->add_option("--out", rc.out, "tensor file to write");
  synth_cmd->add_option("--truth-model", rc.truth_model_path,
                        "also save the generating model here");
  add_config(synth_cmd);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }
    apply_config_file(rc);

    if (ingest->parsed()) cmd_ingest(rc);
    else if (split_cmd->parsed()) cmd_split(rc);
    else if (train_cmd->parsed()) cmd_train(rc);
    else if (eval_cmd->parsed()) cmd_evaluate(rc);
    else if (predict_cmd->parsed()) cmd_predict(rc);
    else if (synth_cmd->parsed()) cmd_synth(rc);
    return 0;
  } catch (const nsft::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nsft::divergence_error& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return 4;
  } catch (const nsft::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
