// Command-line entry point: corpus conversion, training, prediction,
// prompting, and scoring as reproducible runs.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "easte/completion.hpp"
#include "easte/corpus.hpp"
#include "easte/error.hpp"
#include "easte/eval.hpp"
#include "easte/model.hpp"
#include "easte/predictions.hpp"
#include "easte/prompting.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsageError = 2;
constexpr int kExitPartialFailure = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw easte::ConfigError("no such file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw easte::ConfigError("cannot write " + path);
  out << content;
}

easte::Corpus load_corpus(const std::string& path, easte::Split split) {
  std::string content = read_file(path);
  // XML input starts with '<'; everything else is canonical JSON lines.
  std::size_t first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '<')
    return easte::parse_semeval_xml(content, easte::LabelInventory::restaurant(), split);
  return easte::parse_canonical(content, easte::LabelInventory::restaurant(), split);
}

// ---------------------------------------------------------------------------

struct ParseArgs {
  std::string input;
  std::string out;
  std::string stats_out;
  std::string split = "train";
};

int cmd_parse(const ParseArgs& args) {
  easte::Split split = args.split == "test" ? easte::Split::test : easte::Split::train;
  std::vector<std::string> warnings;
  std::string content = read_file(args.input);
  easte::Corpus corpus =
      easte::parse_semeval_xml(content, easte::LabelInventory::restaurant(), split, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  write_file(args.out, easte::write_canonical(corpus));
  easte::StatsReport stats = easte::corpus_stats(corpus);
  if (!args.stats_out.empty()) write_file(args.stats_out, easte::stats_to_json(stats));
  std::cout << "sentences=" << stats.sentence_count << " opinions=" << stats.opinion_count
            << " implicit=" << stats.implicit_count << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string checkpoint_out;
  std::string history_out;
  std::size_t epochs = 50;
  double lr = 1e-3;
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  std::size_t embed_dim = 64;
  std::string context = "self_attention";
};

int cmd_train(const TrainArgs& args) {
  if (args.epochs == 0) throw easte::ConfigError("--epochs must be positive");
  easte::Corpus corpus = load_corpus(args.corpus, easte::Split::train);
  easte::Vocabulary vocab = easte::Vocabulary::build(corpus);

  easte::ContextKind context = args.context == "bag" ? easte::ContextKind::bag
                                                     : easte::ContextKind::self_attention;
  easte::ModelConfig mconfig = easte::make_model_config(
      vocab, easte::LabelInventory::restaurant(), args.embed_dim, context, args.seed);
  easte::TrainConfig tconfig{args.epochs, args.lr, args.batch, args.seed};

  easte::TrainResult result;
  try {
    result = easte::train(corpus, vocab, mconfig, tconfig);
  } catch (const easte::NumericError& e) {
    std::cerr << "error: training diverged: " << e.what() << '\n';
    return kExitDataError;
  }

  write_file(args.checkpoint_out, easte::save_checkpoint(mconfig, vocab, result.params));
  if (!args.history_out.empty()) {
    std::string csv = "epoch,joint,entity,aspect,sentiment\n";
    for (std::size_t e = 0; e < result.history.size(); ++e) {
      const auto& h = result.history[e];
      csv += std::to_string(e) + "," + std::to_string(h.joint) + "," +
             std::to_string(h.per_head[0]) + "," + std::to_string(h.per_head[1]) + "," +
             std::to_string(h.per_head[2]) + "\n";
    }
    write_file(args.history_out, csv);
  }
  std::cout << "trained epochs=" << result.history.size()
            << " final_joint=" << result.history.back().joint << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string regime = "token";
  std::string corpus;
  std::string out;
  // token regime
  std::string checkpoint;
  // generative regime
  std::string template_name = "flan";
  std::size_t shots = 0;
  std::string fixtures;
  std::string endpoint_config;
  std::string run_log;
};

nlohmann::ordered_json predict_config_json(const PredictArgs& args) {
  nlohmann::ordered_json cfg;
  cfg["regime"] = args.regime;
  cfg["corpus"] = args.corpus;
  if (args.regime == "token") {
    cfg["checkpoint"] = args.checkpoint;
  } else {
    cfg["template"] = args.template_name;
    cfg["shots"] = args.shots;
    cfg["completions"] = !args.fixtures.empty() ? "fixtures:" + args.fixtures
                                                : "endpoint:" + args.endpoint_config;
  }
  return cfg;
}

int cmd_predict(const PredictArgs& args) {
  easte::MatchRegime regime = easte::match_regime_from_string(args.regime);
  easte::Corpus corpus = load_corpus(args.corpus, easte::Split::test);

  easte::PredictionFile file;
  file.config_json = predict_config_json(args).dump();

  if (regime == easte::MatchRegime::token) {
    if (args.checkpoint.empty())
      throw easte::ConfigError("token regime requires --checkpoint");
    easte::Checkpoint ckpt = easte::load_checkpoint(read_file(args.checkpoint));
    for (const auto& sentence : corpus.sentences) {
      std::vector<easte::SlotQuad> quads =
          easte::predict_quads(ckpt.config, ckpt.params, ckpt.vocab,
                               easte::LabelInventory::restaurant(), sentence);
      std::vector<easte::PredQuad> pred;
      for (auto& sq : quads) pred.push_back({std::move(sq.quad), std::move(sq.slots)});
      file.predictions.emplace(sentence.id, std::move(pred));
    }
    write_file(args.out, easte::write_predictions(file));
    std::cout << "predicted sentences=" << file.predictions.size() << '\n';
    return kExitOk;
  }

  // generative regime
  if (args.fixtures.empty() == args.endpoint_config.empty())
    throw easte::ConfigError("generative regime requires exactly one of --fixtures or "
                             "--endpoint-config");
  easte::CompletionClient client =
      !args.fixtures.empty()
          ? easte::CompletionClient::fixture(args.fixtures)
          : easte::CompletionClient::endpoint(easte::load_endpoint_config(args.endpoint_config));
  if (!args.run_log.empty()) client.set_run_log(args.run_log);

  easte::PromptTemplate tpl;
  tpl.id = easte::template_id_from_string(args.template_name);
  tpl.shots = args.shots;

  const easte::LabelInventory& inventory = easte::LabelInventory::restaurant();
  bool any_failed = false;
  for (const auto& sentence : corpus.sentences) {
    std::string prompt = easte::render_prompt(tpl, sentence.text);
    easte::Completion completion;
    try {
      completion = client.complete(prompt);
    } catch (const easte::Error& e) {
      file.errors.emplace(sentence.id, e.what());
      any_failed = true;
      continue;
    }
    easte::ParseOutcome outcome =
        tpl.id == easte::TemplateId::flan
            ? easte::parse_colon_format(completion.raw_text, inventory)
            : easte::parse_json_triplet(completion.raw_text, inventory);
    std::vector<easte::PredQuad> pred;
    for (auto& q : outcome.quads) pred.push_back({std::move(q), {}});
    file.predictions.emplace(sentence.id, std::move(pred));
  }

  write_file(args.out, easte::write_predictions(file));
  std::cout << "predicted sentences=" << file.predictions.size()
            << " errors=" << file.errors.size() << '\n';
  return any_failed ? kExitPartialFailure : kExitOk;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string gold;
  std::string pred;
  std::string mode = "easte";
  std::string regime = "generative";
  std::string out;
  std::string csv_out;
};

int cmd_score(const ScoreArgs& args) {
  easte::EvalMode mode = easte::eval_mode_from_string(args.mode);
  easte::MatchRegime regime = easte::match_regime_from_string(args.regime);
  easte::Corpus corpus = load_corpus(args.gold, easte::Split::test);
  easte::PredictionFile preds = easte::read_predictions(read_file(args.pred));

  easte::EvalReport report = easte::score(corpus, preds.predictions, mode, regime);

  if (!args.out.empty()) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(easte::report_to_json(report));
    nlohmann::ordered_json cfg;
    cfg["gold"] = args.gold;
    cfg["pred"] = args.pred;
    cfg["mode"] = args.mode;
    cfg["regime"] = args.regime;
    j["config"] = cfg;
    write_file(args.out, j.dump(2));
  }
  if (!args.csv_out.empty()) write_file(args.csv_out, easte::report_to_csv(report));
  std::cout << easte::report_summary_line(report) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PromptArgs {
  std::string template_name = "flan";
  int shots = 0;
  std::string sentence;
};

int cmd_prompt(const PromptArgs& args) {
  if (args.shots < 0) throw easte::ConfigError("--shots must be non-negative");
  easte::PromptTemplate tpl;
  tpl.id = easte::template_id_from_string(args.template_name);
  tpl.shots = static_cast<std::size_t>(args.shots);
  if (args.sentence.empty())
    std::cout << easte::template_text(tpl);
  else
    std::cout << easte::render_prompt(tpl, args.sentence);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity-aspect sentiment triplet extraction toolkit"};
  app.require_subcommand(1);

  ParseArgs parse_args;
  auto* parse_cmd = app.add_subcommand("parse", "Convert ABSA XML to canonical JSON lines");
  parse_cmd->add_option("--input", parse_args.input, "SemEval XML file")->required();
  parse_cmd->add_option("--out", parse_args.out, "Canonical JSON-lines output")->required();
  parse_cmd->add_option("--stats-out", parse_args.stats_out, "Corpus stats JSON output");
  parse_cmd->add_option("--split", parse_args.split, "Corpus split (train|test)")
      ->check(CLI::IsMember({"train", "test"}));

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the unified-loss token classifier");
  train_cmd->add_option("--corpus", train_args.corpus, "Training corpus")->required();
  train_cmd->add_option("--checkpoint-out", train_args.checkpoint_out, "Checkpoint output")
      ->required();
  train_cmd->add_option("--history-out", train_args.history_out, "Per-epoch loss CSV");
  train_cmd->add_option("--epochs", train_args.epochs, "Training epochs");
  train_cmd->add_option("--lr", train_args.lr, "Learning rate");
  train_cmd->add_option("--batch", train_args.batch, "Batch size");
  train_cmd->add_option("--seed", train_args.seed, "Init and shuffle seed");
  train_cmd->add_option("--embed-dim", train_args.embed_dim, "Embedding width");
  train_cmd->add_option("--context", train_args.context, "Encoder context (bag|self_attention)")
      ->check(CLI::IsMember({"bag", "self_attention"}));

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Produce per-sentence quad predictions");
  predict_cmd->add_option("--regime", predict_args.regime, "token|generative")
      ->check(CLI::IsMember({"token", "generative"}));
  predict_cmd->add_option("--corpus", predict_args.corpus, "Corpus to predict on")->required();
  predict_cmd->add_option("--out", predict_args.out, "Predictions JSON output")->required();
  predict_cmd->add_option("--checkpoint", predict_args.checkpoint, "Model checkpoint (token)");
  predict_cmd->add_option("--template", predict_args.template_name,
                          "Prompt template (generative)");
  predict_cmd->add_option("--shots", predict_args.shots, "Shot count (generative)");
  predict_cmd->add_option("--fixtures", predict_args.fixtures, "Fixture directory (generative)");
  predict_cmd->add_option("--endpoint-config", predict_args.endpoint_config,
                          "Endpoint config file (generative)");
  predict_cmd->add_option("--run-log", predict_args.run_log, "Completion run log (JSON lines)");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score predictions against gold");
  score_cmd->add_option("--gold", score_args.gold, "Gold corpus")->required();
  score_cmd->add_option("--pred", score_args.pred, "Predictions JSON")->required();
  score_cmd->add_option("--mode", score_args.mode, "easte|tasd|entity|aspect|sentiment")
      ->check(CLI::IsMember({"easte", "tasd", "entity", "aspect", "sentiment"}));
  score_cmd->add_option("--regime", score_args.regime, "token|generative")
      ->check(CLI::IsMember({"token", "generative"}));
  score_cmd->add_option("--out", score_args.out, "Report JSON output");
  score_cmd->add_option("--csv-out", score_args.csv_out, "Report CSV output");

  PromptArgs prompt_args;
  auto* prompt_cmd = app.add_subcommand("prompt", "Render a prompt to stdout");
  prompt_cmd->add_option("--template", prompt_args.template_name,
                         "flan|llama2|llama3|mixtral");
  prompt_cmd->add_option("--shots", prompt_args.shots, "Shot count");
  prompt_cmd->add_option("--sentence", prompt_args.sentence, "Review sentence to insert");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    app.exit(e);
    return kExitUsageError;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(parse_args);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (predict_cmd->parsed()) return cmd_predict(predict_args);
    if (score_cmd->parsed()) return cmd_score(score_args);
    if (prompt_cmd->parsed()) return cmd_prompt(prompt_args);
  } catch (const easte::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const easte::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsageError;
}
