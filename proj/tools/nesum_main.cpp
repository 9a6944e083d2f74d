// nesum command-line interface: annotate / summarize / evaluate / train /
// stats over JSONL corpora. See README.md for the file formats.
#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "nesum/pipeline.hpp"

namespace {

using nesum::Field;
using nesum::RunConfig;

bool parse_fields(const std::string& csv, std::vector<Field>& out, std::string& err) {
  out.clear();
  std::size_t at = 0;
  while (at <= csv.size()) {
    auto comma = csv.find(',', at);
    auto part = csv.substr(at, comma == std::string::npos ? comma : comma - at);
    auto field = nesum::parse_field(part);
    if (!field) {
      err = "unknown field '" + part + "' (expected text, headline or abstract)";
      return false;
    }
    out.push_back(*field);
    if (comma == std::string::npos) break;
    at = comma + 1;
  }
  return !out.empty();
}

void add_split_option(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option_function<std::string>(
         "--split",
         [&cfg](const std::string& s) {
           auto split = nesum::parse_split(s);
           if (!split)
             throw CLI::ValidationError("--split",
                                        "expected train, dev, test or oodtest");
           cfg.split_filter = *split;
         },
         "restrict to one corpus split");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"named-entity-aware summarization toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string fields_csv;
  std::string method_name = "first";

  auto* annotate = app.add_subcommand("annotate", "tag corpus fields with entities");
  annotate->add_option("--corpus", cfg.corpus_path, "corpus JSONL")->required();
  annotate->add_option("--gazetteer", cfg.gazetteer_path, "gazetteer TSV")->required();
  annotate->add_option("--out", cfg.output_path, "annotation JSONL output")->required();
  annotate->add_option("--fields", fields_csv,
                       "comma-separated fields (default text,headline,abstract)");
  add_split_option(annotate, cfg);

  auto* summarize = app.add_subcommand("summarize", "produce one-sentence summaries");
  summarize->add_option("--corpus", cfg.corpus_path, "corpus JSONL")->required();
  summarize->add_option("--out", cfg.output_path, "summaries JSONL output")->required();
  summarize
      ->add_option("--method", method_name,
                   "first | random | textrank | ned | seq2seq | seq2seq-ner")
      ->required();
  summarize->add_option("--annotations", cfg.annotations_path,
                        "annotation JSONL (ned, seq2seq-ner)");
  summarize->add_option("--seed", cfg.seed, "seed for the random baseline");
  summarize->add_option("--ckpt", cfg.checkpoint_path, "model checkpoint");
  summarize->add_option("--min-sentence-len", cfg.min_sentence_len,
                        "entity-density: skip sentences shorter than this");
  add_split_option(summarize, cfg);

  auto* evaluate = app.add_subcommand("evaluate", "score summaries against headlines");
  evaluate->add_option("--corpus", cfg.corpus_path, "corpus JSONL")->required();
  evaluate->add_option("--summaries", cfg.summaries_path, "summaries JSONL")
      ->required();
  evaluate->add_option("--gazetteer", cfg.gazetteer_path,
                       "annotator used on both sides of the entity metric")
      ->required();
  evaluate->add_option("--out", cfg.output_path, "per-document JSONL output")
      ->required();
  evaluate->add_option("--report", cfg.report_path, "corpus-level JSON report");
  evaluate->add_flag("--paper-literal-ne", cfg.paper_literal_ne,
                     "transpose the entity-overlap denominators");
  add_split_option(evaluate, cfg);

  auto* train = app.add_subcommand("train", "train the attention model");
  train->add_option("--corpus", cfg.corpus_path, "corpus JSONL")->required();
  train->add_option("--out", cfg.output_path, "checkpoint output")->required();
  train->add_option("--config", cfg.model_config_path, "model config JSON");
  train->add_option("--annotations", cfg.annotations_path,
                    "annotation JSONL (entity-feature model)");
  train->add_option("--log", cfg.log_path, "training log CSV (default <out>.log.csv)");

  auto* stats = app.add_subcommand("stats", "entity statistics per split");
  stats->add_option("--corpus", cfg.corpus_path, "corpus JSONL")->required();
  stats->add_option("--annotations", cfg.annotations_path, "annotation JSONL")
      ->required();
  stats->add_option("--fields", fields_csv,
                    "comma-separated fields (default text,headline,abstract)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // normalize every parse problem (including unknown flags) to the usage
    // exit code; --help stays 0
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!fields_csv.empty()) {
    std::string err;
    if (!parse_fields(fields_csv, cfg.fields, err)) {
      std::cerr << "error: " << err << "\n";
      return 1;
    }
  }

  if (annotate->parsed()) cfg.command = nesum::Command::annotate;
  if (summarize->parsed()) {
    cfg.command = nesum::Command::summarize;
    auto method = nesum::parse_method(method_name);
    if (!method) {
      std::cerr << "error: unknown method '" << method_name << "'\n";
      return 1;
    }
    cfg.method = *method;
  }
  if (evaluate->parsed()) cfg.command = nesum::Command::evaluate;
  if (train->parsed()) cfg.command = nesum::Command::train;
  if (stats->parsed()) cfg.command = nesum::Command::stats;

  return nesum::run_command(cfg);
}
