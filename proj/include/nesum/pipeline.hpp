#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nesum/corpus.hpp"
#include "nesum/extractive.hpp"
#include "nesum/metrics.hpp"

namespace nesum {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class Command { annotate, summarize, evaluate, train, stats };

std::string_view to_string(Command c);

struct RunConfig {
  Command command = Command::annotate;

  std::string corpus_path;
  std::string annotations_path;
  std::string gazetteer_path;
  std::string summaries_path;
  std::string output_path;
  std::string report_path;        // evaluate: machine-readable JSON report
  std::string checkpoint_path;    // summarize with a trained model / train output
  std::string model_config_path;  // train
  std::string log_path;           // train: CSV log

  Method method = Method::first;
  std::uint64_t seed = 0;
  bool paper_literal_ne = false;
  std::size_t min_sentence_len = 1;
  std::vector<Field> fields = {Field::text, Field::headline, Field::abstract};
  std::optional<Split> split_filter;

  /// Checks that every path required by the chosen command is present,
  /// before any work starts. Throws ArgumentError.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Output post-processing
// ---------------------------------------------------------------------------

/// Joins tokens with single spaces, deletes the space before any of
/// . , ! ? ; : % ) and the space after ( and the opening quotes „ « ‚,
/// trims, and uppercases the first alphabetic character. No other
/// alphanumeric character is changed.
std::string postprocess_summary(const std::vector<std::string>& tokens);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct AnnotateResult {
  std::size_t documents = 0;
  std::size_t records = 0;
  std::size_t skipped_documents = 0;
};

/// Tokenizes the requested fields of every document and tags them with the
/// gazetteer; writes annotation JSONL sorted by (doc_id, field). Fields that
/// tokenize to nothing produce no record.
AnnotateResult run_annotate(const RunConfig& cfg);

struct SummarizeResult {
  std::size_t documents = 0;
  std::size_t skipped_documents = 0;  // no sentences / missing annotations
};

/// Runs the selected summarizer over the corpus and writes one JSON line per
/// document, sorted by doc_id: {"doc_id", "method", "summary",
/// "chosen_sentence", "seed"}.
SummarizeResult run_summarize(const RunConfig& cfg);

struct EvaluateResult {
  MetricReport corpus;
  std::size_t documents = 0;
  std::vector<std::string> missing_doc_ids;  // in summaries, not in corpus
  std::string table;                         // fixed-width, P R F per metric
};

/// Scores a summaries file against the reference headlines. Both sides are
/// tokenized with the corpus tokenizer; entity views for the entity-overlap
/// metric come from the one configured gazetteer annotator applied to both
/// sides. Writes the per-document JSONL to output_path (sorted by doc_id)
/// and, when report_path is set, the corpus-level JSON report.
EvaluateResult run_evaluate(const RunConfig& cfg);

/// Per-split entity statistics for the requested fields, Table-style text.
std::string run_stats(const RunConfig& cfg);

struct TrainSummary {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
};

/// Trains the attention model on train-split (text -> headline) pairs with
/// dev-split early stopping, then writes the best checkpoint and the CSV
/// training log.
TrainSummary run_train(const RunConfig& cfg);

/// Dispatches one command. Returns a process exit code: 0 ok, 1 usage error,
/// 2 data/input error, 3 numeric divergence. Failures print one line naming
/// the stage to stderr.
int run_command(const RunConfig& cfg);

/// One-row evaluation table in the published column order: precision,
/// recall, F for unigram, bigram, LCS and entity overlap, scaled x100 with
/// one decimal.
std::string format_report_table(const std::string& method, const MetricReport& r);

}  // namespace nesum
