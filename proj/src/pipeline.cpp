#include "nesum/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nesum/annotate.hpp"
#include "nesum/log.hpp"
#include "nesum/seq2seq.hpp"
#include "nesum/utf8.hpp"

namespace nesum {

using nlohmann::json;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::annotate:
      return "annotate";
    case Command::summarize:
      return "summarize";
    case Command::evaluate:
      return "evaluate";
    case Command::train:
      return "train";
    case Command::stats:
      return "stats";
  }
  return "annotate";
}

void RunConfig::validate() const {
  auto require = [](const std::string& path, const char* what) {
    if (path.empty())
      throw ArgumentError(std::string("missing required path: ") + what);
  };
  switch (command) {
    case Command::annotate:
      require(corpus_path, "--corpus");
      require(gazetteer_path, "--gazetteer");
      require(output_path, "--out");
      break;
    case Command::summarize:
      require(corpus_path, "--corpus");
      require(output_path, "--out");
      if (method == Method::ned) require(annotations_path, "--annotations");
      if (method == Method::seq2seq || method == Method::seq2seq_ner)
        require(checkpoint_path, "--ckpt");
      if (method == Method::seq2seq_ner) require(annotations_path, "--annotations");
      break;
    case Command::evaluate:
      require(corpus_path, "--corpus");
      require(summaries_path, "--summaries");
      require(gazetteer_path, "--gazetteer");
      require(output_path, "--out");
      break;
    case Command::train:
      require(corpus_path, "--corpus");
      require(output_path, "--out");
      break;
    case Command::stats:
      require(corpus_path, "--corpus");
      require(annotations_path, "--annotations");
      break;
  }
}

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

namespace {

bool glues_left(char32_t cp) {
  switch (cp) {
    case U'.':
    case U',':
    case U'!':
    case U'?':
    case U';':
    case U':':
    case U'%':
    case U')':
      return true;
    default:
      return false;
  }
}

bool glues_right(char32_t cp) {
  return cp == U'(' || cp == 0x201E /* „ */ || cp == 0x00AB /* « */ ||
         cp == 0x201A /* ‚ */;
}

}  // namespace

std::string postprocess_summary(const std::vector<std::string>& tokens) {
  std::vector<char32_t> out;
  bool suppress_next_space = false;
  for (const auto& tok : tokens) {
    const auto cps = utf8::decode(tok);
    if (cps.empty()) continue;
    if (!out.empty() && !suppress_next_space && !glues_left(cps.front()))
      out.push_back(U' ');
    suppress_next_space = glues_right(cps.back());
    out.insert(out.end(), cps.begin(), cps.end());
  }
  // trim (tokens themselves may be whitespace-free, but stay safe)
  std::size_t b = 0, e = out.size();
  while (b < e && utf8::is_space(out[b])) ++b;
  while (e > b && utf8::is_space(out[e - 1])) --e;
  std::vector<char32_t> trimmed(out.begin() + b, out.begin() + e);
  for (auto& cp : trimmed) {
    if (utf8::is_alpha(cp)) {
      cp = utf8::to_upper(cp);
      break;
    }
  }
  return utf8::encode(trimmed);
}

// ---------------------------------------------------------------------------
// Annotate
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write output file: " + path);
  return out;
}

void debug_reader_errors(const CorpusReader& reader) {
  if (log_level() < LogLevel::debug) return;
  for (const auto& err : reader.line_errors())
    std::cerr << "debug: corpus " << err << "\n";
}

}  // namespace

AnnotateResult run_annotate(const RunConfig& cfg) {
  cfg.validate();
  const Gazetteer gaz = Gazetteer::load(cfg.gazetteer_path);
  CorpusReader reader(cfg.corpus_path, cfg.split_filter);

  std::vector<AnnotationRecord> records;
  AnnotateResult result;
  while (auto doc = reader.next()) {
    ++result.documents;
    for (Field field : cfg.fields) {
      auto tokens = tokenize(doc->field(field));
      if (tokens.empty()) continue;
      AnnotationRecord rec;
      rec.doc_id = doc->doc_id;
      rec.field = field;
      rec.tags.reserve(tokens.size());
      for (const auto& tag : gaz.annotate(tokens)) rec.tags.push_back(to_string(tag));
      rec.tokens = std::move(tokens);
      records.push_back(std::move(rec));
    }
  }
  result.skipped_documents = reader.skipped();
  debug_reader_errors(reader);

  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    return static_cast<int>(a.field) < static_cast<int>(b.field);
  });
  auto out = open_output(cfg.output_path);
  for (const auto& rec : records) out << annotation_to_json(rec) << "\n";
  result.records = records.size();
  return result;
}

// ---------------------------------------------------------------------------
// Summarize
// ---------------------------------------------------------------------------

namespace {

json summary_to_json(const SummarizerOutput& s) {
  json j;
  j["doc_id"] = s.doc_id;
  j["method"] = std::string(to_string(s.method));
  j["summary"] = postprocess_summary(s.summary_tokens);
  if (s.chosen_sentence)
    j["chosen_sentence"] = *s.chosen_sentence;
  else
    j["chosen_sentence"] = nullptr;
  if (s.seed)
    j["seed"] = *s.seed;
  else
    j["seed"] = nullptr;
  return j;
}

AnnotatedText text_without_annotations(const std::vector<std::string>& tokens) {
  AnnotatedText a;
  a.tokens = tokens;
  a.sentence_bounds = split_sentences(tokens);
  a.tags.assign(tokens.size(), IobTag::outside());
  return a;
}

}  // namespace

SummarizeResult run_summarize(const RunConfig& cfg) {
  cfg.validate();
  const bool needs_annotations =
      cfg.method == Method::ned || cfg.method == Method::seq2seq_ner;
  std::map<AnnotationKey, AnnotationRecord> annotations;
  if (needs_annotations) annotations = load_annotations(cfg.annotations_path);

  std::optional<seq2seq::Checkpoint> ckpt;
  if (cfg.method == Method::seq2seq || cfg.method == Method::seq2seq_ner) {
    ckpt = seq2seq::load_checkpoint(cfg.checkpoint_path);
    const bool wants_ner = cfg.method == Method::seq2seq_ner;
    if (wants_ner != (ckpt->config.ner_feature_dim == seq2seq::kNerFeatureDim))
      throw DataError("checkpoint does not match the requested method");
  }

  CorpusReader reader(cfg.corpus_path, cfg.split_filter);
  SummarizeResult result;
  std::vector<SummarizerOutput> outputs;
  while (auto doc = reader.next()) {
    auto tokens = tokenize(doc->text);
    if (tokens.empty()) {
      ++result.skipped_documents;
      continue;
    }

    SummarizerOutput out;
    if (cfg.method == Method::seq2seq || cfg.method == Method::seq2seq_ner) {
      std::vector<int> src;
      src.reserve(tokens.size());
      for (const auto& t : tokens) src.push_back(ckpt->vocab.lookup(t));
      std::vector<int> src_ner;
      if (cfg.method == Method::seq2seq_ner) {
        auto it = annotations.find({doc->doc_id, Field::text});
        if (it == annotations.end())
          throw DataError("annotate stage output missing for doc " + doc->doc_id +
                          " (field text)");
        auto annotated = attach_annotations(tokens, it->second);
        src_ner.reserve(tokens.size());
        for (const auto& tag : annotated.tags)
          src_ner.push_back(seq2seq::ner_feature_index(tag));
      }
      out.doc_id = doc->doc_id;
      out.method = cfg.method;
      out.summary_tokens =
          seq2seq::greedy_decode(ckpt->params, ckpt->config, ckpt->vocab, src, src_ner);
    } else {
      AnnotatedText annotated;
      if (cfg.method == Method::ned) {
        auto it = annotations.find({doc->doc_id, Field::text});
        if (it == annotations.end())
          throw DataError("annotate stage output missing for doc " + doc->doc_id +
                          " (field text)");
        annotated = attach_annotations(tokens, it->second);
      } else {
        annotated = text_without_annotations(tokens);
      }
      if (annotated.sentence_bounds.empty()) {
        ++result.skipped_documents;
        continue;
      }
      switch (cfg.method) {
        case Method::first:
          out = select_first(annotated, doc->doc_id);
          break;
        case Method::random:
          out = select_random(annotated, doc->doc_id, cfg.seed);
          break;
        case Method::textrank:
          out = textrank_select(annotated, doc->doc_id);
          break;
        case Method::ned:
        default:
          out = select_ned(annotated, doc->doc_id, cfg.min_sentence_len);
          break;
      }
    }
    outputs.push_back(std::move(out));
    ++result.documents;
  }
  result.skipped_documents += reader.skipped();
  debug_reader_errors(reader);

  std::sort(outputs.begin(), outputs.end(),
            [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  auto out = open_output(cfg.output_path);
  for (const auto& s : outputs) out << summary_to_json(s).dump() << "\n";
  return result;
}

// ---------------------------------------------------------------------------
// Evaluate
// ---------------------------------------------------------------------------

namespace {

struct SummaryLine {
  std::string doc_id;
  std::string summary;
};

std::vector<SummaryLine> load_summaries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open summaries file: " + path);
  std::vector<SummaryLine> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      lines.push_back({j.at("doc_id").get<std::string>(),
                       j.at("summary").get<std::string>()});
    } catch (const json::exception& e) {
      throw DataError("summaries file line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return lines;
}

json prf_to_json(const Prf& v) {
  return json{{"p", v.precision}, {"r", v.recall}, {"f", v.f}};
}

}  // namespace

std::string format_report_table(const std::string& method, const MetricReport& r) {
  std::ostringstream os;
  char buf[512];
  os << "method        "
        "| RougeRaw-1           | RougeRaw-2           "
        "| RougeRaw-L           | RougeNE\n";
  os << "              "
        "|     P      R      F  |     P      R      F  "
        "|     P      R      F  |     P      R      F\n";
  auto cell = [&](const Prf& v) {
    std::snprintf(buf, sizeof buf, "| %5.1f  %5.1f  %5.1f ", 100.0 * v.precision,
                  100.0 * v.recall, 100.0 * v.f);
    return std::string(buf);
  };
  std::snprintf(buf, sizeof buf, "%-14s", method.c_str());
  os << buf << cell(r.rouge1) << cell(r.rouge2) << cell(r.rougeL) << cell(r.rougeNE)
     << "\n";
  return os.str();
}

EvaluateResult run_evaluate(const RunConfig& cfg) {
  cfg.validate();
  const Gazetteer gaz = Gazetteer::load(cfg.gazetteer_path);
  auto summaries = load_summaries(cfg.summaries_path);
  std::sort(summaries.begin(), summaries.end(),
            [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });

  std::map<std::string, std::string> headlines;
  std::string method_name = "unknown";
  {
    CorpusReader reader(cfg.corpus_path, cfg.split_filter);
    while (auto doc = reader.next()) headlines[doc->doc_id] = doc->headline;
    std::ifstream sniff(cfg.summaries_path);
    std::string first_line;
    if (std::getline(sniff, first_line) && !first_line.empty()) {
      auto j = json::parse(first_line, nullptr, false);
      if (j.is_object() && j.contains("method") && j["method"].is_string())
        method_name = j["method"].get<std::string>();
    }
  }

  EvaluateResult result;
  std::vector<MetricReport> reports;
  json per_doc = json::array();
  for (const auto& line : summaries) {
    auto it = headlines.find(line.doc_id);
    if (it == headlines.end()) {
      result.missing_doc_ids.push_back(line.doc_id);
      continue;
    }
    const auto ref_tokens = tokenize(it->second);
    const auto cand_tokens = tokenize(line.summary);

    MetricReport report;
    report.rouge1 = rouge_raw_n(ref_tokens, cand_tokens, 1);
    report.rouge2 = rouge_raw_n(ref_tokens, cand_tokens, 2);
    report.rougeL = rouge_raw_l(ref_tokens, cand_tokens);
    const auto ref_view = entity_view(ref_tokens, gaz.annotate(ref_tokens));
    const auto cand_view = entity_view(cand_tokens, gaz.annotate(cand_tokens));
    report.rougeNE = rouge_ne(ref_view, cand_view, cfg.paper_literal_ne);
    reports.push_back(report);

    json j;
    j["doc_id"] = line.doc_id;
    j["rouge1"] = prf_to_json(report.rouge1);
    j["rouge2"] = prf_to_json(report.rouge2);
    j["rougeL"] = prf_to_json(report.rougeL);
    j["rougeNE"] = prf_to_json(report.rougeNE);
    per_doc.push_back(std::move(j));
  }
  if (reports.empty()) throw DataError("no summaries matched the corpus");

  result.corpus = aggregate(reports);
  result.documents = reports.size();
  result.table = format_report_table(method_name, result.corpus);

  auto out = open_output(cfg.output_path);
  for (const auto& j : per_doc) out << j.dump() << "\n";

  if (!cfg.report_path.empty()) {
    json report;
    report["method"] = method_name;
    report["documents"] = result.documents;
    report["corpus"] = json::parse(report_to_json(result.corpus));
    report["errors"] = {{"missing_doc_ids", result.missing_doc_ids}};
    auto rep = open_output(cfg.report_path);
    rep << report.dump(1) << "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------
// Stats
// ---------------------------------------------------------------------------

std::string run_stats(const RunConfig& cfg) {
  cfg.validate();
  auto annotations = load_annotations(cfg.annotations_path);

  std::ostringstream os;
  char buf[256];
  for (Field field : cfg.fields) {
    std::array<EntityStats, 4> per_split{};
    {
      CorpusReader reader(cfg.corpus_path);
      while (auto doc = reader.next()) {
        auto it = annotations.find({doc->doc_id, field});
        if (it == annotations.end()) {
          if (!tokenize(doc->field(field)).empty())
            throw DataError(std::string("missing annotations for field ") +
                            std::string(to_string(field)) + " of doc " + doc->doc_id);
          continue;  // empty field, nothing to count
        }
        auto annotated =
            attach_annotations(tokenize(doc->field(field)), it->second);
        per_split[static_cast<int>(doc->split)].add(annotated);
      }
    }

    os << "Entity statistics: field " << to_string(field) << "\n";
    std::snprintf(buf, sizeof buf, "%-22s %10s %10s %10s %10s\n", "Entity type",
                  "train", "dev", "test", "oodtest");
    os << buf;
    for (int t = 0; t < kEntityTypeCount; ++t) {
      std::snprintf(buf, sizeof buf, "%-22s %10llu %10llu %10llu %10llu\n",
                    std::string(entity_type_name(static_cast<EntityType>(t))).c_str(),
                    static_cast<unsigned long long>(per_split[0].counts[t]),
                    static_cast<unsigned long long>(per_split[1].counts[t]),
                    static_cast<unsigned long long>(per_split[2].counts[t]),
                    static_cast<unsigned long long>(per_split[3].counts[t]));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%-22s %10llu %10llu %10llu %10llu\n", "Total",
                  static_cast<unsigned long long>(per_split[0].total),
                  static_cast<unsigned long long>(per_split[1].total),
                  static_cast<unsigned long long>(per_split[2].total),
                  static_cast<unsigned long long>(per_split[3].total));
    os << buf;
    os << "Documents without entity (%):";
    for (const auto& stats : per_split) {
      if (stats.docs_total == 0) {
        os << "    n/a";
      } else {
        std::snprintf(buf, sizeof buf, "  %5.1f",
                      100.0 * static_cast<double>(stats.docs_without_entity) /
                          static_cast<double>(stats.docs_total));
        os << buf;
      }
    }
    os << "\n\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Train
// ---------------------------------------------------------------------------

namespace {

seq2seq::ModelConfig load_model_config(const std::string& path) {
  seq2seq::ModelConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model config is not valid JSON: ") + e.what());
  }
  auto get = [&](const char* key, auto& into) {
    if (j.contains(key)) into = j.at(key).get<std::decay_t<decltype(into)>>();
  };
  get("embed_dim", cfg.embed_dim);
  get("hidden_dim", cfg.hidden_dim);
  get("energy_dim", cfg.energy_dim);
  get("dropout", cfg.dropout);
  get("ner_feature_dim", cfg.ner_feature_dim);
  get("max_src_len", cfg.max_src_len);
  get("max_tgt_len", cfg.max_tgt_len);
  get("teacher_forcing", cfg.teacher_forcing);
  get("learning_rate", cfg.learning_rate);
  get("batch_size", cfg.batch_size);
  get("max_epochs", cfg.max_epochs);
  get("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace

TrainSummary run_train(const RunConfig& cfg) {
  cfg.validate();
  auto model_cfg = load_model_config(cfg.model_config_path);
  const bool use_ner = model_cfg.ner_feature_dim == seq2seq::kNerFeatureDim;
  if (use_ner && cfg.annotations_path.empty())
    throw ArgumentError("the entity-feature model needs --annotations");

  std::map<AnnotationKey, AnnotationRecord> annotations;
  if (use_ner) annotations = load_annotations(cfg.annotations_path);

  std::vector<std::vector<std::string>> vocab_stream;
  std::vector<seq2seq::Example> train_set, dev_set;
  std::vector<std::vector<std::string>> train_tokens;  // parallel to examples
  struct RawPair {
    std::vector<std::string> src_tokens;
    std::vector<std::string> tgt_tokens;
    std::vector<int> src_ner;
    Split split;
  };
  std::vector<RawPair> pairs;
  {
    CorpusReader reader(cfg.corpus_path);
    while (auto doc = reader.next()) {
      if (doc->split != Split::train && doc->split != Split::dev) continue;
      RawPair pair;
      pair.src_tokens = tokenize(doc->text);
      pair.tgt_tokens = tokenize(doc->headline);
      if (pair.src_tokens.empty() || pair.tgt_tokens.empty()) continue;
      pair.split = doc->split;
      if (use_ner) {
        auto it = annotations.find({doc->doc_id, Field::text});
        if (it == annotations.end())
          throw DataError("annotate stage output missing for doc " + doc->doc_id +
                          " (field text)");
        auto annotated = attach_annotations(pair.src_tokens, it->second);
        for (const auto& tag : annotated.tags)
          pair.src_ner.push_back(seq2seq::ner_feature_index(tag));
      }
      if (pair.split == Split::train) {
        vocab_stream.push_back(pair.src_tokens);
        vocab_stream.push_back(pair.tgt_tokens);
      }
      pairs.push_back(std::move(pair));
    }
  }

  auto vocab = seq2seq::Vocab::build(vocab_stream, 25000);
  for (const auto& pair : pairs) {
    seq2seq::Example ex;
    for (const auto& t : pair.src_tokens) ex.src.push_back(vocab.lookup(t));
    ex.src_ner = pair.src_ner;
    for (const auto& t : pair.tgt_tokens) ex.tgt.push_back(vocab.lookup(t));
    ex.tgt.push_back(seq2seq::Vocab::kEos);
    (pair.split == Split::train ? train_set : dev_set).push_back(std::move(ex));
  }
  if (train_set.empty()) throw DataError("no usable train-split documents");
  if (dev_set.empty()) throw DataError("no usable dev-split documents");

  auto params = seq2seq::ModelParams::init(model_cfg, vocab.size());
  auto result = seq2seq::train(params, model_cfg, train_set, dev_set);

  seq2seq::Checkpoint ckpt;
  ckpt.config = model_cfg;
  ckpt.vocab = std::move(vocab);
  ckpt.params = std::move(result.best_params);
  seq2seq::save_checkpoint(cfg.output_path, ckpt);

  const std::string log_path =
      cfg.log_path.empty() ? cfg.output_path + ".log.csv" : cfg.log_path;
  auto log = open_output(log_path);
  log << seq2seq::train_log_to_csv(result.log);

  TrainSummary summary;
  summary.epochs_run = static_cast<int>(result.log.size());
  summary.best_epoch = result.best_epoch;
  summary.best_dev_loss = result.best_dev_loss;
  return summary;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

int run_command(const RunConfig& cfg) {
  try {
    switch (cfg.command) {
      case Command::annotate: {
        auto r = run_annotate(cfg);
        if (log_level() >= LogLevel::info)
          std::cout << "annotated " << r.documents << " documents (" << r.records
                    << " records, " << r.skipped_documents << " skipped)\n";
        return 0;
      }
      case Command::summarize: {
        auto r = run_summarize(cfg);
        if (log_level() >= LogLevel::info)
          std::cout << "summarized " << r.documents << " documents ("
                    << r.skipped_documents << " skipped)\n";
        return 0;
      }
      case Command::evaluate: {
        auto r = run_evaluate(cfg);
        std::cout << r.table;
        if (!r.missing_doc_ids.empty()) {
          std::cout << "errors: " << r.missing_doc_ids.size()
                    << " summaries without a corpus document:";
          for (const auto& id : r.missing_doc_ids) std::cout << " " << id;
          std::cout << "\n";
        }
        return 0;
      }
      case Command::train: {
        auto r = run_train(cfg);
        if (log_level() >= LogLevel::info)
          std::cout << "trained " << r.epochs_run << " epochs, best epoch "
                    << r.best_epoch << " (dev loss " << r.best_dev_loss << ")\n";
        return 0;
      }
      case Command::stats: {
        std::cout << run_stats(cfg);
        return 0;
      }
    }
    return 0;
  } catch (const ArgumentError& e) {
    std::cerr << "error [" << to_string(cfg.command) << "]: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "error [" << to_string(cfg.command) << "]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error [" << to_string(cfg.command) << "]: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nesum
