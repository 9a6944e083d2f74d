#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "nesum/annotate.hpp"
#include "nesum/corpus.hpp"
#include "nesum/extractive.hpp"
#include "nesum/metrics.hpp"
#include "nesum/pipeline.hpp"
#include "nesum/seq2seq.hpp"

namespace py = pybind11;
using namespace nesum;
namespace s2s = nesum::seq2seq;

namespace {

std::vector<IobTag> parse_tags(const std::vector<std::string>& tags) {
  std::vector<IobTag> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(parse_iob_tag(t));
  return out;
}

std::vector<std::string> format_tags(const std::vector<IobTag>& tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(to_string(t));
  return out;
}

AnnotatedText build_annotated(const std::vector<std::string>& tokens,
                              const std::optional<std::vector<std::string>>& tags) {
  AnnotatedText a;
  a.tokens = tokens;
  a.sentence_bounds = split_sentences(tokens);
  if (tags) {
    if (tags->size() != tokens.size())
      throw ArgumentError("tags and tokens differ in length");
    a.tags = parse_tags(*tags);
    repair_iob2(a.tags);
  } else {
    a.tags.assign(tokens.size(), IobTag::outside());
  }
  return a;
}

py::dict summary_to_dict(const SummarizerOutput& out) {
  py::dict d;
  d["doc_id"] = out.doc_id;
  d["method"] = std::string(to_string(out.method));
  d["summary_tokens"] = out.summary_tokens;
  d["summary"] = postprocess_summary(out.summary_tokens);
  d["chosen_sentence"] =
      out.chosen_sentence ? py::cast(*out.chosen_sentence) : py::none();
  d["seed"] = out.seed ? py::cast(*out.seed) : py::none();
  return d;
}

// Minimal trained-model facade for the python surface.
struct Model {
  s2s::Checkpoint ckpt;

  std::vector<std::string> decode(
      const std::vector<std::string>& tokens,
      const std::optional<std::vector<std::string>>& tags) const {
    std::vector<int> src;
    src.reserve(tokens.size());
    for (const auto& t : tokens) src.push_back(ckpt.vocab.lookup(t));
    std::vector<int> src_ner;
    if (ckpt.config.ner_feature_dim == s2s::kNerFeatureDim) {
      if (!tags) throw ArgumentError("this model needs entity tags");
      auto parsed = parse_tags(*tags);
      if (parsed.size() != tokens.size())
        throw ArgumentError("tags and tokens differ in length");
      for (const auto& t : parsed) src_ner.push_back(s2s::ner_feature_index(t));
    }
    return s2s::greedy_decode(ckpt.params, ckpt.config, ckpt.vocab, src, src_ner);
  }

  void save(const std::string& path) const { s2s::save_checkpoint(path, ckpt); }
};

s2s::Example make_example(const s2s::Vocab& vocab,
                          const std::vector<std::string>& src,
                          const std::vector<std::string>& tgt,
                          const std::optional<std::vector<std::string>>& tags) {
  s2s::Example ex;
  for (const auto& t : src) ex.src.push_back(vocab.lookup(t));
  if (tags) {
    auto parsed = parse_tags(*tags);
    if (parsed.size() != src.size())
      throw ArgumentError("tags and tokens differ in length");
    for (const auto& t : parsed) ex.src_ner.push_back(s2s::ner_feature_index(t));
  }
  for (const auto& t : tgt) ex.tgt.push_back(vocab.lookup(t));
  ex.tgt.push_back(s2s::Vocab::kEos);
  return ex;
}

using Pair = std::pair<std::vector<std::string>, std::vector<std::string>>;
using TagList = std::optional<std::vector<std::vector<std::string>>>;

Model train_model(const s2s::ModelConfig& config, const std::vector<Pair>& train_pairs,
                  const std::optional<std::vector<Pair>>& dev_pairs,
                  const TagList& train_tags, const TagList& dev_tags) {
  config.validate();
  const bool use_ner = config.ner_feature_dim == s2s::kNerFeatureDim;
  if (use_ner && !train_tags)
    throw ArgumentError("ner_feature_dim=17 needs train_tags");

  std::vector<std::vector<std::string>> stream;
  for (const auto& [src, tgt] : train_pairs) {
    stream.push_back(src);
    stream.push_back(tgt);
  }
  auto vocab = s2s::Vocab::build(stream, 25000);

  auto to_examples = [&](const std::vector<Pair>& pairs, const TagList& tags) {
    std::vector<s2s::Example> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::optional<std::vector<std::string>> t;
      if (use_ner) {
        if (!tags || i >= tags->size())
          throw ArgumentError("entity tags missing for pair " + std::to_string(i));
        t = (*tags)[i];
      }
      out.push_back(make_example(vocab, pairs[i].first, pairs[i].second, t));
    }
    return out;
  };

  auto train_set = to_examples(train_pairs, train_tags);
  auto dev_set =
      dev_pairs ? to_examples(*dev_pairs, dev_tags) : train_set;

  auto params = s2s::ModelParams::init(config, vocab.size());
  auto result = s2s::train(params, config, train_set, dev_set);

  Model m;
  m.ckpt.config = config;
  m.ckpt.vocab = std::move(vocab);
  m.ckpt.params = std::move(result.best_params);
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "named-entity-aware summarization toolkit";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  // --- corpus ---------------------------------------------------------
  m.def("tokenize", &tokenize, py::arg("text"),
        "rule-based tokenizer: whitespace split plus punctuation detachment");
  m.def(
      "split_sentences",
      [](const std::vector<std::string>& tokens) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& r : split_sentences(tokens)) out.push_back({r.begin, r.end});
        return out;
      },
      py::arg("tokens"), "half-open sentence ranges over a token list");
  m.def(
      "repair_iob2",
      [](const std::vector<std::string>& tags) {
        auto parsed = parse_tags(tags);
        auto repairs = repair_iob2(parsed);
        return py::make_tuple(format_tags(parsed), repairs);
      },
      py::arg("tags"), "returns (repaired tags, repair count)");
  m.def("make_doc_id", &make_doc_id, py::arg("url"));

  // --- gazetteer annotator ---------------------------------------------
  py::class_<Gazetteer>(m, "Gazetteer")
      .def_static("load", &Gazetteer::load, py::arg("path"))
      .def_static(
          "from_entries",
          [](const std::vector<std::pair<std::string, std::string>>& entries) {
            std::vector<std::pair<std::string, EntityType>> converted;
            for (const auto& [surface, code] : entries) {
              if (code.size() != 1)
                throw ArgumentError("type code must be one character");
              converted.push_back({surface, entity_type_from_code(code[0])});
            }
            return Gazetteer::from_entries(converted);
          },
          py::arg("entries"), "entries as (surface form, type code) pairs")
      .def("annotate",
           [](const Gazetteer& g, const std::vector<std::string>& tokens) {
             return format_tags(g.annotate(tokens));
           })
      .def_property_readonly("size", &Gazetteer::size)
      .def_property_readonly("max_len", &Gazetteer::max_len);

  // --- metrics ----------------------------------------------------------
  py::class_<Prf>(m, "Prf")
      .def_readonly("precision", &Prf::precision)
      .def_readonly("recall", &Prf::recall)
      .def_readonly("f", &Prf::f)
      .def("__repr__", [](const Prf& p) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "Prf(p=%.6f, r=%.6f, f=%.6f)", p.precision,
                      p.recall, p.f);
        return std::string(buf);
      });

  m.def(
      "rouge_raw_n",
      [](const std::vector<std::string>& ref, const std::vector<std::string>& cand,
         std::size_t n) { return rouge_raw_n(ref, cand, n); },
      py::arg("reference"), py::arg("candidate"), py::arg("n"));
  m.def(
      "rouge_raw_l",
      [](const std::vector<std::string>& ref, const std::vector<std::string>& cand) {
        return rouge_raw_l(ref, cand);
      },
      py::arg("reference"), py::arg("candidate"));
  m.def(
      "entity_view",
      [](const std::vector<std::string>& tokens, const std::vector<std::string>& tags) {
        return entity_view(tokens, parse_tags(tags));
      },
      py::arg("tokens"), py::arg("tags"));
  m.def("rouge_ne", &rouge_ne, py::arg("reference_view"), py::arg("candidate_view"),
        py::arg("paper_literal") = false);

  // --- extractive summarizers -------------------------------------------
  m.def(
      "select_first",
      [](const std::vector<std::string>& tokens, const std::string& doc_id) {
        return summary_to_dict(select_first(build_annotated(tokens, {}), doc_id));
      },
      py::arg("tokens"), py::arg("doc_id") = "");
  m.def(
      "select_random",
      [](const std::vector<std::string>& tokens, const std::string& doc_id,
         std::uint64_t seed) {
        return summary_to_dict(
            select_random(build_annotated(tokens, {}), doc_id, seed));
      },
      py::arg("tokens"), py::arg("doc_id") = "", py::arg("seed") = 0);
  m.def(
      "textrank_select",
      [](const std::vector<std::string>& tokens, const std::string& doc_id) {
        return summary_to_dict(textrank_select(build_annotated(tokens, {}), doc_id));
      },
      py::arg("tokens"), py::arg("doc_id") = "");
  m.def(
      "textrank_scores",
      [](const std::vector<std::string>& tokens) {
        return textrank_scores(build_annotated(tokens, {}));
      },
      py::arg("tokens"));
  m.def(
      "select_ned",
      [](const std::vector<std::string>& tokens, const std::vector<std::string>& tags,
         const std::string& doc_id, std::size_t min_sentence_len) {
        return summary_to_dict(
            select_ned(build_annotated(tokens, tags), doc_id, min_sentence_len));
      },
      py::arg("tokens"), py::arg("tags"), py::arg("doc_id") = "",
      py::arg("min_sentence_len") = 1);
  m.def(
      "ned_scores",
      [](const std::vector<std::string>& tokens, const std::vector<std::string>& tags) {
        std::vector<double> out;
        for (const auto& s : ned_scores(build_annotated(tokens, tags)))
          out.push_back(s.score);
        return out;
      },
      py::arg("tokens"), py::arg("tags"));

  m.def("postprocess_summary", &postprocess_summary, py::arg("tokens"));

  // --- attention model ----------------------------------------------------
  py::class_<s2s::ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("embed_dim", &s2s::ModelConfig::embed_dim)
      .def_readwrite("hidden_dim", &s2s::ModelConfig::hidden_dim)
      .def_readwrite("energy_dim", &s2s::ModelConfig::energy_dim)
      .def_readwrite("dropout", &s2s::ModelConfig::dropout)
      .def_readwrite("ner_feature_dim", &s2s::ModelConfig::ner_feature_dim)
      .def_readwrite("max_src_len", &s2s::ModelConfig::max_src_len)
      .def_readwrite("max_tgt_len", &s2s::ModelConfig::max_tgt_len)
      .def_readwrite("teacher_forcing", &s2s::ModelConfig::teacher_forcing)
      .def_readwrite("learning_rate", &s2s::ModelConfig::learning_rate)
      .def_readwrite("batch_size", &s2s::ModelConfig::batch_size)
      .def_readwrite("max_epochs", &s2s::ModelConfig::max_epochs)
      .def_readwrite("seed", &s2s::ModelConfig::seed);

  py::class_<Model>(m, "Model")
      .def("decode", &Model::decode, py::arg("tokens"),
           py::arg("tags") = std::nullopt)
      .def("save", &Model::save, py::arg("path"))
      .def_property_readonly("vocab_size",
                             [](const Model& m_) { return m_.ckpt.vocab.size(); })
      .def_static("load", [](const std::string& path) {
        Model m_;
        m_.ckpt = s2s::load_checkpoint(path);
        return m_;
      });

  m.def("train_model", &train_model, py::arg("config"), py::arg("train_pairs"),
        py::arg("dev_pairs") = std::nullopt, py::arg("train_tags") = std::nullopt,
        py::arg("dev_tags") = std::nullopt,
        "trains the attention model on (source tokens, target tokens) pairs");
}
