#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "nesum/corpus.hpp"

namespace nesum {

/// A named-entity annotator: deterministic token-sequence tagger producing
/// a length-preserving, IOB2 well-formed tag sequence.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual std::vector<IobTag> annotate(const std::vector<std::string>& tokens) const = 0;
};

/// Dictionary tagger. Entries are keyed by lowercase token sequences; a later
/// entry with the same key overrides an earlier one. Matching is greedy
/// longest-match left-to-right and case-insensitive, so tagging is fully
/// deterministic.
class Gazetteer : public Annotator {
 public:
  /// Loads a TSV file with lines "<surface form>\t<type code>". The surface
  /// form is tokenized with corpus tokenize() and lowercased. Throws
  /// DataError with a line number on unknown type codes or malformed lines.
  static Gazetteer load(const std::string& path);

  /// Builds directly from (surface form, type) pairs, in file order.
  static Gazetteer from_entries(
      const std::vector<std::pair<std::string, EntityType>>& entries);

  std::vector<IobTag> annotate(const std::vector<std::string>& tokens) const override;

  std::size_t size() const { return entries_.size(); }
  std::size_t max_len() const { return max_len_; }

 private:
  // key: entry tokens joined by a single space, lowercased
  std::map<std::string, EntityType> entries_;
  std::size_t max_len_ = 0;

  void insert(const std::string& surface, EntityType type);
};

}  // namespace nesum
