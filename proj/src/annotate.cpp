#include "nesum/annotate.hpp"

#include <fstream>

#include "nesum/utf8.hpp"

namespace nesum {

namespace {

std::string join_lower(const std::vector<std::string>& tokens, std::size_t begin,
                       std::size_t end) {
  std::string key;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) key.push_back(' ');
    key += utf8::lower(tokens[i]);
  }
  return key;
}

}  // namespace

void Gazetteer::insert(const std::string& surface, EntityType type) {
  auto tokens = tokenize(surface);
  if (tokens.empty()) return;
  entries_[join_lower(tokens, 0, tokens.size())] = type;
  max_len_ = std::max(max_len_, tokens.size());
}

Gazetteer Gazetteer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gazetteer file: " + path);
  Gazetteer g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 2 != line.size())
      throw DataError("gazetteer line " + std::to_string(line_no) +
                      ": expected '<surface form>\\t<type code>'");
    EntityType type;
    try {
      type = entity_type_from_code(line[tab + 1]);
    } catch (const DataError&) {
      throw DataError("gazetteer line " + std::to_string(line_no) +
                      ": unknown type code '" + line.substr(tab + 1) + "'");
    }
    g.insert(line.substr(0, tab), type);
  }
  return g;
}

Gazetteer Gazetteer::from_entries(
    const std::vector<std::pair<std::string, EntityType>>& entries) {
  Gazetteer g;
  for (const auto& [surface, type] : entries) g.insert(surface, type);
  return g;
}

std::vector<IobTag> Gazetteer::annotate(const std::vector<std::string>& tokens) const {
  std::vector<IobTag> tags(tokens.size(), IobTag::outside());
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t longest = 0;
    EntityType type = EntityType::NumbersInAddresses;
    std::size_t cap = std::min(max_len_, tokens.size() - i);
    for (std::size_t len = 1; len <= cap; ++len) {
      auto it = entries_.find(join_lower(tokens, i, i + len));
      if (it != entries_.end()) {
        longest = len;
        type = it->second;
      }
    }
    if (longest == 0) {
      ++i;
      continue;
    }
    tags[i] = IobTag::begin(type);
    for (std::size_t k = 1; k < longest; ++k) tags[i + k] = IobTag::inside(type);
    i += longest;
  }
  return tags;
}

}  // namespace nesum
