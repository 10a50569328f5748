#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "punnet/common.hpp"

namespace punnet {

// Word-level vocabulary with a reserved UNK at id 0. Keys are lowercased;
// ordering is deterministic: count descending, then word ascending.
class Vocabulary {
 public:
  static constexpr int kUnkId = 0;
  static constexpr const char* kUnkWord = "<unk>";

  Vocabulary() { words_.push_back(kUnkWord); }

  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t min_count = 1) {
    std::map<std::string, std::size_t> counts;
    for (const auto& sentence : corpus) {
      for (const auto& token : sentence) ++counts[to_lower_ascii(token)];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocabulary vocab;
    for (const auto& [word, count] : ranked) {
      if (count >= min_count) vocab.insert(word);
    }
    return vocab;
  }

  static Vocabulary from_words(const std::vector<std::string>& words) {
    Vocabulary vocab;
    for (const auto& w : words) {
      if (w != kUnkWord) vocab.insert(w);
    }
    return vocab;
  }

  // Includes UNK.
  std::size_t size() const { return words_.size(); }

  int id(const std::string& word) const {
    auto it = index_.find(to_lower_ascii(word));
    return it == index_.end() ? kUnkId : it->second;
  }

  const std::string& word(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
      throw ArgumentError("vocabulary id " + std::to_string(id) + " out of range");
    }
    return words_[static_cast<std::size_t>(id)];
  }

  const std::vector<std::string>& words() const { return words_; }

  std::vector<int> ids(const std::vector<std::string>& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
  }

 private:
  void insert(const std::string& word) {
    if (index_.emplace(word, static_cast<int>(words_.size())).second) {
      words_.push_back(word);
    }
  }

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace punnet
