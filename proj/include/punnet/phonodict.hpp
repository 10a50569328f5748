#pragma once

// CMU Pronouncing Dictionary parsing and word -> phoneme-id lookup.
//
// Dictionary lines look like
//   ;;; comment
//   PUN  P AH1 N
//   BASS(2)  B EY1 S
// Alternate pronunciations carry a "(n)" suffix and are grouped under the
// base word in file order. Vowel stress digits are stripped by default,
// which collapses AH0/AH1/AH2 onto AH and yields the 39-symbol base
// inventory; keeping stress switches to an extended inventory where each
// stressed vowel form is its own phoneme.

#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "punnet/common.hpp"

namespace punnet {

// Dense phoneme-id space. UNK is reserved for out-of-dictionary words and
// always takes the last id.
class PhonemeInventory {
 public:
  static constexpr const char* kUnkSymbol = "<UNK>";

  // ARPAbet base set: 39 symbols + UNK.
  static const PhonemeInventory& arpabet() {
    static const PhonemeInventory inv{/*with_stress=*/false};
    return inv;
  }

  // Base symbols plus the 45 stressed vowel forms (AA0..UW2) + UNK.
  static const PhonemeInventory& arpabet_stressed() {
    static const PhonemeInventory inv{/*with_stress=*/true};
    return inv;
  }

  std::size_t size() const { return symbols_.size(); }
  int unk_id() const { return static_cast<int>(symbols_.size()) - 1; }

  const std::string& symbol(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
      throw ArgumentError("phoneme id " + std::to_string(id) + " out of range");
    }
    return symbols_[static_cast<std::size_t>(id)];
  }

  // -1 when the symbol is not in the inventory.
  int id(const std::string& symbol) const {
    auto it = index_.find(symbol);
    return it == index_.end() ? -1 : it->second;
  }

  bool contains(const std::string& symbol) const { return index_.count(symbol) > 0; }

  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  explicit PhonemeInventory(bool with_stress) {
    static constexpr std::array<const char*, 39> kArpabet = {
        "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH", "EH", "ER", "EY",
        "F",  "G",  "HH", "IH", "IY", "JH", "K",  "L",  "M",  "N",  "NG", "OW", "OY",
        "P",  "R",  "S",  "SH", "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",  "ZH"};
    static constexpr std::array<const char*, 15> kVowels = {
        "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
        "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
    symbols_.assign(kArpabet.begin(), kArpabet.end());
    if (with_stress) {
      for (const char* v : kVowels) {
        for (char d : {'0', '1', '2'}) symbols_.push_back(std::string(v) + d);
      }
    }
    symbols_.push_back(kUnkSymbol);
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      index_.emplace(symbols_[i], static_cast<int>(i));
    }
  }

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

struct Pronunciation {
  std::vector<int> phoneme_ids;

  bool operator==(const Pronunciation&) const = default;
};

struct DictParseOptions {
  bool strip_stress = true;
};

class PronunciationLexicon {
 public:
  explicit PronunciationLexicon(const PhonemeInventory& inventory = PhonemeInventory::arpabet())
      : inventory_(&inventory) {}

  const PhonemeInventory& inventory() const { return *inventory_; }

  void add(const std::string& word, Pronunciation pron) {
    entries_[to_upper_ascii(word)].push_back(std::move(pron));
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t skipped_lines() const { return skipped_lines_; }
  void set_skipped_lines(std::size_t n) { skipped_lines_ = n; }

  // All alternates for a word, in file order; nullptr when absent.
  const std::vector<Pronunciation>* alternates(const std::string& word) const {
    auto it = entries_.find(to_upper_ascii(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  // First listed pronunciation; out-of-vocabulary words map to [UNK].
  Pronunciation lookup(const std::string& word) const {
    if (word.empty()) throw ArgumentError("lookup: empty word");
    auto it = entries_.find(to_upper_ascii(word));
    if (it == entries_.end()) return Pronunciation{{inventory_->unk_id()}};
    return it->second.front();
  }

  std::vector<Pronunciation> phonemize(const std::vector<std::string>& tokens) const {
    std::vector<Pronunciation> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lookup(t));
    return out;
  }

 private:
  const PhonemeInventory* inventory_;
  std::map<std::string, std::vector<Pronunciation>> entries_;
  std::size_t skipped_lines_ = 0;
};

namespace detail {

// "WORD(2)" -> "WORD"; plain words pass through.
inline std::string strip_alternate_marker(const std::string& word) {
  if (word.size() >= 3 && word.back() == ')') {
    const auto open = word.rfind('(');
    if (open != std::string::npos && open > 0) {
      bool digits = true;
      for (std::size_t i = open + 1; i + 1 < word.size(); ++i) {
        if (word[i] < '0' || word[i] > '9') digits = false;
      }
      if (digits) return word.substr(0, open);
    }
  }
  return word;
}

inline std::string strip_stress_digit(const std::string& symbol) {
  if (!symbol.empty() && symbol.back() >= '0' && symbol.back() <= '2') {
    return symbol.substr(0, symbol.size() - 1);
  }
  return symbol;
}

}  // namespace detail

inline PronunciationLexicon parse_dictionary(std::istream& in,
                                             const DictParseOptions& options = {}) {
  if (!in) throw IoError("parse_dictionary: unreadable stream");
  const PhonemeInventory& inv =
      options.strip_stress ? PhonemeInventory::arpabet() : PhonemeInventory::arpabet_stressed();
  PronunciationLexicon lexicon(inv);
  std::size_t skipped = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind(";;;", 0) == 0) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    std::vector<int> ids;
    std::string symbol;
    std::string bad_symbol;
    while (fields >> symbol) {
      const int id = inv.id(options.strip_stress ? detail::strip_stress_digit(symbol) : symbol);
      if (id < 0) {
        bad_symbol = symbol;
        break;
      }
      ids.push_back(id);
    }
    if (!bad_symbol.empty()) {
      throw FormatError("parse_dictionary: unknown phoneme '" + bad_symbol + "' on line " +
                        std::to_string(line_no) + ": " + line);
    }
    if (word.empty() || ids.empty()) {
      ++skipped;  // malformed line (no word or no phonemes)
      continue;
    }
    lexicon.add(detail::strip_alternate_marker(word), Pronunciation{std::move(ids)});
  }
  if (in.bad()) throw IoError("parse_dictionary: stream failed while reading");
  lexicon.set_skipped_lines(skipped);
  return lexicon;
}

inline PronunciationLexicon load_dictionary(const std::string& path,
                                            const DictParseOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dictionary file: " + path);
  return parse_dictionary(in, options);
}

}  // namespace punnet
