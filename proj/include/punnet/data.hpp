#pragma once

// Dataset ingestion and preparation. The canonical format is UTF-8 JSON
// Lines with keys id / tokens / label / pun_index; SemEval XML+gold and the
// two-column PTD file are adapted into it.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "punnet/common.hpp"
#include "punnet/rng.hpp"

namespace punnet {

struct Example {
  std::string id;
  std::vector<std::string> tokens;
  int label = 0;                      // y^D
  std::optional<std::size_t> pun_index;  // y^L, 0-based

  void validate() const {
    if (tokens.empty()) throw ArgumentError("example '" + id + "' has no tokens");
    if (pun_index) {
      if (label != 1) {
        throw ArgumentError("example '" + id + "' has a pun_index but label 0");
      }
      if (*pun_index >= tokens.size()) {
        throw ArgumentError("example '" + id + "' pun_index " + std::to_string(*pun_index) +
                            " out of range for " + std::to_string(tokens.size()) + " tokens");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Preprocessing: drop purely numeric / purely punctuation tokens
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_punct_codepoint(std::uint32_t c) {
  // ASCII punctuation (Unicode P*; excludes $ + < = > ^ ` | ~ which are S*).
  static constexpr const char* kAsciiPunct = "!\"#%&'()*,-./:;?@[\\]_{}";
  if (c < 0x80) {
    for (const char* p = kAsciiPunct; *p; ++p) {
      if (static_cast<std::uint32_t>(*p) == c) return true;
    }
    return false;
  }
  // Common non-ASCII punctuation blocks.
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB ||
         c == 0xBF || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF03) ||
         (c >= 0xFF05 && c <= 0xFF0A) || (c >= 0xFF0C && c <= 0xFF0F) || c == 0xFF1A ||
         c == 0xFF1B || c == 0xFF1F || c == 0xFF20 || (c >= 0xFF3B && c <= 0xFF3D) ||
         c == 0xFF3F || c == 0xFF5B || c == 0xFF5D;
}

inline bool is_digit_codepoint(std::uint32_t c) {
  return (c >= '0' && c <= '9') || (c >= 0xFF10 && c <= 0xFF19);
}

// Minimal UTF-8 decode; malformed bytes come back as 0xFFFD.
inline std::vector<std::uint32_t> decode_utf8(const std::string& s) {
  std::vector<std::uint32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (b < 0x80) {
      cp = b;
    } else if ((b >> 5) == 0x6 && i + 1 < s.size()) {
      cp = (b & 0x1F) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
      len = 2;
    } else if ((b >> 4) == 0xE && i + 2 < s.size()) {
      cp = (b & 0x0F) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6 |
           (static_cast<unsigned char>(s[i + 2]) & 0x3F);
      len = 3;
    } else if ((b >> 3) == 0x1E && i + 3 < s.size()) {
      cp = (b & 0x07) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12 |
           (static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6 |
           (static_cast<unsigned char>(s[i + 3]) & 0x3F);
      len = 4;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace detail

inline bool is_purely_punctuation(const std::string& token) {
  if (token.empty()) return false;
  for (std::uint32_t cp : detail::decode_utf8(token)) {
    if (!detail::is_punct_codepoint(cp)) return false;
  }
  return true;
}

inline bool is_purely_numeric(const std::string& token) {
  if (token.empty()) return false;
  for (std::uint32_t cp : detail::decode_utf8(token)) {
    if (!detail::is_digit_codepoint(cp)) return false;
  }
  return true;
}

struct PreprocessedTokens {
  std::vector<std::string> tokens;
  // new_index[i] is the post-filter position of original token i, or
  // npos when the token was dropped.
  std::vector<std::size_t> new_index;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

inline PreprocessedTokens preprocess_tokens(const std::vector<std::string>& tokens) {
  PreprocessedTokens out;
  out.new_index.assign(tokens.size(), PreprocessedTokens::npos);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_purely_numeric(tokens[i]) || is_purely_punctuation(tokens[i])) continue;
    out.new_index[i] = out.tokens.size();
    out.tokens.push_back(tokens[i]);
  }
  return out;
}

// nullopt when the sentence empties out or the gold pun token was dropped.
inline std::optional<Example> preprocess_example(const Example& ex) {
  PreprocessedTokens pre = preprocess_tokens(ex.tokens);
  if (pre.tokens.empty()) return std::nullopt;
  Example out = ex;
  out.tokens = std::move(pre.tokens);
  if (ex.pun_index) {
    const std::size_t remapped = pre.new_index[*ex.pun_index];
    if (remapped == PreprocessedTokens::npos) return std::nullopt;
    out.pun_index = remapped;
  }
  return out;
}

struct PreprocessStats {
  std::size_t kept = 0;
  std::size_t excluded = 0;
};

inline std::vector<Example> preprocess_dataset(const std::vector<Example>& dataset,
                                               PreprocessStats* stats = nullptr) {
  std::vector<Example> out;
  out.reserve(dataset.size());
  std::size_t excluded = 0;
  for (const auto& ex : dataset) {
    if (auto p = preprocess_example(ex)) {
      out.push_back(std::move(*p));
    } else {
      ++excluded;
    }
  }
  if (stats) *stats = {out.size(), excluded};
  return out;
}

// ---------------------------------------------------------------------------
// Canonical JSON Lines
// ---------------------------------------------------------------------------

inline std::vector<Example> read_canonical(std::istream& in) {
  if (!in) throw IoError("read_canonical: unreadable stream");
  std::vector<Example> out;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    Example ex;
    try {
      if (!j.contains("id") || !j.contains("tokens") || !j.contains("label")) {
        throw FormatError("missing required key (id, tokens, label)");
      }
      ex.id = j.at("id").get<std::string>();
      ex.tokens = j.at("tokens").get<std::vector<std::string>>();
      ex.label = j.at("label").get<int>();
      if (j.contains("pun_index") && !j.at("pun_index").is_null()) {
        const auto v = j.at("pun_index").get<long long>();
        if (v < 0) throw FormatError("negative pun_index");
        ex.pun_index = static_cast<std::size_t>(v);
      }
      if (ex.label != 0 && ex.label != 1) throw FormatError("label must be 0 or 1");
      ex.validate();
    } catch (const Error& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": bad field type: " + e.what());
    }
    if (!seen_ids.insert(ex.id).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate id '" + ex.id + "'");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::vector<Example> load_canonical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  try {
    return read_canonical(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_canonical(std::ostream& os, const std::vector<Example>& dataset) {
  for (const auto& ex : dataset) {
    nlohmann::json j;
    j["id"] = ex.id;
    j["tokens"] = ex.tokens;
    j["label"] = ex.label;
    j["pun_index"] = ex.pun_index ? nlohmann::json(*ex.pun_index) : nlohmann::json(nullptr);
    os << j.dump() << "\n";
  }
  if (!os) throw IoError("write_canonical: stream failed");
}

inline void write_canonical(const std::string& path, const std::vector<Example>& dataset) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_canonical(os, dataset);
}

// ---------------------------------------------------------------------------
// SemEval 2017 task 7 adapter (word-tokenized XML + tab-separated gold)
// ---------------------------------------------------------------------------

enum class SemEvalSubtask { Detection, Location, Auto };

namespace detail {

inline std::string xml_unescape(std::string s) {
  static const std::pair<const char*, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&apos;", '\''}, {"&quot;", '"'}};
  for (const auto& [entity, ch] : kEntities) {
    std::size_t pos = 0;
    const std::size_t len = std::strlen(entity);
    while ((pos = s.find(entity, pos)) != std::string::npos) {
      s.replace(pos, len, 1, ch);
      ++pos;
    }
  }
  return s;
}

inline std::string xml_attr(const std::string& tag, const std::string& name) {
  const std::string probe = name + "=\"";
  const auto pos = tag.find(probe);
  if (pos == std::string::npos) return {};
  const auto end = tag.find('"', pos + probe.size());
  if (end == std::string::npos) return {};
  return xml_unescape(tag.substr(pos + probe.size(), end - pos - probe.size()));
}

struct SemEvalContext {
  std::string id;
  std::vector<std::string> word_ids;
  std::vector<std::string> words;
};

// Targeted scan for <text id=..> blocks holding <word id=..>token</word>.
inline std::vector<SemEvalContext> parse_semeval_xml(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open SemEval XML: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string xml = buffer.str();

  std::vector<SemEvalContext> contexts;
  std::size_t pos = 0;
  while (true) {
    const auto text_open = xml.find("<text", pos);
    if (text_open == std::string::npos) break;
    const auto text_open_end = xml.find('>', text_open);
    if (text_open_end == std::string::npos) {
      throw FormatError(path + ": unterminated <text> tag");
    }
    const auto text_close = xml.find("</text>", text_open_end);
    if (text_close == std::string::npos) {
      throw FormatError(path + ": missing </text>");
    }
    SemEvalContext ctx;
    ctx.id = xml_attr(xml.substr(text_open, text_open_end - text_open + 1), "id");
    if (ctx.id.empty()) throw FormatError(path + ": <text> without id attribute");

    std::size_t wpos = text_open_end;
    while (true) {
      const auto word_open = xml.find("<word", wpos);
      if (word_open == std::string::npos || word_open > text_close) break;
      const auto word_open_end = xml.find('>', word_open);
      const auto word_close = xml.find("</word>", word_open_end);
      if (word_open_end == std::string::npos || word_close == std::string::npos ||
          word_close > text_close) {
        throw FormatError(path + ": malformed <word> in context " + ctx.id);
      }
      const std::string tag = xml.substr(word_open, word_open_end - word_open + 1);
      ctx.word_ids.push_back(xml_attr(tag, "id"));
      ctx.words.push_back(
          xml_unescape(xml.substr(word_open_end + 1, word_close - word_open_end - 1)));
      wpos = word_close + 7;
    }
    if (ctx.words.empty()) throw FormatError(path + ": context " + ctx.id + " has no words");
    contexts.push_back(std::move(ctx));
    pos = text_close + 7;
  }
  if (contexts.empty()) throw FormatError(path + ": no <text> contexts found");
  return contexts;
}

struct GoldLine {
  std::string context_id;
  std::string value;
};

inline std::vector<GoldLine> read_gold_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gold file: " + path);
  std::vector<GoldLine> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    GoldLine g;
    fields >> g.context_id >> g.value;
    if (g.context_id.empty() || g.value.empty()) {
      throw FormatError(path + ": malformed gold line: " + line);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail

inline std::vector<Example> adapt_semeval(const std::string& xml_path,
                                          const std::string& gold_path,
                                          SemEvalSubtask subtask = SemEvalSubtask::Auto) {
  const auto contexts = detail::parse_semeval_xml(xml_path);
  const auto gold = detail::read_gold_lines(gold_path);

  if (subtask == SemEvalSubtask::Auto) {
    bool all_binary = true;
    bool all_word_ids = true;
    for (const auto& g : gold) {
      if (g.value != "0" && g.value != "1") all_binary = false;
      if (g.value.rfind(g.context_id + "_", 0) != 0) all_word_ids = false;
    }
    if (all_binary == all_word_ids) {
      throw FormatError(gold_path + ": cannot tell detection from location gold by column shape");
    }
    subtask = all_binary ? SemEvalSubtask::Detection : SemEvalSubtask::Location;
  }

  std::map<std::string, const detail::SemEvalContext*> by_id;
  for (const auto& ctx : contexts) {
    if (!by_id.emplace(ctx.id, &ctx).second) {
      throw FormatError(xml_path + ": duplicate context id '" + ctx.id + "'");
    }
  }
  std::map<std::string, std::string> gold_by_id;
  for (const auto& g : gold) {
    if (by_id.find(g.context_id) == by_id.end()) {
      throw FormatError(gold_path + ": gold id '" + g.context_id + "' not present in XML");
    }
    if (!gold_by_id.emplace(g.context_id, g.value).second) {
      throw FormatError(gold_path + ": duplicate gold id '" + g.context_id + "'");
    }
  }

  std::vector<Example> out;
  out.reserve(contexts.size());
  for (const auto& ctx : contexts) {
    auto git = gold_by_id.find(ctx.id);
    if (git == gold_by_id.end()) {
      throw FormatError(gold_path + ": no gold entry for context '" + ctx.id + "'");
    }
    Example ex;
    ex.id = ctx.id;
    ex.tokens = ctx.words;
    if (subtask == SemEvalSubtask::Detection) {
      if (git->second != "0" && git->second != "1") {
        throw FormatError(gold_path + ": detection gold for '" + ctx.id + "' must be 0/1, got '" +
                          git->second + "'");
      }
      ex.label = git->second == "1" ? 1 : 0;
    } else {
      const auto word_it = std::find(ctx.word_ids.begin(), ctx.word_ids.end(), git->second);
      if (word_it == ctx.word_ids.end()) {
        throw FormatError(gold_path + ": pun word id '" + git->second +
                          "' not present in context '" + ctx.id + "'");
      }
      ex.label = 1;
      ex.pun_index = static_cast<std::size_t>(word_it - ctx.word_ids.begin());
    }
    ex.validate();
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pun of the Day adapter: two-column (label, sentence) text
// ---------------------------------------------------------------------------

inline std::vector<Example> adapt_ptd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PTD file: " + path);
  std::vector<Example> out;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto delim = line.find('\t') != std::string::npos ? line.find('\t') : line.find(',');
    if (delim == std::string::npos) {
      throw FormatError(path + " line " + std::to_string(line_no) +
                        ": expected 'label<tab-or-comma>sentence'");
    }
    const std::string label_str = line.substr(0, delim);
    std::string sentence = line.substr(delim + 1);
    if (sentence.size() >= 2 && sentence.front() == '"' && sentence.back() == '"') {
      sentence = sentence.substr(1, sentence.size() - 2);  // CSV-quoted text
    }
    if (row == 0 && label_str != "0" && label_str != "1") continue;  // header row
    if (label_str != "0" && label_str != "1") {
      throw FormatError(path + " line " + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                        label_str + "'");
    }
    Example ex;
    ex.id = "ptd_" + std::to_string(++row);
    ex.label = label_str == "1" ? 1 : 0;
    std::istringstream words(sentence);
    std::string w;
    while (words >> w) ex.tokens.push_back(w);
    if (ex.tokens.empty()) {
      throw FormatError(path + " line " + std::to_string(line_no) + ": empty sentence");
    }
    if (!seen_ids.insert(ex.id).second) {
      throw FormatError(path + ": duplicate id '" + ex.id + "'");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation folds
// ---------------------------------------------------------------------------

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::vector<Fold> folds;
};

// Seeded shuffle, k disjoint test partitions covering everything (sizes
// differ by at most one), dev = 10% of each fold's training instances.
inline FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0 || n < k) {
    throw ArgumentError("make_folds: need at least k=" + std::to_string(k) + " examples, got " +
                        std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = seeded_rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }

  FoldPlan plan;
  plan.folds.resize(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t cursor = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ranges(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    ranges[f] = {cursor, cursor + len};
    cursor += len;
  }
  for (std::size_t f = 0; f < k; ++f) {
    auto& fold = plan.folds[f];
    for (std::size_t i = ranges[f].first; i < ranges[f].second; ++i) {
      fold.test.push_back(order[i]);
    }
    std::vector<std::size_t> rest;
    rest.reserve(n - fold.test.size());
    for (std::size_t g = 0; g < k; ++g) {
      if (g == f) continue;
      for (std::size_t i = ranges[g].first; i < ranges[g].second; ++i) rest.push_back(order[i]);
    }
    Rng dev_rng = seeded_rng(seed + 0x9e3779b9ULL * (f + 1));
    for (std::size_t i = rest.size(); i > 1; --i) {
      std::swap(rest[i - 1], rest[dev_rng() % i]);
    }
    const std::size_t dev_count = rest.size() / 10;
    fold.dev.assign(rest.begin(), rest.begin() + dev_count);
    fold.train.assign(rest.begin() + dev_count, rest.end());
  }
  return plan;
}

inline std::vector<Example> select(const std::vector<Example>& dataset,
                                   const std::vector<std::size_t>& indices) {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(dataset.at(i));
  return out;
}

// Seeded split into (train, dev) index lists; dev gets `fraction` of the data.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> make_dev_split(
    std::size_t n, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw ArgumentError("dev fraction must be in [0,1), got " + std::to_string(fraction));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = seeded_rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  const std::size_t dev_count = static_cast<std::size_t>(fraction * static_cast<double>(n));
  std::vector<std::size_t> dev(order.begin(), order.begin() + dev_count);
  std::vector<std::size_t> train(order.begin() + dev_count, order.end());
  return {train, dev};
}

}  // namespace punnet
