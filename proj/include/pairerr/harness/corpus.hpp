// Copyright 2026 The pairerr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "pairerr/error.hpp"
#include "pairerr/rng.hpp"

namespace pairerr::harness {

enum class CorpusKind { kPseudoWord, kPseudoParagraph };

inline CorpusKind parse_corpus_kind(const std::string& s) {
  if (s == "pseudo_word" || s == "pseudo-word") return CorpusKind::kPseudoWord;
  if (s == "pseudo_paragraph" || s == "pseudo-paragraph") return CorpusKind::kPseudoParagraph;
  throw Error(ErrorCode::kInvalidInput, "unknown corpus kind '" + s + "'");
}

/// Lower-cased alphabetic words, one per line.
inline std::vector<std::string> read_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingLexicon, "cannot open lexicon '" + path + "'");
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::string w;
    for (char c : line)
      if (std::isalpha(static_cast<unsigned char>(c))) w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!w.empty() && seen.insert(w).second) words.push_back(w);
  }
  if (words.empty()) throw Error(ErrorCode::kMissingLexicon, "lexicon '" + path + "' has no words");
  return words;
}

namespace detail {

inline constexpr std::uint64_t kCorpusTag = 0x434f52505553ull;

inline std::string random_letters(CounterRng& rng, std::size_t len) {
  std::string s(len, 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng.below(26));
  return s;
}

// Sentence-like layout: capitalized first word, occasional commas or a
// semicolon, a closing period (now and then a question mark), and once in a
// while a sentence wrapped in quotes.
inline std::string punctuate(CounterRng& rng, const std::vector<std::string>& words) {
  std::string out;
  std::size_t k = 0;
  while (k < words.size()) {
    const std::size_t len = std::min<std::size_t>(6 + rng.below(11), words.size() - k);
    const bool quoted = rng.uniform() < 0.08;
    std::string sentence;
    for (std::size_t w = 0; w < len; ++w) {
      std::string word = words[k + w];
      if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      if (w + 1 < len) {
        const double u = rng.uniform();
        if (u < 0.08)
          word += ',';
        else if (u < 0.1)
          word += ';';
      } else {
        word += rng.uniform() < 0.05 ? '?' : '.';
      }
      if (!sentence.empty()) sentence += ' ';
      sentence += word;
    }
    if (quoted) sentence = "\"" + sentence + "\"";
    if (!out.empty()) out += ' ';
    out += sentence;
    k += len;
  }
  return out;
}

}  // namespace detail

/// Meaningless texts of exactly `words_per_text` whitespace-separated words.
/// Each text draws from its own small vocabulary, so words recur as in prose.
/// pseudo_word: random letter strings, never a lexicon word longer than three
/// letters; pseudo_paragraph: random lexicon words.
inline std::vector<std::string> generate_pseudo_corpus(CorpusKind kind, std::size_t n_texts,
                                                       std::size_t words_per_text = 100,
                                                       const std::vector<std::string>* lexicon = nullptr,
                                                       std::uint64_t rng_seed = 0) {
  if (kind == CorpusKind::kPseudoParagraph && (lexicon == nullptr || lexicon->empty()))
    throw Error(ErrorCode::kMissingLexicon, "pseudo paragraphs need a lexicon");
  if (words_per_text < 1) throw Error(ErrorCode::kInvalidInput, "words_per_text must be >= 1");
  std::unordered_set<std::string> banned;
  if (lexicon)
    for (const auto& w : *lexicon)
      if (w.size() > 3) banned.insert(w);

  const std::uint64_t key = derive_seed(rng_seed, {detail::kCorpusTag, static_cast<std::uint64_t>(kind)});
  std::vector<std::string> texts;
  for (std::size_t t = 0; t < n_texts; ++t) {
    CounterRng rng(key, t);
    std::vector<std::string> vocab;
    const std::size_t vocab_size = 25 + rng.below(21);
    if (kind == CorpusKind::kPseudoWord) {
      std::unordered_set<std::string> used;
      while (vocab.size() < vocab_size) {
        auto w = detail::random_letters(rng, 2 + rng.below(7));
        if (banned.count(w) || !used.insert(w).second) continue;
        vocab.push_back(std::move(w));
      }
    } else {
      for (std::size_t v = 0; v < vocab_size; ++v) vocab.push_back((*lexicon)[rng.below(static_cast<std::uint32_t>(lexicon->size()))]);
    }
    std::vector<std::string> words(words_per_text);
    for (auto& w : words) w = vocab[rng.below(static_cast<std::uint32_t>(vocab.size()))];
    texts.push_back(detail::punctuate(rng, words));
  }
  return texts;
}

}  // namespace pairerr::harness
