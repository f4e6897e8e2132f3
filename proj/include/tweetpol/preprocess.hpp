#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tweetpol/corpus_io.hpp"
#include "tweetpol/utf8.hpp"

namespace tweetpol {

struct TokenizedTweet {
  std::vector<std::string> tokens;
  bool had_char_repetition = false;
  bool had_all_caps_word = false;
  std::string original;
};

struct SurfaceFlags {
  bool had_char_repetition = false;
  bool had_all_caps_word = false;

  bool operator==(const SurfaceFlags&) const = default;
};

inline constexpr std::u32string_view kPunctuationMarks = U".,;:!?¡¿";

inline bool is_punctuation_mark(char32_t c) {
  return kPunctuationMarks.find(c) != std::u32string_view::npos;
}

inline bool is_punctuation_token(std::string_view tok) {
  auto cps = utf8::decode(tok);
  return cps.size() == 1 && is_punctuation_mark(cps[0]);
}

namespace detail {

inline std::vector<std::u32string> split_whitespace(std::u32string_view s) {
  std::vector<std::u32string> words;
  std::u32string cur;
  for (char32_t c : s) {
    if (utf8::is_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

// Replaces "…" and every run of two or more periods with a space.
inline std::u32string strip_ellipses(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == U'…') {
      out.push_back(U' ');
      ++i;
    } else if (s[i] == U'.') {
      std::size_t j = i;
      while (j < s.size() && s[j] == U'.') ++j;
      if (j - i >= 2)
        out.push_back(U' ');
      else
        out.push_back(U'.');
      i = j;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

// Letter runs of three or more (compared case-insensitively) shrink to their
// first character. Digits and punctuation are left alone.
inline std::u32string collapse_repetitions(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i + 1;
    if (utf8::is_letter(s[i])) {
      char32_t key = utf8::to_lower(s[i]);
      while (j < s.size() && utf8::to_lower(s[j]) == key) ++j;
    }
    if (j - i >= 3) {
      out.push_back(s[i]);
    } else {
      out.append(s.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

inline std::u32string lower(std::u32string_view s) {
  std::u32string out(s);
  for (auto& c : out) c = utf8::to_lower(c);
  return out;
}

inline bool looks_like_url_form(std::u32string_view w) {
  return w.starts_with(U"www.") || w.find(U"http://") != std::u32string_view::npos ||
         w.find(U"https://") != std::u32string_view::npos;
}

// A word is a URL if it, or its repetition-collapsed form, carries a URL
// scheme or a "www." prefix. Checking the collapsed form keeps normalization
// idempotent ("hhhttp://x" would otherwise turn into a URL on a second pass).
inline bool is_url(std::u32string_view word) {
  auto lw = lower(word);
  return looks_like_url_form(lw) || looks_like_url_form(collapse_repetitions(lw));
}

inline bool is_handle_char(char32_t c) {
  return utf8::is_letter(c) || utf8::is_digit(c) || c == U'_';
}

inline std::u32string replace_mentions(std::u32string_view w) {
  std::u32string out;
  for (std::size_t i = 0; i < w.size();) {
    if (w[i] == U'@' && i + 1 < w.size() && is_handle_char(w[i + 1])) {
      out += U"@user";
      i += 1;
      while (i < w.size() && is_handle_char(w[i])) ++i;
    } else {
      out.push_back(w[i++]);
    }
  }
  return out;
}

inline bool is_laughter(std::u32string_view run) {
  int js = 0, vowels = 0;
  for (char32_t c : run) {
    switch (utf8::to_lower(c)) {
      case U'j': ++js; break;
      case U'a': case U'e': case U'i': case U'o': case U'u': ++vowels; break;
      default: return false;
    }
  }
  return js >= 2 && vowels >= 2;
}

// Substitutes every maximal letter run that is a laughter interjection.
inline std::u32string replace_laughter(std::u32string_view w) {
  std::u32string out;
  for (std::size_t i = 0; i < w.size();) {
    if (!utf8::is_letter(w[i])) {
      out.push_back(w[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < w.size() && utf8::is_letter(w[j])) ++j;
    auto run = w.substr(i, j - i);
    if (is_laughter(run))
      out += U"jaja";
    else
      out.append(run);
    i = j;
  }
  return out;
}

}  // namespace detail

// Applies, in order: whitespace/URL/ellipsis cleanup, @-mention replacement,
// letter-repetition collapse, laughter normalization, lowercasing.
inline std::string normalize(std::string_view text) {
  auto cps = detail::strip_ellipses(utf8::decode(text));
  std::u32string out;
  for (auto& word : detail::split_whitespace(cps)) {
    if (detail::is_url(word)) continue;
    auto w = detail::replace_mentions(word);
    w = detail::collapse_repetitions(w);
    w = detail::replace_laughter(w);
    w = detail::lower(w);
    if (!out.empty()) out.push_back(U' ');
    out += w;
  }
  return utf8::encode(out);
}

// Whitespace split with the marks . , ; : ! ? ¡ ¿ emitted as one-character
// tokens of their own.
inline std::vector<std::string> tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  for (auto& word : detail::split_whitespace(utf8::decode(normalized))) {
    std::u32string cur;
    for (char32_t c : word) {
      if (is_punctuation_mark(c)) {
        if (!cur.empty()) tokens.push_back(utf8::encode(cur));
        cur.clear();
        tokens.push_back(utf8::encode(std::u32string(1, c)));
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) tokens.push_back(utf8::encode(cur));
  }
  return tokens;
}

// Flags computed on the raw text: a non-space character repeated three or
// more times in a row, and a word of two or more letters written entirely in
// uppercase (surrounding punctuation ignored).
inline SurfaceFlags surface_flags(std::string_view original) {
  SurfaceFlags flags;
  auto cps = utf8::decode(original);
  for (std::size_t i = 0; i + 2 < cps.size(); ++i) {
    if (!utf8::is_space(cps[i]) && cps[i] == cps[i + 1] && cps[i] == cps[i + 2]) {
      flags.had_char_repetition = true;
      break;
    }
  }
  for (auto& word : detail::split_whitespace(cps)) {
    std::size_t b = 0, e = word.size();
    auto alnum = [](char32_t c) { return utf8::is_letter(c) || utf8::is_digit(c); };
    while (b < e && !alnum(word[b])) ++b;
    while (e > b && !alnum(word[e - 1])) --e;
    if (e - b < 2) continue;
    bool all_upper = true;
    for (std::size_t i = b; i < e; ++i) {
      if (!utf8::is_upper(word[i])) {
        all_upper = false;
        break;
      }
    }
    if (all_upper) {
      flags.had_all_caps_word = true;
      break;
    }
  }
  return flags;
}

inline TokenizedTweet preprocess_tweet(std::string_view text) {
  TokenizedTweet t;
  t.original = std::string(text);
  t.tokens = tokenize(normalize(text));
  auto flags = surface_flags(text);
  t.had_char_repetition = flags.had_char_repetition;
  t.had_all_caps_word = flags.had_all_caps_word;
  return t;
}

struct TokenizedRecord {
  TweetRecord record;
  TokenizedTweet tweet;
};

inline std::vector<TokenizedRecord> preprocess_corpus(const LabeledCorpus& corpus) {
  std::vector<TokenizedRecord> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus.records) out.push_back({r, preprocess_tweet(r.text)});
  return out;
}

}  // namespace tweetpol
