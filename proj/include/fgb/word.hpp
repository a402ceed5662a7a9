#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fgb/error.hpp"
#include "fgb/rational.hpp"

namespace fgb {

// One element of the symmetric generating set {a_1, a_1^{-1}, ..., a_r, a_r^{-1}}.
// Codes are laid out a1 < a1^{-1} < a2 < a2^{-1} < ...; this total order fixes
// every enumeration and tie-break in the library.
class Letter {
 public:
  constexpr explicit Letter(int code) : code_(static_cast<std::uint8_t>(code)) {}

  static Letter make(int index, bool inverse) {
    if (index < 1) throw InvalidParameter("letter index must be >= 1");
    return Letter(2 * (index - 1) + (inverse ? 1 : 0));
  }

  int code() const { return code_; }
  int index() const { return code_ / 2 + 1; }  // 1-based generator index
  bool is_inverse() const { return (code_ & 1) != 0; }
  Letter inverse() const { return Letter(code_ ^ 1); }

  std::string str() const {
    return (is_inverse() ? "A" : "a") + std::to_string(index());
  }

  friend bool operator==(Letter a, Letter b) { return a.code_ == b.code_; }
  friend auto operator<=>(Letter a, Letter b) { return a.code_ <=> b.code_; }

 private:
  std::uint8_t code_;
};

namespace detail {
inline void check_rank(int rank) {
  if (rank < 2) throw InvalidParameter("rank must be >= 2");
}
inline bool is_reduced(std::span<const Letter> letters) {
  for (std::size_t i = 1; i < letters.size(); ++i)
    if (letters[i] == letters[i - 1].inverse()) return false;
  return true;
}
inline void check_letters(int rank, std::span<const Letter> letters) {
  for (Letter l : letters)
    if (l.code() >= 2 * rank)
      throw RankMismatch("letter " + l.str() + " outside rank " + std::to_string(rank));
}
}  // namespace detail

// A reduced word over the rank-r generating set. Immutable after construction;
// the empty word is the identity e.
class Word {
 public:
  Word(int rank, std::vector<Letter> letters) : rank_(rank), letters_(std::move(letters)) {
    detail::check_rank(rank_);
    detail::check_letters(rank_, letters_);
    if (!detail::is_reduced(letters_)) throw InvalidParameter("word is not reduced");
  }

  static Word identity(int rank) { return Word(rank, {}); }

  int rank() const { return rank_; }
  int size() const { return static_cast<int>(letters_.size()); }
  bool is_identity() const { return letters_.empty(); }
  Letter at(int i) const { return letters_[static_cast<std::size_t>(i)]; }
  const std::vector<Letter>& letters() const { return letters_; }

  // Membership in the index-2 subgroup generated by the even-length elements.
  bool in_even_subgroup() const { return size() % 2 == 0; }

  std::string str() const {
    if (letters_.empty()) return "e";
    std::string s;
    for (Letter l : letters_) s += l.str();
    return s;
  }

  static Word parse(int rank, std::string_view text);

  friend bool operator==(const Word& a, const Word& b) {
    return a.rank_ == b.rank_ && a.letters_ == b.letters_;
  }
  // Shortlex, for deterministic containers.
  friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
    if (auto c = a.rank_ <=> b.rank_; c != 0) return c;
    if (auto c = a.letters_.size() <=> b.letters_.size(); c != 0) return c;
    for (std::size_t i = 0; i < a.letters_.size(); ++i)
      if (auto c = a.letters_[i] <=> b.letters_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

 private:
  int rank_;
  std::vector<Letter> letters_;
};

// Product of an arbitrary letter sequence, cancelling adjacent inverse pairs.
// Idempotent on already-reduced input.
inline Word reduce(int rank, std::span<const Letter> seq) {
  detail::check_rank(rank);
  detail::check_letters(rank, seq);
  std::vector<Letter> out;
  out.reserve(seq.size());
  for (Letter l : seq) {
    if (!out.empty() && out.back() == l.inverse())
      out.pop_back();
    else
      out.push_back(l);
  }
  return Word(rank, std::move(out));
}

inline Word invert(const Word& w) {
  std::vector<Letter> out;
  out.reserve(w.letters().size());
  for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it)
    out.push_back(it->inverse());
  return Word(w.rank(), std::move(out));
}

struct Product {
  Word word;
  int cancelled;  // |uv| = |u| + |v| - 2*cancelled
};

inline Product multiply(const Word& u, const Word& v) {
  if (u.rank() != v.rank()) throw RankMismatch("multiplying words of different rank");
  const auto& a = u.letters();
  const auto& b = v.letters();
  std::size_t k = 0;
  while (k < a.size() && k < b.size() && a[a.size() - 1 - k] == b[k].inverse()) ++k;
  std::vector<Letter> out;
  out.reserve(a.size() + b.size() - 2 * k);
  out.insert(out.end(), a.begin(), a.end() - static_cast<std::ptrdiff_t>(k));
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(k), b.end());
  return Product{Word(u.rank(), std::move(out)), static_cast<int>(k)};
}

// Word metric d(g1, g2) = |g1^{-1} g2|.
inline int word_distance(const Word& a, const Word& b) {
  return multiply(invert(a), b).word.size();
}

inline Word Word::parse(int rank, std::string_view text) {
  detail::check_rank(rank);
  if (text == "e") return Word::identity(rank);
  if (text.empty()) throw ParseError("empty word literal (identity is 'e')");
  std::vector<Letter> letters;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    bool inv;
    if (c == 'a')
      inv = false;
    else if (c == 'A')
      inv = true;
    else
      throw ParseError("bad letter at position " + std::to_string(i) + " in '" + std::string(text) + "'");
    ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    if (start == i) throw ParseError("missing generator index at position " + std::to_string(start));
    int index = std::stoi(std::string(text.substr(start, i - start)));
    if (index < 1 || index > rank)
      throw ParseError("generator index " + std::to_string(index) + " outside rank " + std::to_string(rank));
    letters.push_back(Letter::make(index, inv));
  }
  if (!detail::is_reduced(letters)) throw ParseError("word literal is not reduced: '" + std::string(text) + "'");
  return Word(rank, std::move(letters));
}

// |S_n(e)| = 2r (2r-1)^{n-1} for n >= 1, 1 for n = 0.
inline Int sphere_size(int rank, int n) {
  detail::check_rank(rank);
  if (n < 0) throw InvalidParameter("negative radius");
  if (n == 0) return 1;
  return Int(2 * rank) * int_pow(2 * rank - 1, static_cast<unsigned long>(n - 1));
}

inline constexpr std::uint64_t kDefaultSphereCap = 10'000'000;   // table materialization
inline constexpr std::uint64_t kDefaultBruteCap = 1'000'000;     // brute-force enumeration

inline std::uint64_t sphere_size_checked(int rank, int n, std::uint64_t cap = kDefaultSphereCap) {
  Int s = sphere_size(rank, n);
  if (s > Int(static_cast<unsigned long>(cap)))
    throw ResourceCap("|S_" + std::to_string(n) + "| = " + s.get_str() + " exceeds cap " + std::to_string(cap));
  return static_cast<std::uint64_t>(s.get_ui());
}

// Lexicographic rank of a reduced word within its sphere S_{|w|}(e).
inline std::uint64_t sphere_index(int rank, std::span<const Letter> letters) {
  const std::uint64_t q = static_cast<std::uint64_t>(2 * rank - 1);
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    std::uint64_t slot;
    if (i == 0) {
      slot = static_cast<std::uint64_t>(letters[0].code());
    } else {
      int banned = letters[i - 1].inverse().code();
      int c = letters[i].code();
      slot = static_cast<std::uint64_t>(c > banned ? c - 1 : c);
    }
    idx = idx * (i == 0 ? static_cast<std::uint64_t>(2 * rank) : q);
    idx += slot;
  }
  return idx;
}

inline std::uint64_t sphere_index(const Word& w) { return sphere_index(w.rank(), w.letters()); }

inline Word word_at_sphere_index(int rank, int n, std::uint64_t idx) {
  detail::check_rank(rank);
  if (n < 0) throw InvalidParameter("negative radius");
  std::vector<Letter> letters;
  letters.reserve(static_cast<std::size_t>(n));
  if (n == 0) {
    if (idx != 0) throw InvalidParameter("sphere index out of range");
    return Word::identity(rank);
  }
  const std::uint64_t q = static_cast<std::uint64_t>(2 * rank - 1);
  std::uint64_t base = static_cast<std::uint64_t>(2 * rank);
  std::vector<std::uint64_t> digits(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 1; --i) {
    digits[static_cast<std::size_t>(i)] = idx % q;
    idx /= q;
  }
  if (idx >= base) throw InvalidParameter("sphere index out of range");
  digits[0] = idx;
  letters.push_back(Letter(static_cast<int>(digits[0])));
  for (int i = 1; i < n; ++i) {
    int banned = letters.back().inverse().code();
    int slot = static_cast<int>(digits[static_cast<std::size_t>(i)]);
    letters.push_back(Letter(slot >= banned ? slot + 1 : slot));
  }
  return Word(rank, std::move(letters));
}

// Visits every reduced word of length n exactly once, in lexicographic order,
// without materializing the sphere. The span is only valid inside the callback.
template <class F>
void visit_sphere(int rank, int n, F&& f) {
  detail::check_rank(rank);
  if (n < 0) throw InvalidParameter("negative radius");
  if (n == 0) {
    f(std::span<const Letter>{});
    return;
  }
  std::vector<Letter> cur;
  cur.reserve(static_cast<std::size_t>(n));
  cur.push_back(Letter(0));
  auto smallest_after = [&](Letter prev) {
    return prev.inverse().code() == 0 ? Letter(1) : Letter(0);
  };
  while (static_cast<int>(cur.size()) < n) cur.push_back(smallest_after(cur.back()));
  const int top = 2 * rank - 1;
  for (;;) {
    f(std::span<const Letter>(cur.data(), cur.size()));
    // odometer increment with skip-over of the banned letter
    int i = n - 1;
    for (; i >= 0; --i) {
      int banned = i > 0 ? cur[static_cast<std::size_t>(i - 1)].inverse().code() : -1;
      int c = cur[static_cast<std::size_t>(i)].code() + 1;
      if (c == banned) ++c;
      if (c <= top) {
        cur[static_cast<std::size_t>(i)] = Letter(c);
        break;
      }
    }
    if (i < 0) return;
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < static_cast<std::size_t>(n); ++j)
      cur[j] = smallest_after(cur[j - 1]);
  }
}

// Word-typed forward range over S_n(e); prefer visit_sphere in hot loops.
class SphereRange {
 public:
  SphereRange(int rank, int n) : rank_(rank), n_(n) {
    detail::check_rank(rank);
    if (n < 0) throw InvalidParameter("negative radius");
  }

  class iterator {
   public:
    iterator() : done_(true) {}
    iterator(int rank, int n) : rank_(rank), n_(n), done_(false) {
      if (n_ == 0) {
        cur_.clear();
        return;
      }
      cur_.push_back(Letter(0));
      while (static_cast<int>(cur_.size()) < n_) cur_.push_back(smallest_after(cur_.back()));
    }

    Word operator*() const { return Word(rank_, cur_); }

    iterator& operator++() {
      if (n_ == 0) {
        done_ = true;
        return *this;
      }
      const int top = 2 * rank_ - 1;
      int i = n_ - 1;
      for (; i >= 0; --i) {
        int banned = i > 0 ? cur_[static_cast<std::size_t>(i - 1)].inverse().code() : -1;
        int c = cur_[static_cast<std::size_t>(i)].code() + 1;
        if (c == banned) ++c;
        if (c <= top) {
          cur_[static_cast<std::size_t>(i)] = Letter(c);
          break;
        }
      }
      if (i < 0) {
        done_ = true;
        return *this;
      }
      for (std::size_t j = static_cast<std::size_t>(i) + 1; j < static_cast<std::size_t>(n_); ++j)
        cur_[j] = smallest_after(cur_[j - 1]);
      return *this;
    }

    friend bool operator==(const iterator& a, const iterator& b) {
      if (a.done_ != b.done_) return false;
      return a.done_ || a.cur_ == b.cur_;
    }

   private:
    static Letter smallest_after(Letter prev) {
      return prev.inverse().code() == 0 ? Letter(1) : Letter(0);
    }
    int rank_ = 2;
    int n_ = 0;
    bool done_;
    std::vector<Letter> cur_;
  };

  iterator begin() const { return iterator(rank_, n_); }
  iterator end() const { return iterator(); }

 private:
  int rank_;
  int n_;
};

}  // namespace fgb
