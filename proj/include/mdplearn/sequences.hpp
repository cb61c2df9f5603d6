#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mdplearn {

// The three sequence shapes over alternating output/input symbols:
//
//   Trace                 output (input output)*   - what an execution shows
//   TestSequence          (output input)*          - a trace minus its last
//                                                    output; may be empty
//   ContinuationSequence  input (output input)*    - what a test appends to a
//                                                    trace
//
// Symbols are alphabet ids; outputs and inputs come from separate alphabets,
// the position parity decides which one applies. All three are value types
// usable as hash-map keys.

namespace detail {

inline std::size_t hash_symbols(const std::vector<int>& v) {
  std::size_t h = 1469598103934665603ULL;
  for (int s : v) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(s));
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

class TestSequence;
class ContinuationSequence;

class Trace {
 public:
  explicit Trace(int initial_output) : sym_{initial_output} {}
  explicit Trace(std::vector<int> symbols) : sym_(std::move(symbols)) {
    if (sym_.empty() || sym_.size() % 2 == 0)
      throw std::invalid_argument("trace must alternate output/input and end in an output");
  }

  const std::vector<int>& symbols() const { return sym_; }
  std::size_t input_count() const { return sym_.size() / 2; }
  int last_output() const { return sym_.back(); }
  int initial_output() const { return sym_.front(); }
  int input_at(std::size_t k) const { return sym_.at(2 * k + 1); }
  int output_at(std::size_t k) const { return sym_.at(2 * k); }

  Trace extended(int input, int output) const {
    std::vector<int> v = sym_;
    v.push_back(input);
    v.push_back(output);
    return Trace(std::move(v));
  }

  TestSequence with_input(int input) const;

  // The test-sequence part, i.e. this trace without its final output.
  TestSequence test_prefix() const;

  bool is_prefix_of(const Trace& other) const {
    if (sym_.size() > other.sym_.size()) return false;
    for (std::size_t k = 0; k < sym_.size(); ++k)
      if (sym_[k] != other.sym_[k]) return false;
    return true;
  }

  // All trace-shaped prefixes, shortest first, including the trace itself.
  std::vector<Trace> trace_prefixes() const {
    std::vector<Trace> out;
    for (std::size_t len = 1; len <= sym_.size(); len += 2)
      out.push_back(Trace(std::vector<int>(sym_.begin(), sym_.begin() + static_cast<long>(len))));
    return out;
  }

  bool operator==(const Trace& o) const { return sym_ == o.sym_; }
  bool operator!=(const Trace& o) const { return !(*this == o); }
  bool operator<(const Trace& o) const { return sym_ < o.sym_; }

 private:
  std::vector<int> sym_;
};

class TestSequence {
 public:
  TestSequence() = default;  // empty sequence
  explicit TestSequence(std::vector<int> symbols) : sym_(std::move(symbols)) {
    if (sym_.size() % 2 != 0)
      throw std::invalid_argument("test sequence must alternate output/input and end in an input");
  }

  const std::vector<int>& symbols() const { return sym_; }
  bool empty() const { return sym_.empty(); }
  std::size_t input_count() const { return sym_.size() / 2; }
  int last_input() const {
    if (empty()) throw std::out_of_range("empty test sequence has no input");
    return sym_.back();
  }

  // The trace obtained by dropping the final input; requires non-empty.
  Trace trace_part() const {
    if (empty()) throw std::out_of_range("empty test sequence has no trace part");
    return Trace(std::vector<int>(sym_.begin(), sym_.end() - 1));
  }

  Trace with_output(int output) const {
    std::vector<int> v = sym_;
    v.push_back(output);
    return Trace(std::move(v));
  }

  bool operator==(const TestSequence& o) const { return sym_ == o.sym_; }
  bool operator!=(const TestSequence& o) const { return !(*this == o); }
  bool operator<(const TestSequence& o) const { return sym_ < o.sym_; }

 private:
  std::vector<int> sym_;
};

class ContinuationSequence {
 public:
  explicit ContinuationSequence(int input) : sym_{input} {}
  explicit ContinuationSequence(std::vector<int> symbols) : sym_(std::move(symbols)) {
    if (sym_.empty() || sym_.size() % 2 == 0)
      throw std::invalid_argument("continuation must start and end with an input");
  }

  const std::vector<int>& symbols() const { return sym_; }
  std::size_t input_count() const { return (sym_.size() + 1) / 2; }

  // Builds input . output . this (used when a new table column is derived
  // from an existing one).
  ContinuationSequence prepended(int input, int output) const {
    std::vector<int> v{input, output};
    v.insert(v.end(), sym_.begin(), sym_.end());
    return ContinuationSequence(std::move(v));
  }

  bool operator==(const ContinuationSequence& o) const { return sym_ == o.sym_; }
  bool operator!=(const ContinuationSequence& o) const { return !(*this == o); }
  bool operator<(const ContinuationSequence& o) const { return sym_ < o.sym_; }

 private:
  std::vector<int> sym_;
};

inline TestSequence Trace::with_input(int input) const {
  std::vector<int> v = sym_;
  v.push_back(input);
  return TestSequence(std::move(v));
}

inline TestSequence Trace::test_prefix() const {
  return TestSequence(std::vector<int>(sym_.begin(), sym_.end() - 1));
}

// Concatenation trace . continuation, an output-first input-last sequence.
inline TestSequence concat(const Trace& t, const ContinuationSequence& c) {
  std::vector<int> v = t.symbols();
  v.insert(v.end(), c.symbols().begin(), c.symbols().end());
  return TestSequence(std::move(v));
}

// Shortlex order: by length, then lexicographically. Used where "process
// shorter sequences first" matters (e.g. the passive baseline's merge order).
inline bool shortlex_less(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace mdplearn

namespace std {
template <>
struct hash<mdplearn::Trace> {
  size_t operator()(const mdplearn::Trace& t) const {
    return mdplearn::detail::hash_symbols(t.symbols());
  }
};
template <>
struct hash<mdplearn::TestSequence> {
  size_t operator()(const mdplearn::TestSequence& t) const {
    return mdplearn::detail::hash_symbols(t.symbols());
  }
};
template <>
struct hash<mdplearn::ContinuationSequence> {
  size_t operator()(const mdplearn::ContinuationSequence& t) const {
    return mdplearn::detail::hash_symbols(t.symbols());
  }
};
}  // namespace std
