#include "dq/pattern.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <map>
#include <vector>

namespace dq {

PatternError::PatternError(std::string message, std::size_t offset)
    : Error("pattern error at offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

namespace {

constexpr int kMaxRepeat = 1000;
constexpr std::size_t kMaxNfaStates = 200'000;
constexpr std::size_t kMaxDfaStates = 4096;

// One code point drawn from a set: ASCII members, explicit multi-byte code
// points, and optionally every multi-byte code point.
struct CharClass {
  std::bitset<128> ascii;
  std::vector<std::string> multibyte;
  bool any_multibyte = false;
};

struct Node {
  enum class Kind { empty, cls, concat, alt, repeat, bol, eol };
  Kind kind = Kind::empty;
  CharClass cls;
  std::vector<Node> kids;
  int min = 0;
  int max = -1;  // -1: unbounded
};

std::bitset<128> digit_set() {
  std::bitset<128> s;
  for (char c = '0'; c <= '9'; ++c) s.set(static_cast<std::size_t>(c));
  return s;
}

std::bitset<128> word_set() {
  std::bitset<128> s = digit_set();
  for (char c = 'a'; c <= 'z'; ++c) s.set(static_cast<std::size_t>(c));
  for (char c = 'A'; c <= 'Z'; ++c) s.set(static_cast<std::size_t>(c));
  s.set('_');
  return s;
}

std::bitset<128> space_set() {
  std::bitset<128> s;
  for (char c : {' ', '\t', '\n', '\r', '\f', '\v'}) s.set(static_cast<std::size_t>(c));
  return s;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xC2 && lead <= 0xDF) return 2;
  if (lead >= 0xE0 && lead <= 0xEF) return 3;
  if (lead >= 0xF0 && lead <= 0xF4) return 4;
  return 0;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Node parse() {
    Node root = parse_alt();
    if (pos_ < src_.size()) fail("unbalanced ')'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw PatternError(msg, pos_); }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  Node parse_alt() {
    std::vector<Node> branches;
    branches.push_back(parse_concat());
    while (!at_end() && peek() == '|') {
      ++pos_;
      branches.push_back(parse_concat());
    }
    if (branches.size() == 1) return std::move(branches.front());
    Node n;
    n.kind = Node::Kind::alt;
    n.kids = std::move(branches);
    return n;
  }

  Node parse_concat() {
    Node n;
    n.kind = Node::Kind::concat;
    while (!at_end() && peek() != '|' && peek() != ')') n.kids.push_back(parse_quantified());
    if (n.kids.empty()) return Node{};
    if (n.kids.size() == 1) return std::move(n.kids.front());
    return n;
  }

  static bool is_quantifier(char c) { return c == '*' || c == '+' || c == '?' || c == '{'; }

  Node parse_quantified() {
    Node atom = parse_atom();
    if (at_end() || !is_quantifier(peek())) return atom;
    if (atom.kind == Node::Kind::bol || atom.kind == Node::Kind::eol) {
      fail("quantifier applied to an anchor");
    }
    Node rep;
    rep.kind = Node::Kind::repeat;
    char q = peek();
    ++pos_;
    switch (q) {
      case '*': rep.min = 0; rep.max = -1; break;
      case '+': rep.min = 1; rep.max = -1; break;
      case '?': rep.min = 0; rep.max = 1; break;
      default: parse_braces(rep); break;
    }
    if (!at_end() && is_quantifier(peek())) {
      fail("lazy, possessive or stacked quantifiers are not supported");
    }
    rep.kids.push_back(std::move(atom));
    return rep;
  }

  int parse_count() {
    std::size_t start = pos_;
    long v = 0;
    while (!at_end() && peek() >= '0' && peek() <= '9') {
      v = v * 10 + (peek() - '0');
      if (v > kMaxRepeat) fail("repetition count exceeds " + std::to_string(kMaxRepeat));
      ++pos_;
    }
    if (pos_ == start) fail("malformed {n,m} quantifier");
    return static_cast<int>(v);
  }

  void parse_braces(Node& rep) {
    rep.min = parse_count();
    rep.max = rep.min;
    if (!at_end() && peek() == ',') {
      ++pos_;
      rep.max = (!at_end() && peek() == '}') ? -1 : parse_count();
    }
    if (at_end() || peek() != '}') fail("malformed {n,m} quantifier");
    ++pos_;
    if (rep.max != -1 && rep.max < rep.min) fail("{n,m} with m < n");
  }

  static Node class_node(CharClass c) {
    Node n;
    n.kind = Node::Kind::cls;
    n.cls = std::move(c);
    return n;
  }

  static Node literal(unsigned char c) {
    CharClass cc;
    cc.ascii.set(c);
    return class_node(std::move(cc));
  }

  std::string take_multibyte() {
    auto lead = static_cast<unsigned char>(peek());
    std::size_t len = utf8_length(lead);
    if (len == 0 || pos_ + len > src_.size()) fail("invalid UTF-8 in pattern");
    for (std::size_t i = 1; i < len; ++i) {
      auto c = static_cast<unsigned char>(src_[pos_ + i]);
      if ((c & 0xC0) != 0x80) fail("invalid UTF-8 in pattern");
    }
    std::string cp(src_.substr(pos_, len));
    pos_ += len;
    return cp;
  }

  // Escape shared by atoms and classes. Returns a class for \d-style escapes
  // or a single ASCII char otherwise.
  CharClass parse_escape(bool in_class) {
    ++pos_;  // backslash
    if (at_end()) fail("trailing backslash");
    char c = peek();
    ++pos_;
    CharClass cc;
    switch (c) {
      case 'd': cc.ascii = digit_set(); return cc;
      case 'w': cc.ascii = word_set(); return cc;
      case 's': cc.ascii = space_set(); return cc;
      case 'D':
      case 'W':
      case 'S': {
        if (in_class) fail("negated shorthand classes inside brackets are not supported");
        auto base = c == 'D' ? digit_set() : c == 'W' ? word_set() : space_set();
        cc.ascii = ~base;
        cc.any_multibyte = true;
        return cc;
      }
      case 'n': cc.ascii.set('\n'); return cc;
      case 't': cc.ascii.set('\t'); return cc;
      case 'r': cc.ascii.set('\r'); return cc;
      case 'f': cc.ascii.set('\f'); return cc;
      case 'v': cc.ascii.set('\v'); return cc;
      case 'x': {
        int v = 0;
        for (int i = 0; i < 2; ++i) {
          if (at_end() || !std::isxdigit(static_cast<unsigned char>(peek()))) {
            fail("\\x requires two hex digits");
          }
          char h = peek();
          v = v * 16 + (h <= '9' ? h - '0' : (std::tolower(h) - 'a' + 10));
          ++pos_;
        }
        if (v >= 0x80) fail("\\x escapes above 7F are not portable; write the character");
        cc.ascii.set(static_cast<std::size_t>(v));
        return cc;
      }
      case 'b':
      case 'B': fail("word boundaries are not supported");
      default: break;
    }
    if (c >= '0' && c <= '9') fail("backreferences are not supported");
    static constexpr std::string_view kEscapable = ".^$|?*+()[]{}\\/-";
    if (kEscapable.find(c) == std::string_view::npos) {
      fail(std::string("unknown escape \\") + c);
    }
    cc.ascii.set(static_cast<unsigned char>(c));
    return cc;
  }

  Node parse_atom() {
    char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        if (!at_end() && peek() == '?') {
          if (pos_ + 1 < src_.size() && src_[pos_ + 1] == ':') {
            pos_ += 2;
          } else {
            fail("lookaround and named groups are not supported");
          }
        }
        Node inner = parse_alt();
        if (at_end() || peek() != ')') fail("missing ')'");
        ++pos_;
        return inner;
      }
      case '[': return parse_class();
      case '.': {
        ++pos_;
        CharClass cc;
        cc.ascii.set();
        cc.ascii.reset('\n');
        cc.any_multibyte = true;
        return class_node(std::move(cc));
      }
      case '^': ++pos_; return Node{Node::Kind::bol, {}, {}, 0, -1};
      case '$': ++pos_; return Node{Node::Kind::eol, {}, {}, 0, -1};
      case '\\': return class_node(parse_escape(false));
      case '*':
      case '+':
      case '?': fail("nothing to repeat");
      case '{': fail("unescaped '{'");
      case ']': fail("unescaped ']'");
      case '}': fail("unescaped '}'");
      default: break;
    }
    if (static_cast<unsigned char>(c) >= 0x80) {
      CharClass cc;
      cc.multibyte.push_back(take_multibyte());
      return class_node(std::move(cc));
    }
    ++pos_;
    return literal(static_cast<unsigned char>(c));
  }

  Node parse_class() {
    ++pos_;  // [
    bool negated = false;
    if (!at_end() && peek() == '^') {
      negated = true;
      ++pos_;
    }
    if (!at_end() && peek() == ']') fail("empty class; escape ']' inside brackets");
    CharClass cc;
    bool first = true;
    while (true) {
      if (at_end()) fail("missing ']'");
      char c = peek();
      if (c == ']') {
        ++pos_;
        break;
      }
      if (c == '[' && pos_ + 1 < src_.size() &&
          (src_[pos_ + 1] == ':' || src_[pos_ + 1] == '.' || src_[pos_ + 1] == '=')) {
        fail("POSIX bracket expressions are not supported");
      }
      std::optional<unsigned char> lo;
      if (c == '\\') {
        CharClass e = parse_escape(true);
        if (e.ascii.count() == 1 && !e.any_multibyte) {
          for (std::size_t i = 0; i < 128; ++i) {
            if (e.ascii.test(i)) lo = static_cast<unsigned char>(i);
          }
        } else {
          cc.ascii |= e.ascii;
          first = false;
          continue;
        }
      } else if (static_cast<unsigned char>(c) >= 0x80) {
        if (negated) fail("non-ASCII characters in negated classes are not supported");
        cc.multibyte.push_back(take_multibyte());
        if (!at_end() && peek() == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] != ']') {
          fail("ranges over non-ASCII characters are not supported");
        }
        first = false;
        continue;
      } else {
        lo = static_cast<unsigned char>(c);
        ++pos_;
      }
      // Range a-b unless '-' is the last member.
      if (!at_end() && peek() == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] != ']') {
        ++pos_;
        unsigned char hi = 0;
        if (peek() == '\\') {
          CharClass e = parse_escape(true);
          if (e.ascii.count() != 1) fail("class shorthand cannot end a range");
          for (std::size_t i = 0; i < 128; ++i) {
            if (e.ascii.test(i)) hi = static_cast<unsigned char>(i);
          }
        } else {
          hi = static_cast<unsigned char>(peek());
          if (hi >= 0x80) fail("ranges over non-ASCII characters are not supported");
          ++pos_;
        }
        if (hi < *lo) fail("range out of order");
        for (unsigned v = *lo; v <= hi; ++v) cc.ascii.set(v);
      } else {
        cc.ascii.set(*lo);
      }
      first = false;
    }
    (void)first;
    if (negated) {
      cc.ascii = ~cc.ascii;
      cc.any_multibyte = true;
    }
    return class_node(std::move(cc));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Thompson NFA over bytes.

struct State {
  enum class Kind { byte, split, bol, eol, match };
  Kind kind = Kind::split;
  std::bitset<256> bytes;
  std::vector<int> next;
};

struct Frag {
  int start;
  std::vector<std::pair<int, std::size_t>> out;  // (state, slot) to patch
};

class NfaBuilder {
 public:
  std::vector<State> states;

  int add(State s) {
    if (states.size() >= kMaxNfaStates) throw PatternError("pattern too large", 0);
    states.push_back(std::move(s));
    return static_cast<int>(states.size()) - 1;
  }

  void patch(const Frag& f, int target) {
    for (auto [s, slot] : f.out) states[static_cast<std::size_t>(s)].next[slot] = target;
  }

  Frag byte_chain(const std::vector<std::bitset<256>>& steps) {
    int first = -1;
    int prev = -1;
    for (const auto& b : steps) {
      int s = add(State{State::Kind::byte, b, {-1}});
      if (prev >= 0) states[static_cast<std::size_t>(prev)].next[0] = s;
      else first = s;
      prev = s;
    }
    return Frag{first, {{prev, 0}}};
  }

  static std::bitset<256> range(unsigned lo, unsigned hi) {
    std::bitset<256> b;
    for (unsigned v = lo; v <= hi; ++v) b.set(v);
    return b;
  }

  Frag alternatives(std::vector<Frag> alts) {
    if (alts.size() == 1) return std::move(alts.front());
    State split{State::Kind::split, {}, {}};
    Frag f{0, {}};
    for (auto& a : alts) {
      split.next.push_back(a.start);
      f.out.insert(f.out.end(), a.out.begin(), a.out.end());
    }
    f.start = add(std::move(split));
    return f;
  }

  Frag empty() {
    int s = add(State{State::Kind::split, {}, {-1}});
    return Frag{s, {{s, 0}}};
  }

  Frag build(const Node& n) {
    switch (n.kind) {
      case Node::Kind::empty: return empty();
      case Node::Kind::bol:
      case Node::Kind::eol: {
        auto kind = n.kind == Node::Kind::bol ? State::Kind::bol : State::Kind::eol;
        int s = add(State{kind, {}, {-1}});
        return Frag{s, {{s, 0}}};
      }
      case Node::Kind::cls: {
        std::vector<Frag> alts;
        std::bitset<256> ascii;
        for (std::size_t i = 0; i < 128; ++i) ascii[i] = n.cls.ascii[i];
        if (ascii.any()) alts.push_back(byte_chain({ascii}));
        for (const auto& cp : n.cls.multibyte) {
          std::vector<std::bitset<256>> steps;
          for (unsigned char c : cp) {
            std::bitset<256> b;
            b.set(c);
            steps.push_back(b);
          }
          alts.push_back(byte_chain(steps));
        }
        if (n.cls.any_multibyte) {
          auto cont = range(0x80, 0xBF);
          alts.push_back(byte_chain({range(0xC2, 0xDF), cont}));
          alts.push_back(byte_chain({range(0xE0, 0xEF), cont, cont}));
          alts.push_back(byte_chain({range(0xF0, 0xF4), cont, cont, cont}));
        }
        if (alts.empty()) {
          // Matches nothing: a byte state with an empty set.
          return byte_chain({std::bitset<256>{}});
        }
        return alternatives(std::move(alts));
      }
      case Node::Kind::concat: {
        Frag f = build(n.kids.front());
        for (std::size_t i = 1; i < n.kids.size(); ++i) {
          Frag g = build(n.kids[i]);
          patch(f, g.start);
          f.out = std::move(g.out);
        }
        return f;
      }
      case Node::Kind::alt: {
        std::vector<Frag> alts;
        for (const auto& k : n.kids) alts.push_back(build(k));
        return alternatives(std::move(alts));
      }
      case Node::Kind::repeat: return build_repeat(n);
    }
    return empty();
  }

  Frag build_repeat(const Node& n) {
    const Node& body = n.kids.front();
    std::vector<Frag> parts;
    for (int i = 0; i < n.min; ++i) parts.push_back(build(body));
    if (n.max == -1) {
      int split = add(State{State::Kind::split, {}, {-1, -1}});
      Frag b = build(body);
      states[static_cast<std::size_t>(split)].next[0] = b.start;
      patch(b, split);
      parts.push_back(Frag{split, {{split, 1}}});
    } else {
      for (int i = n.min; i < n.max; ++i) {
        int split = add(State{State::Kind::split, {}, {-1, -1}});
        Frag b = build(body);
        states[static_cast<std::size_t>(split)].next[0] = b.start;
        Frag opt{split, {{split, 1}}};
        opt.out.insert(opt.out.end(), b.out.begin(), b.out.end());
        parts.push_back(std::move(opt));
      }
    }
    if (parts.empty()) return empty();
    Frag f = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) {
      patch(f, parts[i].start);
      f.out = std::move(parts[i].out);
    }
    return f;
  }
};

using StateSet = std::vector<int>;  // sorted byte/eol/match states

}  // namespace

struct Pattern::Impl {
  std::string source;
  Node ast;
  std::vector<State> nfa;
  int nfa_start = 0;

  // DFA: table[state * 256 + byte] = next state or -1.
  std::vector<int> table;
  std::vector<bool> accept_at_end;
  bool has_dfa = false;

  // Follows epsilon edges. bol edges only when allow_bol, eol edges only when
  // allow_eol; unexplored eol states are kept in the set for later.
  StateSet closure(const std::vector<int>& seeds, bool allow_bol, bool allow_eol) const {
    std::vector<char> seen(nfa.size(), 0);
    std::vector<int> stack(seeds.begin(), seeds.end());
    StateSet out;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      if (s < 0 || seen[static_cast<std::size_t>(s)]) continue;
      seen[static_cast<std::size_t>(s)] = 1;
      const State& st = nfa[static_cast<std::size_t>(s)];
      switch (st.kind) {
        case State::Kind::byte:
        case State::Kind::match: out.push_back(s); break;
        case State::Kind::split:
          for (int n : st.next) stack.push_back(n);
          break;
        case State::Kind::bol:
          if (allow_bol) stack.push_back(st.next[0]);
          break;
        case State::Kind::eol:
          if (allow_eol) stack.push_back(st.next[0]);
          else out.push_back(s);
          break;
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  StateSet step(const StateSet& set, unsigned char b) const {
    std::vector<int> seeds;
    for (int s : set) {
      const State& st = nfa[static_cast<std::size_t>(s)];
      if (st.kind == State::Kind::byte && st.bytes.test(b)) seeds.push_back(st.next[0]);
    }
    if (seeds.empty()) return {};
    return closure(seeds, false, false);
  }

  bool accepts_at_end(const StateSet& set) const {
    for (int s : closure(set, false, true)) {
      if (nfa[static_cast<std::size_t>(s)].kind == State::Kind::match) return true;
    }
    return false;
  }

  StateSet start_set() const { return closure({nfa_start}, true, false); }

  void build_dfa() {
    std::map<StateSet, int> ids;
    std::vector<StateSet> sets;
    auto intern = [&](StateSet s) -> int {
      if (s.empty()) return -1;
      auto it = ids.find(s);
      if (it != ids.end()) return it->second;
      if (sets.size() >= kMaxDfaStates) return -2;
      int id = static_cast<int>(sets.size());
      ids.emplace(s, id);
      sets.push_back(std::move(s));
      return id;
    };
    intern(start_set());
    if (sets.empty()) {
      // Nothing can ever match.
      table.assign(256, -1);
      accept_at_end.assign(1, false);
      has_dfa = true;
      return;
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
      table.resize((i + 1) * 256, -1);
      for (unsigned b = 0; b < 256; ++b) {
        int id = intern(step(sets[i], static_cast<unsigned char>(b)));
        if (id == -2) {
          table.clear();
          return;
        }
        table[i * 256 + b] = id;
      }
    }
    accept_at_end.resize(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) accept_at_end[i] = accepts_at_end(sets[i]);
    has_dfa = true;
  }

  bool match(std::string_view text) const {
    if (has_dfa) {
      int s = 0;
      for (char c : text) {
        s = table[static_cast<std::size_t>(s) * 256 + static_cast<unsigned char>(c)];
        if (s < 0) return false;
      }
      return accept_at_end[static_cast<std::size_t>(s)];
    }
    StateSet set = start_set();
    for (char c : text) {
      set = step(set, static_cast<unsigned char>(c));
      if (set.empty()) return false;
    }
    return accepts_at_end(set);
  }
};

namespace {

void sample_node(const Node& n, const BoundedDraw& draw, std::string& out) {
  switch (n.kind) {
    case Node::Kind::empty:
    case Node::Kind::bol:
    case Node::Kind::eol: return;
    case Node::Kind::cls: {
      std::vector<std::string> options;
      for (unsigned c = 0x20; c < 0x7F; ++c) {
        if (n.cls.ascii.test(c)) options.emplace_back(1, static_cast<char>(c));
      }
      if (options.empty()) {
        for (unsigned c = 0; c < 0x80; ++c) {
          if (n.cls.ascii.test(c)) options.emplace_back(1, static_cast<char>(c));
        }
      }
      for (const auto& cp : n.cls.multibyte) options.push_back(cp);
      if (options.empty() && n.cls.any_multibyte) options.emplace_back("\xC3\xA9");
      if (options.empty()) return;
      out += options[draw(options.size())];
      return;
    }
    case Node::Kind::concat:
      for (const auto& k : n.kids) sample_node(k, draw, out);
      return;
    case Node::Kind::alt: sample_node(n.kids[draw(n.kids.size())], draw, out); return;
    case Node::Kind::repeat: {
      int hi = n.max == -1 ? n.min + 3 : std::min(n.max, n.min + 3);
      int count = n.min + static_cast<int>(draw(static_cast<std::uint64_t>(hi - n.min + 1)));
      for (int i = 0; i < count; ++i) sample_node(n.kids.front(), draw, out);
      return;
    }
  }
}

}  // namespace

Pattern Pattern::compile(std::string_view source) {
  auto impl = std::make_shared<Impl>();
  impl->source = std::string(source);
  impl->ast = Parser(source).parse();
  NfaBuilder b;
  Frag f = b.build(impl->ast);
  int match = b.add(State{State::Kind::match, {}, {}});
  b.patch(f, match);
  impl->nfa = std::move(b.states);
  impl->nfa_start = f.start;
  impl->build_dfa();
  return Pattern(std::move(impl));
}

bool Pattern::full_match(std::string_view text) const { return impl_->match(text); }

const std::string& Pattern::source() const { return impl_->source; }

bool Pattern::uses_dfa() const { return impl_->has_dfa; }

std::optional<std::string> Pattern::sample(const BoundedDraw& draw) const {
  for (int attempt = 0; attempt < 32; ++attempt) {
    std::string out;
    sample_node(impl_->ast, draw, out);
    if (full_match(out)) return out;
  }
  return std::nullopt;
}

}  // namespace dq
