#include "dsgd/pauli.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dsgd {

namespace {

constexpr int kMaxPauliQubits = 64;

void check_qubit(int qubit) {
  if (qubit < 0 || qubit >= kMaxPauliQubits) {
    throw std::out_of_range("Pauli qubit index " + std::to_string(qubit) +
                            " out of range");
  }
}

Pauli pauli_from_char(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw std::invalid_argument(std::string("unknown Pauli '") + c + "'");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

char pauli_char(Pauli p) {
  constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
  return kChars[static_cast<int>(p)];
}

PauliString PauliString::from_masks(std::uint64_t x_mask, std::uint64_t z_mask) {
  PauliString p;
  p.x_ = x_mask;
  p.z_ = z_mask;
  return p;
}

PauliString PauliString::single(Pauli pauli, int qubit) {
  check_qubit(qubit);
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  PauliString p;
  if (pauli == Pauli::X || pauli == Pauli::Y) p.x_ |= bit;
  if (pauli == Pauli::Z || pauli == Pauli::Y) p.z_ |= bit;
  return p;
}

PauliString PauliString::from_map(const std::map<int, Pauli>& ops) {
  PauliString p;
  for (const auto& [qubit, pauli] : ops) {
    const PauliString s = single(pauli, qubit);
    p.x_ |= s.x_;
    p.z_ |= s.z_;
  }
  return p;
}

PauliString PauliString::parse(std::string_view text) {
  text = trim(text);
  std::map<int, Pauli> ops;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const Pauli p = pauli_from_char(text[i]);
    ++i;
    if (p == Pauli::I && (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))) {
      continue;  // bare identity
    }
    int qubit = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), qubit);
    if (ec != std::errc{}) {
      throw std::invalid_argument("missing qubit index in Pauli string '" + std::string(text) + "'");
    }
    i = static_cast<std::size_t>(ptr - text.data());
    check_qubit(qubit);
    if (ops.contains(qubit)) {
      throw std::invalid_argument("qubit " + std::to_string(qubit) + " repeated in Pauli string");
    }
    if (p != Pauli::I) ops[qubit] = p;
  }
  return from_map(ops);
}

Pauli PauliString::at(int qubit) const {
  check_qubit(qubit);
  const bool x = (x_ >> qubit) & 1U;
  const bool z = (z_ >> qubit) & 1U;
  if (x && z) return Pauli::Y;
  if (x) return Pauli::X;
  if (z) return Pauli::Z;
  return Pauli::I;
}

int PauliString::weight() const noexcept { return std::popcount(x_ | z_); }

int PauliString::num_y() const noexcept { return std::popcount(x_ & z_); }

int PauliString::max_qubit() const noexcept {
  const std::uint64_t s = support();
  return s == 0 ? -1 : 63 - std::countl_zero(s);
}

bool PauliString::qubitwise_commutes(const PauliString& other) const noexcept {
  const std::uint64_t shared = support() & other.support();
  return ((x_ ^ other.x_) & shared) == 0 && ((z_ ^ other.z_) & shared) == 0;
}

bool PauliString::commutes(const PauliString& other) const noexcept {
  const int anti = std::popcount(x_ & other.z_) + std::popcount(z_ & other.x_);
  return anti % 2 == 0;
}

std::string PauliString::str() const {
  if (is_identity()) return "I";
  std::string out;
  for (int q = 0; q <= max_qubit(); ++q) {
    const Pauli p = at(q);
    if (p == Pauli::I) continue;
    if (!out.empty()) out += ' ';
    out += pauli_char(p);
    out += std::to_string(q);
  }
  return out;
}

PauliObservable::PauliObservable(std::vector<PauliTerm> terms) {
  terms_.reserve(terms.size());
  std::map<PauliString, std::size_t> index;
  for (auto& term : terms) {
    if (!std::isfinite(term.coefficient)) {
      throw std::invalid_argument("observable coefficient must be finite");
    }
    if (auto it = index.find(term.pauli); it != index.end()) {
      terms_[it->second].coefficient += term.coefficient;
    } else {
      index.emplace(term.pauli, terms_.size());
      terms_.push_back(std::move(term));
    }
  }
}

PauliObservable PauliObservable::parse(std::string_view text) {
  std::vector<PauliTerm> terms;
  std::string current;
  double sign = 1.0;
  auto flush = [&](double next_sign) {
    const std::string_view body = trim(current);
    if (!body.empty()) {
      std::size_t pos = 0;
      double coeff = 1.0;
      const char* begin = body.data();
      const auto [ptr, ec] = std::from_chars(begin, begin + body.size(), coeff);
      if (ec == std::errc{}) {
        pos = static_cast<std::size_t>(ptr - begin);
      } else {
        coeff = 1.0;
      }
      std::string_view rest = trim(body.substr(pos));
      if (!rest.empty() && rest.front() == '*') rest = trim(rest.substr(1));
      terms.push_back({sign * coeff, PauliString::parse(rest)});
    }
    current.clear();
    sign = next_sign;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool exponent = i > 0 && (text[i - 1] == 'e' || text[i - 1] == 'E') &&
                          i >= 2 && std::isdigit(static_cast<unsigned char>(text[i - 2]));
    if ((c == '+' || c == '-') && !exponent) {
      flush(c == '-' ? -1.0 : 1.0);
    } else {
      current += c;
    }
  }
  flush(1.0);
  return PauliObservable(std::move(terms));
}

double PauliObservable::norm_bound() const noexcept {
  double total = 0.0;
  for (const auto& t : terms_) total += std::abs(t.coefficient);
  return total;
}

int PauliObservable::max_qubit() const noexcept {
  int q = -1;
  for (const auto& t : terms_) q = std::max(q, t.pauli.max_qubit());
  return q;
}

bool PauliObservable::all_terms_commute() const noexcept {
  for (std::size_t a = 0; a < terms_.size(); ++a) {
    for (std::size_t b = a + 1; b < terms_.size(); ++b) {
      if (!terms_[a].pauli.commutes(terms_[b].pauli)) return false;
    }
  }
  return true;
}

bool PauliObservable::is_diagonal() const noexcept {
  for (const auto& t : terms_) {
    if (!t.pauli.is_diagonal()) return false;
  }
  return true;
}

PauliObservable PauliObservable::scaled(double factor) const {
  PauliObservable out = *this;
  for (auto& t : out.terms_) t.coefficient *= factor;
  return out;
}

PauliObservable PauliObservable::subset(const std::vector<std::size_t>& indices) const {
  std::vector<PauliTerm> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(terms_.at(i));
  return PauliObservable(std::move(picked));
}

std::string PauliObservable::str() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const double c = terms_[i].coefficient;
    if (i > 0) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << '-';
    os << std::abs(c) << ' ' << terms_[i].pauli.str();
  }
  return os.str();
}

TermGroups greedy_qwc_groups(const PauliObservable& obs) {
  TermGroups groups;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    bool placed = false;
    for (auto& group : groups) {
      bool fits = true;
      for (std::size_t j : group) {
        if (!obs[i].pauli.qubitwise_commutes(obs[j].pauli)) {
          fits = false;
          break;
        }
      }
      if (fits) {
        group.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({i});
  }
  return groups;
}

void validate_grouping(const PauliObservable& obs, const TermGroups& groups) {
  std::vector<int> seen(obs.size(), 0);
  for (const auto& group : groups) {
    if (group.empty()) throw std::invalid_argument("empty measurement group");
    for (std::size_t a = 0; a < group.size(); ++a) {
      if (group[a] >= obs.size()) throw std::invalid_argument("group references unknown term");
      ++seen[group[a]];
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        if (!obs[group[a]].pauli.qubitwise_commutes(obs[group[b]].pauli)) {
          throw std::invalid_argument("terms " + obs[group[a]].pauli.str() + " and " +
                                      obs[group[b]].pauli.str() +
                                      " are not qubit-wise commuting");
        }
      }
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != 1) {
      throw std::invalid_argument("term " + std::to_string(i) + " appears in " +
                                  std::to_string(seen[i]) + " groups");
    }
  }
}

}  // namespace dsgd
