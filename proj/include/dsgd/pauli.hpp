#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dsgd {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);

/// Tensor product of single-qubit Paulis, stored as X/Z bit masks.
/// Qubit q corresponds to bit q. Y on qubit q sets both bits.
class PauliString {
 public:
  PauliString() = default;

  static PauliString from_map(const std::map<int, Pauli>& ops);
  static PauliString single(Pauli p, int qubit);
  static PauliString from_masks(std::uint64_t x_mask, std::uint64_t z_mask);

  /// Parses "X0 Z3 Y1" (whitespace optional: "X0Z3"). "I" or "" is the
  /// identity. Throws std::invalid_argument on malformed input.
  static PauliString parse(std::string_view text);

  Pauli at(int qubit) const;
  std::uint64_t x_mask() const noexcept { return x_; }
  std::uint64_t z_mask() const noexcept { return z_; }
  std::uint64_t support() const noexcept { return x_ | z_; }
  int weight() const noexcept;
  int num_y() const noexcept;
  /// Highest qubit index acted on, or -1 for the identity.
  int max_qubit() const noexcept;
  bool is_identity() const noexcept { return (x_ | z_) == 0; }
  bool is_diagonal() const noexcept { return x_ == 0; }

  /// Same Pauli or identity on every qubit.
  bool qubitwise_commutes(const PauliString& other) const noexcept;
  bool commutes(const PauliString& other) const noexcept;

  std::string str() const;

  friend auto operator<=>(const PauliString&, const PauliString&) = default;
  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

struct PauliTerm {
  double coefficient = 0.0;
  PauliString pauli;
};

/// Real-weighted sum of Pauli strings. Duplicate strings are merged on
/// construction (first occurrence keeps its position); zero coefficients are
/// kept so that term counts stay stable.
class PauliObservable {
 public:
  PauliObservable() = default;
  explicit PauliObservable(std::vector<PauliTerm> terms);

  /// Parses "1.0 Z0 Z1 + 0.5 X0 - 2 Y1". Coefficients default to 1.
  static PauliObservable parse(std::string_view text);

  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const PauliTerm& operator[](std::size_t i) const { return terms_[i]; }

  /// Sum of |coefficient|; upper bound on the spectral norm.
  double norm_bound() const noexcept;
  int max_qubit() const noexcept;
  bool all_terms_commute() const noexcept;
  bool is_diagonal() const noexcept;

  PauliObservable scaled(double factor) const;
  /// Observable made of the given subset of terms.
  PauliObservable subset(const std::vector<std::size_t>& indices) const;

  std::string str() const;

 private:
  std::vector<PauliTerm> terms_;
};

/// Partition of term indices into measurement groups.
using TermGroups = std::vector<std::vector<std::size_t>>;

/// Greedy first-fit partition into qubit-wise commuting groups, in term order.
TermGroups greedy_qwc_groups(const PauliObservable& obs);

/// Throws std::invalid_argument unless every term is in exactly one group and
/// each group is qubit-wise commuting.
void validate_grouping(const PauliObservable& obs, const TermGroups& groups);

}  // namespace dsgd
