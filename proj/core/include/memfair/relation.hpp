#ifndef MEMFAIR_RELATION_HPP_
#define MEMFAIR_RELATION_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace memfair {

/// Binary relation over a dense universe {0..n-1}, stored as a bit matrix.
/// Graphs here are tiny (tens of events), so everything is materialized
/// and closures are computed eagerly.
class Relation {
 public:
  Relation() : n_(0), words_(0) {}
  explicit Relation(int n)
      : n_(n), words_((n + 63) / 64), bits_(static_cast<size_t>(n) * words_, 0) {}

  int size() const { return n_; }

  bool at(int a, int b) const {
    return (row(a)[b >> 6] >> (b & 63)) & 1u;
  }
  void set(int a, int b, bool v = true) {
    if (v)
      row(a)[b >> 6] |= (std::uint64_t{1} << (b & 63));
    else
      row(a)[b >> 6] &= ~(std::uint64_t{1} << (b & 63));
  }

  Relation operator|(const Relation& o) const;
  Relation operator&(const Relation& o) const;
  /// Set difference.
  Relation operator-(const Relation& o) const;
  /// Left composition: (a,c) iff exists b with (a,b) in this and (b,c) in o.
  Relation compose(const Relation& o) const;
  Relation inverse() const;
  /// Strict transitive closure.
  Relation closure() const;
  /// Pairs (a,b) with keep(a) and keep(b).
  Relation filter(const std::function<bool(int, int)>& keep_pair) const;
  /// Identity relation on {i | in_set(i)}.
  static Relation identity_on(int n, const std::function<bool(int)>& in_set);

  bool empty() const;
  bool irreflexive() const;
  bool acyclic() const { return closure().irreflexive(); }
  bool subset_of(const Relation& o) const;
  bool operator==(const Relation& o) const {
    return n_ == o.n_ && bits_ == o.bits_;
  }

  std::vector<std::pair<int, int>> pairs() const;
  int in_degree(int b) const;
  int max_in_degree() const;

  /// Elements of the universe ordered consistently with the relation
  /// (topological order, ties broken by element index). Throws
  /// Error(Cyclic) when no such order exists.
  std::vector<int> topo_order() const;

  /// Shortest cycle, canonicalized: minimal length, then lexicographically
  /// least rotation. Empty when acyclic.
  std::vector<int> shortest_cycle() const;

  /// n-totality: every n+1 distinct elements of `universe` contain a
  /// related pair (in either direction).
  bool n_total(const std::vector<int>& universe, int n) const;

  /// R^k as a relation (k >= 0; R^0 is the full identity).
  Relation power(int k) const;
  /// Union of R^1..R^k.
  Relation up_to_power(int k) const;

 private:
  std::uint64_t* row(int a) { return bits_.data() + static_cast<size_t>(a) * words_; }
  const std::uint64_t* row(int a) const {
    return bits_.data() + static_cast<size_t>(a) * words_;
  }

  int n_;
  int words_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace memfair

#endif  // MEMFAIR_RELATION_HPP_
