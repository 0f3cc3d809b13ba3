#include "memfair/relation.hpp"

#include <algorithm>
#include <deque>

#include "memfair/errors.hpp"

namespace memfair {

Relation Relation::operator|(const Relation& o) const {
  Relation r = *this;
  for (size_t i = 0; i < bits_.size(); ++i) r.bits_[i] |= o.bits_[i];
  return r;
}

Relation Relation::operator&(const Relation& o) const {
  Relation r = *this;
  for (size_t i = 0; i < bits_.size(); ++i) r.bits_[i] &= o.bits_[i];
  return r;
}

Relation Relation::operator-(const Relation& o) const {
  Relation r = *this;
  for (size_t i = 0; i < bits_.size(); ++i) r.bits_[i] &= ~o.bits_[i];
  return r;
}

Relation Relation::compose(const Relation& o) const {
  Relation r(n_);
  for (int a = 0; a < n_; ++a) {
    std::uint64_t* out = r.row(a);
    const std::uint64_t* in = row(a);
    for (int b = 0; b < n_; ++b) {
      if ((in[b >> 6] >> (b & 63)) & 1u) {
        const std::uint64_t* ob = o.row(b);
        for (int w = 0; w < words_; ++w) out[w] |= ob[w];
      }
    }
  }
  return r;
}

Relation Relation::inverse() const {
  Relation r(n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (at(a, b)) r.set(b, a);
  return r;
}

Relation Relation::closure() const {
  // Warshall over bitset rows.
  Relation r = *this;
  for (int k = 0; k < n_; ++k) {
    const std::uint64_t* rk = r.row(k);
    for (int a = 0; a < n_; ++a) {
      if (r.at(a, k)) {
        std::uint64_t* ra = r.row(a);
        for (int w = 0; w < words_; ++w) ra[w] |= rk[w];
      }
    }
  }
  return r;
}

Relation Relation::filter(const std::function<bool(int, int)>& keep_pair) const {
  Relation r(n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (at(a, b) && keep_pair(a, b)) r.set(a, b);
  return r;
}

Relation Relation::identity_on(int n, const std::function<bool(int)>& in_set) {
  Relation r(n);
  for (int a = 0; a < n; ++a)
    if (in_set(a)) r.set(a, a);
  return r;
}

bool Relation::empty() const {
  for (auto w : bits_)
    if (w) return false;
  return true;
}

bool Relation::irreflexive() const {
  for (int a = 0; a < n_; ++a)
    if (at(a, a)) return false;
  return true;
}

bool Relation::subset_of(const Relation& o) const {
  for (size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] & ~o.bits_[i]) return false;
  return true;
}

std::vector<std::pair<int, int>> Relation::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (at(a, b)) out.emplace_back(a, b);
  return out;
}

int Relation::in_degree(int b) const {
  int d = 0;
  for (int a = 0; a < n_; ++a)
    if (at(a, b)) ++d;
  return d;
}

int Relation::max_in_degree() const {
  int m = 0;
  for (int b = 0; b < n_; ++b) m = std::max(m, in_degree(b));
  return m;
}

std::vector<int> Relation::topo_order() const {
  std::vector<int> indeg(n_, 0);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (at(a, b) && a != b) ++indeg[b];
  // Min-index-first Kahn walk keeps the order canonical.
  std::vector<int> out;
  std::vector<bool> done(n_, false);
  for (int step = 0; step < n_; ++step) {
    int pick = -1;
    for (int i = 0; i < n_; ++i)
      if (!done[i] && indeg[i] == 0) {
        pick = i;
        break;
      }
    if (pick < 0) throw Error(ErrorCode::Cyclic, "relation has a cycle");
    done[pick] = true;
    out.push_back(pick);
    for (int b = 0; b < n_; ++b)
      if (at(pick, b) && pick != b) --indeg[b];
  }
  return out;
}

std::vector<int> Relation::shortest_cycle() const {
  // BFS from every node; self loops first.
  for (int a = 0; a < n_; ++a)
    if (at(a, a)) return {a};
  std::vector<int> best;
  for (int start = 0; start < n_; ++start) {
    std::vector<int> pred(n_, -1), dist(n_, -1);
    std::deque<int> q;
    q.push_back(start);
    dist[start] = 0;
    int found = -1;
    while (!q.empty() && found < 0) {
      int a = q.front();
      q.pop_front();
      for (int b = 0; b < n_; ++b) {
        if (!at(a, b)) continue;
        if (b == start) {
          found = a;
          break;
        }
        if (dist[b] < 0) {
          dist[b] = dist[a] + 1;
          pred[b] = a;
          q.push_back(b);
        }
      }
    }
    if (found >= 0) {
      std::vector<int> cyc;
      for (int v = found; v != -1; v = pred[v]) cyc.push_back(v);
      std::reverse(cyc.begin(), cyc.end());  // starts at `start`
      if (best.empty() || cyc.size() < best.size() ||
          (cyc.size() == best.size() && cyc < best))
        best = cyc;
    }
  }
  return best;
}

bool Relation::n_total(const std::vector<int>& universe, int n) const {
  // Check every (n+1)-subset for a related pair.
  std::vector<int> idx(static_cast<size_t>(n) + 1, 0);
  const int u = static_cast<int>(universe.size());
  if (u <= n) return true;
  std::function<bool(int, int)> rec = [&](int depth, int from) -> bool {
    if (depth == n + 1) {
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
          if (i != j && at(universe[idx[i]], universe[idx[j]])) return true;
      return false;
    }
    for (int k = from; k < u; ++k) {
      idx[depth] = k;
      if (!rec(depth + 1, k + 1)) return false;
    }
    return true;
  };
  return rec(0, 0);
}

Relation Relation::power(int k) const {
  Relation acc(n_);
  for (int a = 0; a < n_; ++a) acc.set(a, a);
  Relation base = *this;
  while (k > 0) {
    if (k & 1) acc = acc.compose(base);
    base = base.compose(base);
    k >>= 1;
  }
  return acc;
}

Relation Relation::up_to_power(int k) const {
  Relation acc(n_);
  Relation cur = *this;
  for (int i = 1; i <= k; ++i) {
    acc = acc | cur;
    if (i < k) cur = cur.compose(*this);
  }
  return acc;
}

}  // namespace memfair
