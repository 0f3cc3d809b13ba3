#ifndef MEMFAIR_LABEL_HPP_
#define MEMFAIR_LABEL_HPP_

#include <cstdint>
#include <string>

namespace memfair {

using Value = std::int64_t;
using Tid = int;    // thread ids are 1..N; 0 is reserved for "none"
using LocId = int;  // index into a program's/graph's location table
using RegId = int;

/// Access type of an event label. Rmw is both a read and a write.
enum class AccessType { R, W, Rmw };

/// A memory-access label: R(x,v), W(x,v) or RMW(x,vr,vw).
struct EventLabel {
  AccessType typ = AccessType::R;
  LocId loc = 0;
  Value val_r = 0;  // meaningful for R and Rmw
  Value val_w = 0;  // meaningful for W and Rmw

  static EventLabel make_read(LocId x, Value v) {
    return EventLabel{AccessType::R, x, v, 0};
  }
  static EventLabel make_write(LocId x, Value v) {
    return EventLabel{AccessType::W, x, 0, v};
  }
  static EventLabel make_rmw(LocId x, Value vr, Value vw) {
    return EventLabel{AccessType::Rmw, x, vr, vw};
  }

  bool is_read() const { return typ != AccessType::W; }
  bool is_write() const { return typ != AccessType::R; }
  bool is_rmw() const { return typ == AccessType::Rmw; }

  friend bool operator==(const EventLabel& a, const EventLabel& b) {
    if (a.typ != b.typ || a.loc != b.loc) return false;
    if (a.is_read() && a.val_r != b.val_r) return false;
    if (a.is_write() && a.val_w != b.val_w) return false;
    return true;
  }
  friend bool operator!=(const EventLabel& a, const EventLabel& b) {
    return !(a == b);
  }
};

std::string to_string(const EventLabel& l, const std::string& loc_name);

}  // namespace memfair

#endif  // MEMFAIR_LABEL_HPP_
