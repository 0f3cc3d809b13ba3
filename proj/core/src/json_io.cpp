#include "memfair/json_io.hpp"

#include <sstream>

#include "json.hpp"
#include "memfair/errors.hpp"

namespace memfair {

namespace {

using nlohmann::json;

const char* kind_name(AccessType t) {
  switch (t) {
    case AccessType::R:
      return "R";
    case AccessType::W:
      return "W";
    case AccessType::Rmw:
      return "RMW";
  }
  return "?";
}

AccessType kind_from(const std::string& s) {
  if (s == "R") return AccessType::R;
  if (s == "W") return AccessType::W;
  if (s == "RMW") return AccessType::Rmw;
  throw Error(ErrorCode::Syntax, "bad event kind '" + s + "'");
}

json graph_json(const ExecutionGraph& g) {
  json events = json::array();
  for (const auto& e : g.events) {
    json je;
    if (e.is_init()) {
      je["tid"] = nullptr;
      je["sn"] = nullptr;
    } else {
      je["tid"] = e.tid;
      je["sn"] = e.sn;
    }
    je["kind"] = kind_name(e.lab.typ);
    je["loc"] = g.locs[e.lab.loc];
    if (e.lab.is_read()) je["valR"] = e.lab.val_r;
    if (e.lab.is_write()) je["valW"] = e.lab.val_w;
    events.push_back(je);
  }
  json rf = json::array(), mo = json::array();
  for (auto& [a, b] : g.rf.pairs()) rf.push_back({a, b});
  for (auto& [a, b] : g.mo.pairs()) mo.push_back({a, b});
  return json{{"events", events}, {"rf", rf}, {"mo", mo}};
}

std::string dump(const json& j, bool pretty) {
  return pretty ? j.dump(2) : j.dump();
}

}  // namespace

std::string graph_to_json(const ExecutionGraph& g, bool pretty) {
  return dump(graph_json(g), pretty);
}

ExecutionGraph graph_from_json(const std::string& text) {
  json j = json::parse(text);
  ExecutionGraph g;
  std::vector<Event> events;
  auto loc_id = [&](const std::string& name) -> LocId {
    for (size_t i = 0; i < g.locs.size(); ++i)
      if (g.locs[i] == name) return static_cast<LocId>(i);
    g.locs.push_back(name);
    return static_cast<LocId>(g.locs.size() - 1);
  };
  std::vector<Event> order;  // as listed, for index resolution
  for (const auto& je : j.at("events")) {
    EventLabel lab;
    lab.typ = kind_from(je.at("kind").get<std::string>());
    lab.loc = loc_id(je.at("loc").get<std::string>());
    if (je.contains("valR") && !je["valR"].is_null())
      lab.val_r = je["valR"].get<Value>();
    if (je.contains("valW") && !je["valW"].is_null())
      lab.val_w = je["valW"].get<Value>();
    Event e;
    if (je.at("tid").is_null()) {
      e = Event::init(lab.loc);
    } else {
      e = Event::make(je.at("tid").get<Tid>(), je.at("sn").get<int>(), lab);
    }
    order.push_back(e);
  }
  std::vector<std::pair<Event, Event>> rf, mo;
  for (const auto& p : j.at("rf"))
    rf.emplace_back(order.at(p.at(0).get<size_t>()),
                    order.at(p.at(1).get<size_t>()));
  for (const auto& p : j.at("mo"))
    mo.emplace_back(order.at(p.at(0).get<size_t>()),
                    order.at(p.at(1).get<size_t>()));
  return make_graph(g.locs, order, rf, mo);
}

std::string graph_to_dot(const ExecutionGraph& g) {
  std::ostringstream os;
  os << "digraph G {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n";
  for (int i = 0; i < g.size(); ++i) {
    const Event& e = g.events[i];
    std::string name = e.is_init() ? "init " : std::to_string(e.tid) + ":" +
                                                   std::to_string(e.sn) + " ";
    os << "  e" << i << " [label=\"" << name
       << to_string(e.lab, g.locs[e.lab.loc]) << "\"];\n";
  }
  const Relation po = g.po();
  // Only immediate po edges, to keep the picture readable.
  for (auto& [a, b] : po.pairs()) {
    bool immediate = true;
    for (int c = 0; c < g.size(); ++c)
      if (po.at(a, c) && po.at(c, b)) immediate = false;
    if (immediate) os << "  e" << a << " -> e" << b << ";\n";
  }
  for (auto& [a, b] : g.rf.pairs())
    os << "  e" << a << " -> e" << b
       << " [label=\"rf\", color=\"forestgreen\", style=dashed];\n";
  for (auto& [a, b] : g.mo.pairs()) {
    bool immediate = true;
    for (int c = 0; c < g.size(); ++c)
      if (g.mo.at(a, c) && g.mo.at(c, b)) immediate = false;
    if (immediate)
      os << "  e" << a << " -> e" << b << " [label=\"mo\", color=\"blue\"];\n";
  }
  for (auto& [a, b] : g.fr().pairs())
    os << "  e" << a << " -> e" << b << " [label=\"fr\", color=\"red\"];\n";
  os << "}\n";
  return os.str();
}

std::string trace_to_json(const AnnotatedTrace& t, bool pretty) {
  json steps = json::array();
  for (const auto& st : t.steps) {
    json js;
    switch (st.t.kind) {
      case TransitionLabel::Kind::Obs: {
        js["kind"] = "obs";
        js["tid"] = st.t.tid;
        json lab;
        lab["kind"] = kind_name(st.t.lab.typ);
        lab["loc"] = t.locs[st.t.lab.loc];
        if (st.t.lab.is_read()) lab["valR"] = st.t.lab.val_r;
        if (st.t.lab.is_write()) lab["valW"] = st.t.lab.val_w;
        js["label"] = lab;
        break;
      }
      case TransitionLabel::Kind::PropTSO:
        js["kind"] = "prop";
        js["tid"] = st.t.tid;
        break;
      case TransitionLabel::Kind::PropRA: {
        js["kind"] = "prop";
        js["tid"] = st.t.tid;
        const RAMessage& m = st.post.ra.msgs[st.t.msg_id];
        js["loc"] = t.locs[m.loc];
        js["ts"] = st.post.ra.pos(m.loc, st.t.msg_id);
        break;
      }
    }
    steps.push_back(js);
  }
  return dump(json{{"model", model_name(t.model)}, {"steps", steps}}, pretty);
}

std::string outcome_to_json(bool allowed, const ExecutionGraph* witness,
                            bool pretty) {
  json j;
  j["outcome"] = allowed ? "allowed" : "forbidden";
  if (witness) j["witness"] = graph_json(*witness);
  return dump(j, pretty);
}

std::string termination_to_json(const TerminationVerdict& v, bool pretty) {
  json j;
  j["outcome"] = outcome_name(v.outcome);
  if (!v.reason.empty()) j["reason"] = v.reason;
  if (!v.model_note.empty()) j["modelNote"] = v.model_note;
  if (v.witness) j["witness"] = graph_json(v.witness->graph);
  if (!v.stuck_threads.empty()) j["stuckThreads"] = v.stuck_threads;
  return dump(j, pretty);
}

std::string robustness_to_json(const RobustnessVerdict& v, bool pretty) {
  json j;
  j["outcome"] = v.robust ? "robust" : "non-robust";
  if (v.witness) j["witness"] = graph_json(*v.witness);
  return dump(j, pretty);
}

}  // namespace memfair
