#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "relcheck/probe/probe.hpp"

namespace relcheck::probe {

namespace {

constexpr auto kStopWait = std::chrono::seconds(10);

std::optional<int> integer(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

int pid_arg(const std::string& s) {
  auto v = integer(s);
  if (!v) throw Error("BadCommand", "expected a pid, got '" + s + "'");
  return *v;
}

void arity(const std::vector<std::string>& w, std::size_t lo, std::size_t hi, const char* usage) {
  if (w.size() < lo || w.size() > hi) throw Error("BadCommand", std::string("usage: ") + usage);
}

}  // namespace

InstrumentationServer::InstrumentationServer(runtime::Runtime& rt, std::string name)
    : rt_(rt), name_(std::move(name)) {
  register_builtin_residents();
}

runtime::Process& InstrumentationServer::attached(int pid) {
  runtime::Process& p = rt_.process(pid);
  auto who = p.attached_by();
  if (!who || *who != name_) throw Error("NotAttached", name_ + " is not attached to pid " + std::to_string(pid));
  return p;
}

std::string InstrumentationServer::handle_command(const std::string& line) {
  ++commands_;
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.empty()) return "err BadCommand empty command";
  try {
    return dispatch(words);
  } catch (const Error& e) {
    return "err " + e.code() + " " + e.what();
  }
}

std::string InstrumentationServer::dispatch(const std::vector<std::string>& w) {
  const std::string& cmd = w[0];
  if (cmd == "attach") {
    arity(w, 3, 3, "attach <label> <pid>");
    int pid = pid_arg(w[2]);
    runtime::Process& p = rt_.process(pid);
    if (p.label() != w[1])
      throw Error("LabelMismatch", "pid " + w[2] + " runs '" + p.label() + "', not '" + w[1] + "'");
    p.attach(name_);
    // Attaching halts the target, as a dynamic instrumentation attach does.
    if (p.state() == runtime::ProcState::Running) {
      p.stop();
      auto deadline = std::chrono::steady_clock::now() + kStopWait;
      while (p.state() == runtime::ProcState::Running && std::chrono::steady_clock::now() < deadline)
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return "ok attached " + w[2] + " " + runtime::to_string(p.state());
  }
  if (cmd == "detach") {
    arity(w, 2, 2, "detach <pid>");
    int pid = pid_arg(w[1]);
    runtime::Process& p = rt_.process(pid);
    p.detach(name_);
    p.continue_();
    last_point_of_.erase(pid);
    return "ok detached " + w[1];
  }
  if (cmd == "stop" || cmd == "continue") {
    arity(w, 2, 2, "stop|continue <pid>");
    runtime::Process& p = attached(pid_arg(w[1]));
    if (cmd == "stop") p.stop();
    else p.continue_();
    return "ok " + cmd + " " + w[1];
  }
  if (cmd == "createPoint") {
    arity(w, 3, 4, "createPoint <pid> <routine> [entry|exit]");
    int pid = pid_arg(w[1]);
    runtime::Process& p = attached(pid);
    runtime::Site site = w.size() == 4 ? runtime::site_from_string(w[3]) : runtime::Site::Entry;
    int id = p.create_point(w[2], site);
    last_point_of_[pid][""] = id;
    last_point_of_[pid][w[2]] = id;
    return "ok point " + std::to_string(id);
  }
  if (cmd == "insertCall") {
    if (w.size() < 3) throw Error("BadCommand", "usage: insertCall <pid> [<point>|<routine>] <fn> <argpos>...");
    int pid = pid_arg(w[1]);
    runtime::Process& p = attached(pid);
    std::vector<std::string> pos;
    runtime::InsertedCall call;
    for (std::size_t k = 2; k < w.size(); ++k) {
      auto eq = w[k].find('=');
      if (eq == std::string::npos) pos.push_back(w[k]);
      else call.meta[w[k].substr(0, eq)] = w[k].substr(eq + 1);
    }
    if (pos.empty()) throw Error("BadCommand", "insertCall needs a function name");
    // A second non-numeric word means the first names the point.
    std::string target;
    std::size_t fn_at = 0;
    if (pos.size() >= 2 && !integer(pos[1])) {
      target = pos[0];
      fn_at = 1;
    }
    int point = 0;
    if (target.empty()) {
      auto it = last_point_of_[pid].find("");
      if (it == last_point_of_[pid].end()) throw Error("UnknownPoint", "no point created in pid " + w[1]);
      point = it->second;
    } else if (auto id = integer(target)) {
      point = *id;
    } else {
      auto it = last_point_of_[pid].find(target);
      if (it == last_point_of_[pid].end())
        throw Error("UnknownPoint", "no point created at routine '" + target + "' in pid " + w[1]);
      point = it->second;
    }
    call.fn = pos[fn_at];
    for (std::size_t k = fn_at + 1; k < pos.size(); ++k) {
      auto v = integer(pos[k]);
      if (!v) throw Error("BadArgPosition", "argument position '" + pos[k] + "' is not an integer");
      call.argpos.push_back(*v);
    }
    std::string fn = call.fn;
    p.insert_call(point, std::move(call));
    return "ok inserted " + fn + " at point " + std::to_string(point);
  }
  throw Error("UnknownCommand", "unknown command '" + cmd + "'");
}

void InstrumentationServer::serve(std::istream& in, std::ostream& out) {
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line == "quit") break;
    out << handle_command(line) << '\n' << std::flush;
  }
}

}  // namespace relcheck::probe
