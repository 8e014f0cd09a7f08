#include <sstream>

#include "relcheck/array.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck {

std::string bounds_text(const std::vector<lang::Extent>& dims) {
  std::ostringstream os;
  for (std::size_t k = 0; k < dims.size(); ++k) os << (k ? "," : "") << dims[k].lo << ':' << dims[k].hi;
  return os.str();
}

}  // namespace relcheck

namespace relcheck::runtime {

const char* to_string(ProcState s) {
  switch (s) {
    case ProcState::Created: return "created";
    case ProcState::Running: return "running";
    case ProcState::Stopped: return "stopped";
    case ProcState::Exited: return "exited";
  }
  return "?";
}

const char* to_string(Site s) { return s == Site::Entry ? "entry" : "exit"; }

Site site_from_string(const std::string& s) {
  if (s == "entry") return Site::Entry;
  if (s == "exit") return Site::Exit;
  throw Error("BadSite", "expected 'entry' or 'exit', got '" + s + "'");
}

const ArrayValue* FinalState::array(const std::string& routine, const std::string& name) const {
  auto r = arrays.find(routine);
  if (r == arrays.end()) return nullptr;
  auto a = r->second.find(name);
  return a == r->second.end() ? nullptr : &a->second;
}

double ResidentArg::value() const {
  if (!cell) return 0.0;
  return integer ? double(cell->integer) : cell->real;
}

std::optional<std::string> ResidentCall::get(const std::string& key) const {
  auto it = meta.find(key);
  if (it != meta.end()) return it->second;
  const auto& defaults = process.options().resident_defaults;
  auto jt = defaults.find(key);
  if (jt != defaults.end()) return jt->second;
  return std::nullopt;
}

}  // namespace relcheck::runtime
