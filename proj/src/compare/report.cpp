#include "relcheck/compare/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "relcheck/error.hpp"

namespace relcheck::compare {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error("MalformedReport", "divergence report: " + what); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string index_text(const std::vector<std::int64_t>& idx) {
  std::string s = "(";
  for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? ", " : "") + std::to_string(idx[k]);
  return s + ")";
}

constexpr std::size_t kListed = 20;

}  // namespace

void DivergenceReport::validate() const {
  if (routine.empty()) malformed("missing routine");
  if (site != "entry" && site != "exit") malformed("site must be entry or exit, got '" + site + "'");
  if (invocation < 1) malformed("invocation must be positive");
  if (!(tolerance >= 0.0)) malformed("negative tolerance");
  ComparisonMode m{mode, tolerance, false};
  switch (mode) {
    case Mode::ElementWise:
      if (diffs.empty()) malformed("element-wise report without differing elements");
      for (const auto& d : diffs)
        if (m.within(d.serial, d.parallel)) malformed("listed element " + index_text(d.index) + " is within tolerance");
      break;
    case Mode::PartialChecksum:
      if (!failing_rank) malformed("partial checksum report without failing rank");
      [[fallthrough]];
    case Mode::GlobalChecksum:
      if (!checksum_delta) malformed("checksum report without delta");
      break;
  }
}

DivergenceReport make_report(const std::string& routine, const std::string& site, int invocation,
                             const std::string& array, const ComparisonMode& m, const Verdict& v) {
  DivergenceReport r;
  r.routine = routine;
  r.site = site;
  r.invocation = invocation;
  r.array = array;
  r.mode = m.mode;
  r.tolerance = m.tolerance;
  if (m.mode == Mode::ElementWise) {
    r.diffs = v.diffs;
  } else {
    r.checksum_delta = v.delta;
    r.failing_rank = v.failing_rank;
  }
  return r;
}

std::string report_text(const DivergenceReport& r) {
  json j;
  j["v"] = 1;
  j["routine"] = r.routine;
  j["site"] = r.site;
  j["invocation"] = r.invocation;
  j["array"] = r.array;
  j["mode"] = to_string(r.mode);
  j["tolerance"] = r.tolerance;
  j["checksum_delta"] = r.checksum_delta ? json(*r.checksum_delta) : json(nullptr);
  j["failing_rank"] = r.failing_rank ? json(*r.failing_rank) : json(nullptr);
  json diffs = json::array();
  for (const auto& d : r.diffs)
    diffs.push_back({{"index", d.index}, {"serial", d.serial}, {"parallel", d.parallel}, {"rank", d.rank}});
  j["diffs"] = diffs;
  j["spmd_source"] = r.spmd_source;
  return j.dump(2);
}

DivergenceReport parse_report(const std::string& text) {
  DivergenceReport r;
  try {
    json j = json::parse(text);
    if (j.at("v").get<int>() != 1) malformed("unsupported version");
    r.routine = j.at("routine").get<std::string>();
    r.site = j.at("site").get<std::string>();
    r.invocation = j.at("invocation").get<int>();
    r.array = j.at("array").get<std::string>();
    r.mode = mode_from_string(j.at("mode").get<std::string>());
    r.tolerance = j.at("tolerance").get<double>();
    if (!j.at("checksum_delta").is_null()) r.checksum_delta = j["checksum_delta"].get<double>();
    if (!j.at("failing_rank").is_null()) r.failing_rank = j["failing_rank"].get<int>();
    for (const auto& d : j.at("diffs"))
      r.diffs.push_back({d.at("index").get<std::vector<std::int64_t>>(), d.at("serial").get<double>(),
                         d.at("parallel").get<double>(), d.at("rank").get<int>()});
    r.spmd_source = j.at("spmd_source").get<std::string>();
  } catch (const json::exception& e) {
    malformed(e.what());
  } catch (const Error& e) {
    if (e.code() == "MalformedReport") throw;
    malformed(e.what());
  }
  r.validate();
  return r;
}

std::string message(const DivergenceReport& r) {
  std::ostringstream os;
  os << "Value of array " << r.array << " differs at " << r.site << " of " << r.routine << " (invocation "
     << r.invocation << ")\n";
  os << "mode " << to_string(r.mode) << ", tolerance " << num(r.tolerance) << '\n';
  if (r.mode == Mode::ElementWise) {
    os << r.diffs.size() << " differing element" << (r.diffs.size() == 1 ? "" : "s") << ":\n";
    for (std::size_t k = 0; k < r.diffs.size() && k < kListed; ++k) {
      const Diff& d = r.diffs[k];
      os << "  " << r.array << index_text(d.index) << " serial " << num(d.serial) << " parallel " << num(d.parallel)
         << " rank " << d.rank << '\n';
    }
    if (r.diffs.size() > kListed) os << "  ... " << r.diffs.size() - kListed << " more\n";
  } else {
    if (r.checksum_delta) os << "checksum delta " << num(*r.checksum_delta) << '\n';
    if (r.failing_rank) os << "first failing rank " << *r.failing_rank << '\n';
  }
  if (!r.spmd_source.empty()) os << "parallel source of " << r.routine << ":\n" << r.spmd_source;
  return os.str();
}

}  // namespace relcheck::compare
