#include <sstream>

#include "interpreter.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck::runtime {

World::World(int nranks)
    : nranks_(nranks), blocked_src_(std::size_t(nranks), -1), blocked_where_(std::size_t(nranks)),
      exited_(std::size_t(nranks), false) {}

void World::send(int src, int dst, std::vector<double> data) {
  if (dst < 0 || dst >= nranks_) return;
  std::lock_guard<std::mutex> lk(mu_);
  channels_[{src, dst}].push_back(std::move(data));
  cv_.notify_all();
}

std::vector<double> World::receive(Process& self, int src, std::size_t count, const std::string& where) {
  const int me = self.rank();
  std::unique_lock<std::mutex> lk(mu_);
  auto& ch = channels_[{src, me}];
  blocked_src_[me] = src;
  blocked_where_[me] = where;
  for (;;) {
    if (!ch.empty()) {
      std::vector<double> data = std::move(ch.front());
      ch.pop_front();
      blocked_src_[me] = -1;
      if (data.size() != count)
        throw Error("RuntimeFault", where + ": expected " + std::to_string(count) +
                                        " elements from rank " + std::to_string(src) + ", got " +
                                        std::to_string(data.size()));
      return data;
    }
    if (self.terminating()) {
      blocked_src_[me] = -1;
      throw Terminated{};
    }
    detect_locked();
    if (!deadlock_.empty()) {
      blocked_src_[me] = -1;
      throw Error("Deadlock", deadlock_);
    }
    cv_.wait(lk);
  }
}

void World::detect_locked() {
  if (!deadlock_.empty()) return;
  bool any = false;
  for (int r = 0; r < nranks_; ++r) {
    if (exited_[r]) continue;
    int src = blocked_src_[r];
    if (src < 0) return;
    auto it = channels_.find({src, r});
    if (it != channels_.end() && !it->second.empty()) return;
    any = true;
  }
  if (!any) return;
  std::ostringstream os;
  os << "deadlock:";
  for (int r = 0; r < nranks_; ++r) {
    if (exited_[r]) continue;
    os << " rank " << r << " blocked at " << blocked_where_[r] << " receiving from rank "
       << blocked_src_[r] << ';';
  }
  deadlock_ = os.str();
  deadlock_.pop_back();
  cv_.notify_all();
}

void World::rank_exited(int rank) {
  std::lock_guard<std::mutex> lk(mu_);
  if (rank >= 0 && rank < nranks_) exited_[rank] = true;
  detect_locked();
  cv_.notify_all();
}

void World::wake() {
  std::lock_guard<std::mutex> lk(mu_);
  cv_.notify_all();
}

std::size_t World::residual() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::size_t n = 0;
  for (const auto& [key, ch] : channels_) n += ch.size();
  return n;
}

std::string World::deadlock_report() const {
  std::lock_guard<std::mutex> lk(mu_);
  return deadlock_;
}

}  // namespace relcheck::runtime
