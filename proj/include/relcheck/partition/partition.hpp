#pragma once

#include <string>
#include <vector>

#include "relcheck/depan/depan.hpp"
#include "relcheck/error.hpp"
#include "relcheck/lang/ast.hpp"
#include "relcheck/partition/database.hpp"
#include "relcheck/partition/distribution.hpp"

namespace relcheck::partition {

// A loop that cannot be block-distributed. `edge` is the blocking dependence
// edge id, or -1 when the obstacle is structural (see `reason`).
class NotParallelizable : public Error {
 public:
  NotParallelizable(std::string routine, int loop, int edge, std::string reason,
                    const std::string& message)
      : Error("NotParallelizable", message),
        routine_(std::move(routine)),
        loop_(loop),
        edge_(edge),
        reason_(std::move(reason)) {}

  const std::string& routine() const { return routine_; }
  int loop() const { return loop_; }
  int edge() const { return edge_; }
  // CarriedFlow, MixedOwnerOffset, NestedDistribution, NonLocalRead,
  // ReplicatedWrite, CallInLoop or NonUnitStep.
  const std::string& reason() const { return reason_; }

 private:
  std::string routine_;
  int loop_;
  int edge_;
  std::string reason_;
};

// Declared range of `array` along `dim` plus every array that must share its
// partition: storage bound through calls, and arrays indexed by the same loop
// index in the same position of one assignment. Arrays that are never written
// stay replicated. Throws UnknownArray, InvalidDimension, InvalidRank,
// AlignmentMismatch.
DistributionSpec make_distribution(const lang::Program& p, const std::string& array,
                                   const std::string& routine, int dim, int nranks);

struct ParallelizeResult {
  lang::Program program;  // SPMD form, statements renumbered
  ParallelizationDB db;
};

// Block-distributes `dist` and rewrites the serial program: owner-computes
// loop bounds, halo exchanges for flow edges that cross block boundaries, and
// bounds threaded through call chains. Edges in `removed` are ignored both as
// blockers and as communication sources.
// Throws NotParallelizable, UnknownEdgeId, AlignmentMismatch, HaloExceedsBlock.
ParallelizeResult parallelize(const lang::Program& p, const DistributionSpec& dist,
                              const depan::DefUseDB& db, const std::vector<int>& removed);

// modifying_routines for every array of every routine, in source order.
std::vector<TargetRecord> target_records(const lang::Program& p, const depan::DefUseDB& db);
// Whole-array actual/formal pairs at every call site.
std::vector<Binding> call_bindings(const lang::Program& p);

}  // namespace relcheck::partition
