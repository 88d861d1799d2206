#pragma once

#include <cstdint>
#include <vector>

#include "hdc/hypervector.hpp"
#include "hdc/random.hpp"

namespace hdc {

/// Random item memory: one independent random hypervector per discrete
/// symbol (here, one per electrode channel). Fully reconstructible from
/// (size, dim, seed).
class ItemMemory {
 public:
  ItemMemory() = default;

  static ItemMemory build(int n_entries, int dim, std::uint64_t seed);

  const Hypervector& entry(int i) const;
  int size() const { return static_cast<int>(entries_.size()); }
  int dim() const { return entries_.empty() ? 0 : entries_.front().dim(); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::vector<Hypervector> entries_;
};

/// Quantization parameters of one continuous item memory.
struct CimParams {
  int levels = 2;       // number of quantization levels, >= 2
  double d_max = 1.0;   // Hamming distance between the two extreme levels, in [0, 1]

  bool operator==(const CimParams&) const = default;
};

/// Continuous item memory: a chain of hypervectors representing ordered
/// quantization levels. Level 0 is random; a fixed random set of
/// round(d_max * dim) positions is partitioned into levels-1 nearly equal
/// batches and each level flips the next batch, so no position ever flips
/// twice and distance grows linearly along the chain up to d_max.
class ContinuousItemMemory {
 public:
  ContinuousItemMemory() = default;

  static ContinuousItemMemory build(CimParams params, int dim, std::uint64_t seed);

  const Hypervector& level(int i) const;
  const CimParams& params() const { return params_; }
  int levels() const { return params_.levels; }
  int dim() const { return entries_.empty() ? 0 : entries_.front().dim(); }
  std::uint64_t seed() const { return seed_; }

 private:
  CimParams params_;
  std::uint64_t seed_ = 0;
  std::vector<Hypervector> entries_;
};

/// Associative memory of class prototypes with per-class vote accumulators.
/// Prototypes are the bipolarized accumulators; keeping the accumulators
/// around is what makes later online updates possible.
class AssociativeMemory {
 public:
  AssociativeMemory() = default;
  AssociativeMemory(std::vector<int> class_ids, int dim, std::uint64_t seed);

  /// Adds one training hypervector to a class accumulator. The class must
  /// have been registered at construction.
  void add(int class_id, const Hypervector& hv, std::int32_t weight = 1);

  /// Recomputes every prototype from its accumulator. Tie-break randomness
  /// is derived from (seed, class index) only, so re-finalizing after more
  /// adds matches a from-scratch rebuild bit for bit.
  void finalize();

  struct QueryResult {
    int class_id = -1;
    int class_index = -1;
    std::vector<double> distances;  // per registered class, in registration order
  };

  /// Nearest prototype by Hamming distance; ties go to the lowest class
  /// index. Requires finalize() after the last add.
  QueryResult query(const Hypervector& q) const;

  int n_classes() const { return static_cast<int>(class_ids_.size()); }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  bool finalized() const { return finalized_; }
  const std::vector<int>& class_ids() const { return class_ids_; }
  int class_index(int class_id) const;  // -1 when unknown
  const Hypervector& prototype(int index) const;
  const Accumulator& accumulator(int index) const;
  Accumulator& accumulator(int index);

 private:
  std::vector<int> class_ids_;
  std::vector<Accumulator> accumulators_;
  std::vector<Hypervector> prototypes_;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  bool finalized_ = false;
};

/// Orthogonal context memory: one random hypervector per limb position.
class ContextMemory {
 public:
  ContextMemory() = default;

  static ContextMemory build(std::vector<int> position_ids, int dim, std::uint64_t seed);

  const Hypervector& entry(int index) const;
  const Hypervector& entry_for(int position_id) const;
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<int>& position_ids() const { return position_ids_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<int> position_ids_;
  std::vector<Hypervector> entries_;
  std::uint64_t seed_ = 0;
};

}  // namespace hdc
