#include "hdc/memories.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hdc/error.hpp"

namespace hdc {

ItemMemory ItemMemory::build(int n_entries, int dim, std::uint64_t seed) {
  require(n_entries >= 1, "item memory needs at least one entry");
  ItemMemory im;
  im.seed_ = seed;
  im.entries_.reserve(static_cast<std::size_t>(n_entries));
  RandomSource root(seed);
  for (int i = 0; i < n_entries; ++i) {
    RandomSource rng = root.child(static_cast<std::uint64_t>(i));
    im.entries_.push_back(Hypervector::random(dim, rng));
  }
  return im;
}

const Hypervector& ItemMemory::entry(int i) const {
  require(i >= 0 && i < size(), "item memory index out of range");
  return entries_[static_cast<std::size_t>(i)];
}

ContinuousItemMemory ContinuousItemMemory::build(CimParams params, int dim, std::uint64_t seed) {
  require(params.levels >= 2, "continuous item memory needs at least two levels");
  require(params.d_max >= 0.0 && params.d_max <= 1.0, "d_max must lie in [0, 1]");

  ContinuousItemMemory cim;
  cim.params_ = params;
  cim.seed_ = seed;
  RandomSource root(seed);

  RandomSource base_rng = root.child(0);
  cim.entries_.reserve(static_cast<std::size_t>(params.levels));
  cim.entries_.push_back(Hypervector::random(dim, base_rng));

  // Pick the flip set once: round(d_max * dim) distinct positions.
  const int total_flips = static_cast<int>(std::llround(params.d_max * dim));
  std::vector<int> positions(static_cast<std::size_t>(dim));
  std::iota(positions.begin(), positions.end(), 0);
  RandomSource pick_rng = root.child(1);
  for (int i = 0; i < total_flips; ++i) {
    const int j = i + static_cast<int>(pick_rng.next_below(static_cast<std::uint64_t>(dim - i)));
    std::swap(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(j)]);
  }

  // Batch sizes differ by at most one; earlier batches take the extra.
  const int batches = params.levels - 1;
  const int base = total_flips / batches;
  const int extra = total_flips % batches;
  int cursor = 0;
  for (int b = 0; b < batches; ++b) {
    Hypervector next = cim.entries_.back();
    const int batch_size = base + (b < extra ? 1 : 0);
    for (int k = 0; k < batch_size; ++k) {
      next.flip_bit(positions[static_cast<std::size_t>(cursor++)]);
    }
    cim.entries_.push_back(std::move(next));
  }
  return cim;
}

const Hypervector& ContinuousItemMemory::level(int i) const {
  require(i >= 0 && i < levels(), "continuous item memory level out of range");
  return entries_[static_cast<std::size_t>(i)];
}

AssociativeMemory::AssociativeMemory(std::vector<int> class_ids, int dim, std::uint64_t seed)
    : class_ids_(std::move(class_ids)), dim_(dim), seed_(seed) {
  require(!class_ids_.empty(), "associative memory needs at least one class");
  accumulators_.assign(class_ids_.size(), Accumulator(dim));
  prototypes_.assign(class_ids_.size(), Hypervector(dim));
}

int AssociativeMemory::class_index(int class_id) const {
  const auto it = std::find(class_ids_.begin(), class_ids_.end(), class_id);
  return it == class_ids_.end() ? -1 : static_cast<int>(it - class_ids_.begin());
}

void AssociativeMemory::add(int class_id, const Hypervector& hv, std::int32_t weight) {
  const int index = class_index(class_id);
  require(index >= 0, "unknown class id in associative memory add");
  accumulators_[static_cast<std::size_t>(index)].add(hv, weight);
  finalized_ = false;
}

void AssociativeMemory::finalize() {
  RandomSource root(seed_);
  for (std::size_t i = 0; i < accumulators_.size(); ++i) {
    RandomSource tie_rng = root.child(i);
    prototypes_[i] = accumulators_[i].bipolarize(tie_rng);
  }
  finalized_ = true;
}

AssociativeMemory::QueryResult AssociativeMemory::query(const Hypervector& q) const {
  require(!class_ids_.empty(), "query on empty associative memory");
  require(finalized_, "associative memory must be finalized before query");
  QueryResult result;
  result.distances.reserve(class_ids_.size());
  for (std::size_t i = 0; i < prototypes_.size(); ++i) {
    const double d = hamming(q, prototypes_[i]);
    result.distances.push_back(d);
    if (result.class_index < 0 || d < result.distances[static_cast<std::size_t>(result.class_index)]) {
      result.class_index = static_cast<int>(i);
    }
  }
  result.class_id = class_ids_[static_cast<std::size_t>(result.class_index)];
  return result;
}

const Hypervector& AssociativeMemory::prototype(int index) const {
  require(index >= 0 && index < n_classes(), "prototype index out of range");
  return prototypes_[static_cast<std::size_t>(index)];
}

const Accumulator& AssociativeMemory::accumulator(int index) const {
  require(index >= 0 && index < n_classes(), "accumulator index out of range");
  return accumulators_[static_cast<std::size_t>(index)];
}

Accumulator& AssociativeMemory::accumulator(int index) {
  require(index >= 0 && index < n_classes(), "accumulator index out of range");
  return accumulators_[static_cast<std::size_t>(index)];
}

ContextMemory ContextMemory::build(std::vector<int> position_ids, int dim, std::uint64_t seed) {
  require(!position_ids.empty(), "context memory needs at least one position");
  ContextMemory cm;
  cm.position_ids_ = std::move(position_ids);
  cm.seed_ = seed;
  cm.entries_.reserve(cm.position_ids_.size());
  RandomSource root(seed);
  for (std::size_t i = 0; i < cm.position_ids_.size(); ++i) {
    RandomSource rng = root.child(i);
    cm.entries_.push_back(Hypervector::random(dim, rng));
  }
  return cm;
}

const Hypervector& ContextMemory::entry(int index) const {
  require(index >= 0 && index < size(), "context memory index out of range");
  return entries_[static_cast<std::size_t>(index)];
}

const Hypervector& ContextMemory::entry_for(int position_id) const {
  const auto it = std::find(position_ids_.begin(), position_ids_.end(), position_id);
  require(it != position_ids_.end(), "unknown position id in context memory");
  return entries_[static_cast<std::size_t>(it - position_ids_.begin())];
}

}  // namespace hdc
