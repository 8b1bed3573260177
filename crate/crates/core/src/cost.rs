//! Logical operation counters and the analytic FLOP model.
//!
//! FLOP figures are modeled, not measured: each counter of logical operations
//! is multiplied by a per-operation coefficient. Counters are caller-owned,
//! monotone within a run, and merge by summation.

/// Monotone counters for the operations that dominate cost: token hashes,
/// index lookups, neurovector creations, and candidate comparisons.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostCounters {
    pub hash_ops: u64,
    pub index_lookups: u64,
    pub nv_creations: u64,
    pub candidate_comparisons: u64,
}

impl CostCounters {
    pub fn new() -> CostCounters {
        CostCounters::default()
    }

    /// Sums another set of counters into this one (shard merging).
    pub fn merge(&mut self, other: &CostCounters) {
        self.hash_ops += other.hash_ops;
        self.index_lookups += other.index_lookups;
        self.nv_creations += other.nv_creations;
        self.candidate_comparisons += other.candidate_comparisons;
    }
}

/// Per-operation FLOP coefficients: one per token hash, two per index lookup,
/// one per token link when a neurovector is created (so a creation costs `d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub flops_per_hash: u64,
    pub flops_per_lookup: u64,
    pub flops_per_creation_link: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            flops_per_hash: 1,
            flops_per_lookup: 2,
            flops_per_creation_link: 1,
        }
    }
}

/// FLOP estimate from measured counters; linear in every counter.
pub fn flop_estimate(counters: &CostCounters, features: usize, model: &CostModel) -> u64 {
    counters.hash_ops * model.flops_per_hash
        + counters.index_lookups * model.flops_per_lookup
        + counters.nv_creations * features as u64 * model.flops_per_creation_link
}

/// Coarser training budget that charges one index probe per row instead of
/// one lookup per token: `rows·d` hash FLOPs + `rows` probes + `creations·d`
/// link FLOPs. Used for report footers alongside the measured estimate.
pub fn single_probe_training_flops(
    rows: u64,
    features: u64,
    creations: u64,
    model: &CostModel,
) -> u64 {
    rows * features * model.flops_per_hash
        + rows * model.flops_per_lookup
        + creations * features * model.flops_per_creation_link
}
