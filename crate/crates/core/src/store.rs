//! The neurovector store: one record per stored training instance, linked to
//! its tokens through an inverted index.
//!
//! Prediction retrieves every record sharing at least one token with the
//! query (one index lookup per token), then picks the record maximizing
//! `(match count, energy, -id)` lexicographically: token overlap first,
//! historical reliability as the tie-break, earliest creation as the final
//! deterministic tie-break.

use std::collections::HashMap;

use crate::cost::CostCounters;
use crate::data::{render_numeric, Task};
use crate::error::{Error, Result};
use crate::token::Token;

/// Dense ordinal id of a stored neurovector (creation order, 0-based).
pub type NvId = u32;

/// A prediction target: class label or numeric value. A store is homogeneous;
/// every record's target has the variant fixed by the store's task.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetValue {
    Class(String),
    Numeric(f64),
}

impl TargetValue {
    pub fn matches_task(&self, task: Task) -> bool {
        matches!(
            (self, task),
            (TargetValue::Class(_), Task::Classification)
                | (TargetValue::Numeric(_), Task::Regression)
        )
    }

    pub fn class(&self) -> Option<&str> {
        match self {
            TargetValue::Class(c) => Some(c),
            TargetValue::Numeric(_) => None,
        }
    }

    pub fn numeric(&self) -> Option<f64> {
        match self {
            TargetValue::Numeric(v) => Some(*v),
            TargetValue::Class(_) => None,
        }
    }
}

impl std::fmt::Display for TargetValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetValue::Class(c) => f.write_str(c),
            TargetValue::Numeric(v) => f.write_str(&render_numeric(*v, None)),
        }
    }
}

/// One stored training instance with its bookkeeping counters.
///
/// `use_count` is how often this record was selected to predict during
/// training, `success_count` how often that prediction was counted correct,
/// and `cum_abs_error` the accumulated absolute error of its regression
/// predictions (always 0 for classification). Energy is derived from these on
/// demand, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct NeurovectorRecord {
    pub id: NvId,
    pub target: TargetValue,
    pub use_count: u64,
    pub success_count: u64,
    pub cum_abs_error: f64,
    /// 0-based index of the originating row in the loaded dataset.
    pub source_row: Option<usize>,
    /// Tokens in schema order; also the source of truth when rebuilding the
    /// index from a model file.
    pub tokens: Vec<Token>,
}

/// Energy hyperparameters. `alpha` scales the regression error decay;
/// `success_tolerance` is the absolute error under which a regression
/// prediction counts as a success (0 means exact match).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    alpha: f64,
    success_tolerance: f64,
}

impl EnergyParams {
    pub fn new(alpha: f64, success_tolerance: f64) -> Result<EnergyParams> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha must be a positive finite number, got {alpha}"
            )));
        }
        if !(success_tolerance >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "success tolerance must be non-negative, got {success_tolerance}"
            )));
        }
        Ok(EnergyParams {
            alpha,
            success_tolerance,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn success_tolerance(&self) -> f64 {
        self.success_tolerance
    }
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            alpha: 1.0,
            success_tolerance: 0.0,
        }
    }
}

/// Reliability score of a record: `success²/use` for classification,
/// additionally damped by `exp(-alpha·cum_abs_error)` for regression.
/// Defined as 0 for never-selected records, so fresh ones lose energy ties
/// to proven ones.
pub fn energy(record: &NeurovectorRecord, task: Task, params: &EnergyParams) -> f64 {
    if record.use_count == 0 {
        return 0.0;
    }
    let success = record.success_count as f64;
    let base = success * success / record.use_count as f64;
    match task {
        Task::Classification => base,
        Task::Regression => base * (-params.alpha * record.cum_abs_error).exp(),
    }
}

/// Did `predicted` count as correct against `actual` under the task's rule?
pub fn prediction_success(
    predicted: &TargetValue,
    actual: &TargetValue,
    task: Task,
    params: &EnergyParams,
) -> bool {
    match task {
        Task::Classification => predicted == actual,
        Task::Regression => match (predicted.numeric(), actual.numeric()) {
            (Some(p), Some(a)) => (p - a).abs() <= params.success_tolerance,
            _ => false,
        },
    }
}

/// The winning record of one selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub id: NvId,
    pub match_count: u32,
    pub energy: f64,
}

/// Outcome of one prediction, with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionOutcome {
    pub predicted: TargetValue,
    pub selected: Option<NvId>,
    pub match_count: u32,
    pub selected_energy: f64,
    pub candidate_count: usize,
    pub used_fallback: bool,
}

/// Inverted token index over neurovector records.
#[derive(Debug, Clone)]
pub struct TokenIndex {
    task: Task,
    index: HashMap<Token, Vec<NvId>>,
    records: Vec<NeurovectorRecord>,
}

impl TokenIndex {
    pub fn new(task: Task) -> TokenIndex {
        TokenIndex {
            task,
            index: HashMap::new(),
            records: Vec::new(),
        }
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[NeurovectorRecord] {
        &self.records
    }

    pub fn record(&self, id: NvId) -> Result<&NeurovectorRecord> {
        self.records
            .get(id as usize)
            .ok_or_else(|| Error::StoreCorruption(format!("unknown neurovector id {id}")))
    }

    /// Number of distinct tokens in the index.
    pub fn token_count(&self) -> usize {
        self.index.len()
    }

    /// Posting set of one token, ids in creation order.
    pub fn posting(&self, token: &Token) -> Option<&[NvId]> {
        self.index.get(token).map(Vec::as_slice)
    }

    /// Appends a fresh record (counters at zero) and links it into the
    /// posting set of each of its tokens. Duplicate tokens are collapsed so
    /// posting sets stay duplicate-free. Returns the new id, which is always
    /// the previous record count.
    pub fn insert(
        &mut self,
        tokens: Vec<Token>,
        target: TargetValue,
        source_row: Option<usize>,
        counters: &mut CostCounters,
    ) -> Result<NvId> {
        if tokens.is_empty() {
            return Err(Error::StoreCorruption(
                "cannot store a neurovector with no tokens".into(),
            ));
        }
        if !target.matches_task(self.task) {
            return Err(Error::StoreCorruption(format!(
                "target {target} does not match store task {}",
                self.task
            )));
        }
        let mut tokens = tokens;
        let mut seen = std::collections::HashSet::new();
        tokens.retain(|t| seen.insert(t.clone()));

        let id = self.records.len() as NvId;
        for token in &tokens {
            self.index.entry(token.clone()).or_default().push(id);
        }
        self.records.push(NeurovectorRecord {
            id,
            target,
            use_count: 0,
            success_count: 0,
            cum_abs_error: 0.0,
            source_row,
            tokens,
        });
        counters.nv_creations += 1;
        Ok(id)
    }

    /// Match counts for every record sharing at least one token with the
    /// query. Performs exactly one index lookup (and one hash) per token;
    /// unseen tokens contribute nothing.
    pub fn candidates(&self, tokens: &[Token], counters: &mut CostCounters) -> HashMap<NvId, u32> {
        let mut counts = HashMap::new();
        for token in tokens {
            counters.hash_ops += 1;
            counters.index_lookups += 1;
            if let Some(posting) = self.index.get(token) {
                for &id in posting {
                    *counts.entry(id).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    /// Picks the candidate maximizing `(match count, energy, -id)`. Returns
    /// `None` for an empty candidate map. The ordering is total, so the
    /// result does not depend on map iteration order.
    pub fn select(
        &self,
        candidates: &HashMap<NvId, u32>,
        params: &EnergyParams,
        counters: &mut CostCounters,
    ) -> Option<Selection> {
        let mut best: Option<Selection> = None;
        for (&id, &match_count) in candidates {
            counters.candidate_comparisons += 1;
            let record = &self.records[id as usize];
            let e = energy(record, self.task, params);
            let better = match &best {
                None => true,
                Some(b) => {
                    (match_count, e, std::cmp::Reverse(id))
                        > (b.match_count, b.energy, std::cmp::Reverse(b.id))
                }
            };
            if better {
                best = Some(Selection {
                    id,
                    match_count,
                    energy: e,
                });
            }
        }
        best
    }

    /// Full prediction: candidate retrieval plus selection. When nothing
    /// matches, the fallback value is used if given, otherwise this is an
    /// error.
    pub fn predict(
        &self,
        tokens: &[Token],
        params: &EnergyParams,
        fallback: Option<&TargetValue>,
        counters: &mut CostCounters,
    ) -> Result<PredictionOutcome> {
        let candidates = self.candidates(tokens, counters);
        let candidate_count = candidates.len();
        match self.select(&candidates, params, counters) {
            Some(selection) => Ok(PredictionOutcome {
                predicted: self.records[selection.id as usize].target.clone(),
                selected: Some(selection.id),
                match_count: selection.match_count,
                selected_energy: selection.energy,
                candidate_count,
                used_fallback: false,
            }),
            None => match fallback {
                Some(value) => {
                    if !value.matches_task(self.task) {
                        return Err(Error::StoreCorruption(format!(
                            "fallback value {value} does not match store task {}",
                            self.task
                        )));
                    }
                    Ok(PredictionOutcome {
                        predicted: value.clone(),
                        selected: None,
                        match_count: 0,
                        selected_energy: 0.0,
                        candidate_count,
                        used_fallback: true,
                    })
                }
                None => Err(Error::NoPrediction(if self.is_empty() {
                    "store is empty and no fallback is configured".into()
                } else {
                    "no stored token matches the query and no fallback is configured".into()
                })),
            },
        }
    }

    /// Books the outcome of one training prediction onto the selected record:
    /// `use` always increments; classification increments `success` on a
    /// class match; regression accumulates the absolute error and increments
    /// `success` when the error is within tolerance.
    pub fn record_outcome(
        &mut self,
        id: NvId,
        actual: &TargetValue,
        params: &EnergyParams,
    ) -> Result<()> {
        if !actual.matches_task(self.task) {
            return Err(Error::StoreCorruption(format!(
                "outcome {actual} does not match store task {}",
                self.task
            )));
        }
        let task = self.task;
        let record = self
            .records
            .get_mut(id as usize)
            .ok_or_else(|| Error::StoreCorruption(format!("unknown neurovector id {id}")))?;
        record.use_count += 1;
        match task {
            Task::Classification => {
                if record.target == *actual {
                    record.success_count += 1;
                }
            }
            Task::Regression => {
                let predicted = record.target.numeric().ok_or_else(|| {
                    Error::StoreCorruption(format!("record {id} holds a class target"))
                })?;
                let err = (predicted - actual.numeric().unwrap()).abs();
                record.cum_abs_error += err;
                if err <= params.success_tolerance {
                    record.success_count += 1;
                }
            }
        }
        Ok(())
    }

    /// Rebuilds a store from already-validated records (model loading).
    /// Posting sets come out in id order because records arrive in id order.
    pub(crate) fn from_records(task: Task, records: Vec<NeurovectorRecord>) -> TokenIndex {
        let mut index: HashMap<Token, Vec<NvId>> = HashMap::new();
        for record in &records {
            for token in &record.tokens {
                index.entry(token.clone()).or_default().push(record.id);
            }
        }
        TokenIndex {
            task,
            index,
            records,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::DEFAULT_SEPARATOR;

    fn tok(name: &str, value: &str) -> Token {
        Token::new(name, value, DEFAULT_SEPARATOR).unwrap()
    }

    fn class(c: &str) -> TargetValue {
        TargetValue::Class(c.to_string())
    }

    fn record(use_count: u64, success_count: u64, cum_abs_error: f64) -> NeurovectorRecord {
        NeurovectorRecord {
            id: 0,
            target: class("x"),
            use_count,
            success_count,
            cum_abs_error,
            source_row: None,
            tokens: vec![tok("a", "1")],
        }
    }

    #[test]
    fn insert_assigns_dense_ids_and_postings() {
        let mut store = TokenIndex::new(Task::Classification);
        let mut counters = CostCounters::new();
        let id = store
            .insert(vec![tok("a", "1"), tok("b", "2")], class("pos"), Some(0), &mut counters)
            .unwrap();
        assert_eq!(id, 0);
        assert_eq!(store.token_count(), 2);
        assert_eq!(store.posting(&tok("a", "1")), Some(&[0][..]));

        let id = store
            .insert(vec![tok("a", "1"), tok("c", "3")], class("neg"), Some(1), &mut counters)
            .unwrap();
        assert_eq!(id, 1);
        // shared token's posting set holds both ids in creation order
        assert_eq!(store.posting(&tok("a", "1")), Some(&[0, 1][..]));
        assert_eq!(counters.nv_creations, 2);
    }

    #[test]
    fn insert_rejects_wrong_variant_and_empty_tokens() {
        let mut store = TokenIndex::new(Task::Classification);
        let mut counters = CostCounters::new();
        let err = store.insert(vec![tok("a", "1")], TargetValue::Numeric(1.0), None, &mut counters);
        assert!(matches!(err, Err(Error::StoreCorruption(_))));
        let err = store.insert(vec![], class("x"), None, &mut counters);
        assert!(matches!(err, Err(Error::StoreCorruption(_))));
    }

    #[test]
    fn candidate_counts() {
        let mut store = TokenIndex::new(Task::Classification);
        let mut counters = CostCounters::new();
        store
            .insert(vec![tok("a", "1"), tok("b", "2")], class("x"), None, &mut counters)
            .unwrap();
        let query = vec![tok("a", "1"), tok("b", "2"), tok("c", "3")];
        let counts = store.candidates(&query, &mut counters);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&0], 2);
        // one lookup per query token
        assert_eq!(counters.index_lookups, 3);
        assert_eq!(counters.hash_ops, 3);
    }

    #[test]
    fn candidates_empty_for_unseen_tokens() {
        let mut store = TokenIndex::new(Task::Classification);
        let mut counters = CostCounters::new();
        store
            .insert(vec![tok("a", "1")], class("x"), None, &mut counters)
            .unwrap();
        let counts = store.candidates(&[tok("z", "9")], &mut counters);
        assert!(counts.is_empty());
    }

    #[test]
    fn candidate_counts_three_records() {
        // brute-force intersection sizes: {0:2, 1:2, 2:1}
        let mut store = TokenIndex::new(Task::Classification);
        let mut counters = CostCounters::new();
        store.insert(vec![tok("a", "1"), tok("b", "2")], class("x"), None, &mut counters).unwrap();
        store.insert(vec![tok("a", "1"), tok("c", "3")], class("y"), None, &mut counters).unwrap();
        store.insert(vec![tok("b", "9"), tok("c", "3")], class("z"), None, &mut counters).unwrap();
        let query = vec![tok("a", "1"), tok("b", "2"), tok("c", "3")];
        let counts = store.candidates(&query, &mut counters);
        assert_eq!(counts[&0], 2);
        assert_eq!(counts[&1], 2);
        assert_eq!(counts[&2], 1);
        assert_eq!(counts.len(), 3);
    }

    #[test]
    fn energy_examples() {
        let params = EnergyParams::default();
        let task = Task::Classification;
        assert_eq!(energy(&record(5, 5, 0.0), task, &params), 5.0);
        assert_eq!(energy(&record(4, 2, 0.0), task, &params), 1.0);
        assert_eq!(energy(&record(0, 0, 0.0), task, &params), 0.0);

        let reg = Task::Regression;
        assert_eq!(energy(&record(1, 1, 0.0), reg, &params), 1.0);
        let params = EnergyParams::new(0.5, 0.0).unwrap();
        let e = energy(&record(1, 1, 2.0), reg, &params);
        assert!((e - 0.3679).abs() < 1e-4, "got {e}");
    }

    #[test]
    fn energy_params_validation() {
        assert!(EnergyParams::new(0.0, 0.0).is_err());
        assert!(EnergyParams::new(-1.0, 0.0).is_err());
        assert!(EnergyParams::new(1.0, -0.5).is_err());
        assert!(EnergyParams::new(2.0, 0.1).is_ok());
    }

    fn three_way_store() -> (TokenIndex, CostCounters) {
        let mut store = TokenIndex::new(Task::Classification);
        let mut counters = CostCounters::new();
        store.insert(vec![tok("a", "1"), tok("b", "2")], class("x"), None, &mut counters).unwrap();
        store.insert(vec![tok("a", "1"), tok("c", "3")], class("y"), None, &mut counters).unwrap();
        store.insert(vec![tok("b", "9"), tok("c", "3")], class("z"), None, &mut counters).unwrap();
        (store, counters)
    }

    #[test]
    fn select_prefers_count_then_energy_then_lowest_id() {
        let (mut store, mut counters) = three_way_store();
        let params = EnergyParams::default();

        // strict count winner
        let counts = HashMap::from([(0, 2), (1, 1)]);
        assert_eq!(store.select(&counts, &params, &mut counters).unwrap().id, 0);

        // count tie, energy decides: pump record 1 to energy 4
        for _ in 0..4 {
            store.record_outcome(1, &class("y"), &params).unwrap();
        }
        let counts = HashMap::from([(0, 2), (1, 2)]);
        let sel = store.select(&counts, &params, &mut counters).unwrap();
        assert_eq!(sel.id, 1);
        assert_eq!(sel.energy, 4.0);

        // full tie: lowest id
        let counts = HashMap::from([(0, 2), (2, 2)]);
        assert_eq!(store.select(&counts, &params, &mut counters).unwrap().id, 0);

        assert!(store.select(&HashMap::new(), &params, &mut counters).is_none());
    }

    #[test]
    fn predict_composes_and_falls_back() {
        let (store, mut counters) = three_way_store();
        let params = EnergyParams::default();

        let query = vec![tok("a", "1"), tok("b", "2")];
        let outcome = store.predict(&query, &params, None, &mut counters).unwrap();
        assert_eq!(outcome.predicted, class("x"));
        assert_eq!(outcome.match_count, 2);
        assert_eq!(outcome.selected, Some(0));
        assert!(!outcome.used_fallback);

        // count tie 2-2 between ids 0 and 1, both energy 0: lowest id wins
        let query = vec![tok("a", "1"), tok("b", "2"), tok("c", "3")];
        let outcome = store.predict(&query, &params, None, &mut counters).unwrap();
        assert_eq!(outcome.selected, Some(0));
        assert_eq!(outcome.candidate_count, 3);

        let fallback = class("neg");
        let query = vec![tok("z", "0")];
        let outcome = store
            .predict(&query, &params, Some(&fallback), &mut counters)
            .unwrap();
        assert_eq!(outcome.predicted, class("neg"));
        assert!(outcome.used_fallback);
        assert_eq!(outcome.selected, None);

        let err = store.predict(&query, &params, None, &mut counters);
        assert!(matches!(err, Err(Error::NoPrediction(_))));

        let empty = TokenIndex::new(Task::Classification);
        let err = empty.predict(&query, &params, None, &mut counters);
        assert!(matches!(err, Err(Error::NoPrediction(_))));
    }

    #[test]
    fn record_outcome_classification() {
        let mut store = TokenIndex::new(Task::Classification);
        let mut counters = CostCounters::new();
        store.insert(vec![tok("a", "1")], class("x"), None, &mut counters).unwrap();
        let params = EnergyParams::default();

        for _ in 0..3 {
            store.record_outcome(0, &class("x"), &params).unwrap();
        }
        store.record_outcome(0, &class("y"), &params).unwrap();
        store.record_outcome(0, &class("x"), &params).unwrap();
        let record = store.record(0).unwrap();
        assert_eq!((record.use_count, record.success_count), (5, 4));
        assert_eq!(record.cum_abs_error, 0.0);

        let err = store.record_outcome(7, &class("x"), &params);
        assert!(matches!(err, Err(Error::StoreCorruption(_))));
        let err = store.record_outcome(0, &TargetValue::Numeric(1.0), &params);
        assert!(matches!(err, Err(Error::StoreCorruption(_))));
    }

    #[test]
    fn record_outcome_regression_tolerance() {
        let mut store = TokenIndex::new(Task::Regression);
        let mut counters = CostCounters::new();
        store
            .insert(vec![tok("a", "1")], TargetValue::Numeric(5.0), None, &mut counters)
            .unwrap();
        let params = EnergyParams::default(); // tolerance 0

        store
            .record_outcome(0, &TargetValue::Numeric(7.5), &params)
            .unwrap();
        let record = store.record(0).unwrap();
        assert_eq!(record.use_count, 1);
        assert_eq!(record.success_count, 0);
        assert_eq!(record.cum_abs_error, 2.5);

        store
            .record_outcome(0, &TargetValue::Numeric(5.0), &params)
            .unwrap();
        let record = store.record(0).unwrap();
        assert_eq!(record.success_count, 1);
        assert_eq!(record.cum_abs_error, 2.5);

        let loose = EnergyParams::new(1.0, 3.0).unwrap();
        store
            .record_outcome(0, &TargetValue::Numeric(7.5), &loose)
            .unwrap();
        let record = store.record(0).unwrap();
        assert_eq!(record.success_count, 2);
        assert_eq!(record.cum_abs_error, 5.0);
    }

    #[test]
    fn stores_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<TokenIndex>();
    }
}
