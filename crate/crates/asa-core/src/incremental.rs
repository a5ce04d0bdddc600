//! Mini-batch incremental learning with model revision.
//!
//! The learner keeps a best-so-far automaton, walks shuffled mini-batches,
//! and on every batch the incumbent classifies poorly it searches for
//! revisions: candidates that may drop incumbent facts (paying each fact's
//! removal cost) and add new ones. Candidates are ranked locally on the
//! batch, then the best is adopted only if it strictly improves the cost on
//! the whole training set.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automaton::{evaluate, run, Asa, Semantics, TransitionFact};
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::objective::{self, validate_configs, CostVector, RemovalPenalties};
use crate::search::{search_core, BatchConfig, LearnerReport};

/// Per-fact acceptance-path counts over the whole training set.
///
/// `p` counts accepted positives whose accepting runs use the fact, `n`
/// accepted negatives. A fact with `n > p` is doing more harm than good:
/// its removal weight `w = n − p` is positive, so dropping it during
/// revision is rewarded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GuardStats {
    counts: BTreeMap<TransitionFact, (u64, u64)>,
}

impl GuardStats {
    /// Accepted positives using the fact on an accepting path.
    pub fn p(&self, fact: &TransitionFact) -> u64 {
        self.counts.get(fact).map_or(0, |c| c.0)
    }

    /// Accepted negatives using the fact on an accepting path.
    pub fn n(&self, fact: &TransitionFact) -> u64 {
        self.counts.get(fact).map_or(0, |c| c.1)
    }

    /// Removal weight `w = n − p`; positive means removal is a good idea.
    pub fn weight(&self, fact: &TransitionFact) -> i64 {
        let (p, n) = self.counts.get(fact).copied().unwrap_or((0, 0));
        n as i64 - p as i64
    }

    /// Cost charged at the regularization level when a revision drops the
    /// fact: `−w = p − n` (negative values are rewards).
    pub fn removal_cost(&self, fact: &TransitionFact) -> i64 {
        -self.weight(fact)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TransitionFact, (u64, u64))> {
        self.counts.iter().map(|(f, c)| (f, *c))
    }
}

/// Count, for every transition fact of `asa`, how many accepted positives
/// and negatives in `dataset` use it on at least one accepting run.
pub fn guard_stats(asa: &Asa, dataset: &Dataset, sem: Semantics) -> GuardStats {
    let mut counts: BTreeMap<TransitionFact, (u64, u64)> = asa
        .transitions()
        .iter()
        .map(|f| (*f, (0, 0)))
        .collect();
    for ex in &dataset.examples {
        let r = run(asa, &ex.mvs, sem);
        if !r.accepted {
            continue;
        }
        for fact in &r.used_transitions {
            let entry = counts.entry(*fact).or_insert((0, 0));
            if ex.label.is_positive() {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    GuardStats { counts }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncrConfig {
    pub batch_size: usize,
    /// Revise a batch when the incumbent's local error rate
    /// (misclassified / batch size) exceeds this.
    pub error_threshold: f64,
    /// Distinct locally-best revisions to evaluate globally per batch.
    pub k_best: usize,
    /// Passes over the training set; each pass reshuffles and re-partitions.
    pub iterations: u32,
    pub shuffle_seed: u64,
    /// Adopt on strictly fewer errors alone, ignoring regularization.
    pub error_only_compare: bool,
    /// Search configuration for each revision solve (its `timeout_secs` is
    /// the per-batch time budget).
    pub batch: BatchConfig,
}

impl Default for IncrConfig {
    fn default() -> Self {
        Self {
            batch_size: 50,
            error_threshold: 0.0,
            k_best: 3,
            iterations: 3,
            shuffle_seed: 0,
            error_only_compare: false,
            batch: BatchConfig::default(),
        }
    }
}

fn removal_penalties(incumbent: &Asa, stats: &GuardStats) -> RemovalPenalties {
    RemovalPenalties {
        transitions: incumbent
            .transitions()
            .iter()
            .map(|f| (*f, stats.removal_cost(f)))
            .collect(),
        accepting: incumbent.accepting().iter().collect(),
    }
}

/// Search the mini-batch for up to `k_best` distinct revisions of the
/// incumbent, ranked by local cost (standard objective on the batch plus
/// the removal cost of every incumbent fact a candidate drops).
pub fn revise(
    incumbent: &Asa,
    batch: &Dataset,
    stats: &GuardStats,
    cfg: &IncrConfig,
) -> Result<Vec<(Asa, CostVector)>> {
    if cfg.k_best == 0 {
        return Err(Error::Config("k_best must be at least 1".into()));
    }
    let penalties = removal_penalties(incumbent, stats);
    let outcome = search_core(batch, &cfg.batch, Some(incumbent), Some(&penalties), cfg.k_best)?;
    Ok(outcome.best)
}

/// One progress-log record per mini-batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchProgress {
    pub iteration: u32,
    pub batch_index: usize,
    pub local_error_rate: f64,
    pub revised: bool,
    pub adopted: bool,
    pub global_cost: CostVector,
}

impl BatchProgress {
    pub fn tsv_header() -> &'static str {
        "iteration\tbatch\tlocal_error\trevised\tadopted\tglobal_error\tglobal_reg"
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{:.4}\t{}\t{}\t{}\t{}",
            self.iteration,
            self.batch_index,
            self.local_error_rate,
            self.revised,
            self.adopted,
            self.global_cost.error,
            self.global_cost.reg
        )
    }
}

/// Unweighted misclassification rate of `asa` on `examples`.
fn error_rate(asa: &Asa, batch: &Dataset, sem: Semantics) -> f64 {
    let wrong = batch
        .examples
        .iter()
        .filter(|ex| evaluate(asa, &ex.mvs, sem).accepted != ex.label.is_positive())
        .count();
    wrong as f64 / batch.len() as f64
}

pub fn learn_incremental(dataset: &Dataset, cfg: &IncrConfig) -> Result<LearnerReport> {
    learn_incremental_with_progress(dataset, cfg, |_| {})
}

/// [`learn_incremental`] with a callback invoked once per processed batch,
/// in order; [`BatchProgress::to_tsv`] turns records into the progress log.
pub fn learn_incremental_with_progress(
    dataset: &Dataset,
    cfg: &IncrConfig,
    mut on_progress: impl FnMut(&BatchProgress),
) -> Result<LearnerReport> {
    validate_configs(&cfg.batch.objective, &cfg.batch.structural, cfg.batch.semantics)?;
    if dataset.is_empty() {
        return Err(Error::Validation("cannot learn from an empty dataset".into()));
    }
    if cfg.batch_size == 0 || cfg.batch_size > dataset.len() {
        return Err(Error::Config(format!(
            "batch_size {} out of range 1..={}",
            cfg.batch_size,
            dataset.len()
        )));
    }
    if !(0.0..=1.0).contains(&cfg.error_threshold) {
        return Err(Error::Config(format!(
            "error_threshold {} outside [0, 1]",
            cfg.error_threshold
        )));
    }
    if cfg.k_best == 0 || cfg.iterations == 0 {
        return Err(Error::Config(
            "k_best and iterations must be at least 1".into(),
        ));
    }

    let sem = cfg.batch.semantics;
    let objective_cfg = &cfg.batch.objective;
    let start = Instant::now();

    let mut incumbent = Asa::empty(cfg.batch.structural.max_states)?;
    let mut global_cost = objective::cost(&incumbent, dataset, sem, objective_cfg);
    let mut stats = guard_stats(&incumbent, dataset, sem);
    let mut iterations_total = 0u64;

    for iteration in 0..cfg.iterations {
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.shuffle_seed.wrapping_add(iteration as u64));
        order.shuffle(&mut rng);

        for (batch_index, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch = dataset.subset(chunk);
            let local_error_rate = error_rate(&incumbent, &batch, sem);
            let revised = local_error_rate > cfg.error_threshold;
            let mut adopted = false;

            if revised {
                let candidates = revise(&incumbent, &batch, &stats, cfg)?;
                iterations_total += candidates.len() as u64;
                // rank candidates by their cost on the full training set
                let mut scored: Vec<(CostVector, Asa)> = candidates
                    .into_iter()
                    .map(|(asa, _local)| {
                        (objective::cost(&asa, dataset, sem, objective_cfg), asa)
                    })
                    .collect();
                scored.sort_by(|a, b| {
                    a.0.cmp(&b.0)
                        .then_with(|| a.1.transition_count().cmp(&b.1.transition_count()))
                });
                if let Some((best_cost, best)) = scored.into_iter().next() {
                    let strictly_better = if cfg.error_only_compare {
                        best_cost.error < global_cost.error
                    } else {
                        best_cost < global_cost
                    };
                    if strictly_better {
                        incumbent = best;
                        global_cost = best_cost;
                        stats = guard_stats(&incumbent, dataset, sem);
                        adopted = true;
                    }
                }
            }

            on_progress(&BatchProgress {
                iteration,
                batch_index,
                local_error_rate,
                revised,
                adopted,
                global_cost,
            });
        }
    }

    Ok(LearnerReport {
        asa: incumbent,
        cost: global_cost,
        wall_time: start.elapsed(),
        iterations: iterations_total,
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::parse_asa;
    use crate::model::{AlphabetSpec, AttributeSet, Label, LabeledExample, Mvs};
    use crate::objective::StructuralConfig;

    fn small_dataset() -> (Dataset, AttributeSet, AlphabetSpec) {
        let attrs = AttributeSet::new(["x"]).unwrap();
        let ab = AlphabetSpec::letters(3).unwrap();
        let mk = |id: &str, row: &str, label| LabeledExample {
            mvs: Mvs::from_letter_rows(id, &[row], &ab).unwrap(),
            label,
        };
        let ds = Dataset::new(
            ab.clone(),
            attrs.clone(),
            vec![
                mk("p1", "abc", Label::Positive),
                mk("p2", "abb", Label::Positive),
                mk("n1", "aaa", Label::Negative),
                mk("n2", "aab", Label::Negative),
            ],
        );
        (ds, attrs, ab)
    }

    #[test]
    fn stats_attribute_accepting_paths_per_class() {
        let (ds, attrs, ab) = small_dataset();
        // accepts any sequence containing a 'b' (skip policy)
        let asa = parse_asa("transition(q0,eq(x,b),q1).\ntransition(q1,at_least(x,a),q1).\naccepting(q1).", &attrs, &ab)
            .unwrap();
        let sem = Semantics {
            policy: crate::automaton::Policy::SkipTillAnyMatch,
            ..Semantics::default()
        };
        let stats = guard_stats(&asa, &ds, sem);
        let entry = asa.transitions()[0];
        // p1, p2 and n2 all contain 'b' and are accepted through the entry
        assert_eq!(stats.p(&entry), 2);
        assert_eq!(stats.n(&entry), 1);
        assert_eq!(stats.weight(&entry), -1);
        assert_eq!(stats.removal_cost(&entry), 1);
    }

    #[test]
    fn unused_fact_has_zero_stats() {
        let (ds, attrs, ab) = small_dataset();
        let asa = parse_asa("transition(q0,eq(x,c),q1).\naccepting(q0).", &attrs, &ab).unwrap();
        // accepting(q0) accepts nothing at end-of-sequence under strict
        // contiguity (q0 dies immediately: no self-loop fires beyond t=1)
        let stats = guard_stats(&asa, &ds, Semantics::default());
        let fact = asa.transitions()[0];
        assert_eq!((stats.p(&fact), stats.n(&fact)), (0, 0));
        assert_eq!(stats.weight(&fact), 0);
    }

    #[test]
    fn threshold_one_never_revises() {
        let (ds, _, _) = small_dataset();
        let cfg = IncrConfig {
            batch_size: 2,
            error_threshold: 1.0,
            iterations: 2,
            batch: BatchConfig {
                structural: StructuralConfig {
                    max_states: 2,
                    ..StructuralConfig::default()
                },
                max_transitions: 2,
                seed: 1,
                ..BatchConfig::default()
            },
            ..IncrConfig::default()
        };
        let mut progress = Vec::new();
        let report = learn_incremental_with_progress(&ds, &cfg, |p| progress.push(*p)).unwrap();
        assert!(progress.iter().all(|p| !p.revised && !p.adopted));
        assert_eq!(report.asa.transition_count(), 0);
        // the empty automaton rejects both positives
        assert_eq!(report.cost.error, 2);
    }

    #[test]
    fn single_batch_reaches_zero_error() {
        let (ds, _, _) = small_dataset();
        let cfg = IncrConfig {
            batch_size: 4,
            iterations: 2,
            k_best: 3,
            batch: BatchConfig {
                structural: StructuralConfig {
                    max_states: 2,
                    ..StructuralConfig::default()
                },
                max_transitions: 2,
                seed: 5,
                restarts: 40,
                timeout_secs: 30.0,
                ..BatchConfig::default()
            },
            ..IncrConfig::default()
        };
        let mut costs = Vec::new();
        let report =
            learn_incremental_with_progress(&ds, &cfg, |p| costs.push(p.global_cost)).unwrap();
        assert_eq!(report.cost.error, 0);
        // global cost never worsens across the trajectory
        for w in costs.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn progress_tsv_round_trips_fields() {
        let p = BatchProgress {
            iteration: 1,
            batch_index: 2,
            local_error_rate: 0.25,
            revised: true,
            adopted: false,
            global_cost: CostVector::new(3, -4),
        };
        assert_eq!(p.to_tsv(), "1\t2\t0.2500\ttrue\tfalse\t3\t-4");
        assert_eq!(
            BatchProgress::tsv_header().split('\t').count(),
            p.to_tsv().split('\t').count()
        );
    }

    #[test]
    fn config_validation() {
        let (ds, _, _) = small_dataset();
        let mut cfg = IncrConfig::default();
        cfg.batch_size = 50; // larger than the dataset
        assert!(learn_incremental(&ds, &cfg).is_err());
        cfg.batch_size = 2;
        cfg.error_threshold = 1.5;
        assert!(learn_incremental(&ds, &cfg).is_err());
    }
}
