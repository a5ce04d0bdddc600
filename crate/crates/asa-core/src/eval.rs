//! Evaluation harness: stratified cross-validation over any of the three
//! learners, per-fold metrics, pooled predictions, and a reproducibility
//! fingerprint. Also a generator that plants a known automaton and samples
//! labeled sequences from it, for end-to-end recovery experiments.

use std::time::Instant;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::automaton::{evaluate, render_asa, Asa, Semantics};
use crate::error::{Error, Result};
use crate::incremental::{learn_incremental, IncrConfig};
use crate::model::{AlphabetSpec, AttributeSet, Dataset, Label, LabeledExample, Mvs, Symbol};
use crate::objective::CostVector;
use crate::search::{enumerate_optimal, local_search, BatchConfig, EnumerationCaps, LearnerReport};

/// Which learner a harness run drives, with its full configuration.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerSpec {
    Exhaustive {
        config: BatchConfig,
        caps: EnumerationCaps,
    },
    LocalSearch {
        config: BatchConfig,
    },
    Incremental {
        config: IncrConfig,
    },
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Exhaustive { .. } => "exhaustive",
            LearnerSpec::LocalSearch { .. } => "local_search",
            LearnerSpec::Incremental { .. } => "incremental",
        }
    }

    pub fn semantics(&self) -> Semantics {
        match self {
            LearnerSpec::Exhaustive { config, .. } | LearnerSpec::LocalSearch { config } => {
                config.semantics
            }
            LearnerSpec::Incremental { config } => config.batch.semantics,
        }
    }

    /// Clone with every seed replaced, so each fold runs independently but
    /// reproducibly.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            LearnerSpec::Exhaustive { config, .. } | LearnerSpec::LocalSearch { config } => {
                config.seed = seed;
            }
            LearnerSpec::Incremental { config } => {
                config.shuffle_seed = seed;
                config.batch.seed = seed;
            }
        }
        spec
    }

    pub fn fit(&self, train: &Dataset) -> Result<LearnerReport> {
        match self {
            LearnerSpec::Exhaustive { config, caps } => enumerate_optimal(train, config, caps),
            LearnerSpec::LocalSearch { config } => local_search(train, config),
            LearnerSpec::Incremental { config } => learn_incremental(train, config),
        }
    }
}

/// One labeled sequence scored by a learned automaton.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub seq_id: String,
    pub fold: usize,
    pub label: Label,
    pub predicted: Label,
    pub first_accept_time: Option<usize>,
}

/// Confusion counts with the derived rates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl Metrics {
    pub fn from_predictions(preds: &[Prediction]) -> Self {
        let mut m = Metrics::default();
        for p in preds {
            m.count(p.label, p.predicted.is_positive());
        }
        m
    }

    pub fn count(&mut self, label: Label, predicted_positive: bool) {
        match (label.is_positive(), predicted_positive) {
            (true, true) => self.true_positives += 1,
            (false, true) => self.false_positives += 1,
            (false, false) => self.true_negatives += 1,
            (true, false) => self.false_negatives += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    fn ratio(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn accuracy(&self) -> f64 {
        Self::ratio(self.true_positives + self.true_negatives, self.total())
    }

    pub fn precision(&self) -> f64 {
        Self::ratio(self.true_positives, self.true_positives + self.false_positives)
    }

    pub fn recall(&self) -> f64 {
        Self::ratio(self.true_positives, self.true_positives + self.false_negatives)
    }

    /// Harmonic mean of precision and recall; 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Per-fold result: the learned automaton, its size, and its train/test
/// confusion counts.
#[derive(Debug, Clone, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub seed: u64,
    pub metrics: Metrics,
    pub train_metrics: Metrics,
    pub cost: CostVector,
    pub transitions: usize,
    pub active_states: usize,
    pub asa_text: String,
    pub wall_time_secs: f64,
    pub exhaustive: bool,
}

/// Full cross-validation result.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub learner: String,
    pub folds: Vec<FoldReport>,
    /// Every test-fold prediction; together they cover the dataset once.
    pub predictions: Vec<Prediction>,
    /// Confusion counts pooled over all test predictions.
    pub overall: Metrics,
    /// Unweighted mean of the per-fold F1 scores.
    pub mean_f1: f64,
    /// SHA-256 over the learner config, fold count, and seed.
    pub fingerprint: String,
    pub wall_time_secs: f64,
}

/// Score every example in `data` with `asa`.
pub fn predict_dataset(asa: &Asa, data: &Dataset, sem: Semantics, fold: usize) -> Vec<Prediction> {
    data.examples
        .iter()
        .map(|ex| {
            let out = evaluate(asa, &ex.mvs, sem);
            Prediction {
                seq_id: ex.mvs.id().to_string(),
                fold,
                label: ex.label,
                predicted: if out.accepted {
                    Label::Positive
                } else {
                    Label::Negative
                },
                first_accept_time: out.first_accept_time,
            }
        })
        .collect()
}

/// Stratified fold assignment: shuffle each class with the seed, then deal
/// round-robin, so every fold holds (nearly) the same class balance.
fn stratified_folds(dataset: &Dataset, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Config(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buckets = vec![Vec::new(); folds];
    for class in [Label::Positive, Label::Negative] {
        let mut members: Vec<usize> = dataset
            .examples
            .iter()
            .enumerate()
            .filter(|(_, ex)| ex.label == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < folds {
            return Err(Error::Config(format!(
                "class {class} has {} examples, too few for {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (i, ix) in members.into_iter().enumerate() {
            buckets[i % folds].push(ix);
        }
    }
    for b in &mut buckets {
        b.sort_unstable();
    }
    Ok(buckets)
}

fn fingerprint(learner: &LearnerSpec, folds: usize, seed: u64) -> String {
    let payload = serde_json::json!({
        "learner": learner,
        "folds": folds,
        "seed": seed,
    });
    let mut hasher = Sha256::new();
    hasher.update(payload.to_string().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run `folds`-fold stratified cross-validation of `learner` on `dataset`.
/// Fold `i` trains on everything outside bucket `i` with seed `seed+i+1`
/// and is scored on bucket `i`; every example is predicted exactly once.
///
/// Folds run as parallel workers; each carries its own derived seed and the
/// results are aggregated in fold order, so the report does not depend on
/// scheduling.
pub fn cross_validate(
    dataset: &Dataset,
    learner: &LearnerSpec,
    folds: usize,
    seed: u64,
) -> Result<EvalReport> {
    let started = Instant::now();
    let buckets = stratified_folds(dataset, folds, seed)?;
    let sem = learner.semantics();
    let fold_results: Result<Vec<(FoldReport, Vec<Prediction>)>> = buckets
        .par_iter()
        .enumerate()
        .map(|(i, test_ix)| {
            let mut train_ix: Vec<usize> = buckets
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, b)| b.iter().copied())
                .collect();
            train_ix.sort_unstable();
            let train = dataset.subset(&train_ix);
            let test = dataset.subset(test_ix);
            let fold_seed = seed.wrapping_add(i as u64 + 1);
            let report = learner.reseeded(fold_seed).fit(&train)?;
            let train_preds = predict_dataset(&report.asa, &train, sem, i);
            let test_preds = predict_dataset(&report.asa, &test, sem, i);
            let fold_report = FoldReport {
                fold: i,
                seed: fold_seed,
                metrics: Metrics::from_predictions(&test_preds),
                train_metrics: Metrics::from_predictions(&train_preds),
                cost: report.cost,
                transitions: report.asa.transition_count(),
                active_states: report.asa.active_state_count(),
                asa_text: render_asa(&report.asa, &dataset.attributes, &dataset.alphabet),
                wall_time_secs: report.wall_time.as_secs_f64(),
                exhaustive: report.exhaustive,
            };
            Ok((fold_report, test_preds))
        })
        .collect();
    let mut fold_reports = Vec::with_capacity(folds);
    let mut predictions = Vec::with_capacity(dataset.len());
    for (fold_report, test_preds) in fold_results? {
        fold_reports.push(fold_report);
        predictions.extend(test_preds);
    }
    let overall = Metrics::from_predictions(&predictions);
    let mean_f1 =
        fold_reports.iter().map(|f| f.metrics.f1()).sum::<f64>() / fold_reports.len() as f64;
    Ok(EvalReport {
        learner: learner.name().to_string(),
        folds: fold_reports,
        predictions,
        overall,
        mean_f1,
        fingerprint: fingerprint(learner, folds, seed),
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Recipe for sampling a labeled dataset from a planted automaton: draw
/// random sequences, label each by running the automaton, and keep it if
/// its class still needs members.
#[derive(Debug, Clone)]
pub struct PlantedModelSpec {
    pub asa: Asa,
    pub semantics: Semantics,
    pub attributes: AttributeSet,
    pub alphabet: AlphabetSpec,
    /// Length of every generated sequence.
    pub len: usize,
    pub positives: usize,
    pub negatives: usize,
    /// Probability of flipping each kept example's label.
    pub noise: f64,
    /// Optional per-symbol sampling weights (alphabet order); uniform when
    /// absent.
    pub bias: Option<Vec<f64>>,
}

/// Sample a dataset per `spec`. Fails with a diagnostic if the planted
/// automaton's acceptance rate is too skewed to fill both classes within a
/// bounded number of draws.
pub fn generate_planted(spec: &PlantedModelSpec, seed: u64) -> Result<Dataset> {
    if spec.len == 0 {
        return Err(Error::Config("planted sequences must have length >= 1".into()));
    }
    if spec.positives + spec.negatives == 0 {
        return Err(Error::Config("nothing to generate: 0 examples requested".into()));
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(Error::Config(format!(
            "noise must be in [0, 1], got {}",
            spec.noise
        )));
    }
    for t in spec.asa.transitions() {
        t.guard.validate(&spec.attributes, &spec.alphabet)?;
    }
    let k = spec.alphabet.len();
    let weights = match &spec.bias {
        None => None,
        Some(b) => {
            if b.len() != k || b.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::Config(format!(
                    "bias must list {k} finite non-negative weights"
                )));
            }
            Some(WeightedIndex::new(b).map_err(|e| Error::Config(format!("bias: {e}")))?)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = spec.positives + spec.negatives;
    let budget = wanted.saturating_mul(1000).max(10_000);
    let (mut need_pos, mut need_neg) = (spec.positives, spec.negatives);
    let mut attempts = 0usize;
    let mut accepted_draws = 0usize;
    let mut examples = Vec::with_capacity(wanted);
    while need_pos > 0 || need_neg > 0 {
        if attempts >= budget {
            return Err(Error::Generation(format!(
                "gave up after {attempts} draws ({accepted_draws} accepted by the \
                 planted automaton); still need {need_pos} positive and {need_neg} \
                 negative examples — the automaton's acceptance rate is too skewed"
            )));
        }
        attempts += 1;
        let rows: Vec<Vec<Symbol>> = (0..spec.attributes.len())
            .map(|_| {
                (0..spec.len)
                    .map(|_| match &weights {
                        Some(w) => Symbol(w.sample(&mut rng) as u16),
                        None => Symbol(rng.gen_range(0..k) as u16),
                    })
                    .collect()
            })
            .collect();
        let id = format!("ex{:05}", examples.len());
        let mvs = Mvs::from_rows(&id, &rows)?;
        let out = evaluate(&spec.asa, &mvs, spec.semantics);
        if out.accepted {
            accepted_draws += 1;
        }
        let need = if out.accepted { &mut need_pos } else { &mut need_neg };
        if *need == 0 {
            continue;
        }
        *need -= 1;
        let true_label = if out.accepted {
            Label::Positive
        } else {
            Label::Negative
        };
        let label = if rng.gen_bool(spec.noise) {
            true_label.flipped()
        } else {
            true_label
        };
        examples.push(LabeledExample { mvs, label });
    }
    Ok(Dataset::new(
        spec.alphabet.clone(),
        spec.attributes.clone(),
        examples,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::parse_asa;
    use crate::guards::GuardKind;

    fn planted_spec() -> PlantedModelSpec {
        let attrs = AttributeSet::new(["x", "y"]).unwrap();
        let ab = AlphabetSpec::letters(4).unwrap();
        let asa = parse_asa(
            "transition(q0,at_least(x,c),q1).\n\
             transition(q1,at_least(y,b),q1).\n\
             accepting(q1).",
            &attrs,
            &ab,
        )
        .unwrap();
        PlantedModelSpec {
            asa,
            semantics: Semantics::default(),
            attributes: attrs,
            alphabet: ab,
            len: 6,
            positives: 30,
            negatives: 30,
            noise: 0.0,
            bias: None,
        }
    }

    #[test]
    fn planted_generation_is_exact_and_deterministic() {
        let spec = planted_spec();
        let a = generate_planted(&spec, 7).unwrap();
        let b = generate_planted(&spec, 7).unwrap();
        assert_eq!(a.class_counts(), (30, 30));
        assert_eq!(a.len(), 60);
        assert_eq!(a.examples[0].mvs.id(), "ex00000");
        assert_eq!(a.examples[59].mvs.id(), "ex00059");
        for (x, y) in a.examples.iter().zip(&b.examples) {
            assert_eq!(x.label, y.label);
            assert_eq!(x.mvs.coordinate(1).unwrap(), y.mvs.coordinate(1).unwrap());
        }
        // labels really come from the planted automaton
        for ex in &a.examples {
            let out = evaluate(&spec.asa, &ex.mvs, spec.semantics);
            assert_eq!(out.accepted, ex.label.is_positive());
        }
    }

    #[test]
    fn noise_flips_labels() {
        let mut spec = planted_spec();
        spec.noise = 0.5;
        let ds = generate_planted(&spec, 7).unwrap();
        let flipped = ds
            .examples
            .iter()
            .filter(|ex| {
                evaluate(&spec.asa, &ex.mvs, spec.semantics).accepted != ex.label.is_positive()
            })
            .count();
        assert!(flipped > 10 && flipped < 50, "flipped {flipped} of 60");
    }

    #[test]
    fn impossible_class_mix_reports_a_diagnostic() {
        let mut spec = planted_spec();
        // an automaton with no accepting states never accepts
        spec.asa = Asa::empty(2).unwrap();
        spec.positives = 1;
        spec.negatives = 1;
        let err = generate_planted(&spec, 7).unwrap_err();
        assert!(matches!(err, Error::Generation(_)), "{err}");
        assert!(err.to_string().contains("1 positive"), "{err}");
    }

    #[test]
    fn folds_are_stratified_and_disjoint() {
        let ds = generate_planted(&planted_spec(), 3).unwrap();
        let buckets = stratified_folds(&ds, 5, 11).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for b in &buckets {
            assert_eq!(b.len(), 12);
            let pos = b
                .iter()
                .filter(|i| ds.examples[**i].label.is_positive())
                .count();
            assert_eq!(pos, 6);
            for i in b {
                assert!(seen.insert(*i), "index {i} in two folds");
            }
        }
        assert_eq!(seen.len(), 60);
    }

    #[test]
    fn fold_errors_are_config_errors() {
        let ds = generate_planted(&planted_spec(), 3).unwrap();
        assert!(matches!(
            stratified_folds(&ds, 1, 0).unwrap_err(),
            Error::Config(_)
        ));
        assert!(matches!(
            stratified_folds(&ds, 31, 0).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn metrics_handle_zero_denominators() {
        let m = Metrics {
            true_positives: 0,
            false_positives: 0,
            true_negatives: 5,
            false_negatives: 5,
        };
        assert_eq!(m.precision(), 0.0);
        assert_eq!(m.f1(), 0.0);
        assert_eq!(m.accuracy(), 0.5);
        let m = Metrics {
            true_positives: 8,
            false_positives: 2,
            true_negatives: 8,
            false_negatives: 2,
        };
        assert!((m.f1() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn cross_validation_covers_every_example_once() {
        let ds = generate_planted(&planted_spec(), 3).unwrap();
        let mut config = BatchConfig::default();
        config.kinds = vec![GuardKind::AtLeast];
        config.restarts = 3;
        config.timeout_secs = 10.0;
        let learner = LearnerSpec::LocalSearch { config };
        let report = cross_validate(&ds, &learner, 3, 11).unwrap();
        assert_eq!(report.folds.len(), 3);
        assert_eq!(report.predictions.len(), 60);
        let mut ids: Vec<&str> = report.predictions.iter().map(|p| p.seq_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 60);
        assert_eq!(report.overall.total(), 60);
        assert_eq!(report.fingerprint.len(), 64);
        // same run, same fingerprint; different seed, different fingerprint
        let again = cross_validate(&ds, &learner, 3, 11).unwrap();
        assert_eq!(report.fingerprint, again.fingerprint);
        let other = cross_validate(&ds, &learner, 3, 12).unwrap();
        assert_ne!(report.fingerprint, other.fingerprint);
    }
}
