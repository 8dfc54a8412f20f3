//! Monte Carlo simulation of the coincidence-counting protocol for `M₁` and
//! `M₂`, and the analytic throughput model.
//!
//! Each iteration draws one joint click pattern of all boxes from the exact
//! distribution induced by `ρ⊗ρ` (or `ρ⊗⁴`), so correlations between the A-side
//! and B-side boxes are kept. The outcome is the product of the box values;
//! the moment estimate is the sum of outcomes over the number of iterations in
//! which every box registered its identity coincidence.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::q_clamped;
use crate::error::{Error, Result};
use crate::linalg::{Mat4, C64};
use crate::multicopy::{a_qubit, b_qubit, SparseOperator};
use crate::optics::{box_povm, BoxKind, BoxOutcome, DetectorModel};
use crate::rng::{domain, substream, Stream};
use crate::state::{Side, TwoQubitState};

/// Iterations drawn from one random substream.
pub const CHUNK: u64 = 4096;
pub const MIN_BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayScheme {
    #[serde(alias = "deterministic", alias = "det")]
    Deterministic,
    #[serde(alias = "probabilistic", alias = "prob")]
    Probabilistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub eta: f64,
    pub tau_ns: f64,
    pub delay_scheme: DelayScheme,
    /// Success probability `p` of one delay operation.
    pub delay_success_p: f64,
    pub pair_gen_prob: f64,
    /// Probability of two pairs from one pulse; `None` derives it as `pair_gen_prob²`.
    pub two_pair_prob: Option<f64>,
    pub pulse_pick_factor: f64,
    pub iterations: u64,
    pub seed: u64,
    /// Include the explicit `p²` delay factor in the probabilistic `M₂` rate.
    pub strict_delay_factor: bool,
    pub bootstrap_resamples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            eta: 0.75,
            tau_ns: 50.0,
            delay_scheme: DelayScheme::Probabilistic,
            delay_success_p: 0.25,
            pair_gen_prob: 0.1,
            two_pair_prob: None,
            pulse_pick_factor: 0.5,
            iterations: 1_000_000,
            seed: 0,
            strict_delay_factor: false,
            bootstrap_resamples: MIN_BOOTSTRAP_RESAMPLES,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let probability = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        probability("eta", self.eta)?;
        probability("delay_success_p", self.delay_success_p)?;
        probability("pair_gen_prob", self.pair_gen_prob)?;
        if let Some(p) = self.two_pair_prob {
            probability("two_pair_prob", p)?;
        }
        if !(self.pulse_pick_factor.is_finite() && self.pulse_pick_factor >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pulse_pick_factor must be finite and nonnegative, got {}",
                self.pulse_pick_factor
            )));
        }
        if !(self.tau_ns.is_finite() && self.tau_ns > 0.0) {
            return Err(Error::InvalidConfig(format!("tau_ns must be positive, got {}", self.tau_ns)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.bootstrap_resamples < MIN_BOOTSTRAP_RESAMPLES {
            return Err(Error::InvalidConfig(format!(
                "bootstrap_resamples must be at least {MIN_BOOTSTRAP_RESAMPLES}, got {}",
                self.bootstrap_resamples
            )));
        }
        Ok(())
    }

    pub fn detector(&self) -> Result<DetectorModel> {
        DetectorModel::new(self.eta)
    }

    pub fn effective_two_pair_prob(&self) -> f64 {
        self.two_pair_prob.unwrap_or(self.pair_gen_prob * self.pair_gen_prob)
    }

    /// `p²`: both delay operations of an `M₂` round succeed.
    pub fn delay_success_rate(&self) -> f64 {
        self.delay_success_p * self.delay_success_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Moment {
    M1,
    M2,
}

impl Moment {
    pub fn name(self) -> &'static str {
        match self {
            Moment::M1 => "M1",
            Moment::M2 => "M2",
        }
    }

    pub fn copies(self) -> usize {
        match self {
            Moment::M1 => 2,
            Moment::M2 => 4,
        }
    }

    /// Outcome of an iteration in which every box fired `C₁₄`.
    pub fn success_value(self) -> i64 {
        match self {
            Moment::M1 => 2,
            Moment::M2 => 4,
        }
    }

    fn domain(self) -> u64 {
        match self {
            Moment::M1 => domain::M1,
            Moment::M2 => domain::M2,
        }
    }
}

/// Which box reads which pair of qubits in the copy layout `A₁B₁A₂B₂…`.
pub fn box_layout(moment: Moment, side: Side) -> Vec<(BoxKind, [usize; 2])> {
    use BoxKind::{U, V};
    let (a, b) = (a_qubit, b_qubit);
    match (moment, side) {
        (Moment::M1, Side::A) => vec![(U, [a(1), a(2)]), (V, [b(1), b(2)])],
        (Moment::M1, Side::B) => vec![(V, [a(1), a(2)]), (U, [b(1), b(2)])],
        (Moment::M2, Side::A) => vec![(U, [a(1), a(4)]), (U, [a(2), a(3)]), (V, [b(1), b(2)]), (V, [b(3), b(4)])],
        (Moment::M2, Side::B) => vec![(V, [a(1), a(2)]), (V, [a(3), a(4)]), (U, [b(1), b(4)]), (U, [b(2), b(3)])],
    }
}

/// Distribution of the per-iteration outcome, aggregated by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    pub values: Vec<i64>,
    pub probabilities: Vec<f64>,
}

impl OutcomeTable {
    pub fn probability_of(&self, value: i64) -> f64 {
        self.values.iter().zip(&self.probabilities).filter(|(v, _)| **v == value).map(|(_, p)| *p).sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probabilities).map(|(v, p)| *v as f64 * p).sum()
    }

    fn sample(&self, cumulative: &[f64], rng: &mut Stream) -> usize {
        let u: f64 = rng.random();
        cumulative.iter().position(|&c| u < c).unwrap_or(self.values.len() - 1)
    }
}

fn chop(m: &Mat4) -> Mat4 {
    m.map(|z| C64::new(chop_f(z.re), chop_f(z.im)))
}

fn chop_f(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

/// Joint outcome distribution of all boxes for the given copies, from the
/// box POVM embedded on the copy product space.
pub fn joint_outcome_table(moment: Moment, side: Side, copies: &[&TwoQubitState], det: &DetectorModel) -> OutcomeTable {
    assert_eq!(copies.len(), moment.copies(), "wrong number of copies for {}", moment.name());
    let povm = box_povm(det);
    let elements = BoxOutcome::ALL.map(|o| chop(povm.element(o)));
    let layout = box_layout(moment, side);
    let mats: Vec<&Mat4> = copies.iter().map(|c| c.matrix()).collect();

    let n_boxes = layout.len();
    let mut by_value: BTreeMap<i64, f64> = BTreeMap::new();
    for pattern in 0..3usize.pow(n_boxes as u32) {
        let outcomes: Vec<usize> = (0..n_boxes).map(|k| (pattern / 3usize.pow(k as u32)) % 3).collect();
        let value: i64 = layout.iter().zip(&outcomes).map(|((kind, _), &o)| kind.value(BoxOutcome::ALL[o])).product();
        let factors: Vec<(&Mat4, [usize; 2])> =
            layout.iter().zip(&outcomes).map(|((_, pair), &o)| (&elements[o], *pair)).collect();
        let p = SparseOperator::embed(&factors).trace_with_product(&mats).re.max(0.0);
        *by_value.entry(value).or_insert(0.0) += p;
    }
    let total: f64 = by_value.values().sum();
    OutcomeTable {
        values: by_value.keys().copied().collect(),
        probabilities: by_value.values().map(|p| p / total).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub moment: Moment,
    pub side: Side,
    pub value: f64,
    pub n_success: u64,
    pub n_total: u64,
    pub std_error: f64,
    /// Counts of each per-iteration outcome value, in increasing value order.
    pub histogram: Vec<(i64, u64)>,
}

/// Ratio estimate `Σ outcome / #successes` and its delta-method standard error.
fn ratio_estimate(histogram: &[(i64, u64)], success_value: i64) -> Option<(f64, u64, f64)> {
    let n: u64 = histogram.iter().map(|(_, c)| c).sum();
    let n_success: u64 = histogram.iter().filter(|(v, _)| *v == success_value).map(|(_, c)| c).sum();
    if n_success == 0 {
        return None;
    }
    let sum: f64 = histogram.iter().map(|(v, c)| *v as f64 * *c as f64).sum();
    let value = sum / n_success as f64;
    let std_error = if n > 1 {
        let ss: f64 = histogram
            .iter()
            .map(|(v, c)| {
                let delta = if *v == success_value { 1.0 } else { 0.0 };
                let r = *v as f64 - value * delta;
                r * r * *c as f64
            })
            .sum();
        let success_fraction = n_success as f64 / n as f64;
        (ss / (n - 1) as f64 / n as f64).sqrt() / success_fraction
    } else {
        0.0
    };
    Some((value, n_success, std_error))
}

fn simulate_histogram(table: &OutcomeTable, cfg: &ExperimentConfig, moment: Moment) -> Vec<(i64, u64)> {
    let mut cumulative = Vec::with_capacity(table.probabilities.len());
    let mut acc = 0.0;
    for p in &table.probabilities {
        acc += p;
        cumulative.push(acc);
    }
    let delay = match (moment, cfg.delay_scheme) {
        (Moment::M2, DelayScheme::Probabilistic) => Some(cfg.delay_success_rate()),
        _ => None,
    };
    let n = cfg.iterations;
    let n_chunks = n.div_ceil(CHUNK);
    let width = table.values.len();
    // The extra slot counts rounds lost to a failed delay.
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = substream(cfg.seed, moment.domain(), chunk);
            let mut counts = vec![0u64; width + 1];
            let len = CHUNK.min(n - chunk * CHUNK);
            for _ in 0..len {
                if let Some(p) = delay {
                    if rng.random::<f64>() >= p {
                        counts[width] += 1;
                        continue;
                    }
                }
                counts[table.sample(&cumulative, &mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; width + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut histogram: BTreeMap<i64, u64> = BTreeMap::new();
    for (v, c) in table.values.iter().zip(&counts) {
        *histogram.entry(*v).or_insert(0) += c;
    }
    if counts[width] > 0 {
        *histogram.entry(0).or_insert(0) += counts[width];
    }
    histogram.into_iter().filter(|(_, c)| *c > 0).collect()
}

/// Simulates `cfg.iterations` rounds of the protocol for one moment and side.
pub fn estimate_moment(
    rho: &TwoQubitState,
    cfg: &ExperimentConfig,
    moment: Moment,
    side: Side,
) -> Result<MomentEstimate> {
    cfg.validate()?;
    let det = cfg.detector()?;
    let copies = vec![rho; moment.copies()];
    let table = joint_outcome_table(moment, side, &copies, &det);
    let histogram = simulate_histogram(&table, cfg, moment);
    let (value, n_success, std_error) = ratio_estimate(&histogram, moment.success_value())
        .ok_or(Error::InsufficientStatistics { moment: moment.name(), n_total: cfg.iterations })?;
    Ok(MomentEstimate { moment, side, value, n_success, n_total: cfg.iterations, std_error, histogram })
}

pub fn estimate_m1(rho: &TwoQubitState, cfg: &ExperimentConfig) -> Result<MomentEstimate> {
    estimate_moment(rho, cfg, Moment::M1, Side::A)
}

pub fn estimate_m2(rho: &TwoQubitState, cfg: &ExperimentConfig) -> Result<MomentEstimate> {
    estimate_moment(rho, cfg, Moment::M2, Side::A)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub side: Side,
    pub q: f64,
    /// Bootstrap standard deviation of `Q`.
    pub std_error: f64,
    /// Whether the radicand of the point estimate was negative and clamped.
    pub clamped: bool,
    pub bootstrap_resamples: usize,
    /// Resamples with at least one success for both moments.
    pub bootstrap_valid: usize,
    pub m1: MomentEstimate,
    pub m2: MomentEstimate,
}

/// Multinomial resample of a histogram, by sequential binomial draws.
fn resample_histogram(histogram: &[(i64, u64)], rng: &mut Stream) -> Vec<(i64, u64)> {
    let total: u64 = histogram.iter().map(|(_, c)| c).sum();
    let mut remaining_n = total;
    let mut remaining_p = 1.0;
    let mut out = Vec::with_capacity(histogram.len());
    for (k, (v, c)) in histogram.iter().enumerate() {
        let draw = if k + 1 == histogram.len() || remaining_n == 0 {
            remaining_n
        } else {
            let p = (*c as f64 / total as f64 / remaining_p).clamp(0.0, 1.0);
            Binomial::new(remaining_n, p).expect("valid binomial").sample(rng)
        };
        out.push((*v, draw));
        remaining_n -= draw;
        remaining_p -= *c as f64 / total as f64;
    }
    out
}

/// `Q` from simulated `M₁`, `M₂`, with a bootstrap error bar.
pub fn estimate_q_side(rho: &TwoQubitState, cfg: &ExperimentConfig, side: Side) -> Result<QEstimate> {
    let m1 = estimate_moment(rho, cfg, Moment::M1, side)?;
    let m2 = estimate_moment(rho, cfg, Moment::M2, side)?;
    let (q, clamped) = q_clamped(m1.value, m2.value);

    let resamples: Vec<f64> = (0..cfg.bootstrap_resamples as u64)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = substream(cfg.seed, domain::BOOTSTRAP, k);
            let h1 = resample_histogram(&m1.histogram, &mut rng);
            let h2 = resample_histogram(&m2.histogram, &mut rng);
            let (v1, _, _) = ratio_estimate(&h1, Moment::M1.success_value())?;
            let (v2, _, _) = ratio_estimate(&h2, Moment::M2.success_value())?;
            Some(q_clamped(v1, v2).0)
        })
        .collect();
    let valid = resamples.len();
    let std_error = if valid > 1 {
        let mean = resamples.iter().sum::<f64>() / valid as f64;
        (resamples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (valid - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(QEstimate {
        side,
        q,
        std_error,
        clamped,
        bootstrap_resamples: cfg.bootstrap_resamples,
        bootstrap_valid: valid,
        m1,
        m2,
    })
}

pub fn estimate_q(rho: &TwoQubitState, cfg: &ExperimentConfig) -> Result<QEstimate> {
    estimate_q_side(rho, cfg, Side::A)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub eta: f64,
    pub tau_ns: f64,
    pub delay_scheme: DelayScheme,
    pub strict_delay_factor: bool,
    pub n_target: u64,
    /// Per-pulse success probability of one `M₁` measurement, `R²` times the two-pair probability.
    pub p1: f64,
    /// Probabilistic `M₂` success probability as `p₁²` times the pulse-pick factor.
    pub p2_default: f64,
    /// The same including the explicit delay factor `p²`.
    pub p2_strict: f64,
    pub rate_m1_hz: f64,
    pub rate_m2_hz_prob: f64,
    pub rate_m2_hz_det: f64,
    /// `M₂` rate of the configured delay scheme.
    pub rate_m2_hz: f64,
    pub time_m1_s: f64,
    pub time_m2_s: f64,
    /// Time to collect `n_target` measurements of both moments.
    pub time_for_target_s: f64,
    pub time_for_target_tau: f64,
    pub t_units_tau_m1: f64,
    pub t_units_tau_m2: f64,
}

/// Analytic event rates with `R = η²/2`.
pub fn throughput(cfg: &ExperimentConfig, n_target: u64) -> Result<ThroughputReport> {
    cfg.validate()?;
    let big_r = cfg.eta * cfg.eta / 2.0;
    let p1 = big_r * big_r * cfg.effective_two_pair_prob();
    let p2_default = p1 * p1 * cfg.pulse_pick_factor;
    let p2_strict = p2_default * cfg.delay_success_rate();
    let p2_prob = if cfg.strict_delay_factor { p2_strict } else { p2_default };
    let p2_det = if cfg.delay_success_rate() > 0.0 { p2_prob * 2.0 / cfg.delay_success_rate() } else { 0.0 };
    let pulse_rate_hz = 1e9 / cfg.tau_ns;
    let rate_m1_hz = p1 * pulse_rate_hz;
    let rate_m2_hz_prob = p2_prob * pulse_rate_hz;
    let rate_m2_hz_det = p2_det * pulse_rate_hz;
    let rate_m2_hz = match cfg.delay_scheme {
        DelayScheme::Deterministic => rate_m2_hz_det,
        DelayScheme::Probabilistic => rate_m2_hz_prob,
    };
    let time = |rate: f64| if rate > 0.0 { n_target as f64 / rate } else { f64::INFINITY };
    let time_m1_s = time(rate_m1_hz);
    let time_m2_s = time(rate_m2_hz);
    let time_for_target_s = time_m1_s + time_m2_s;
    let tau_s = cfg.tau_ns * 1e-9;
    Ok(ThroughputReport {
        eta: cfg.eta,
        tau_ns: cfg.tau_ns,
        delay_scheme: cfg.delay_scheme,
        strict_delay_factor: cfg.strict_delay_factor,
        n_target,
        p1,
        p2_default,
        p2_strict,
        rate_m1_hz,
        rate_m2_hz_prob,
        rate_m2_hz_det,
        rate_m2_hz,
        time_m1_s,
        time_m2_s,
        time_for_target_s,
        time_for_target_tau: time_for_target_s / tau_s,
        t_units_tau_m1: time_m1_s / tau_s,
        t_units_tau_m2: time_m2_s / tau_s,
    })
}

pub const THROUGHPUT_CSV_HEADER: [&str; 6] =
    ["eta", "rate_m1_hz", "rate_m2_hz_prob", "rate_m2_hz_det", "t_units_tau_m1", "t_units_tau_m2"];

impl ThroughputReport {
    pub fn csv_row(&self) -> [f64; 6] {
        [self.eta, self.rate_m1_hz, self.rate_m2_hz_prob, self.rate_m2_hz_det, self.t_units_tau_m1, self.t_units_tau_m2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multicopy::{m1_multicopy, m2_multicopy};

    fn cfg(eta: f64, iterations: u64, seed: u64) -> ExperimentConfig {
        ExperimentConfig { eta, iterations, seed, ..Default::default() }
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        assert!(cfg(1.5, 10, 0).validate().is_err());
        assert!(cfg(1.0, 0, 0).validate().is_err());
        let bad_tau = ExperimentConfig { tau_ns: 0.0, ..Default::default() };
        assert!(bad_tau.validate().is_err());
        let few = ExperimentConfig { bootstrap_resamples: 10, ..Default::default() };
        assert!(few.validate().is_err());
        assert!((ExperimentConfig::default().effective_two_pair_prob() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn config_json_uses_field_names() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"eta": 1.0, "delay_scheme": "Deterministic", "iterations": 5}"#).unwrap();
        assert_eq!(c.delay_scheme, DelayScheme::Deterministic);
        assert_eq!(c.delay_success_p, 0.25);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"etta": 1.0}"#).is_err());
    }

    #[test]
    fn joint_table_means_are_scaled_moments() {
        let states =
            [TwoQubitState::singlet(), TwoQubitState::product_basis(false, false), TwoQubitState::werner(0.3).unwrap()];
        for det in [DetectorModel::ideal(), DetectorModel::new(0.8).unwrap()] {
            let r = det.r();
            for s in &states {
                for side in [Side::A, Side::B] {
                    let t1 = joint_outcome_table(Moment::M1, side, &[s, s], &det);
                    assert!((t1.mean() - r * r * m1_multicopy(s, side)).abs() < 1e-12);
                    assert!((t1.probability_of(2) - r * r).abs() < 1e-12);
                    assert!((t1.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    let t2 = joint_outcome_table(Moment::M2, side, &[s, s, s, s], &det);
                    assert!((t2.mean() - r.powi(4) * m2_multicopy(s, side)).abs() < 1e-12);
                    assert!((t2.probability_of(4) - r.powi(4)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn a_and_b_boxes_are_correlated() {
        let s = TwoQubitState::singlet();
        let t = joint_outcome_table(Moment::M1, Side::A, &[&s, &s], &DetectorModel::ideal());
        // Independent boxes would give 1/256.
        assert!((t.probability_of(16) - 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn m1_examples() {
        let e = estimate_m1(&TwoQubitState::singlet(), &cfg(1.0, 200_000, 1)).unwrap();
        assert!((e.value - 3.0).abs() < 3.0 * e.std_error, "{e:?}");
        let e = estimate_m1(&TwoQubitState::product_basis(false, false), &cfg(1.0, 200_000, 2)).unwrap();
        assert!((e.value - 2.0).abs() <= 3.0 * e.std_error + 1e-12, "{e:?}");
        let e = estimate_m1(&TwoQubitState::maximally_mixed(), &cfg(1.0, 200_000, 3)).unwrap();
        assert!(e.value.abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn m2_examples() {
        let det = ExperimentConfig { delay_scheme: DelayScheme::Deterministic, ..cfg(1.0, 1_000_000, 4) };
        let e = estimate_m2(&TwoQubitState::singlet(), &det).unwrap();
        assert!((e.value - 3.0).abs() < 3.0 * e.std_error, "{e:?}");
        let e = estimate_m2(&TwoQubitState::product_basis(false, false), &det).unwrap();
        assert!((e.value - 4.0).abs() <= 3.0 * e.std_error + 1e-12, "{e:?}");
    }

    #[test]
    fn success_fraction_laws() {
        let n = 1_000_000u64;
        let e = estimate_m1(&TwoQubitState::singlet(), &cfg(1.0, n, 5)).unwrap();
        let p = 1.0 / 16.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((e.n_success as f64 / n as f64 - p).abs() < 3.0 * sigma);

        let e = estimate_m2(&TwoQubitState::singlet(), &cfg(1.0, n, 6)).unwrap();
        let p = (1.0 / 16.0) * (1.0 / 256.0);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((e.n_success as f64 / n as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn determinism_and_insufficient_statistics() {
        let c = cfg(0.9, 50_000, 11);
        let s = TwoQubitState::werner(0.4).unwrap();
        assert_eq!(estimate_m1(&s, &c).unwrap(), estimate_m1(&s, &c).unwrap());
        assert!(matches!(estimate_m1(&s, &cfg(0.0, 1000, 0)), Err(Error::InsufficientStatistics { moment: "M1", .. })));
    }

    #[test]
    fn resampling_preserves_total() {
        let mut rng = substream(1, domain::BOOTSTRAP, 0);
        let h = vec![(-4, 30), (0, 500), (2, 70)];
        let r = resample_histogram(&h, &mut rng);
        assert_eq!(r.iter().map(|(_, c)| c).sum::<u64>(), 600);
    }

    #[test]
    fn q_examples() {
        let c = ExperimentConfig { delay_scheme: DelayScheme::Deterministic, ..cfg(1.0, 1_000_000, 12) };
        let e = estimate_q(&TwoQubitState::singlet(), &c).unwrap();
        assert!((e.q - 0.5).abs() < 3.0 * e.std_error, "{e:?}");
        assert!(e.bootstrap_valid >= 200);
        let e = estimate_q(&TwoQubitState::maximally_mixed(), &c).unwrap();
        assert!(e.q.abs() < 3.0 * e.std_error + 1e-12, "{e:?}");
    }

    #[test]
    fn throughput_paper_numbers() {
        let t = throughput(&ExperimentConfig::default(), 1000).unwrap();
        assert!((t.rate_m1_hz - 15_820.312_5).abs() < 1e-6);
        assert!((t.rate_m2_hz_prob - 6.257_057_189_941_406).abs() < 1e-9);
        assert!(t.time_for_target_s < 180.0);
        assert!((t.rate_m2_hz_det / t.rate_m2_hz_prob - 32.0).abs() < 1e-12);

        let ideal = ExperimentConfig { eta: 1.0, delay_scheme: DelayScheme::Deterministic, ..Default::default() };
        let t = throughput(&ideal, 1000).unwrap();
        assert!((t.rate_m1_hz - 50_000.0).abs() < 1e-9);
        assert!((t.rate_m2_hz_prob - 62.5).abs() < 1e-9);
        assert!((t.time_m2_s - 0.5).abs() < 1e-12);

        let strict = ExperimentConfig { strict_delay_factor: true, ..Default::default() };
        let t = throughput(&strict, 1000).unwrap();
        assert!((t.rate_m2_hz_prob - 6.257_057_189_941_406 / 16.0).abs() < 1e-9);
        assert!((t.rate_m2_hz_det / t.rate_m2_hz_prob - 32.0).abs() < 1e-12);
    }

    #[test]
    fn throughput_eta_scaling() {
        let at = |eta| throughput(&ExperimentConfig { eta, ..Default::default() }, 1).unwrap();
        let one = at(1.0);
        for eta in [0.5, 0.75] {
            let t = at(eta);
            assert!((t.rate_m1_hz / one.rate_m1_hz - eta.powi(4)).abs() < 1e-12);
            assert!((t.rate_m2_hz_prob / one.rate_m2_hz_prob - eta.powi(8)).abs() < 1e-12);
        }
    }
}
