//! Finite joint distributions with exact rational masses, and entropy
//! measures over them.
//!
//! Probabilities are stored as exact rationals and only on the support
//! (atoms of mass zero are rejected at construction). Entropies are computed
//! in `f64` and reported in bits; base-2 logarithms throughout. Structural
//! questions such as "is Y a function of X" are answered exactly from the
//! support, never through a floating-point tolerance.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ratio::Rat;
use crate::setfunc::SetFunction;
use crate::ENTROPY_VECTOR_CAP;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ProbDistError {
    #[error("probabilities sum to {0}, not 1")]
    NonUnitMass(String),
    #[error("negative probability {p} for outcome {outcome:?}")]
    NegativeProbability { outcome: Vec<String>, p: String },
    #[error("zero-probability atom {0:?} not allowed (support-only storage)")]
    ZeroProbability(Vec<String>),
    #[error("unknown symbol {symbol:?} for variable {variable:?}")]
    UnknownSymbol { variable: String, symbol: String },
    #[error("duplicate outcome {0:?}")]
    DuplicateOutcome(Vec<String>),
    #[error("outcome {outcome:?} has {got} symbols, expected {expected}")]
    ArityMismatch {
        outcome: Vec<String>,
        got: usize,
        expected: usize,
    },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable subset must be nonempty")]
    EmptySubset,
    #[error("ground set of {0} exceeds the entropy-vector cap of {1}")]
    GroundSetTooLarge(usize, usize),
    #[error("value {0} outside the valid range {1}")]
    OutOfRange(f64, String),
    #[error("invalid entropy measure: {0}")]
    InvalidMeasure(String),
    #[error("no entries given")]
    EmptyTable,
    #[error("variable {0:?} declared twice")]
    DuplicateVariable(String),
    #[error("alphabet for variable {0:?} is empty or missing")]
    BadAlphabet(String),
}

/// Which entropy to compute. All variants report bits (base-2 logarithms).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntropyMeasure {
    Shannon,
    /// Order parameter must be positive and different from 1.
    Renyi { alpha: f64 },
    /// Parameter must be positive and different from 1.
    Tsallis { q: f64 },
}

impl EntropyMeasure {
    pub fn validate(&self) -> Result<(), ProbDistError> {
        match *self {
            EntropyMeasure::Shannon => Ok(()),
            EntropyMeasure::Renyi { alpha } => {
                if alpha > 0.0 && alpha != 1.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(ProbDistError::InvalidMeasure(format!(
                        "Renyi order must be positive and != 1, got {alpha}"
                    )))
                }
            }
            EntropyMeasure::Tsallis { q } => {
                if q > 0.0 && q != 1.0 && q.is_finite() {
                    Ok(())
                } else {
                    Err(ProbDistError::InvalidMeasure(format!(
                        "Tsallis parameter must be positive and != 1, got {q}"
                    )))
                }
            }
        }
    }

    /// Entropy of a probability mass list (masses must be positive and sum
    /// to one; zero masses may be included and are skipped).
    pub fn of_masses(&self, masses: &[f64]) -> f64 {
        match *self {
            EntropyMeasure::Shannon => masses
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.log2())
                .sum(),
            EntropyMeasure::Renyi { alpha } => {
                let s: f64 = masses
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| p.powf(alpha))
                    .sum();
                s.log2() / (1.0 - alpha)
            }
            EntropyMeasure::Tsallis { q } => {
                let s: f64 = masses
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| p.powf(q))
                    .sum();
                (1.0 - s) / (q - 1.0)
            }
        }
    }
}

/// A joint distribution over named variables with finite named alphabets.
///
/// Outcomes are stored as per-variable symbol indices; the map contains the
/// support only and the masses sum to exactly one.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    variables: Vec<String>,
    alphabets: Vec<Vec<String>>,
    pmf: BTreeMap<Vec<usize>, Rat>,
}

impl JointDistribution {
    /// Build and validate a distribution from a table of (outcome, mass)
    /// entries given as symbol strings.
    pub fn from_table(
        variables: Vec<String>,
        alphabets: Vec<Vec<String>>,
        entries: Vec<(Vec<String>, Rat)>,
    ) -> Result<Self, ProbDistError> {
        if entries.is_empty() {
            return Err(ProbDistError::EmptyTable);
        }
        if variables.len() != alphabets.len() {
            return Err(ProbDistError::BadAlphabet(format!(
                "{} alphabets for {} variables",
                alphabets.len(),
                variables.len()
            )));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(ProbDistError::DuplicateVariable(v.clone()));
            }
        }
        for (v, a) in variables.iter().zip(&alphabets) {
            if a.is_empty() {
                return Err(ProbDistError::BadAlphabet(v.clone()));
            }
        }
        let mut pmf = BTreeMap::new();
        let mut total = Rat::zero();
        for (outcome, p) in entries {
            if outcome.len() != variables.len() {
                return Err(ProbDistError::ArityMismatch {
                    got: outcome.len(),
                    expected: variables.len(),
                    outcome,
                });
            }
            if p.is_negative() {
                return Err(ProbDistError::NegativeProbability {
                    p: p.to_string(),
                    outcome,
                });
            }
            if p.is_zero() {
                return Err(ProbDistError::ZeroProbability(outcome));
            }
            let mut key = Vec::with_capacity(outcome.len());
            for (i, sym) in outcome.iter().enumerate() {
                let idx = alphabets[i].iter().position(|s| s == sym).ok_or_else(|| {
                    ProbDistError::UnknownSymbol {
                        variable: variables[i].clone(),
                        symbol: sym.clone(),
                    }
                })?;
                key.push(idx);
            }
            total += &p;
            if pmf.insert(key, p).is_some() {
                return Err(ProbDistError::DuplicateOutcome(outcome));
            }
        }
        if total != Rat::one() {
            return Err(ProbDistError::NonUnitMass(total.to_string()));
        }
        Ok(JointDistribution {
            variables,
            alphabets,
            pmf,
        })
    }

    /// Single-variable distribution from (symbol, mass) pairs.
    pub fn scalar(name: &str, masses: &[(&str, Rat)]) -> Result<Self, ProbDistError> {
        let alphabet: Vec<String> = masses.iter().map(|(s, _)| s.to_string()).collect();
        let entries = masses
            .iter()
            .map(|(s, p)| (vec![s.to_string()], p.clone()))
            .collect();
        Self::from_table(vec![name.to_string()], vec![alphabet], entries)
    }

    /// Internal constructor for callers that already hold index-keyed atoms.
    pub(crate) fn from_indexed(
        variables: Vec<String>,
        alphabets: Vec<Vec<String>>,
        pmf: BTreeMap<Vec<usize>, Rat>,
    ) -> Self {
        debug_assert!(pmf.values().fold(Rat::zero(), |a, p| &a + p) == Rat::one());
        JointDistribution {
            variables,
            alphabets,
            pmf,
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// Same distribution with the variables renamed positionally.
    pub fn with_variable_names(&self, names: Vec<String>) -> Result<Self, ProbDistError> {
        if names.len() != self.variables.len() {
            return Err(ProbDistError::ArityMismatch {
                outcome: names,
                got: 0,
                expected: self.variables.len(),
            });
        }
        for (i, v) in names.iter().enumerate() {
            if names[..i].contains(v) {
                return Err(ProbDistError::DuplicateVariable(v.clone()));
            }
        }
        Ok(JointDistribution {
            variables: names,
            alphabets: self.alphabets.clone(),
            pmf: self.pmf.clone(),
        })
    }

    pub fn alphabet(&self, var: usize) -> &[String] {
        &self.alphabets[var]
    }

    pub fn alphabets(&self) -> &[Vec<String>] {
        &self.alphabets
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn support_size(&self) -> usize {
        self.pmf.len()
    }

    /// Support atoms in deterministic (index-lexicographic) order.
    pub fn support(&self) -> impl Iterator<Item = (&Vec<usize>, &Rat)> {
        self.pmf.iter()
    }

    pub fn mass(&self, outcome: &[usize]) -> Option<&Rat> {
        self.pmf.get(outcome)
    }

    pub fn outcome_symbols(&self, outcome: &[usize]) -> Vec<String> {
        outcome
            .iter()
            .enumerate()
            .map(|(i, &s)| self.alphabets[i][s].clone())
            .collect()
    }

    fn var_indices(&self, subset: &[String]) -> Result<Vec<usize>, ProbDistError> {
        if subset.is_empty() {
            return Err(ProbDistError::EmptySubset);
        }
        subset
            .iter()
            .map(|v| {
                self.variables
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| ProbDistError::UnknownVariable(v.clone()))
            })
            .collect()
    }

    /// Marginal distribution of the given variables, in the given order.
    pub fn marginalize(&self, subset: &[String]) -> Result<JointDistribution, ProbDistError> {
        let idxs = self.var_indices(subset)?;
        let mut pmf: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
        for (outcome, p) in &self.pmf {
            let key: Vec<usize> = idxs.iter().map(|&i| outcome[i]).collect();
            match pmf.get_mut(&key) {
                Some(q) => *q += p,
                None => {
                    pmf.insert(key, p.clone());
                }
            }
        }
        Ok(JointDistribution {
            variables: subset.to_vec(),
            alphabets: idxs.iter().map(|&i| self.alphabets[i].clone()).collect(),
            pmf,
        })
    }

    /// Entropy of the whole joint, in bits.
    pub fn entropy(&self, measure: EntropyMeasure) -> Result<f64, ProbDistError> {
        measure.validate()?;
        let masses: Vec<f64> = self.pmf.values().map(Rat::to_f64).collect();
        Ok(measure.of_masses(&masses))
    }

    /// Entropy of a variable subset, in bits.
    pub fn subset_entropy(
        &self,
        subset: &[String],
        measure: EntropyMeasure,
    ) -> Result<f64, ProbDistError> {
        measure.validate()?;
        let idxs = self.var_indices(subset)?;
        Ok(self.entropy_of_indices(&idxs, measure))
    }

    fn entropy_of_indices(&self, idxs: &[usize], measure: EntropyMeasure) -> f64 {
        let mut groups: HashMap<Vec<usize>, Rat> = HashMap::new();
        for (outcome, p) in &self.pmf {
            let key: Vec<usize> = idxs.iter().map(|&i| outcome[i]).collect();
            match groups.get_mut(&key) {
                Some(q) => *q += p,
                None => {
                    groups.insert(key, p.clone());
                }
            }
        }
        let masses: Vec<f64> = groups.values().map(Rat::to_f64).collect();
        measure.of_masses(&masses)
    }

    /// The entropy vector h(a) over all nonempty subsets of `ground_vars`.
    pub fn entropy_vector(
        &self,
        ground_vars: &[String],
        measure: EntropyMeasure,
    ) -> Result<SetFunction<f64>, ProbDistError> {
        measure.validate()?;
        if ground_vars.len() > ENTROPY_VECTOR_CAP {
            return Err(ProbDistError::GroundSetTooLarge(
                ground_vars.len(),
                ENTROPY_VECTOR_CAP,
            ));
        }
        let idxs = self.var_indices(ground_vars)?;
        let mut out = SetFunction::<f64>::zeroes(ground_vars.to_vec());
        for mask in 1..=out.full_mask() {
            let chosen: Vec<usize> = idxs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &i)| i)
                .collect();
            out.set(mask, self.entropy_of_indices(&chosen, measure))
                .expect("mask in range");
        }
        Ok(out)
    }

    /// h(A | B) = h(A u B) - h(B). `B` may be empty.
    pub fn conditional_entropy(
        &self,
        target: &[String],
        given: &[String],
        measure: EntropyMeasure,
    ) -> Result<f64, ProbDistError> {
        measure.validate()?;
        let t = self.var_indices(target)?;
        let g = if given.is_empty() {
            Vec::new()
        } else {
            self.var_indices(given)?
        };
        let mut union = g.clone();
        for i in &t {
            if !union.contains(i) {
                union.push(*i);
            }
        }
        let hb = if g.is_empty() {
            0.0
        } else {
            self.entropy_of_indices(&g, measure)
        };
        Ok(self.entropy_of_indices(&union, measure) - hb)
    }

    /// True iff, on the support, the `given` outcome determines the `target`
    /// outcome. Exact structural check, no tolerance.
    pub fn is_function_of(
        &self,
        target: &[String],
        given: &[String],
    ) -> Result<bool, ProbDistError> {
        let t = self.var_indices(target)?;
        let g = if given.is_empty() {
            Vec::new()
        } else {
            self.var_indices(given)?
        };
        let mut seen: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (outcome, _) in &self.pmf {
            let key: Vec<usize> = g.iter().map(|&i| outcome[i]).collect();
            let val: Vec<usize> = t.iter().map(|&i| outcome[i]).collect();
            match seen.get(&key) {
                Some(prev) if *prev != val => return Ok(false),
                Some(_) => {}
                None => {
                    seen.insert(key, val);
                }
            }
        }
        Ok(true)
    }

    pub fn to_file(&self) -> DistributionFile {
        DistributionFile {
            variables: self.variables.clone(),
            alphabets: self
                .variables
                .iter()
                .cloned()
                .zip(self.alphabets.iter().cloned())
                .collect(),
            pmf: self
                .pmf
                .iter()
                .map(|(o, p)| PmfEntry {
                    outcome: self.outcome_symbols(o),
                    p: p.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, ProbDistError> {
        let file: DistributionFile = serde_json::from_str(s)
            .map_err(|e| ProbDistError::InvalidMeasure(format!("bad distribution JSON: {e}")))?;
        file.build()
    }
}

/// On-disk form of a distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionFile {
    pub variables: Vec<String>,
    pub alphabets: BTreeMap<String, Vec<String>>,
    pub pmf: Vec<PmfEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PmfEntry {
    pub outcome: Vec<String>,
    pub p: Rat,
}

impl DistributionFile {
    pub fn build(self) -> Result<JointDistribution, ProbDistError> {
        let mut alphabets = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let a = self
                .alphabets
                .get(v)
                .ok_or_else(|| ProbDistError::BadAlphabet(v.clone()))?;
            alphabets.push(a.clone());
        }
        JointDistribution::from_table(
            self.variables,
            alphabets,
            self.pmf.into_iter().map(|e| (e.outcome, e.p)).collect(),
        )
    }
}

/// The binary entropy h_b(p) in bits.
pub fn binary_entropy(p: f64) -> Result<f64, ProbDistError> {
    binary_measure_entropy(EntropyMeasure::Shannon, p)
}

/// Binary entropy of (p, 1-p) under any measure.
pub fn binary_measure_entropy(measure: EntropyMeasure, p: f64) -> Result<f64, ProbDistError> {
    measure.validate()?;
    if !((-1e-12)..=(1.0 + 1e-12)).contains(&p) {
        return Err(ProbDistError::OutOfRange(p, "[0, 1]".into()));
    }
    let p = p.clamp(0.0, 1.0);
    Ok(measure.of_masses(&[p, 1.0 - p]))
}

/// The unique p in [0, 1/2] with h_b(p) = v, by bisection to 1e-12.
pub fn invert_binary_entropy(v: f64) -> Result<f64, ProbDistError> {
    invert_binary_measure(EntropyMeasure::Shannon, v)
}

/// Inverse of the binary measure entropy on [0, 1/2].
///
/// Every supported measure is strictly increasing in p on that interval, so
/// bisection applies; the absolute tolerance on p is 1e-12.
pub fn invert_binary_measure(measure: EntropyMeasure, v: f64) -> Result<f64, ProbDistError> {
    measure.validate()?;
    let max = measure.of_masses(&[0.5, 0.5]);
    if !((-1e-9)..=(max + 1e-9)).contains(&v) {
        return Err(ProbDistError::OutOfRange(v, format!("[0, {max}]")));
    }
    let v = v.clamp(0.0, max);
    // The measure is flat to second order at p = 1/2, so bisection cannot
    // localize the endpoint values beyond sqrt(eps); pin them directly.
    if max - v <= 1e-12 {
        return Ok(0.5);
    }
    if v <= 1e-12 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if measure.of_masses(&[mid, 1.0 - mid]) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn shannon() -> EntropyMeasure {
        EntropyMeasure::Shannon
    }

    /// Three sources built from independent uniform bits b0, b1, b2 as
    /// Y1 = (b0, b1), Y2 = (b0, b2), Y3 = (b1, b2).
    fn three_correlated_sources() -> JointDistribution {
        let pair = |a: usize, b: usize| format!("{a}{b}");
        let mut entries = Vec::new();
        for b0 in 0..2usize {
            for b1 in 0..2usize {
                for b2 in 0..2usize {
                    entries.push((
                        vec![pair(b0, b1), pair(b0, b2), pair(b1, b2)],
                        r("1/8"),
                    ));
                }
            }
        }
        let alpha: Vec<String> = vec!["00", "01", "10", "11"]
            .into_iter()
            .map(String::from)
            .collect();
        JointDistribution::from_table(
            vec!["Y1".into(), "Y2".into(), "Y3".into()],
            vec![alpha.clone(), alpha.clone(), alpha],
            entries,
        )
        .unwrap()
    }

    #[test]
    fn point_mass_is_valid() {
        let d = JointDistribution::scalar("X", &[("a", r("1"))]).unwrap();
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.entropy(shannon()).unwrap(), 0.0);
    }

    #[test]
    fn non_unit_mass_rejected() {
        let err = JointDistribution::scalar("X", &[("a", r("9/10"))]).unwrap_err();
        assert!(matches!(err, ProbDistError::NonUnitMass(_)));
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            JointDistribution::scalar("X", &[("a", r("-1/2")), ("b", r("3/2"))]).unwrap_err(),
            ProbDistError::NegativeProbability { .. }
        ));
        assert!(matches!(
            JointDistribution::from_table(
                vec!["X".into()],
                vec![vec!["a".into()]],
                vec![(vec!["a".into()], r("1/2")), (vec!["a".into()], r("1/2"))],
            )
            .unwrap_err(),
            ProbDistError::DuplicateOutcome(_)
        ));
        assert!(matches!(
            JointDistribution::from_table(
                vec!["X".into()],
                vec![vec!["a".into()]],
                vec![(vec!["zz".into()], r("1"))],
            )
            .unwrap_err(),
            ProbDistError::UnknownSymbol { .. }
        ));
        assert!(matches!(
            JointDistribution::scalar("X", &[("a", r("0")), ("b", r("1"))]).unwrap_err(),
            ProbDistError::ZeroProbability(_)
        ));
    }

    #[test]
    fn three_source_entropies() {
        let d = three_correlated_sources();
        assert_eq!(d.support_size(), 8);
        let h1 = d.subset_entropy(&["Y1".into()], shannon()).unwrap();
        assert!((h1 - 2.0).abs() < 1e-12);
        let h12 = d
            .subset_entropy(&["Y1".into(), "Y2".into()], shannon())
            .unwrap();
        assert!((h12 - 3.0).abs() < 1e-12);
        let h123 = d.entropy(shannon()).unwrap();
        assert!((h123 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn marginalize_identity_and_pairs() {
        let d = three_correlated_sources();
        let all: Vec<String> = d.variables().to_vec();
        assert_eq!(d.marginalize(&all).unwrap(), d);
        let m = d.marginalize(&["Y1".into()]).unwrap();
        assert_eq!(m.support_size(), 4);
        for (_, p) in m.support() {
            assert_eq!(*p, r("1/4"));
        }
        assert!(matches!(
            d.marginalize(&["nope".into()]).unwrap_err(),
            ProbDistError::UnknownVariable(_)
        ));
        assert!(matches!(
            d.marginalize(&[]).unwrap_err(),
            ProbDistError::EmptySubset
        ));
    }

    #[test]
    fn independent_pair_marginal() {
        let d = JointDistribution::from_table(
            vec!["X".into(), "Y".into()],
            vec![
                vec!["0".into(), "1".into()],
                vec!["0".into(), "1".into()],
            ],
            vec![
                (vec!["0".into(), "0".into()], r("3/8")),
                (vec!["0".into(), "1".into()], r("3/8")),
                (vec!["1".into(), "0".into()], r("1/8")),
                (vec!["1".into(), "1".into()], r("1/8")),
            ],
        )
        .unwrap();
        let mx = d.marginalize(&["X".into()]).unwrap();
        assert_eq!(mx.mass(&[0]), Some(&r("3/4")));
        assert_eq!(mx.mass(&[1]), Some(&r("1/4")));
        // independent: H(X|Y) = H(X)
        let hx = d.subset_entropy(&["X".into()], shannon()).unwrap();
        let hxy = d
            .conditional_entropy(&["X".into()], &["Y".into()], shannon())
            .unwrap();
        assert!((hx - hxy).abs() < 1e-12);
    }

    #[test]
    fn shannon_entropy_matches_direct_summation() {
        // Oracle: evaluate -sum p log2 p by hand for p = (1/2, 3/10, 1/5).
        let probs = [0.5f64, 0.3, 0.2];
        let expected: f64 = probs.iter().map(|p| -p * p.log2()).sum();
        let d = JointDistribution::scalar(
            "X",
            &[("a", r("1/2")), ("b", r("3/10")), ("c", r("1/5"))],
        )
        .unwrap();
        assert!((d.entropy(shannon()).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 1.4854752972273344).abs() < 1e-12);
    }

    #[test]
    fn uniform_binary_entropy_is_one() {
        let d =
            JointDistribution::scalar("X", &[("0", r("1/2")), ("1", r("1/2"))]).unwrap();
        assert!((d.entropy(shannon()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_vector_three_sources() {
        let d = three_correlated_sources();
        let v = d
            .entropy_vector(&["Y1".into(), "Y2".into(), "Y3".into()], shannon())
            .unwrap();
        for single in [0b001, 0b010, 0b100] {
            assert!((v.get(single).unwrap() - 2.0).abs() < 1e-12);
        }
        for pair in [0b011, 0b101, 0b110] {
            assert!((v.get(pair).unwrap() - 3.0).abs() < 1e-12);
        }
        assert!((v.get(0b111).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_vector_deterministic_and_iid() {
        let det = JointDistribution::scalar("X", &[("a", r("1"))]).unwrap();
        let v = det.entropy_vector(&["X".into()], shannon()).unwrap();
        assert_eq!(*v.get(1).unwrap(), 0.0);

        // 3 i.i.d. uniform bits: h(a) = |a|.
        let mut entries = Vec::new();
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    entries.push((
                        vec![a.to_string(), b.to_string(), c.to_string()],
                        r("1/8"),
                    ));
                }
            }
        }
        let bits: Vec<String> = vec!["0".into(), "1".into()];
        let d = JointDistribution::from_table(
            vec!["A".into(), "B".into(), "C".into()],
            vec![bits.clone(), bits.clone(), bits],
            entries,
        )
        .unwrap();
        let v = d
            .entropy_vector(&["A".into(), "B".into(), "C".into()], shannon())
            .unwrap();
        for (mask, h) in v.iter() {
            assert!((h - mask.count_ones() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_entropy_cases() {
        let d = three_correlated_sources();
        let self_cond = d
            .conditional_entropy(&["Y1".into()], &["Y1".into()], shannon())
            .unwrap();
        assert!(self_cond.abs() < 1e-12);
        // Brute force from the 8-atom pmf: H(Y1 | Y2, Y3) = 0.
        let c = d
            .conditional_entropy(&["Y1".into()], &["Y2".into(), "Y3".into()], shannon())
            .unwrap();
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn function_of_checks() {
        let d = three_correlated_sources();
        assert!(d
            .is_function_of(&["Y1".into()], &["Y1".into()])
            .unwrap());
        assert!(d
            .is_function_of(&["Y3".into()], &["Y1".into(), "Y2".into()])
            .unwrap());
        // independent nondegenerate pair
        let ind = JointDistribution::from_table(
            vec!["X".into(), "Y".into()],
            vec![
                vec!["0".into(), "1".into()],
                vec!["0".into(), "1".into()],
            ],
            vec![
                (vec!["0".into(), "0".into()], r("1/4")),
                (vec!["0".into(), "1".into()], r("1/4")),
                (vec!["1".into(), "0".into()], r("1/4")),
                (vec!["1".into(), "1".into()], r("1/4")),
            ],
        )
        .unwrap();
        assert!(!ind.is_function_of(&["X".into()], &["Y".into()]).unwrap());
    }

    #[test]
    fn binary_entropy_inversion() {
        assert!((invert_binary_entropy(1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!(invert_binary_entropy(0.0).unwrap().abs() < 1e-9);
        let v = binary_entropy(0.3).unwrap();
        assert!((invert_binary_entropy(v).unwrap() - 0.3).abs() < 1e-9);
        assert!(invert_binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.2).is_err());
    }

    #[test]
    fn renyi_tsallis_values_and_limits() {
        let d = JointDistribution::scalar(
            "X",
            &[("a", r("1/2")), ("b", r("3/10")), ("c", r("1/5"))],
        )
        .unwrap();
        // Renyi order 2 by direct formula.
        let s2 = 0.5f64.powi(2) + 0.3f64.powi(2) + 0.2f64.powi(2);
        let expected = -s2.log2();
        let got = d
            .entropy(EntropyMeasure::Renyi { alpha: 2.0 })
            .unwrap();
        assert!((got - expected).abs() < 1e-12);
        // Tsallis q=2 by direct formula.
        let got_t = d.entropy(EntropyMeasure::Tsallis { q: 2.0 }).unwrap();
        assert!((got_t - (1.0 - s2)).abs() < 1e-12);
        // Renyi order -> 1 approaches Shannon.
        let h = d.entropy(shannon()).unwrap();
        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            let ha = d.entropy(EntropyMeasure::Renyi { alpha }).unwrap();
            assert!((ha - h).abs() < 1e-3);
        }
        assert!(EntropyMeasure::Renyi { alpha: 1.0 }.validate().is_err());
        assert!(EntropyMeasure::Tsallis { q: 0.0 }.validate().is_err());
    }

    #[test]
    fn measure_monotone_in_p_on_half_interval() {
        for measure in [
            EntropyMeasure::Renyi { alpha: 0.5 },
            EntropyMeasure::Renyi { alpha: 2.0 },
            EntropyMeasure::Tsallis { q: 2.0 },
            EntropyMeasure::Shannon,
        ] {
            let mut prev = -1.0;
            for step in 1..=32 {
                let p = 0.5 * step as f64 / 32.0;
                let h = binary_measure_entropy(measure, p).unwrap();
                assert!(h > prev, "not increasing at p={p} for {measure:?}");
                prev = h;
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let d = three_correlated_sources();
        let s = d.to_json();
        let back = JointDistribution::from_json(&s).unwrap();
        assert_eq!(back, d);
    }
}
