//! Entropy oracles over a family of partition variables.
//!
//! Recovery never looks inside a distribution; it only asks an oracle for
//! joint entropies of opaque partition-variable handles, optionally mixed
//! with coordinate variables of the hidden vector. Answers are symmetric in
//! query order and the empty query is 0.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::probdist::EntropyMeasure;
use crate::EPS_H;

use super::{PartitionError, PartitionLabel, PartitionSystem};

/// Joint entropy answers for partition variables and coordinates.
pub trait EntropyOracle {
    /// Size of the hidden support.
    fn support_size(&self) -> usize;

    /// Number of coordinates of the hidden vector (1 for scalars).
    fn num_coords(&self) -> usize;

    /// The measure the reported entropies are computed under.
    fn measure(&self) -> EntropyMeasure;

    /// The label handles the oracle answers for (canonical, sorted).
    fn labels(&self) -> &[PartitionLabel];

    /// H of the joint of the labelled variables and coordinates, in bits.
    fn query(&self, delta: &[PartitionLabel], tau: &[usize]) -> Result<f64, PartitionError>;

    /// Is the target query a function of the given query? The default
    /// implementation compares joint entropies against [`EPS_H`]; oracles
    /// backed by an explicit distribution answer structurally instead.
    fn cond_is_zero(
        &self,
        target: (&[PartitionLabel], &[usize]),
        given: (&[PartitionLabel], &[usize]),
    ) -> Result<bool, PartitionError> {
        let mut delta: Vec<PartitionLabel> = given.0.to_vec();
        delta.extend_from_slice(target.0);
        let mut tau: Vec<usize> = given.1.to_vec();
        tau.extend_from_slice(target.1);
        let joint = self.query(&delta, &tau)?;
        let base = self.query(given.0, given.1)?;
        Ok((joint - base).abs() <= EPS_H)
    }
}

/// Oracle backed by a [`PartitionSystem`]; functional-dependency queries are
/// answered structurally, so they are exact.
pub struct SystemOracle<'a> {
    system: &'a PartitionSystem,
    measure: EntropyMeasure,
}

impl<'a> SystemOracle<'a> {
    pub fn new(system: &'a PartitionSystem, measure: EntropyMeasure) -> Self {
        SystemOracle { system, measure }
    }
}

impl EntropyOracle for SystemOracle<'_> {
    fn support_size(&self) -> usize {
        self.system.support_size()
    }

    fn num_coords(&self) -> usize {
        self.system.num_coords()
    }

    fn measure(&self) -> EntropyMeasure {
        self.measure
    }

    fn labels(&self) -> &[PartitionLabel] {
        self.system.labels()
    }

    fn query(&self, delta: &[PartitionLabel], tau: &[usize]) -> Result<f64, PartitionError> {
        Ok(self.system.query(delta, tau, self.measure))
    }

    fn cond_is_zero(
        &self,
        target: (&[PartitionLabel], &[usize]),
        given: (&[PartitionLabel], &[usize]),
    ) -> Result<bool, PartitionError> {
        Ok(self.system.cond_is_zero_structural(target, given))
    }
}

/// Relabels the handles of an inner oracle through a bijection. Recovery
/// must be invariant under this wrapping, since handles carry no meaning.
pub struct ShuffledOracle<O> {
    inner: O,
    forward: HashMap<PartitionLabel, PartitionLabel>,
    presented: Vec<PartitionLabel>,
}

impl<O: EntropyOracle> ShuffledOracle<O> {
    /// `mapping` sends presented labels to the inner oracle's labels.
    pub fn new(inner: O, mapping: Vec<(PartitionLabel, PartitionLabel)>) -> Self {
        let mut presented: Vec<PartitionLabel> = mapping.iter().map(|(p, _)| *p).collect();
        presented.sort();
        let forward = mapping.into_iter().collect();
        ShuffledOracle {
            inner,
            forward,
            presented,
        }
    }

    fn translate(&self, delta: &[PartitionLabel]) -> Result<Vec<PartitionLabel>, PartitionError> {
        delta
            .iter()
            .map(|l| {
                self.forward
                    .get(l)
                    .copied()
                    .ok_or_else(|| PartitionError::BadLabel(format!("unknown handle {}", l.render())))
            })
            .collect()
    }
}

impl<O: EntropyOracle> EntropyOracle for ShuffledOracle<O> {
    fn support_size(&self) -> usize {
        self.inner.support_size()
    }

    fn num_coords(&self) -> usize {
        self.inner.num_coords()
    }

    fn measure(&self) -> EntropyMeasure {
        self.inner.measure()
    }

    fn labels(&self) -> &[PartitionLabel] {
        &self.presented
    }

    fn query(&self, delta: &[PartitionLabel], tau: &[usize]) -> Result<f64, PartitionError> {
        let inner = self.translate(delta)?;
        self.inner.query(&inner, tau)
    }

    fn cond_is_zero(
        &self,
        target: (&[PartitionLabel], &[usize]),
        given: (&[PartitionLabel], &[usize]),
    ) -> Result<bool, PartitionError> {
        let t = self.translate(target.0)?;
        let g = self.translate(given.0)?;
        self.inner.cond_is_zero((&t, target.1), (&g, given.1))
    }
}

/// Oracle loaded from a file of explicit query answers. Any query without a
/// stored entry is an inconsistency.
pub struct FileOracle {
    n: usize,
    coords: usize,
    measure: EntropyMeasure,
    labels: Vec<PartitionLabel>,
    entries: HashMap<(Vec<PartitionLabel>, Vec<usize>), f64>,
}

#[derive(Serialize, Deserialize)]
struct OracleEntryFile {
    delta: Vec<Vec<usize>>,
    #[serde(default)]
    tau: Vec<usize>,
    #[serde(rename = "H")]
    h: f64,
}

/// On-disk oracle format. Labels are arrays of one-based support indices of
/// the canonical block; `tau` lists one-based coordinate indices.
#[derive(Serialize, Deserialize)]
pub struct OracleFile {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default = "default_measure")]
    pub measure: EntropyMeasure,
    pub labels: Vec<Vec<usize>>,
    entries: Vec<OracleEntryFile>,
}

fn default_measure() -> EntropyMeasure {
    EntropyMeasure::Shannon
}

impl FileOracle {
    pub fn from_json(s: &str) -> Result<Self, PartitionError> {
        let file: OracleFile = serde_json::from_str(s)
            .map_err(|e| PartitionError::InconsistentOracle(format!("bad oracle JSON: {e}")))?;
        Self::from_file(file)
    }

    pub fn from_file(file: OracleFile) -> Result<Self, PartitionError> {
        if file.n < 2 {
            return Err(PartitionError::SupportTooSmall(file.n));
        }
        let mut labels = Vec::with_capacity(file.labels.len());
        for ix in &file.labels {
            labels.push(PartitionLabel::from_indices(ix, file.n)?);
        }
        labels.sort();
        labels.dedup();
        let mut entries = HashMap::new();
        for e in &file.entries {
            let mut delta = Vec::with_capacity(e.delta.len());
            for ix in &e.delta {
                delta.push(PartitionLabel::from_indices(ix, file.n)?);
            }
            delta.sort();
            delta.dedup();
            let mut tau: Vec<usize> = Vec::with_capacity(e.tau.len());
            for &c in &e.tau {
                if c == 0 || c > file.m {
                    return Err(PartitionError::BadLabel(format!(
                        "coordinate {c} out of range 1..={}",
                        file.m
                    )));
                }
                tau.push(c - 1);
            }
            tau.sort_unstable();
            tau.dedup();
            entries.insert((delta, tau), e.h);
        }
        Ok(FileOracle {
            n: file.n,
            coords: file.m,
            measure: file.measure,
            labels,
            entries,
        })
    }

    /// Dump every answer of another oracle for the given query lists; used
    /// to produce offline oracle files.
    pub fn dump<O: EntropyOracle>(
        oracle: &O,
        queries: &[(Vec<PartitionLabel>, Vec<usize>)],
    ) -> Result<OracleFile, PartitionError> {
        let mut entries = Vec::with_capacity(queries.len());
        for (delta, tau) in queries {
            let h = oracle.query(delta, tau)?;
            entries.push(OracleEntryFile {
                delta: delta.iter().map(|l| l.indices()).collect(),
                tau: tau.iter().map(|c| c + 1).collect(),
                h,
            });
        }
        Ok(OracleFile {
            n: oracle.support_size(),
            m: oracle.num_coords(),
            measure: oracle.measure(),
            labels: oracle.labels().iter().map(|l| l.indices()).collect(),
            entries,
        })
    }
}

impl EntropyOracle for FileOracle {
    fn support_size(&self) -> usize {
        self.n
    }

    fn num_coords(&self) -> usize {
        self.coords
    }

    fn measure(&self) -> EntropyMeasure {
        self.measure
    }

    fn labels(&self) -> &[PartitionLabel] {
        &self.labels
    }

    fn query(&self, delta: &[PartitionLabel], tau: &[usize]) -> Result<f64, PartitionError> {
        if delta.is_empty() && tau.is_empty() {
            return Ok(0.0);
        }
        let mut d = delta.to_vec();
        d.sort();
        d.dedup();
        let mut t = tau.to_vec();
        t.sort_unstable();
        t.dedup();
        self.entries
            .get(&(d, t))
            .copied()
            .ok_or_else(|| {
                PartitionError::InconsistentOracle(
                    "query not answered by the oracle file".to_string(),
                )
            })
    }
}

/// All queries needed by scalar recovery for a complete family over `n`
/// atoms; exponential in `n`, intended for small offline files.
pub fn scalar_query_closure(n: usize) -> Result<Vec<(Vec<PartitionLabel>, Vec<usize>)>, PartitionError> {
    let labels = super::enumerate_partitions(n)?;
    let mut queries = Vec::new();
    for mask in 1usize..(1 << labels.len()) {
        let delta: Vec<PartitionLabel> = labels
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| *l)
            .collect();
        queries.push((delta, Vec::new()));
    }
    Ok(queries)
}

#[derive(Serialize)]
struct OracleFileOut<'a> {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    measure: &'a EntropyMeasure,
    labels: &'a Vec<Vec<usize>>,
    entries: &'a Vec<OracleEntryFile>,
}

impl OracleFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&OracleFileOut {
            n: self.n,
            m: self.m,
            measure: &self.measure,
            labels: &self.labels,
            entries: &self.entries,
        })
        .expect("serializable")
    }
}

/// Compare a system against an oracle over a query family: exhaustively for
/// tiny instances, through a fixed-seed random sample otherwise.
pub fn check_oracle_consistency<O: EntropyOracle>(
    system: &PartitionSystem,
    oracle: &O,
    include_coords: bool,
) -> bool {
    use rand::{Rng, SeedableRng};
    let measure = oracle.measure();
    let labels = system.labels().to_vec();
    if system.support_size() != oracle.support_size() {
        return false;
    }
    let oracle_labels: BTreeMap<PartitionLabel, ()> =
        oracle.labels().iter().map(|l| (*l, ())).collect();
    if labels.iter().any(|l| !oracle_labels.contains_key(l)) {
        return false;
    }
    let coords = if include_coords {
        system.num_coords().min(oracle.num_coords())
    } else {
        0
    };
    let agree = |delta: &[PartitionLabel], tau: &[usize]| -> bool {
        match oracle.query(delta, tau) {
            Ok(h) => (system.query(delta, tau, measure) - h).abs() <= EPS_H,
            Err(_) => false,
        }
    };
    let exhaustive_cost = (1u128 << labels.len().min(100)) << coords.min(20);
    if exhaustive_cost <= 1 << 12 {
        for lmask in 0..(1usize << labels.len()) {
            let delta: Vec<PartitionLabel> = labels
                .iter()
                .enumerate()
                .filter(|(i, _)| lmask & (1 << i) != 0)
                .map(|(_, l)| *l)
                .collect();
            for cmask in 0..(1usize << coords) {
                let tau: Vec<usize> = (0..coords).filter(|c| cmask & (1 << c) != 0).collect();
                if !agree(&delta, &tau) {
                    return false;
                }
            }
        }
        return true;
    }
    // Sweep every single-label query, alone and paired with each single
    // coordinate; coarse queries are where differing joint structure shows
    // up, and uniform inclusion sampling essentially never produces them.
    for l in &labels {
        if !agree(&[*l], &[]) {
            return false;
        }
        for c in 0..coords {
            if !agree(&[*l], &[c]) {
                return false;
            }
        }
    }
    for c in 0..coords {
        if !agree(&[], &[c]) {
            return false;
        }
    }
    // Then a fixed-seed random sample over mixed query sizes.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0c0_ffee);
    for _ in 0..1000 {
        let k = rng.gen_range(0..=labels.len().min(6));
        let mut delta = Vec::with_capacity(k);
        for _ in 0..k {
            delta.push(labels[rng.gen_range(0..labels.len())]);
        }
        delta.sort();
        delta.dedup();
        let tau: Vec<usize> = (0..coords).filter(|_| rng.gen_bool(0.5)).collect();
        if !agree(&delta, &tau) {
            return false;
        }
    }
    true
}
