//! Binary partition random variables of a finite distribution.
//!
//! A distribution with support atoms `1..n` induces one two-valued random
//! variable per unordered split of the support into two nonempty blocks;
//! there are `2^(n-1) - 1` of them. The stored representative of a split is
//! the block that does **not** contain the first support atom, so each split
//! has exactly one canonical [`PartitionLabel`].
//!
//! [`PartitionSystem`] couples a distribution with (a subset of) these
//! variables and answers joint entropy queries over them, optionally mixed
//! with coordinate variables of the base distribution. The structural facts
//! that recovery relies on live here too: pairwise distinctness, the
//! completeness of the family among binary functions of the base variable,
//! chains of strictly informative variables, and the minimality of
//! indicator entropies per probability rank.

pub mod oracle;
pub mod recovery;

use std::collections::{BTreeMap, HashMap};

use crate::probdist::{binary_entropy, EntropyMeasure, JointDistribution, ProbDistError};
use crate::ratio::Rat;
use crate::{EPS_H, PARTITION_SUPPORT_CAP, RECOVERY_SUPPORT_CAP};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PartitionError {
    #[error("support of size {0} is too small (need at least 2)")]
    SupportTooSmall(usize),
    #[error("support of size {0} exceeds the cap of {1}")]
    SupportTooLarge(usize, usize),
    #[error("bad partition label: {0}")]
    BadLabel(String),
    #[error("operation requires the complete family of partition variables")]
    IncompleteSystem,
    #[error("property violation: {0}")]
    PropertyViolation(String),
    #[error("oracle is inconsistent: {0}")]
    InconsistentOracle(String),
    #[error("recovered masses do not form a distribution: {0}")]
    NonDistribution(String),
    #[error("coordinate classes do not factor: {0}")]
    NonFactorizableCoordinates(String),
    #[error(transparent)]
    Prob(#[from] ProbDistError),
}

/// Canonical name of a two-block split of the support `{1..n}`.
///
/// The stored block never contains atom index 0; constructing a label from
/// the other block of the same split yields the identical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionLabel {
    block: u32,
}

impl PartitionLabel {
    pub fn new(block: u32, n: usize) -> Result<Self, PartitionError> {
        let full = full_mask(n);
        if block & full == 0 || block & !full != 0 || block & full == full {
            return Err(PartitionError::BadLabel(format!(
                "block {block:#b} must be a nonempty proper subset of the {n} support atoms"
            )));
        }
        let block = if block & 1 != 0 { !block & full } else { block };
        Ok(PartitionLabel { block })
    }

    /// Canonical block as a bit mask over support atoms (bit 0 = first atom).
    pub fn block(&self) -> u32 {
        self.block
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.block & (1 << atom) != 0
    }

    /// Indicator of a single atom: the split `{atom} | rest`.
    pub fn indicator(atom: usize, n: usize) -> Result<Self, PartitionError> {
        Self::new(1 << atom, n)
    }

    /// True iff one side of the split is a single atom; returns that atom.
    pub fn indicator_atom(&self, n: usize) -> Option<usize> {
        let full = full_mask(n);
        if self.block.count_ones() == 1 {
            return Some(self.block.trailing_zeros() as usize);
        }
        let other = !self.block & full;
        if other.count_ones() == 1 {
            return Some(other.trailing_zeros() as usize);
        }
        None
    }

    /// One-based atom indices of the canonical block, ascending.
    pub fn indices(&self) -> Vec<usize> {
        (0..32)
            .filter(|i| self.block & (1 << i) != 0)
            .map(|i| i + 1)
            .collect()
    }

    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self, PartitionError> {
        let mut block = 0u32;
        for &i in indices {
            if i == 0 || i > n {
                return Err(PartitionError::BadLabel(format!(
                    "atom index {i} out of range 1..={n}"
                )));
            }
            block |= 1 << (i - 1);
        }
        Self::new(block, n)
    }

    pub fn render(&self) -> String {
        format!(
            "<{}>",
            self.indices()
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

fn full_mask(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

/// All `2^(n-1) - 1` canonical partition labels of a support of size `n`.
pub fn enumerate_partitions(n: usize) -> Result<Vec<PartitionLabel>, PartitionError> {
    if n < 2 {
        return Err(PartitionError::SupportTooSmall(n));
    }
    if n > PARTITION_SUPPORT_CAP {
        return Err(PartitionError::SupportTooLarge(n, PARTITION_SUPPORT_CAP));
    }
    let mut labels = Vec::with_capacity((1usize << (n - 1)) - 1);
    for b in 1..(1u64 << (n - 1)) {
        labels.push(PartitionLabel {
            block: (b << 1) as u32,
        });
    }
    Ok(labels)
}

/// A distribution together with (some of) its binary partition variables.
#[derive(Clone, Debug)]
pub struct PartitionSystem {
    base: JointDistribution,
    atoms: Vec<(Vec<usize>, Rat)>,
    labels: Vec<PartitionLabel>,
    complete: bool,
}

impl PartitionSystem {
    /// Build the system for a distribution; `selected` defaults to the
    /// complete family.
    pub fn build(
        dist: &JointDistribution,
        selected: Option<Vec<PartitionLabel>>,
    ) -> Result<Self, PartitionError> {
        let n = dist.support_size();
        if n < 2 {
            return Err(PartitionError::SupportTooSmall(n));
        }
        if n > PARTITION_SUPPORT_CAP {
            return Err(PartitionError::SupportTooLarge(n, PARTITION_SUPPORT_CAP));
        }
        let all = enumerate_partitions(n)?;
        let (labels, complete) = match selected {
            None => (all, true),
            Some(sel) => {
                for l in &sel {
                    if l.block & !full_mask(n) != 0 || l.block == 0 {
                        return Err(PartitionError::BadLabel(format!(
                            "label {} does not fit a support of size {n}",
                            l.render()
                        )));
                    }
                }
                let complete = sel.len() == all.len();
                (sel, complete)
            }
        };
        let atoms = dist
            .support()
            .map(|(o, p)| (o.clone(), p.clone()))
            .collect();
        Ok(PartitionSystem {
            base: dist.clone(),
            atoms,
            labels,
            complete,
        })
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_coords(&self) -> usize {
        self.base.num_variables()
    }

    pub fn labels(&self) -> &[PartitionLabel] {
        &self.labels
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn base(&self) -> &JointDistribution {
        &self.base
    }

    pub fn atom_mass(&self, atom: usize) -> &Rat {
        &self.atoms[atom].1
    }

    /// Grouping key of an atom under a joint query.
    fn atom_key(&self, atom: usize, delta: &[PartitionLabel], tau: &[usize]) -> Vec<usize> {
        let mut key = Vec::with_capacity(delta.len() + tau.len());
        for l in delta {
            key.push(usize::from(l.contains(atom)));
        }
        for &m in tau {
            key.push(self.atoms[atom].0[m]);
        }
        key
    }

    /// Joint entropy of the chosen partition variables and coordinates.
    pub fn query(
        &self,
        delta: &[PartitionLabel],
        tau: &[usize],
        measure: EntropyMeasure,
    ) -> f64 {
        if delta.is_empty() && tau.is_empty() {
            return 0.0;
        }
        let mut groups: HashMap<Vec<usize>, Rat> = HashMap::new();
        for atom in 0..self.atoms.len() {
            let key = self.atom_key(atom, delta, tau);
            match groups.get_mut(&key) {
                Some(m) => *m += &self.atoms[atom].1,
                None => {
                    groups.insert(key, self.atoms[atom].1.clone());
                }
            }
        }
        let masses: Vec<f64> = groups.values().map(Rat::to_f64).collect();
        measure.of_masses(&masses)
    }

    /// Exact functional-dependency test: is the `target` query determined
    /// by the `given` query on the support?
    pub fn cond_is_zero_structural(
        &self,
        target: (&[PartitionLabel], &[usize]),
        given: (&[PartitionLabel], &[usize]),
    ) -> bool {
        let mut seen: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for atom in 0..self.atoms.len() {
            let g = self.atom_key(atom, given.0, given.1);
            let t = self.atom_key(atom, target.0, target.1);
            match seen.get(&g) {
                Some(prev) if *prev != t => return false,
                Some(_) => {}
                None => {
                    seen.insert(g, t);
                }
            }
        }
        true
    }

    /// The base distribution extended with one derived variable per label,
    /// named by the label. Intended for the selected-subset bound, where a
    /// few partition variables join the linear program's ground set.
    pub fn extended_distribution(&self) -> JointDistribution {
        let mut variables = self.base.variables().to_vec();
        let mut alphabets = self.base.alphabets().to_vec();
        for l in &self.labels {
            variables.push(format!("A{}", l.render()));
            let block = l
                .indices()
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let other = (0..self.atoms.len())
                .filter(|&a| !l.contains(a))
                .map(|a| (a + 1).to_string())
                .collect::<Vec<_>>()
                .join(",");
            alphabets.push(vec![format!("{{{block}}}"), format!("{{{other}}}")]);
        }
        let mut pmf = BTreeMap::new();
        for (atom, (outcome, p)) in self.atoms.iter().enumerate() {
            let mut full = outcome.clone();
            for l in &self.labels {
                full.push(usize::from(!l.contains(atom)));
            }
            pmf.insert(full, p.clone());
        }
        JointDistribution::from_indexed(variables, alphabets, pmf)
    }

    /// Atom ranks by decreasing mass (ties by support order); entry `r-1`
    /// is the atom of rank `r`.
    pub fn ranks_by_mass(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.atoms.len()).collect();
        order.sort_by(|&a, &b| self.atoms[b].1.cmp(&self.atoms[a].1).then(a.cmp(&b)));
        order
    }
}

/// Outcome of the structural property checks on a complete system.
#[derive(Debug)]
pub struct PropertyReport {
    pub support_size: usize,
    pub distinct_pairs_checked: usize,
    pub completeness_matched: usize,
    /// For each label, a chain of labels each strictly informative given
    /// the label and its predecessors.
    pub basis_chains: Vec<(PartitionLabel, Vec<PartitionLabel>)>,
}

/// Verify distinctness, completeness and the existence of basis chains on a
/// complete partition system. These are theorems for genuine systems, so a
/// violation indicates an implementation bug rather than bad data.
pub fn check_lemma_properties(system: &PartitionSystem) -> Result<PropertyReport, PartitionError> {
    if !system.is_complete() {
        return Err(PartitionError::IncompleteSystem);
    }
    let n = system.support_size();
    if n > RECOVERY_SUPPORT_CAP {
        return Err(PartitionError::SupportTooLarge(n, RECOVERY_SUPPORT_CAP));
    }
    let labels = system.labels().to_vec();
    let shannon = EntropyMeasure::Shannon;

    // Distinctness: conditional entropies strictly positive both ways.
    let mut pairs = 0;
    for (i, a) in labels.iter().enumerate() {
        for b in labels.iter().skip(i + 1) {
            let hb = system.query(&[*b], &[], shannon);
            let ha = system.query(&[*a], &[], shannon);
            let hab = system.query(&[*a, *b], &[], shannon);
            if hab - hb <= EPS_H || hab - ha <= EPS_H {
                return Err(PartitionError::PropertyViolation(format!(
                    "labels {} and {} are not mutually informative",
                    a.render(),
                    b.render()
                )));
            }
            pairs += 1;
        }
    }

    // Completeness: every binary function of the base variable with positive
    // entropy coincides structurally with some label.
    let mut matched = 0;
    for candidate in enumerate_partitions(n)? {
        let found = labels.iter().find(|l| {
            system.cond_is_zero_structural((&[**l], &[]), (&[candidate], &[]))
                && system.cond_is_zero_structural((&[candidate], &[]), (&[**l], &[]))
        });
        match found {
            Some(_) => matched += 1,
            None => {
                return Err(PartitionError::PropertyViolation(format!(
                    "no label matches the binary split {}",
                    candidate.render()
                )))
            }
        }
    }

    // Basis chains: order the support so the label's block comes last, then
    // condition on singletons of the middle atoms one at a time; the joint
    // support must grow at every step.
    let mut chains = Vec::with_capacity(labels.len());
    for l in &labels {
        let inside: Vec<usize> = (0..n).filter(|&a| l.contains(a)).collect();
        let outside: Vec<usize> = (0..n).filter(|&a| !l.contains(a)).collect();
        let order: Vec<usize> = outside.into_iter().chain(inside).collect();
        let chain: Vec<PartitionLabel> = order[1..n - 1]
            .iter()
            .map(|&a| PartitionLabel::indicator(a, n))
            .collect::<Result<_, _>>()?;
        let mut conditioning = vec![*l];
        let mut support = joint_support_size(system, &conditioning);
        for c in &chain {
            conditioning.push(*c);
            let next = joint_support_size(system, &conditioning);
            if next <= support {
                return Err(PartitionError::PropertyViolation(format!(
                    "chain for {} stalls at {}",
                    l.render(),
                    c.render()
                )));
            }
            support = next;
        }
        chains.push((*l, chain));
    }

    Ok(PropertyReport {
        support_size: n,
        distinct_pairs_checked: pairs,
        completeness_matched: matched,
        basis_chains: chains,
    })
}

fn joint_support_size(system: &PartitionSystem, labels: &[PartitionLabel]) -> usize {
    let mut keys: Vec<Vec<usize>> = (0..system.support_size())
        .map(|atom| system.atom_key(atom, labels, &[]))
        .collect();
    keys.sort();
    keys.dedup();
    keys.len()
}

/// Verify that per probability rank the indicator has minimal entropy among
/// the still-informative labels, and that equality happens only for
/// indicators of atoms with exactly equal mass.
pub fn check_indicator_minimality(system: &PartitionSystem) -> Result<(), PartitionError> {
    if !system.is_complete() {
        return Err(PartitionError::IncompleteSystem);
    }
    let n = system.support_size();
    let ranks = system.ranks_by_mass();
    let shannon = EntropyMeasure::Shannon;
    for i in 2..=n {
        let atom_i = ranks[i - 1];
        let ind_i = PartitionLabel::indicator(atom_i, n)?;
        let h_i = system.query(&[ind_i], &[], shannon);
        let conditioning: Vec<PartitionLabel> = ranks[i..]
            .iter()
            .map(|&a| PartitionLabel::indicator(a, n))
            .collect::<Result<_, _>>()?;
        for l in system.labels() {
            if !conditioning.is_empty()
                && system.cond_is_zero_structural((&[*l], &[]), (&conditioning, &[]))
            {
                continue;
            }
            let h_l = system.query(&[*l], &[], shannon);
            if h_i > h_l + 1e-12 {
                return Err(PartitionError::PropertyViolation(format!(
                    "rank-{i} indicator has larger entropy than {}",
                    l.render()
                )));
            }
            if (h_i - h_l).abs() <= 1e-12 {
                let ok = l.indicator_atom(n).map_or(false, |atom| {
                    system.atom_mass(atom) == system.atom_mass(atom_i)
                });
                if !ok {
                    return Err(PartitionError::PropertyViolation(format!(
                        "entropy tie at rank {i} with non-indicator {}",
                        l.render()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The entropy of each partition variable equals the binary entropy of its
/// block mass; returns the largest absolute deviation.
pub fn max_block_entropy_deviation(system: &PartitionSystem) -> f64 {
    let mut worst = 0.0f64;
    for l in system.labels() {
        let mass: Rat = (0..system.support_size())
            .filter(|&a| l.contains(a))
            .fold(Rat::zero(), |acc, a| &acc + system.atom_mass(a));
        let expected = binary_entropy(mass.to_f64()).expect("mass in [0,1]");
        let got = system.query(&[*l], &[], EntropyMeasure::Shannon);
        worst = worst.max((got - expected).abs());
    }
    worst
}
