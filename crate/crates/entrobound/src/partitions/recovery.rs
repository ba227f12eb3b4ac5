//! Recovery of a distribution from an entropy oracle over its partition
//! variables.
//!
//! Scalar case: walk the probability ranks from the smallest mass upward.
//! At each rank the indicator of that rank is a minimum-entropy label among
//! those still informative given the indicators already identified; the
//! final rank is the unique label not determined by any proper subfamily of
//! the others. Atom masses then come from inverting the binary measure
//! entropy on the indicator entropies, with the top mass recovered as the
//! complement of the rest.
//!
//! Vector case: after scalar recovery, two atoms share the value of
//! coordinate `m` exactly when no label that is a function of that
//! coordinate separates them, so the coordinate's value classes are the
//! common refinement of the splits of all such labels. Fresh alphabets are
//! the class ids; the result equals the hidden joint up to one bijection
//! per coordinate.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::probdist::{invert_binary_measure, JointDistribution};
use crate::{EPS_H, RECOVERY_SUPPORT_CAP};

use super::oracle::EntropyOracle;
use super::{PartitionError, PartitionLabel};

/// Scalar recovery result: masses indexed by probability rank (rank 1 =
/// largest), plus the identified indicator handles when the support has at
/// least three atoms.
#[derive(Clone, Debug)]
pub struct RecoveredScalar {
    masses_by_rank: Vec<f64>,
    pub indicators: Option<BTreeMap<usize, PartitionLabel>>,
}

impl RecoveredScalar {
    /// Masses in decreasing order.
    pub fn multiset(&self) -> Vec<f64> {
        let mut m = self.masses_by_rank.clone();
        m.sort_by(|a, b| b.partial_cmp(a).unwrap());
        m
    }

    pub fn mass_of_rank(&self, rank: usize) -> f64 {
        self.masses_by_rank[rank - 1]
    }

    pub fn support_size(&self) -> usize {
        self.masses_by_rank.len()
    }
}

/// Vector recovery result: a joint distribution over fresh per-coordinate
/// alphabets (class ids).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveredVector {
    pub num_coords: usize,
    pub class_counts: Vec<usize>,
    /// (per-coordinate class ids, mass), one entry per support atom.
    pub atoms: Vec<(Vec<usize>, f64)>,
}

/// Identify, for every probability rank, the oracle handle that indicates
/// the atom of that rank.
pub fn find_indicators<O: EntropyOracle + ?Sized>(
    oracle: &O,
) -> Result<BTreeMap<usize, PartitionLabel>, PartitionError> {
    let n = oracle.support_size();
    if n < 3 {
        return Err(PartitionError::SupportTooSmall(n));
    }
    if n > RECOVERY_SUPPORT_CAP {
        return Err(PartitionError::SupportTooLarge(n, RECOVERY_SUPPORT_CAP));
    }
    let labels = oracle.labels().to_vec();
    let expected = (1usize << (n - 1)) - 1;
    if labels.len() != expected {
        return Err(PartitionError::InconsistentOracle(format!(
            "oracle presents {} labels, a support of {n} needs {expected}",
            labels.len()
        )));
    }
    let mut identified: BTreeMap<usize, PartitionLabel> = BTreeMap::new();
    for rank in (2..=n).rev() {
        let conditioning: Vec<PartitionLabel> = identified.values().copied().collect();
        let mut best: Option<(f64, PartitionLabel)> = None;
        for l in &labels {
            if identified.values().any(|k| k == l) {
                continue;
            }
            if oracle.cond_is_zero((&[*l], &[]), (&conditioning, &[]))? {
                continue;
            }
            let h = oracle.query(&[*l], &[])?;
            if h <= EPS_H {
                continue;
            }
            match &best {
                Some((bh, bl)) if h > bh - 1e-12 && (h >= bh + 1e-12 || *bl < *l) => {}
                _ => best = Some((h, *l)),
            }
        }
        let Some((_, chosen)) = best else {
            return Err(PartitionError::InconsistentOracle(format!(
                "no informative candidate at rank {rank}"
            )));
        };
        identified.insert(rank, chosen);
    }
    // The remaining indicator is the unique label not determined by any
    // proper subfamily of the identified ones.
    let others: Vec<PartitionLabel> = identified.values().copied().collect();
    let mut top: Option<PartitionLabel> = None;
    'cand: for l in &labels {
        if identified.values().any(|k| k == l) {
            continue;
        }
        for drop in 0..others.len() {
            let sub: Vec<PartitionLabel> = others
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, k)| *k)
                .collect();
            if oracle.cond_is_zero((&[*l], &[]), (&sub, &[]))? {
                continue 'cand;
            }
        }
        if top.is_some() {
            return Err(PartitionError::InconsistentOracle(
                "several candidates qualify as the top-rank indicator".to_string(),
            ));
        }
        top = Some(*l);
    }
    let Some(top) = top else {
        return Err(PartitionError::InconsistentOracle(
            "no candidate qualifies as the top-rank indicator".to_string(),
        ));
    };
    identified.insert(1, top);
    Ok(identified)
}

/// Recover the multiset of probability masses of the hidden scalar.
pub fn recover_scalar<O: EntropyOracle + ?Sized>(
    oracle: &O,
) -> Result<RecoveredScalar, PartitionError> {
    let n = oracle.support_size();
    if n < 2 {
        return Err(PartitionError::SupportTooSmall(n));
    }
    if n > RECOVERY_SUPPORT_CAP {
        return Err(PartitionError::SupportTooLarge(n, RECOVERY_SUPPORT_CAP));
    }
    let measure = oracle.measure();
    if n == 2 {
        // A single split; its entropy pins the smaller mass directly.
        let labels = oracle.labels();
        if labels.len() != 1 {
            return Err(PartitionError::InconsistentOracle(format!(
                "support 2 needs exactly one label, got {}",
                labels.len()
            )));
        }
        let h = oracle.query(&[labels[0]], &[])?;
        let p = invert_binary_measure(measure, h)?;
        return Ok(RecoveredScalar {
            masses_by_rank: vec![1.0 - p, p],
            indicators: None,
        });
    }
    let indicators = find_indicators(oracle)?;
    let mut masses = vec![0.0f64; n];
    let mut rest = 0.0f64;
    for rank in 2..=n {
        let h = oracle.query(&[indicators[&rank]], &[])?;
        let p = invert_binary_measure(measure, h)
            .map_err(|e| PartitionError::InconsistentOracle(e.to_string()))?;
        masses[rank - 1] = p;
        rest += p;
    }
    // The top mass may exceed 1/2, where the binary measure is not
    // invertible; it is pinned by the complement instead.
    let top = 1.0 - rest;
    if !(-1e-9..=1.0 + 1e-9).contains(&top) {
        return Err(PartitionError::NonDistribution(format!(
            "complement mass {top} outside [0, 1]"
        )));
    }
    masses[0] = top.clamp(0.0, 1.0);
    Ok(RecoveredScalar {
        masses_by_rank: masses,
        indicators: Some(indicators),
    })
}

/// Recover the joint distribution of the hidden vector up to one bijection
/// per coordinate.
pub fn recover_vector<O: EntropyOracle + ?Sized>(
    oracle: &O,
) -> Result<RecoveredVector, PartitionError> {
    let n = oracle.support_size();
    let coords = oracle.num_coords();
    let measure = oracle.measure();
    if n == 1 {
        return Ok(RecoveredVector {
            num_coords: coords,
            class_counts: vec![1; coords],
            atoms: vec![(vec![0; coords], 1.0)],
        });
    }
    if n == 2 {
        // Each coordinate either distinguishes the two atoms or is constant.
        let scalar = recover_scalar(oracle)?;
        let mut class_counts = Vec::with_capacity(coords);
        let mut a0 = Vec::with_capacity(coords);
        let mut a1 = Vec::with_capacity(coords);
        for m in 0..coords {
            let hm = oracle.query(&[], &[m])?;
            if hm > EPS_H {
                class_counts.push(2);
                a0.push(0);
                a1.push(1);
            } else {
                class_counts.push(1);
                a0.push(0);
                a1.push(0);
            }
        }
        return Ok(RecoveredVector {
            num_coords: coords,
            class_counts,
            atoms: vec![
                (a0, scalar.mass_of_rank(1)),
                (a1, scalar.mass_of_rank(2)),
            ],
        });
    }

    let scalar = recover_scalar(oracle)?;
    let indicators = scalar
        .indicators
        .clone()
        .expect("support >= 3 always identifies indicators");

    // Side of a label for a pair of ranks: two atoms lie on the same side
    // exactly when the label is determined by the indicators of all other
    // ranks.
    let ind_of_rank: Vec<PartitionLabel> = (1..=n).map(|r| indicators[&r]).collect();
    let mut side_cache: HashMap<PartitionLabel, u32> = HashMap::new();
    let mut rank_block = |oracle: &O, l: PartitionLabel| -> Result<u32, PartitionError> {
        if let Some(b) = side_cache.get(&l) {
            return Ok(*b);
        }
        let mut block = 1u32; // rank 1 is the reference side
        for r in 2..=n {
            let rest: Vec<PartitionLabel> = (1..=n)
                .filter(|&k| k != 1 && k != r)
                .map(|k| ind_of_rank[k - 1])
                .collect();
            if oracle.cond_is_zero((&[l], &[]), (&rest, &[]))? {
                block |= 1 << (r - 1);
            }
        }
        side_cache.insert(l, block);
        Ok(block)
    };

    let full: u32 = ((1u64 << n) - 1) as u32;
    let mut class_counts = Vec::with_capacity(coords);
    let mut class_of_rank: Vec<Vec<usize>> = Vec::with_capacity(coords);
    for m in 0..coords {
        let mut splitters: Vec<u32> = Vec::new();
        for l in oracle.labels() {
            if oracle.cond_is_zero((&[*l], &[]), (&[], &[m]))? {
                splitters.push(rank_block(oracle, *l)?);
            }
        }
        // Common refinement of the splits: group ranks by their side vector.
        let mut key_of_rank: Vec<Vec<bool>> = Vec::with_capacity(n);
        for r in 1..=n {
            key_of_rank.push(
                splitters
                    .iter()
                    .map(|b| b & (1 << (r - 1)) != 0)
                    .collect(),
            );
        }
        let mut classes: Vec<(Vec<bool>, u32)> = Vec::new();
        let mut ids = vec![usize::MAX; n];
        for r in 1..=n {
            let key = &key_of_rank[r - 1];
            match classes.iter().position(|(k, _)| k == key) {
                Some(i) => {
                    classes[i].1 |= 1 << (r - 1);
                    ids[r - 1] = i;
                }
                None => {
                    ids[r - 1] = classes.len();
                    classes.push((key.clone(), 1 << (r - 1)));
                }
            }
        }
        // Each proper class must itself be a zero-conditional-entropy split;
        // otherwise the oracle's coordinate structure does not factor.
        for (_, members) in &classes {
            if *members == full {
                continue;
            }
            let realized = splitters
                .iter()
                .any(|b| *b == *members || *b == (!members & full));
            if !realized {
                return Err(PartitionError::NonFactorizableCoordinates(format!(
                    "coordinate {m}: class {members:#b} is not a splitter block"
                )));
            }
        }
        // Cross-check the coordinate entropy against the class masses.
        let mut class_masses = vec![0.0f64; classes.len()];
        for r in 1..=n {
            class_masses[ids[r - 1]] += scalar.mass_of_rank(r);
        }
        let hm = oracle.query(&[], &[m])?;
        if (measure.of_masses(&class_masses) - hm).abs() > 1e-6 {
            return Err(PartitionError::InconsistentOracle(format!(
                "coordinate {m} entropy does not match its recovered classes"
            )));
        }
        class_counts.push(classes.len());
        class_of_rank.push(ids);
    }

    let atoms = (1..=n)
        .map(|r| {
            let outcome: Vec<usize> = (0..coords).map(|m| class_of_rank[m][r - 1]).collect();
            (outcome, scalar.mass_of_rank(r))
        })
        .collect();
    Ok(RecoveredVector {
        num_coords: coords,
        class_counts,
        atoms,
    })
}

impl RecoveredVector {
    /// Search for per-coordinate bijections aligning this result with a
    /// reference distribution; returns the coordinate maps (recovered class
    /// id -> reference symbol index) if the distributions match within
    /// `tol` per atom.
    pub fn isomorphic_to(
        &self,
        reference: &JointDistribution,
        tol: f64,
    ) -> Option<Vec<Vec<usize>>> {
        if reference.num_variables() != self.num_coords {
            return None;
        }
        let ref_atoms: Vec<(Vec<usize>, f64)> = reference
            .support()
            .map(|(o, p)| (o.clone(), p.to_f64()))
            .collect();
        if ref_atoms.len() != self.atoms.len() {
            return None;
        }
        let m = self.num_coords;
        // maps[c][class] = Some(symbol idx)
        let mut maps: Vec<Vec<Option<usize>>> =
            self.class_counts.iter().map(|&k| vec![None; k]).collect();
        let mut used: Vec<Vec<bool>> = (0..m)
            .map(|c| vec![false; reference.alphabet(c).len()])
            .collect();
        let mut taken = vec![false; ref_atoms.len()];

        fn assign(
            rec: &RecoveredVector,
            ref_atoms: &[(Vec<usize>, f64)],
            maps: &mut Vec<Vec<Option<usize>>>,
            used: &mut Vec<Vec<bool>>,
            taken: &mut Vec<bool>,
            i: usize,
            tol: f64,
        ) -> bool {
            if i == rec.atoms.len() {
                return true;
            }
            let (outcome, mass) = &rec.atoms[i];
            for (j, (ref_outcome, ref_mass)) in ref_atoms.iter().enumerate() {
                if taken[j] || (mass - ref_mass).abs() > tol {
                    continue;
                }
                // tentatively extend the per-coordinate maps
                let mut touched = Vec::new();
                let mut ok = true;
                for c in 0..rec.num_coords {
                    let class = outcome[c];
                    let sym = ref_outcome[c];
                    match maps[c][class] {
                        Some(s) if s == sym => {}
                        Some(_) => {
                            ok = false;
                            break;
                        }
                        None => {
                            if used[c][sym] {
                                ok = false;
                                break;
                            }
                            maps[c][class] = Some(sym);
                            used[c][sym] = true;
                            touched.push((c, class, sym));
                        }
                    }
                }
                if ok {
                    taken[j] = true;
                    if assign(rec, ref_atoms, maps, used, taken, i + 1, tol) {
                        return true;
                    }
                    taken[j] = false;
                }
                for (c, class, sym) in touched {
                    maps[c][class] = None;
                    used[c][sym] = false;
                }
            }
            false
        }

        if assign(
            self,
            &ref_atoms,
            &mut maps,
            &mut used,
            &mut taken,
            0,
            tol,
        ) {
            Some(
                maps.into_iter()
                    .map(|m| m.into_iter().map(|s| s.unwrap_or(usize::MAX)).collect())
                    .collect(),
            )
        } else {
            None
        }
    }
}
