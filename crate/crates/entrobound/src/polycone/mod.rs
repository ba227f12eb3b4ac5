//! The polymatroid outer cone and an exact rational LP engine.
//!
//! [`elemental_inequalities`] generates the minimal family of Shannon-type
//! inequalities over a ground set of `n` elements: conditional entropies
//! `h(i | rest) >= 0` and conditional mutual informations
//! `I(i; j | K) >= 0`, which together carve out exactly the polymatroid
//! cone. That family has `n + C(n,2) * 2^(n-2)` rows, so for larger ground
//! sets [`lp_solve`] activates elemental rows lazily: it solves a working
//! subsystem, checks the returned witness against all rows exactly, and
//! pulls in violated rows until either the witness survives or the working
//! subsystem is infeasible (which settles the full system too).
//!
//! Outcomes are self-certifying. A feasible program returns a rational
//! witness that is re-verified by substitution before being handed out; an
//! infeasible one returns Farkas multipliers, re-verified likewise. The
//! multiplier convention: `m_i >= 0` on `>=` rows, `m_i <= 0` on `<=` rows,
//! free on equalities, with `sum_i m_i a_i = 0` and `sum_i m_i b_i > 0`.

pub mod simplex;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ratio::Rat;
use crate::setfunc::{mask_of_labels, SetFunction};
use crate::LP_GROUND_CAP;

use simplex::{FlatRow, Outcome, Rel, Simplex, SimplexError};

#[derive(Debug, thiserror::Error)]
pub enum PolyconeError {
    #[error("ground set of {0} exceeds the cap of {1}")]
    GroundSetTooLarge(usize, usize),
    #[error("number of pivots exceeded the cap of {0}")]
    NumIterationsExceeded(u64),
    #[error("malformed program: {0}")]
    BadProgram(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// A variable of a [`LinearProgram`]: a subset coordinate of the set
/// function, or one of the named scalar extras (used for scaling factors).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKey {
    Subset(usize),
    Scalar(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

/// One linear constraint over subset/scalar variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: BTreeMap<VarKey, Rat>,
    pub relation: Relation,
    pub rhs: Rat,
    pub tag: String,
}

impl LinearConstraint {
    pub fn new(
        coeffs: impl IntoIterator<Item = (VarKey, Rat)>,
        relation: Relation,
        rhs: Rat,
        tag: &str,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in coeffs {
            if v.is_zero() {
                continue;
            }
            let entry = map.entry(k).or_insert_with(Rat::zero);
            *entry += &v;
            if entry.is_zero() {
                map.remove(&k);
            }
        }
        LinearConstraint {
            coeffs: map,
            relation,
            rhs,
            tag: tag.to_string(),
        }
    }

    /// Signed violation of the constraint at a point (positive = violated).
    pub fn violation(&self, value_of: impl Fn(VarKey) -> Rat) -> Rat {
        let mut lhs = Rat::zero();
        for (k, c) in &self.coeffs {
            let v = value_of(*k);
            if !v.is_zero() {
                lhs += &(c * &v);
            }
        }
        match self.relation {
            Relation::Ge => &self.rhs - &lhs,
            Relation::Le => &lhs - &self.rhs,
            Relation::Eq => (&lhs - &self.rhs).abs(),
        }
    }

    pub fn render(&self, ground: &[String], scalars: &[String]) -> String {
        let mut parts = Vec::new();
        for (k, c) in &self.coeffs {
            let name = match k {
                VarKey::Subset(mask) => {
                    let labels: Vec<&str> = ground
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, l)| l.as_str())
                        .collect();
                    format!("h({})", labels.join(","))
                }
                VarKey::Scalar(i) => scalars[*i].clone(),
            };
            if c == &Rat::one() {
                parts.push(format!("+ {name}"));
            } else if *c == -Rat::one() {
                parts.push(format!("- {name}"));
            } else if c.is_negative() {
                parts.push(format!("- {}*{}", c.abs(), name));
            } else {
                parts.push(format!("+ {c}*{name}"));
            }
        }
        let rel = match self.relation {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        };
        format!(
            "{} {} {}  [{}]",
            parts.join(" ").trim_start_matches("+ "),
            rel,
            self.rhs,
            self.tag
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct Objective {
    pub sense: Sense,
    pub coeffs: BTreeMap<VarKey, Rat>,
}

/// A rational-coefficient constraint system over the subsets of a ground
/// set, plus optional named scalar variables and an optional objective.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub ground: Vec<String>,
    pub scalars: Vec<String>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Option<Objective>,
}

impl LinearProgram {
    pub fn new(ground: Vec<String>) -> Self {
        LinearProgram {
            ground,
            scalars: Vec::new(),
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn full_mask(&self) -> usize {
        (1usize << self.ground.len()) - 1
    }

    pub fn mask_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize, PolyconeError> {
        mask_of_labels(&self.ground, labels)
            .map_err(|e| PolyconeError::BadProgram(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), PolyconeError> {
        let full = self.full_mask();
        let check_key = |k: &VarKey| -> Result<(), PolyconeError> {
            match k {
                VarKey::Subset(m) => {
                    if *m == 0 || *m > full {
                        return Err(PolyconeError::BadProgram(format!(
                            "subset mask {m:#x} out of range"
                        )));
                    }
                }
                VarKey::Scalar(i) => {
                    if *i >= self.scalars.len() {
                        return Err(PolyconeError::BadProgram(format!(
                            "scalar index {i} out of range"
                        )));
                    }
                }
            }
            Ok(())
        };
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.is_empty() {
                return Err(PolyconeError::BadProgram(format!(
                    "constraint {i} has no nonzero coefficients"
                )));
            }
            for k in c.coeffs.keys() {
                check_key(k)?;
            }
        }
        if let Some(obj) = &self.objective {
            for k in obj.coeffs.keys() {
                check_key(k)?;
            }
        }
        Ok(())
    }
}

/// A feasible point: the set function plus values for the scalar extras.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub sets: SetFunction<Rat>,
    pub scalars: Vec<Rat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub witness: Option<Witness>,
    /// Farkas multipliers per constraint, in constraint order.
    pub certificate: Option<Vec<Rat>>,
    pub optimum: Option<Rat>,
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    pub pivot_cap: u64,
    /// Programs with at most this many rows are solved in one shot.
    pub direct_threshold: usize,
    /// Upper bound on rows activated per lazy round.
    pub batch: usize,
    /// Row tags eligible for lazy activation.
    pub lazy_tags: Vec<String>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            pivot_cap: 10_000_000,
            direct_threshold: 320,
            batch: 256,
            lazy_tags: vec!["elemental".to_string()],
        }
    }
}

/// The elemental Shannon inequalities over a ground set of size `n`.
///
/// `h(i | everything else) >= 0` for each element, and
/// `I(i; j | K) >= 0` for each pair `i < j` and each `K` disjoint from it.
/// All rows are tagged `elemental`.
pub fn elemental_inequalities(n: usize) -> Result<Vec<LinearConstraint>, PolyconeError> {
    if n == 0 || n > LP_GROUND_CAP {
        return Err(PolyconeError::GroundSetTooLarge(n, LP_GROUND_CAP));
    }
    let full = (1usize << n) - 1;
    let mut rows = Vec::new();
    for i in 0..n {
        // h(full) - h(full \ i) >= 0
        let mut coeffs = vec![(VarKey::Subset(full), Rat::one())];
        let rest = full & !(1 << i);
        if rest != 0 {
            coeffs.push((VarKey::Subset(rest), -Rat::one()));
        }
        rows.push(LinearConstraint::new(
            coeffs,
            Relation::Ge,
            Rat::zero(),
            "elemental",
        ));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            for pick in 0..(1usize << others.len()) {
                let mut k_mask = 0usize;
                for (b, &el) in others.iter().enumerate() {
                    if pick & (1 << b) != 0 {
                        k_mask |= 1 << el;
                    }
                }
                // h(iK) + h(jK) - h(K) - h(ijK) >= 0
                let mut coeffs = vec![
                    (VarKey::Subset(k_mask | (1 << i)), Rat::one()),
                    (VarKey::Subset(k_mask | (1 << j)), Rat::one()),
                    (
                        VarKey::Subset(k_mask | (1 << i) | (1 << j)),
                        -Rat::one(),
                    ),
                ];
                if k_mask != 0 {
                    coeffs.push((VarKey::Subset(k_mask), -Rat::one()));
                }
                rows.push(LinearConstraint::new(
                    coeffs,
                    Relation::Ge,
                    Rat::zero(),
                    "elemental",
                ));
            }
        }
    }
    Ok(rows)
}

/// Number of elemental rows for ground size `n`.
pub fn elemental_count(n: usize) -> usize {
    if n < 2 {
        n
    } else {
        n + n * (n - 1) / 2 * (1usize << (n - 2))
    }
}

struct ColMap {
    cols: Vec<VarKey>,
    of_mask: HashMap<usize, usize>,
    of_scalar: Vec<Option<usize>>,
}

impl ColMap {
    fn new(scalar_count: usize) -> Self {
        ColMap {
            cols: Vec::new(),
            of_mask: HashMap::new(),
            of_scalar: vec![None; scalar_count],
        }
    }

    fn get(&self, key: VarKey) -> Option<usize> {
        match key {
            VarKey::Subset(m) => self.of_mask.get(&m).copied(),
            VarKey::Scalar(i) => self.of_scalar[i],
        }
    }

    fn intern(&mut self, key: VarKey) -> usize {
        if let Some(c) = self.get(key) {
            return c;
        }
        let c = self.cols.len();
        self.cols.push(key);
        match key {
            VarKey::Subset(m) => {
                self.of_mask.insert(m, c);
            }
            VarKey::Scalar(i) => self.of_scalar[i] = Some(c),
        }
        c
    }
}

fn to_flat(c: &LinearConstraint, map: &mut ColMap) -> FlatRow {
    let coeffs = c
        .coeffs
        .iter()
        .map(|(k, v)| (map.intern(*k), v.clone()))
        .collect();
    let rel = match c.relation {
        Relation::Ge => Rel::Ge,
        Relation::Le => Rel::Le,
        Relation::Eq => Rel::Eq,
    };
    FlatRow {
        coeffs,
        rel,
        rhs: c.rhs.clone(),
    }
}

/// Solve with default options.
pub fn lp_solve(program: &LinearProgram) -> Result<LpOutcome, PolyconeError> {
    lp_solve_opts(program, &LpOptions::default())
}

/// Exact feasibility / optimization with lazy activation of tagged rows.
pub fn lp_solve_opts(
    program: &LinearProgram,
    opts: &LpOptions,
) -> Result<LpOutcome, PolyconeError> {
    program.validate()?;
    let minimize: Option<BTreeMap<VarKey, Rat>> = program.objective.as_ref().map(|o| {
        match o.sense {
            Sense::Minimize => o.coeffs.clone(),
            Sense::Maximize => o.coeffs.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    });

    let lazy_ok = program.constraints.len() > opts.direct_threshold;
    let mut active: Vec<usize> = Vec::new();
    let mut inactive: Vec<usize> = Vec::new();
    for (i, c) in program.constraints.iter().enumerate() {
        if lazy_ok && opts.lazy_tags.iter().any(|t| *t == c.tag) {
            inactive.push(i);
        } else {
            active.push(i);
        }
    }

    let mut map = ColMap::new(program.scalars.len());
    if let Some(obj) = &minimize {
        for k in obj.keys() {
            map.intern(*k);
        }
    }
    let mut budget = opts.pivot_cap;
    let mut smp: Option<Simplex> = None;
    // rows added to the current solver, in order, as indices into program.constraints
    let mut solver_rows: Vec<usize> = Vec::new();
    let mut pending: Vec<usize> = active.clone();

    loop {
        let fresh = smp.is_none();
        if fresh {
            // (Re)build: intern pending rows' columns first so the column
            // space is stable, then feed the rows in order.
            let all: Vec<usize> = solver_rows.iter().chain(pending.iter()).copied().collect();
            for &i in &all {
                for k in program.constraints[i].coeffs.keys() {
                    map.intern(*k);
                }
            }
            let mut s = Simplex::new(map.cols.len(), budget);
            if let Some(obj) = &minimize {
                let coeffs: Vec<(usize, Rat)> = obj
                    .iter()
                    .map(|(k, v)| (map.get(*k).expect("interned"), v.clone()))
                    .collect();
                s.set_objective(&coeffs);
            }
            solver_rows = Vec::new();
            for &i in &all {
                let row = to_flat(&program.constraints[i], &mut map);
                s.add_row(&row);
                solver_rows.push(i);
            }
            pending.clear();
            smp = Some(s);
        } else if !pending.is_empty() {
            for &i in &pending {
                for k in program.constraints[i].coeffs.keys() {
                    map.intern(*k);
                }
            }
            let s = smp.as_mut().unwrap();
            s.ensure_struct_cols(map.cols.len());
            for &i in &pending {
                let row = to_flat(&program.constraints[i], &mut map);
                s.add_row(&row);
                solver_rows.push(i);
            }
            pending.clear();
        }

        let s = smp.as_mut().unwrap();
        let trace = std::env::var_os("ENTROBOUND_LP_TRACE").is_some();
        if trace {
            eprintln!(
                "[lp] solving: {} active rows, {} cols, {} pivots so far",
                solver_rows.len(),
                map.cols.len(),
                s.pivots()
            );
        }
        let outcome = s.solve().map_err(|e| match e {
            SimplexError::PivotLimit(c) => PolyconeError::NumIterationsExceeded(c),
        })?;
        budget = opts.pivot_cap.saturating_sub(s.pivots());
        if trace {
            let label = match &outcome {
                Outcome::Optimal { .. } => "optimal",
                Outcome::Infeasible { .. } => "infeasible",
                Outcome::Unbounded { .. } => "unbounded",
            };
            eprintln!("[lp] {} after {} pivots", label, s.pivots());
        }

        match outcome {
            Outcome::Infeasible { farkas } => {
                let mut cert = vec![Rat::zero(); program.constraints.len()];
                for (slot, &orig) in solver_rows.iter().enumerate() {
                    cert[orig] = farkas[slot].clone();
                }
                if !verify_certificate(program, &cert) {
                    return Err(PolyconeError::Internal(
                        "Farkas certificate failed substitution check".into(),
                    ));
                }
                return Ok(LpOutcome {
                    status: LpStatus::Infeasible,
                    witness: None,
                    certificate: Some(cert),
                    optimum: None,
                });
            }
            Outcome::Optimal { x, objective } => {
                let value_of = |k: VarKey| -> Rat {
                    map.get(k)
                        .and_then(|c| x.get(c).cloned())
                        .unwrap_or_else(Rat::zero)
                };
                let violated = collect_violated(program, &inactive, &solver_rows, value_of);
                if violated.is_empty() {
                    let witness = expand_witness(program, &map, &x);
                    if !verify_witness(program, &witness)? {
                        return Err(PolyconeError::Internal(
                            "witness failed substitution check".into(),
                        ));
                    }
                    let optimum = program.objective.as_ref().map(|o| match o.sense {
                        Sense::Minimize => objective.clone(),
                        Sense::Maximize => -&objective,
                    });
                    return Ok(LpOutcome {
                        status: LpStatus::Feasible,
                        witness: Some(witness),
                        certificate: None,
                        optimum,
                    });
                }
                pending = violated.into_iter().take(opts.batch).collect();
            }
            Outcome::Unbounded { x, ray } => {
                // A ray is only truly unbounded if no relaxed-out row blocks it.
                let ray_of = |k: VarKey| -> Rat {
                    map.get(k)
                        .and_then(|c| ray.get(c).cloned())
                        .unwrap_or_else(Rat::zero)
                };
                let blocking: Vec<usize> = inactive
                    .iter()
                    .copied()
                    .filter(|i| !solver_rows.contains(i))
                    .filter(|&i| {
                        let c = &program.constraints[i];
                        let mut along = Rat::zero();
                        for (k, coef) in &c.coeffs {
                            let v = ray_of(*k);
                            if !v.is_zero() {
                                along += &(coef * &v);
                            }
                        }
                        match c.relation {
                            Relation::Ge => along.is_negative(),
                            Relation::Le => along.is_positive(),
                            Relation::Eq => !along.is_zero(),
                        }
                    })
                    .collect();
                if blocking.is_empty() {
                    let witness = expand_witness(program, &map, &x);
                    return Ok(LpOutcome {
                        status: LpStatus::Unbounded,
                        witness: Some(witness),
                        certificate: None,
                        optimum: None,
                    });
                }
                pending = blocking.into_iter().take(opts.batch).collect();
                // The tableau is not dual-feasible after an unbounded
                // detection; rebuild from scratch with the enlarged set.
                let keep: Vec<usize> = solver_rows.drain(..).chain(pending.drain(..)).collect();
                pending = keep;
                smp = None;
            }
        }
    }
}

fn collect_violated(
    program: &LinearProgram,
    inactive: &[usize],
    already: &[usize],
    value_of: impl Fn(VarKey) -> Rat,
) -> Vec<usize> {
    let mut scored: Vec<(usize, Rat)> = inactive
        .iter()
        .copied()
        .filter(|i| !already.contains(i))
        .filter_map(|i| {
            let v = program.constraints[i].violation(&value_of);
            if v.is_positive() {
                Some((i, v))
            } else {
                None
            }
        })
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().map(|(i, _)| i).collect()
}

fn expand_witness(program: &LinearProgram, map: &ColMap, x: &[Rat]) -> Witness {
    let mut sets = SetFunction::<Rat>::zeroes(program.ground.clone());
    for mask in 1..=program.full_mask() {
        if let Some(c) = map.of_mask.get(&mask) {
            if let Some(v) = x.get(*c) {
                sets.set(mask, v.clone()).expect("mask in range");
            }
        }
    }
    let scalars = (0..program.scalars.len())
        .map(|i| {
            map.of_scalar[i]
                .and_then(|c| x.get(c).cloned())
                .unwrap_or_else(Rat::zero)
        })
        .collect();
    Witness { sets, scalars }
}

/// Exact witness check: every constraint must hold in rational arithmetic.
pub fn verify_witness(program: &LinearProgram, w: &Witness) -> Result<bool, PolyconeError> {
    if w.sets.ground() != program.ground.as_slice() {
        return Err(PolyconeError::DimensionMismatch(
            "witness ground set differs from program ground set".into(),
        ));
    }
    if w.scalars.len() != program.scalars.len() {
        return Err(PolyconeError::DimensionMismatch(
            "witness scalar count differs from program".into(),
        ));
    }
    let value_of = |k: VarKey| -> Rat {
        match k {
            VarKey::Subset(m) => w.sets.get(m).cloned().unwrap_or_else(|_| Rat::zero()),
            VarKey::Scalar(i) => w.scalars[i].clone(),
        }
    };
    Ok(program
        .constraints
        .iter()
        .all(|c| !c.violation(value_of).is_positive()))
}

/// Float witness check within an absolute tolerance (default callers use 1e-9).
pub fn verify_witness_f64(
    program: &LinearProgram,
    sets: &SetFunction<f64>,
    scalars: &[f64],
    tol: f64,
) -> Result<bool, PolyconeError> {
    if sets.ground() != program.ground.as_slice() {
        return Err(PolyconeError::DimensionMismatch(
            "witness ground set differs from program ground set".into(),
        ));
    }
    if scalars.len() != program.scalars.len() {
        return Err(PolyconeError::DimensionMismatch(
            "witness scalar count differs from program".into(),
        ));
    }
    for c in &program.constraints {
        let mut lhs = 0.0f64;
        for (k, coef) in &c.coeffs {
            let v = match k {
                VarKey::Subset(m) => *sets.get(*m).unwrap_or(&0.0),
                VarKey::Scalar(i) => scalars[*i],
            };
            lhs += coef.to_f64() * v;
        }
        let rhs = c.rhs.to_f64();
        let ok = match c.relation {
            Relation::Ge => lhs >= rhs - tol,
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Check Farkas multipliers by substitution: signs respected, the combined
/// left side vanishes, and the combined right side is positive.
pub fn verify_certificate(program: &LinearProgram, mult: &[Rat]) -> bool {
    if mult.len() != program.constraints.len() {
        return false;
    }
    let mut combo: BTreeMap<VarKey, Rat> = BTreeMap::new();
    let mut rhs = Rat::zero();
    for (c, m) in program.constraints.iter().zip(mult) {
        if m.is_zero() {
            continue;
        }
        match c.relation {
            Relation::Ge => {
                if m.is_negative() {
                    return false;
                }
            }
            Relation::Le => {
                if m.is_positive() {
                    return false;
                }
            }
            Relation::Eq => {}
        }
        for (k, coef) in &c.coeffs {
            let entry = combo.entry(*k).or_insert_with(Rat::zero);
            *entry += &(coef * m);
        }
        rhs += &(&c.rhs * m);
    }
    combo.values().all(Rat::is_zero) && rhs.is_positive()
}

// ---------------------------------------------------------------------------
// JSON dump/load
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoeffFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    subset: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalar: Option<String>,
    c: Rat,
}

#[derive(Serialize, Deserialize)]
struct ConstraintFile {
    coeffs: Vec<CoeffFile>,
    rel: Relation,
    rhs: Rat,
    tag: String,
}

#[derive(Serialize, Deserialize)]
struct ObjectiveFile {
    sense: Sense,
    coeffs: Vec<CoeffFile>,
}

/// On-disk form of a linear program. Subsets are written as label lists.
#[derive(Serialize, Deserialize)]
pub struct LpFile {
    ground: Vec<String>,
    #[serde(default)]
    scalars: Vec<String>,
    constraints: Vec<ConstraintFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<ObjectiveFile>,
}

pub fn program_to_json(p: &LinearProgram) -> String {
    let key_out = |k: &VarKey, c: &Rat| -> CoeffFile {
        match k {
            VarKey::Subset(mask) => CoeffFile {
                subset: Some(
                    p.ground
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, l)| l.clone())
                        .collect(),
                ),
                scalar: None,
                c: c.clone(),
            },
            VarKey::Scalar(i) => CoeffFile {
                subset: None,
                scalar: Some(p.scalars[*i].clone()),
                c: c.clone(),
            },
        }
    };
    let file = LpFile {
        ground: p.ground.clone(),
        scalars: p.scalars.clone(),
        constraints: p
            .constraints
            .iter()
            .map(|c| ConstraintFile {
                coeffs: c.coeffs.iter().map(|(k, v)| key_out(k, v)).collect(),
                rel: c.relation,
                rhs: c.rhs.clone(),
                tag: c.tag.clone(),
            })
            .collect(),
        objective: p.objective.as_ref().map(|o| ObjectiveFile {
            sense: o.sense,
            coeffs: o.coeffs.iter().map(|(k, v)| key_out(k, v)).collect(),
        }),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn program_from_json(s: &str) -> Result<LinearProgram, PolyconeError> {
    let file: LpFile =
        serde_json::from_str(s).map_err(|e| PolyconeError::BadProgram(e.to_string()))?;
    let mut p = LinearProgram::new(file.ground);
    p.scalars = file.scalars;
    let key_in = |cf: &CoeffFile, p: &LinearProgram| -> Result<VarKey, PolyconeError> {
        match (&cf.subset, &cf.scalar) {
            (Some(labels), None) => Ok(VarKey::Subset(p.mask_of(labels)?)),
            (None, Some(name)) => {
                let i = p
                    .scalars
                    .iter()
                    .position(|s| s == name)
                    .ok_or_else(|| PolyconeError::BadProgram(format!("unknown scalar {name}")))?;
                Ok(VarKey::Scalar(i))
            }
            _ => Err(PolyconeError::BadProgram(
                "coefficient must name exactly one of subset/scalar".into(),
            )),
        }
    };
    for cf in &file.constraints {
        let mut coeffs = Vec::new();
        for co in &cf.coeffs {
            coeffs.push((key_in(co, &p)?, co.c.clone()));
        }
        p.constraints
            .push(LinearConstraint::new(coeffs, cf.rel, cf.rhs.clone(), &cf.tag));
    }
    if let Some(of) = &file.objective {
        let mut coeffs = BTreeMap::new();
        for co in &of.coeffs {
            coeffs.insert(key_in(co, &p)?, co.c.clone());
        }
        p.objective = Some(Objective {
            sense: of.sense,
            coeffs,
        });
    }
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn x() -> VarKey {
        VarKey::Subset(1)
    }

    #[test]
    fn elemental_counts() {
        assert_eq!(elemental_inequalities(1).unwrap().len(), 1);
        assert_eq!(elemental_inequalities(2).unwrap().len(), 3);
        assert_eq!(elemental_inequalities(3).unwrap().len(), 9);
        for n in 1..=6 {
            assert_eq!(elemental_inequalities(n).unwrap().len(), elemental_count(n));
        }
        assert!(elemental_inequalities(13).is_err());
    }

    #[test]
    fn trivially_infeasible_pair() {
        let mut p = LinearProgram::new(vec!["x".into()]);
        p.constraints.push(LinearConstraint::new(
            [(x(), Rat::one())],
            Relation::Ge,
            Rat::one(),
            "row0",
        ));
        p.constraints.push(LinearConstraint::new(
            [(x(), Rat::one())],
            Relation::Le,
            Rat::zero(),
            "row1",
        ));
        let out = lp_solve(&p).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        let cert = out.certificate.unwrap();
        assert!(cert[0].is_positive());
        assert!(cert[1].is_negative());
        assert!(verify_certificate(&p, &cert));
    }

    #[test]
    fn minimize_simple() {
        let mut p = LinearProgram::new(vec!["x".into()]);
        p.constraints.push(LinearConstraint::new(
            [(x(), Rat::one())],
            Relation::Ge,
            Rat::one(),
            "bound",
        ));
        p.objective = Some(Objective {
            sense: Sense::Minimize,
            coeffs: [(x(), Rat::one())].into_iter().collect(),
        });
        let out = lp_solve(&p).unwrap();
        assert_eq!(out.status, LpStatus::Feasible);
        assert_eq!(out.optimum, Some(Rat::one()));
        let w = out.witness.unwrap();
        assert_eq!(w.sets.get(1).unwrap(), &Rat::one());
    }

    #[test]
    fn maximize_unbounded() {
        let mut p = LinearProgram::new(vec!["x".into()]);
        p.constraints.push(LinearConstraint::new(
            [(x(), Rat::one())],
            Relation::Ge,
            Rat::zero(),
            "bound",
        ));
        p.objective = Some(Objective {
            sense: Sense::Maximize,
            coeffs: [(x(), Rat::one())].into_iter().collect(),
        });
        let out = lp_solve(&p).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_degenerate_rows() {
        // x + y = 2, x - y = 0, x <= 1  => x = y = 1, binding capacity.
        let kx = VarKey::Subset(0b01);
        let ky = VarKey::Subset(0b10);
        let mut p = LinearProgram::new(vec!["x".into(), "y".into()]);
        p.constraints.push(LinearConstraint::new(
            [(kx, r("1")), (ky, r("1"))],
            Relation::Eq,
            r("2"),
            "sum",
        ));
        p.constraints.push(LinearConstraint::new(
            [(kx, r("1")), (ky, r("-1"))],
            Relation::Eq,
            r("0"),
            "diff",
        ));
        p.constraints.push(LinearConstraint::new(
            [(kx, r("1"))],
            Relation::Le,
            r("1"),
            "cap",
        ));
        let out = lp_solve(&p).unwrap();
        assert_eq!(out.status, LpStatus::Feasible);
        let w = out.witness.unwrap();
        assert_eq!(w.sets.get(0b01).unwrap(), &r("1"));
        assert_eq!(w.sets.get(0b10).unwrap(), &r("1"));
    }

    #[test]
    fn zero_function_satisfies_elementals() {
        let mut p = LinearProgram::new(vec!["a".into(), "b".into(), "c".into()]);
        p.constraints = elemental_inequalities(3).unwrap();
        let w = Witness {
            sets: SetFunction::<Rat>::zeroes(p.ground.clone()),
            scalars: vec![],
        };
        assert!(verify_witness(&p, &w).unwrap());
    }

    #[test]
    fn solve_is_deterministic() {
        let mut p = LinearProgram::new(vec!["a".into(), "b".into(), "c".into()]);
        p.constraints = elemental_inequalities(3).unwrap();
        p.constraints.push(LinearConstraint::new(
            [(VarKey::Subset(0b111), Rat::one())],
            Relation::Ge,
            r("2"),
            "floor",
        ));
        p.objective = Some(Objective {
            sense: Sense::Minimize,
            coeffs: [(VarKey::Subset(0b111), Rat::one())].into_iter().collect(),
        });
        let a = lp_solve(&p).unwrap();
        let b = lp_solve(&p).unwrap();
        assert_eq!(a.optimum, b.optimum);
        assert_eq!(a.witness.unwrap(), b.witness.unwrap());
    }

    #[test]
    fn json_round_trip() {
        let mut p = LinearProgram::new(vec!["s1".into(), "e1".into()]);
        p.scalars.push("t".into());
        p.constraints.push(LinearConstraint::new(
            [
                (VarKey::Subset(0b10), r("1")),
                (VarKey::Scalar(0), r("-1/2")),
            ],
            Relation::Le,
            r("0"),
            "capacity",
        ));
        p.objective = Some(Objective {
            sense: Sense::Minimize,
            coeffs: [(VarKey::Scalar(0), r("1"))].into_iter().collect(),
        });
        let s = program_to_json(&p);
        let back = program_from_json(&s).unwrap();
        assert_eq!(back.constraints, p.constraints);
        assert_eq!(back.scalars, p.scalars);
    }
}
