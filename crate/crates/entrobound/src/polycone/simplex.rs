//! Exact-rational simplex over free structural variables.
//!
//! The tableau keeps every number as a [`Rat`]. Structural variables are
//! unrestricted in sign (set-function coordinates), slack and artificial
//! columns are nonnegative. Phase 1 minimizes the artificial sum; an
//! optimum above zero yields Farkas multipliers read off the initial unit
//! columns. After a solve, further rows may be appended and the solver
//! restores feasibility with dual pivots instead of starting over, which is
//! what makes lazy generation of the large elemental families affordable.
//!
//! Pivot selection is Dantzig's rule until the objective stalls on
//! degenerate pivots, then Bland's rule permanently, so every run
//! terminates and runs are deterministic.

use crate::ratio::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Le,
    Eq,
}

/// A row in solver coordinates: sparse structural coefficients.
#[derive(Clone, Debug)]
pub struct FlatRow {
    pub coeffs: Vec<(usize, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
}

#[derive(Debug, thiserror::Error)]
pub enum SimplexError {
    #[error("pivot limit of {0} exceeded")]
    PivotLimit(u64),
}

pub enum Outcome {
    Optimal {
        x: Vec<Rat>,
        objective: Rat,
    },
    /// Multipliers `y`, one per added row in insertion order, for the rows
    /// in their original orientation: `y_i >= 0` for `Ge`, `y_i <= 0` for
    /// `Le`, free for `Eq`, with `sum y_i a_i = 0` and `sum y_i b_i > 0`.
    Infeasible {
        farkas: Vec<Rat>,
    },
    Unbounded {
        x: Vec<Rat>,
        ray: Vec<Rat>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural, // free
    Slack,      // nonnegative
    Artificial, // nonnegative, dead after phase 1
}

struct RowMeta {
    /// +1 if stored as given, -1 if the row was negated on intake.
    sign: i32,
    /// Column holding this row's +1 unit at intake (slack or artificial).
    unit_col: usize,
    /// Index into the caller's row order.
    external: usize,
}

pub struct Simplex {
    nstruct: usize,
    ncols: usize,
    kind: Vec<ColKind>,
    dead: Vec<bool>,
    /// Dense rows; col j at [j], rhs at [ncols].
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    col_row: Vec<Option<usize>>,
    meta: Vec<RowMeta>,
    /// Objective over structural columns (minimization).
    obj: Vec<Rat>,
    /// Current reduced-cost row for the real objective.
    cost: Vec<Rat>,
    bland: bool,
    pivots: u64,
    pivot_cap: u64,
    stall: u64,
    /// Rows taken in before the first solve; later rows warm-start.
    initialized: bool,
    n_external: usize,
}

impl Simplex {
    pub fn new(nstruct: usize, pivot_cap: u64) -> Self {
        Simplex {
            nstruct,
            ncols: nstruct,
            kind: vec![ColKind::Structural; nstruct],
            dead: vec![false; nstruct],
            rows: Vec::new(),
            basis: Vec::new(),
            col_row: vec![None; nstruct],
            meta: Vec::new(),
            obj: vec![Rat::zero(); nstruct],
            cost: vec![Rat::zero(); nstruct + 1],
            bland: false,
            pivots: 0,
            pivot_cap,
            stall: 0,
            initialized: false,
            n_external: 0,
        }
    }

    pub fn pivots(&self) -> u64 {
        self.pivots
    }

    /// Register extra structural columns (new set-function coordinates
    /// pulled in by lazily activated rows). Only valid for columns with a
    /// zero objective coefficient.
    pub fn ensure_struct_cols(&mut self, n: usize) {
        assert!(n >= self.nstruct);
        let added = n - self.nstruct;
        if added == 0 {
            return;
        }
        for row in &mut self.rows {
            for _ in 0..added {
                row.insert(self.nstruct, Rat::zero());
            }
        }
        // cost rows gain zero entries as well
        for _ in 0..added {
            self.cost.insert(self.nstruct, Rat::zero());
            self.obj.insert(self.nstruct, Rat::zero());
            self.kind.insert(self.nstruct, ColKind::Structural);
            self.dead.insert(self.nstruct, false);
            self.col_row.insert(self.nstruct, None);
        }
        // basis/unit column indices above nstruct shift up
        for b in &mut self.basis {
            if *b >= self.nstruct {
                *b += added;
            }
        }
        for m in &mut self.meta {
            if m.unit_col >= self.nstruct {
                m.unit_col += added;
            }
        }
        let mut col_row = vec![None; self.ncols + added];
        for (r, &b) in self.basis.iter().enumerate() {
            col_row[b] = Some(r);
        }
        self.col_row = col_row;
        self.nstruct = n;
        self.ncols += added;
    }

    pub fn set_objective(&mut self, coeffs: &[(usize, Rat)]) {
        assert!(!self.initialized, "objective must be set before solving");
        for (j, c) in coeffs {
            self.obj[*j] = c.clone();
        }
    }

    fn push_col(&mut self, kind: ColKind) -> usize {
        let j = self.ncols;
        self.ncols += 1;
        self.kind.push(kind);
        self.dead.push(false);
        self.col_row.push(None);
        self.obj.push(Rat::zero());
        for row in &mut self.rows {
            row.insert(j, Rat::zero());
        }
        // keep rhs at the end of cost
        self.cost.insert(j, Rat::zero());
        j
    }

    /// Add a row. Before the first solve rows are taken as given; after it,
    /// only inequality rows may be added and they warm-start via dual
    /// pivots inside `solve`.
    pub fn add_row(&mut self, row: &FlatRow) {
        let external = self.n_external;
        self.n_external += 1;
        if !self.initialized {
            self.add_row_initial(row, external);
        } else {
            self.add_row_warm(row, external);
        }
    }

    fn dense_from(&self, coeffs: &[(usize, Rat)], negate: bool) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.ncols + 1];
        for (j, c) in coeffs {
            v[*j] = if negate { -c } else { c.clone() };
        }
        v
    }

    fn add_row_initial(&mut self, row: &FlatRow, external: usize) {
        // Sign-normalize so the right-hand side is nonnegative.
        let (rel, sign) = if row.rhs.is_negative() {
            let rel = match row.rel {
                Rel::Ge => Rel::Le,
                Rel::Le => Rel::Ge,
                Rel::Eq => Rel::Eq,
            };
            (rel, -1)
        } else {
            (row.rel, 1)
        };
        let mut dense = self.dense_from(&row.coeffs, sign < 0);
        let rhs = if sign < 0 { -&row.rhs } else { row.rhs.clone() };
        let r = self.rows.len();
        let unit_col;
        let basic;
        match rel {
            Rel::Le => {
                let s = self.push_col(ColKind::Slack);
                dense.resize(self.ncols + 1, Rat::zero());
                dense[s] = Rat::one();
                unit_col = s;
                basic = s;
            }
            Rel::Ge => {
                let s = self.push_col(ColKind::Slack);
                let a = self.push_col(ColKind::Artificial);
                dense.resize(self.ncols + 1, Rat::zero());
                dense[s] = -Rat::one();
                dense[a] = Rat::one();
                unit_col = a;
                basic = a;
            }
            Rel::Eq => {
                let a = self.push_col(ColKind::Artificial);
                dense.resize(self.ncols + 1, Rat::zero());
                dense[a] = Rat::one();
                unit_col = a;
                basic = a;
            }
        }
        let n = self.ncols;
        dense[n] = rhs;
        self.rows.push(dense);
        self.basis.push(basic);
        self.col_row[basic] = Some(r);
        self.meta.push(RowMeta {
            sign,
            unit_col,
            external,
        });
    }

    fn add_row_warm(&mut self, row: &FlatRow, external: usize) {
        // Convert to Le form; the slack becomes basic, possibly negative.
        let (negate, sign) = match row.rel {
            Rel::Le => (false, 1),
            Rel::Ge => (true, -1),
            Rel::Eq => panic!("equality rows cannot be added after the first solve"),
        };
        let s = self.push_col(ColKind::Slack);
        let mut dense = self.dense_from(&row.coeffs, negate);
        dense.resize(self.ncols + 1, Rat::zero());
        dense[s] = Rat::one();
        dense[self.ncols] = if negate { -&row.rhs } else { row.rhs.clone() };
        // Express in terms of the current basis.
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            if dense[b].is_zero() {
                continue;
            }
            let f = dense[b].clone();
            let src = &self.rows[r];
            for j in 0..=self.ncols {
                if !src[j].is_zero() {
                    let delta = &f * &src[j];
                    dense[j] -= &delta;
                }
            }
        }
        let r = self.rows.len();
        self.rows.push(dense);
        self.basis.push(s);
        self.col_row[s] = Some(r);
        self.meta.push(RowMeta {
            sign,
            unit_col: s,
            external,
        });
    }

    fn rhs_idx(&self) -> usize {
        self.ncols
    }

    #[cfg(feature = "trace")]
    fn tableau_stats(&self) -> (usize, u64) {
        let mut nnz = 0usize;
        let mut bits = 0u64;
        for row in &self.rows {
            for v in row {
                if !v.is_zero() {
                    nnz += 1;
                    let b = v.to_big();
                    bits = bits.max(b.numer().bits().max(b.denom().bits()));
                }
            }
        }
        (nnz, bits)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        #[cfg(feature = "trace")]
        if self.pivots % 100 == 0 {
            let (nnz, bits) = self.tableau_stats();
            eprintln!(
                "[smp] pivot {}: {} rows x {} cols, nnz {}, max bits {} @{:?}",
                self.pivots,
                self.rows.len(),
                self.ncols,
                nnz,
                bits,
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .unwrap()
            );
        }
        let nrhs = self.rhs_idx();
        // Normalize the pivot row.
        let piv = self.rows[r][c].clone();
        debug_assert!(!piv.is_zero());
        if piv != Rat::one() {
            let inv = piv.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v * &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..=nrhs).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                self.rows[i][j] -= &delta;
            }
        }
        let f = self.cost[c].clone();
        if !f.is_zero() {
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                self.cost[j] -= &delta;
            }
        }
        self.rows[r] = pivot_row;
        let old = self.basis[r];
        self.col_row[old] = None;
        if self.kind[old] == ColKind::Artificial {
            self.dead[old] = true;
        }
        self.basis[r] = c;
        self.col_row[c] = Some(r);
    }

    fn enterable(&self, j: usize) -> bool {
        !self.dead[j] && self.col_row[j].is_none()
    }

    /// Track degenerate stretches; a long stall flips selection to Bland's
    /// rule until strict progress resumes.
    fn note_progress(&mut self, progressed: bool) {
        if progressed {
            self.stall = 0;
            self.bland = false;
        } else {
            self.stall += 1;
            if self.stall > 2000 + 3 * self.rows.len() as u64 {
                self.bland = true;
            }
        }
    }

    /// One primal phase over an arbitrary reduced-cost row. Returns the
    /// entering column that proved unboundedness, if any.
    fn primal(
        &mut self,
        mut phase1: Option<&mut Vec<Rat>>,
    ) -> Result<Option<(usize, i32)>, SimplexError> {
        loop {
            if self.pivots >= self.pivot_cap {
                return Err(SimplexError::PivotLimit(self.pivot_cap));
            }
            let entering = {
                let costs: &[Rat] = match phase1.as_deref() {
                    Some(v) => v,
                    None => &self.cost,
                };
                let mut best: Option<(usize, i32, Rat)> = None;
                for j in 0..self.ncols {
                    if !self.enterable(j) {
                        continue;
                    }
                    let rc = &costs[j];
                    if rc.is_zero() {
                        continue;
                    }
                    let dir: i32 = match self.kind[j] {
                        ColKind::Structural => {
                            if rc.is_positive() {
                                -1
                            } else {
                                1
                            }
                        }
                        _ => {
                            if rc.is_negative() {
                                1
                            } else {
                                continue;
                            }
                        }
                    };
                    let score = rc.abs();
                    if self.bland {
                        best = Some((j, dir, score));
                        break;
                    }
                    match &best {
                        Some((_, _, s)) if *s >= score => {}
                        _ => best = Some((j, dir, score)),
                    }
                }
                best
            };
            let Some((j, dir, _)) = entering else {
                return Ok(None); // optimal for this cost row
            };
            // Ratio test: minimum ratio, ties broken toward the largest
            // pivot magnitude (fights degenerate stalling), then by Bland's
            // variable-index rule which guarantees termination.
            let nrhs = self.rhs_idx();
            let mut leave: Option<(usize, Rat, Rat)> = None;
            for r in 0..self.rows.len() {
                if self.kind[self.basis[r]] == ColKind::Structural {
                    continue;
                }
                let a = &self.rows[r][j];
                if a.is_zero() {
                    continue;
                }
                let signed = if dir > 0 { a.clone() } else { -a };
                if !signed.is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][nrhs] / &signed;
                let better = match &leave {
                    None => true,
                    Some((lr, lratio, lpiv)) => {
                        ratio < *lratio
                            || (ratio == *lratio
                                && if self.bland {
                                    self.basis[r] < self.basis[*lr]
                                } else {
                                    signed > *lpiv
                                        || (signed == *lpiv && self.basis[r] < self.basis[*lr])
                                })
                    }
                };
                if better {
                    leave = Some((r, ratio, signed));
                }
            }
            let Some((r, ratio, _)) = leave else {
                return Ok(Some((j, dir)));
            };
            self.note_progress(!ratio.is_zero());
            if let Some(v) = phase1.as_deref_mut() {
                // keep the phase-1 cost row in sync ahead of the pivot
                Self::eliminate_from(v, &self.rows[r], j, nrhs);
            }
            self.pivot(r, j);
        }
    }

    /// Subtract `f * pivot_row` from `target` where `f = target[c] / pivot_row[c]`,
    /// used to keep an auxiliary cost row in sync ahead of a pivot.
    fn eliminate_from(target: &mut [Rat], pivot_row: &[Rat], c: usize, rhs_idx: usize) {
        if target[c].is_zero() {
            return;
        }
        let f = &target[c] / &pivot_row[c];
        for j in 0..=rhs_idx {
            if !pivot_row[j].is_zero() {
                let delta = &f * &pivot_row[j];
                target[j] -= &delta;
            }
        }
    }

    /// Dual pivots until primal feasible. Requires a dual-feasible cost
    /// row (true right after an optimal solve; new columns enter with zero
    /// cost). Returns the row that proved infeasibility, if any.
    ///
    /// Progress is measured by the total infeasibility (sum of negative
    /// basic values); stalls eventually force Bland's selection on both
    /// sides, which cannot cycle.
    fn dual(&mut self) -> Result<Option<usize>, SimplexError> {
        let mut last_infeas: Option<Rat> = None;
        loop {
            if self.pivots >= self.pivot_cap {
                return Err(SimplexError::PivotLimit(self.pivot_cap));
            }
            let nrhs = self.rhs_idx();
            // leaving row: most negative basic value among sign-restricted.
            let mut leave: Option<(usize, Rat)> = None;
            let mut infeas = Rat::zero();
            for r in 0..self.rows.len() {
                if self.kind[self.basis[r]] == ColKind::Structural {
                    continue;
                }
                let v = &self.rows[r][nrhs];
                if !v.is_negative() {
                    continue;
                }
                infeas += v;
                let better = match &leave {
                    None => true,
                    Some((lr, lv)) => {
                        if self.bland {
                            r < *lr
                        } else {
                            *v < *lv
                        }
                    }
                };
                if better {
                    leave = Some((r, v.clone()));
                }
            }
            let progressed = match &last_infeas {
                Some(prev) => infeas > *prev,
                None => true,
            };
            self.note_progress(progressed);
            last_infeas = Some(infeas);
            let Some((r, _)) = leave else {
                return Ok(None);
            };
            // Entering column by dual ratio test; ties go to the largest
            // pivot magnitude unless Bland mode is active.
            let mut enter: Option<(usize, Rat, Rat)> = None;
            for j in 0..self.ncols {
                if !self.enterable(j) {
                    continue;
                }
                let a = &self.rows[r][j];
                if a.is_zero() {
                    continue;
                }
                let ratio = match self.kind[j] {
                    ColKind::Structural => {
                        debug_assert!(self.cost[j].is_zero());
                        Rat::zero()
                    }
                    _ => {
                        if !a.is_negative() {
                            continue;
                        }
                        &self.cost[j] / &(-a)
                    }
                };
                let mag = a.abs();
                let better = match &enter {
                    None => true,
                    Some((ej, er, emag)) => {
                        ratio < *er
                            || (ratio == *er
                                && if self.bland {
                                    j < *ej
                                } else {
                                    mag > *emag || (mag == *emag && j < *ej)
                                })
                    }
                };
                if better {
                    enter = Some((j, ratio, mag));
                }
            }
            let Some((j, _, _)) = enter else {
                return Ok(Some(r));
            };
            self.pivot(r, j);
        }
    }

    fn structural_values(&self) -> Vec<Rat> {
        let nrhs = self.rhs_idx();
        let mut x = vec![Rat::zero(); self.nstruct];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.nstruct {
                x[b] = self.rows[r][nrhs].clone();
            }
        }
        x
    }

    fn objective_value(&self, x: &[Rat]) -> Rat {
        let mut v = Rat::zero();
        for j in 0..self.nstruct {
            let c = &self.obj[j];
            if !c.is_zero() && !x[j].is_zero() {
                v += &(c * &x[j]);
            }
        }
        v
    }

    /// Farkas multipliers in external row order from a vector of per-column
    /// values `vals` holding `y_i` at each row's initial unit column.
    fn farkas_from_units(&self, y_of_unit: impl Fn(&RowMeta) -> Rat) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.n_external];
        for m in &self.meta {
            let y = y_of_unit(m);
            out[m.external] = if m.sign < 0 { -&y } else { y };
        }
        out
    }

    /// Solve (or re-solve) the current system.
    pub fn solve(&mut self) -> Result<Outcome, SimplexError> {
        if !self.initialized {
            self.initialized = true;
            // Phase 1 over the artificial columns, if any are basic.
            let art_rows: Vec<usize> = (0..self.rows.len())
                .filter(|&r| self.kind[self.basis[r]] == ColKind::Artificial)
                .collect();
            if !art_rows.is_empty() {
                let nrhs = self.rhs_idx();
                let mut p1 = vec![Rat::zero(); nrhs + 1];
                for &r in &art_rows {
                    for j in 0..=nrhs {
                        if !self.rows[r][j].is_zero() {
                            let d = self.rows[r][j].clone();
                            p1[j] -= &d;
                        }
                    }
                    // the artificial's own column cancels back to zero cost
                    p1[self.basis[r]] += &Rat::one();
                }
                let unbounded = self.primal(Some(&mut p1))?;
                debug_assert!(unbounded.is_none(), "phase 1 is bounded below");
                // Phase-1 objective value: sum of artificial basic values.
                let mut infeas = Rat::zero();
                for (r, &b) in self.basis.iter().enumerate() {
                    if self.kind[b] == ColKind::Artificial {
                        infeas += &self.rows[r][self.rhs_idx()];
                    }
                }
                if infeas.is_positive() {
                    let farkas = self.farkas_from_units(|m| {
                        let c0 = if self.kind[m.unit_col] == ColKind::Artificial {
                            Rat::one()
                        } else {
                            Rat::zero()
                        };
                        &c0 - &p1[m.unit_col]
                    });
                    return Ok(Outcome::Infeasible { farkas });
                }
                self.purge_basic_artificials();
            }
            self.rebuild_cost_row();
        } else {
            // Warm start: restore primal feasibility after added rows.
            if let Some(r) = self.dual()? {
                let row = &self.rows[r];
                let farkas = self.farkas_from_units(|m| -&row[m.unit_col]);
                return Ok(Outcome::Infeasible { farkas });
            }
        }
        match self.primal(None)? {
            None => {
                let x = self.structural_values();
                let objective = self.objective_value(&x);
                Ok(Outcome::Optimal { x, objective })
            }
            Some((j, dir)) => {
                let x = self.structural_values();
                let mut ray = vec![Rat::zero(); self.nstruct];
                if j < self.nstruct {
                    ray[j] = Rat::from_int(dir as i64);
                }
                for (r, &b) in self.basis.iter().enumerate() {
                    if b < self.nstruct && !self.rows[r][j].is_zero() {
                        let d = &Rat::from_int(dir as i64) * &self.rows[r][j];
                        ray[b] = -&d;
                    }
                }
                Ok(Outcome::Unbounded { x, ray })
            }
        }
    }

    /// After a successful phase 1, pivot remaining zero-valued artificials
    /// out of the basis; rows that reduce to 0 = 0 are dropped.
    fn purge_basic_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            let b = self.basis[r];
            if self.kind[b] != ColKind::Artificial {
                r += 1;
                continue;
            }
            debug_assert!(self.rows[r][self.rhs_idx()].is_zero());
            let mut target = None;
            for j in 0..self.ncols {
                if self.kind[j] != ColKind::Artificial
                    && self.col_row[j].is_none()
                    && !self.rows[r][j].is_zero()
                {
                    target = Some(j);
                    break;
                }
            }
            match target {
                Some(j) => {
                    self.pivot(r, j);
                    r += 1;
                }
                None => {
                    // Redundant row; remove it.
                    self.col_row[b] = None;
                    self.dead[b] = true;
                    self.rows.swap_remove(r);
                    self.basis.swap_remove(r);
                    self.meta.swap_remove(r);
                    if r < self.rows.len() {
                        self.col_row[self.basis[r]] = Some(r);
                    }
                }
            }
        }
    }

    fn rebuild_cost_row(&mut self) {
        let nrhs = self.rhs_idx();
        let mut cost = vec![Rat::zero(); nrhs + 1];
        cost[..self.nstruct].clone_from_slice(&self.obj[..self.nstruct]);
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.nstruct && !self.obj[b].is_zero() {
                let f = self.obj[b].clone();
                for j in 0..=nrhs {
                    if !self.rows[r][j].is_zero() {
                        let d = &f * &self.rows[r][j];
                        cost[j] -= &d;
                    }
                }
            }
        }
        // basic columns must read exactly zero
        for &b in &self.basis {
            cost[b] = Rat::zero();
        }
        self.cost = cost;
    }
}
