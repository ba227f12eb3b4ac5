//! Randomized cross-check of the exact simplex against exhaustive
//! basic-solution enumeration.
//!
//! Instances are generated pointed (every variable gets a lower-bound row)
//! with nonnegative objective coefficients, so a feasible instance has a
//! vertex and a bounded objective attains its minimum at one. Under those
//! conditions enumerating all square row subsystems is a complete oracle
//! for both status and optimum.

use entrobound::polycone::{
    lp_solve, verify_certificate, LinearConstraint, LinearProgram, LpStatus, Objective,
    Relation, Sense, VarKey,
};
use entrobound::ratio::Rat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ri(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rat {
    Rat::from_int(rng.gen_range(lo..=hi))
}

struct DenseRow {
    coeffs: Vec<Rat>,
    relation: Relation,
    rhs: Rat,
}

fn random_program(rng: &mut ChaCha8Rng) -> (LinearProgram, Vec<DenseRow>, Vec<Rat>) {
    let nvars = rng.gen_range(1..=6usize);
    let extra = rng.gen_range(1..=(12 - nvars).min(6));
    let mut rows = Vec::new();
    for i in 0..nvars {
        let mut coeffs = vec![Rat::zero(); nvars];
        coeffs[i] = Rat::one();
        rows.push(DenseRow {
            coeffs,
            relation: Relation::Ge,
            rhs: ri(rng, -5, 5),
        });
    }
    for _ in 0..extra {
        let mut coeffs = vec![Rat::zero(); nvars];
        let mut any = false;
        for c in coeffs.iter_mut() {
            if rng.gen_bool(0.6) {
                *c = ri(rng, -3, 3);
                any = any || !c.is_zero();
            }
        }
        if !any {
            coeffs[rng.gen_range(0..nvars)] = Rat::one();
        }
        let relation = match rng.gen_range(0..10) {
            0..=4 => Relation::Le,
            5..=8 => Relation::Ge,
            _ => Relation::Eq,
        };
        rows.push(DenseRow {
            coeffs,
            relation,
            rhs: ri(rng, -6, 6),
        });
    }
    let objective: Vec<Rat> = (0..nvars).map(|_| ri(rng, 0, 3)).collect();

    let ground: Vec<String> = (0..nvars).map(|i| format!("x{i}")).collect();
    let mut p = LinearProgram::new(ground);
    for row in &rows {
        let coeffs: Vec<(VarKey, Rat)> = row
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (VarKey::Subset(1 << i), c.clone()))
            .collect();
        p.constraints.push(LinearConstraint::new(
            coeffs,
            row.relation,
            row.rhs.clone(),
            "row",
        ));
    }
    p.objective = Some(Objective {
        sense: Sense::Minimize,
        coeffs: objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (VarKey::Subset(1 << i), c.clone()))
            .collect(),
    });
    (p, rows, objective)
}

/// Solve `m x = b` for square `m`; `None` if singular.
fn solve_square(m: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = b.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..=n {
            a[col][j] = &a[col][j] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=n {
                    let d = &f * &a[col][j];
                    a[r][j] -= &d;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

fn satisfies(rows: &[DenseRow], x: &[Rat]) -> bool {
    rows.iter().all(|row| {
        let lhs = row
            .coeffs
            .iter()
            .zip(x)
            .fold(Rat::zero(), |acc, (c, v)| acc + &(c * v));
        match row.relation {
            Relation::Ge => lhs >= row.rhs,
            Relation::Le => lhs <= row.rhs,
            Relation::Eq => lhs == row.rhs,
        }
    })
}

/// Exhaustive basic-solution oracle: feasibility and minimum objective.
fn enumerate_oracle(rows: &[DenseRow], objective: &[Rat]) -> (bool, Option<Rat>) {
    let n = objective.len();
    let m = rows.len();
    let mut best: Option<Rat> = None;
    let mut feasible = false;
    let mut picks = vec![0usize; n];
    fn rec(
        rows: &[DenseRow],
        objective: &[Rat],
        picks: &mut Vec<usize>,
        depth: usize,
        start: usize,
        m: usize,
        feasible: &mut bool,
        best: &mut Option<Rat>,
    ) {
        let n = objective.len();
        if depth == n {
            let mat: Vec<Vec<Rat>> = picks.iter().map(|&i| rows[i].coeffs.clone()).collect();
            let rhs: Vec<Rat> = picks.iter().map(|&i| rows[i].rhs.clone()).collect();
            if let Some(x) = solve_square(&mat, &rhs) {
                if satisfies(rows, &x) {
                    *feasible = true;
                    let val = objective
                        .iter()
                        .zip(&x)
                        .fold(Rat::zero(), |acc, (c, v)| acc + &(c * v));
                    match best {
                        Some(b) if *b <= val => {}
                        _ => *best = Some(val),
                    }
                }
            }
            return;
        }
        for i in start..m {
            picks[depth] = i;
            rec(rows, objective, picks, depth + 1, i + 1, m, feasible, best);
        }
    }
    rec(rows, objective, &mut picks, 0, 0, m, &mut feasible, &mut best);
    (feasible, best)
}

#[test]
fn simplex_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut n_feasible = 0;
    let mut n_infeasible = 0;
    for case in 0..160 {
        let (p, rows, objective) = random_program(&mut rng);
        let out = lp_solve(&p).unwrap();
        let (feas, best) = enumerate_oracle(&rows, &objective);
        match out.status {
            LpStatus::Feasible => {
                assert!(feas, "case {case}: solver feasible, oracle infeasible");
                assert_eq!(
                    out.optimum.as_ref(),
                    best.as_ref(),
                    "case {case}: optimum mismatch"
                );
                n_feasible += 1;
            }
            LpStatus::Infeasible => {
                assert!(!feas, "case {case}: solver infeasible, oracle feasible");
                assert!(
                    verify_certificate(&p, &out.certificate.unwrap()),
                    "case {case}: certificate failed"
                );
                n_infeasible += 1;
            }
            LpStatus::Unbounded => {
                panic!("case {case}: unbounded cannot happen with these instances");
            }
        }
    }
    // both branches should be well exercised
    assert!(n_feasible > 30, "only {n_feasible} feasible cases");
    assert!(n_infeasible > 30, "only {n_infeasible} infeasible cases");
}
