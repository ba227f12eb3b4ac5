//! Constructors for auxiliary random variables.
//!
//! Three ways to build the extra variables that tighten a capacity bound:
//! sources that are uniform over subspaces of a prime-field vector space
//! (linear images of i.i.d. uniform field elements), the exact common
//! information of a pair (the connected-component variable of the support's
//! bipartite graph), and a search for a variable that is nearly common,
//! trading off `H(K|X)`, `H(K|Y)` and `I(X;Y|K)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::probdist::{EntropyMeasure, JointDistribution, ProbDistError};
use crate::ratio::Rat;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AuxError {
    #[error("field order {0} is not prime")]
    NotPrime(u64),
    #[error("basis vectors of source {0} are linearly dependent")]
    DependentBasisVectors(usize),
    #[error("the union of the bases does not span the ambient space")]
    SpanDeficient,
    #[error("bad basis vector: {0}")]
    BadVector(String),
    #[error("expected a two-variable joint distribution, got {0} variables")]
    NotTwoVariables(usize),
    #[error("search space of {0} maps exceeds the cap of {1}")]
    SearchSpaceTooLarge(u128, u128),
    #[error("the output alphabet bound must be at least 1")]
    EmptyAlphabet,
    #[error(transparent)]
    Prob(#[from] ProbDistError),
}

/// Per-source bases of support subspaces of `F_q^m` (`q` prime).
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub q: u64,
    pub m: usize,
    /// `bases[i]` lists the basis column vectors (length `m`) of source `i`.
    pub bases: Vec<Vec<Vec<u64>>>,
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Rank of a set of vectors over `F_q` by Gaussian elimination.
fn rank_mod(vectors: &[Vec<u64>], q: u64) -> usize {
    let mut rows: Vec<Vec<u64>> = vectors.to_vec();
    let mut rank = 0;
    let ncols = rows.first().map_or(0, Vec::len);
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] % q != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = mod_inverse(rows[rank][col] % q, q);
        for v in rows[rank].iter_mut() {
            *v = (*v % q) * inv % q;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] % q != 0 {
                let f = row[col] % q;
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v = (*v + (q - f) * p) % q;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: u64, q: u64) -> u64 {
    // q is prime, use Fermat.
    let mut base = a % q;
    let mut exp = q - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

fn symbol_of(digits: &[u64], q: u64) -> String {
    if q <= 9 {
        digits.iter().map(|d| d.to_string()).collect()
    } else {
        digits
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl SubspaceBasis {
    pub fn validate(&self) -> Result<(), AuxError> {
        if !is_prime(self.q) {
            return Err(AuxError::NotPrime(self.q));
        }
        let mut all = Vec::new();
        for (i, basis) in self.bases.iter().enumerate() {
            if basis.is_empty() {
                return Err(AuxError::BadVector(format!(
                    "source {i} has an empty basis"
                )));
            }
            for v in basis {
                if v.len() != self.m {
                    return Err(AuxError::BadVector(format!(
                        "vector of length {} in source {i}, ambient dimension is {}",
                        v.len(),
                        self.m
                    )));
                }
                if v.iter().all(|&x| x % self.q == 0) {
                    return Err(AuxError::BadVector(format!("zero vector in source {i}")));
                }
            }
            if rank_mod(basis, self.q) != basis.len() {
                return Err(AuxError::DependentBasisVectors(i));
            }
            all.extend(basis.iter().cloned());
        }
        if rank_mod(&all, self.q) != self.m {
            return Err(AuxError::SpanDeficient);
        }
        Ok(())
    }
}

/// A joint source distribution built from subspace bases, along with the
/// per-source matrices mapping the key vector to each source value
/// (`matrices[i][row][col]`, one column per basis vector).
#[derive(Clone, Debug)]
pub struct LinearSources {
    pub distribution: JointDistribution,
    pub matrices: Vec<Vec<Vec<u64>>>,
    /// Same support, extended with the key coordinates as extra variables
    /// named `K1..Km`; sources are deterministic functions of the keys.
    pub with_keys: JointDistribution,
}

/// Sources `Y_i = K * A^i` for i.i.d. uniform field elements `K_1..K_m`.
/// Every marginal of the result is uniform over a subspace.
pub fn linearly_correlated(basis: &SubspaceBasis) -> Result<LinearSources, AuxError> {
    basis.validate()?;
    let q = basis.q;
    let m = basis.m;
    let nsources = basis.bases.len();
    let matrices: Vec<Vec<Vec<u64>>> = basis
        .bases
        .iter()
        .map(|cols| {
            (0..m)
                .map(|r| cols.iter().map(|v| v[r] % q).collect())
                .collect()
        })
        .collect();

    let total = (q as u128).pow(m as u32);
    let mut counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    let mut key = vec![0u64; m];
    loop {
        let mut outcome = Vec::with_capacity(nsources + m);
        for mat in &matrices {
            let dim = mat[0].len();
            let mut y = vec![0u64; dim];
            for (r, k) in key.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                for c in 0..dim {
                    y[c] = (y[c] + k * mat[r][c]) % q;
                }
            }
            outcome.push(symbol_of(&y, q));
        }
        for k in &key {
            outcome.push(symbol_of(&[*k], q));
        }
        *counts.entry(outcome).or_insert(0) += 1;
        // odometer over the key space
        let mut pos = m;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            key[pos] += 1;
            if key[pos] < q {
                break;
            }
            key[pos] = 0;
        }
        if key.iter().all(|&k| k == 0) {
            break;
        }
    }

    let mut names: Vec<String> = (0..nsources).map(|i| format!("Y{}", i + 1)).collect();
    names.extend((0..m).map(|j| format!("K{}", j + 1)));
    let mut alphabets: Vec<Vec<String>> = vec![Vec::new(); nsources + m];
    for outcome in counts.keys() {
        for (i, sym) in outcome.iter().enumerate() {
            if !alphabets[i].contains(sym) {
                alphabets[i].push(sym.clone());
            }
        }
    }
    for a in &mut alphabets {
        a.sort();
    }
    let entries: Vec<(Vec<String>, Rat)> = counts
        .iter()
        .map(|(o, c)| {
            (
                o.clone(),
                &Rat::from_int(*c as i64) / &Rat::from_int(total as i64),
            )
        })
        .collect();
    let with_keys =
        JointDistribution::from_table(names.clone(), alphabets.clone(), entries)?;
    let source_names: Vec<String> = names[..nsources].to_vec();
    let distribution = with_keys.marginalize(&source_names)?;
    Ok(LinearSources {
        distribution,
        matrices,
        with_keys,
    })
}

/// Basis file format: vectors as digit lists.
#[derive(Serialize, serde::Deserialize)]
pub struct BasisFile {
    pub q: u64,
    pub m: usize,
    pub bases: Vec<Vec<Vec<u64>>>,
}

impl BasisFile {
    pub fn into_basis(self) -> SubspaceBasis {
        SubspaceBasis {
            q: self.q,
            m: self.m,
            bases: self.bases,
        }
    }
}

/// Result of a common-information construction or search.
#[derive(Clone, Debug, Serialize)]
pub struct CommonInfoResult {
    /// H(K) in bits.
    pub entropy: f64,
    /// Conditional pmf of K per support atom (atoms in support order).
    pub conditional: Vec<Vec<f64>>,
    /// (H(K|X), H(K|Y), I(X;Y|K)).
    pub triple: (f64, f64, f64),
    /// max of the triple.
    pub delta: f64,
    /// Component id per X symbol (exact construction only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_class: Option<Vec<Option<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_class: Option<Vec<Option<usize>>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, a: usize) -> usize {
        if self.parent[a] != a {
            let root = self.find(self.parent[a]);
            self.parent[a] = root;
        }
        self.parent[a]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // deterministic: smaller root wins
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// The maximal random variable that is a deterministic function of both
/// coordinates of a pair: the connected component of the support's
/// bipartite graph. Components are labeled by their smallest X value.
pub fn gk_common_information(dist: &JointDistribution) -> Result<CommonInfoResult, AuxError> {
    if dist.num_variables() != 2 {
        return Err(AuxError::NotTwoVariables(dist.num_variables()));
    }
    let nx = dist.alphabet(0).len();
    let ny = dist.alphabet(1).len();
    let mut uf = UnionFind::new(nx + ny);
    for (outcome, _) in dist.support() {
        uf.union(outcome[0], nx + outcome[1]);
    }
    // components labeled by smallest contained X value
    let mut component_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut roots: Vec<usize> = Vec::new();
    for (outcome, _) in dist.support() {
        let root = uf.find(outcome[0]);
        roots.push(root);
        component_of_root.entry(root).or_insert(usize::MAX);
    }
    let mut ordered: Vec<usize> = component_of_root.keys().copied().collect();
    ordered.sort_by_key(|root| {
        (0..nx)
            .find(|&x| uf.find(x) == *root)
            .unwrap_or(usize::MAX)
    });
    for (id, root) in ordered.iter().enumerate() {
        component_of_root.insert(*root, id);
    }
    let ncomp = ordered.len();

    let mut k_masses = vec![Rat::zero(); ncomp];
    let mut conditional = Vec::new();
    for (outcome, p) in dist.support() {
        let id = component_of_root[&uf.find(outcome[0])];
        k_masses[id] += p;
        let mut row = vec![0.0; ncomp];
        row[id] = 1.0;
        conditional.push(row);
    }
    let masses_f: Vec<f64> = k_masses.iter().map(Rat::to_f64).collect();
    let entropy = EntropyMeasure::Shannon.of_masses(&masses_f);
    let triple = evaluate_triple(dist, &conditional);
    let delta = triple.0.max(triple.1).max(triple.2);

    let x_class = (0..nx)
        .map(|x| {
            let root = uf.find(x);
            component_of_root.get(&root).copied()
        })
        .collect();
    let y_class = (0..ny)
        .map(|y| {
            let root = uf.find(nx + y);
            component_of_root.get(&root).copied()
        })
        .collect();
    Ok(CommonInfoResult {
        entropy,
        conditional,
        triple,
        delta,
        x_class: Some(x_class),
        y_class: Some(y_class),
    })
}

/// (H(K|X), H(K|Y), I(X;Y|K)) for a conditional pmf of K given the atoms.
fn evaluate_triple(dist: &JointDistribution, conditional: &[Vec<f64>]) -> (f64, f64, f64) {
    let k = conditional.first().map_or(0, Vec::len);
    let atoms: Vec<(usize, usize, f64)> = dist
        .support()
        .map(|(o, p)| (o[0], o[1], p.to_f64()))
        .collect();
    let nx = dist.alphabet(0).len();
    let ny = dist.alphabet(1).len();
    let mut xk = vec![0.0f64; nx * k];
    let mut yk = vec![0.0f64; ny * k];
    let mut kk = vec![0.0f64; k];
    let mut xyk = Vec::with_capacity(atoms.len() * k);
    let mut x_m = vec![0.0f64; nx];
    let mut y_m = vec![0.0f64; ny];
    let mut xy = Vec::with_capacity(atoms.len());
    for (row, (x, y, p)) in conditional.iter().zip(&atoms) {
        for (kk_idx, w) in row.iter().enumerate() {
            let mass = p * w;
            xk[x * k + kk_idx] += mass;
            yk[y * k + kk_idx] += mass;
            kk[kk_idx] += mass;
            xyk.push(mass);
        }
        x_m[*x] += p;
        y_m[*y] += p;
        xy.push(*p);
    }
    let h = |v: &[f64]| EntropyMeasure::Shannon.of_masses(v);
    let h_xk = h(&xk);
    let h_yk = h(&yk);
    let h_k = h(&kk);
    let h_xyk = h(&xyk);
    let h_x = h(&x_m);
    let h_y = h(&y_m);
    let h_k_given_x = h_xk - h_x;
    let h_k_given_y = h_yk - h_y;
    let i_xy_given_k = h_xk + h_yk - h_k - h_xyk;
    (
        h_k_given_x.max(0.0),
        h_k_given_y.max(0.0),
        i_xy_given_k.max(0.0),
    )
}

/// How to search for a nearly common variable.
#[derive(Clone, Copy, Debug)]
pub enum SearchMode {
    /// Enumerate every deterministic map from support atoms to `1..=k`.
    Exhaustive,
    /// Randomized-restart hill climbing over conditional pmfs on a
    /// `1/grid` grid.
    LocalSearch { restarts: usize, grid: u32 },
}

const EXHAUSTIVE_CAP: u128 = 10_000_000;

/// Search for a variable K over at most `k` values minimizing
/// `max(H(K|X), H(K|Y), I(X;Y|K))`. The reported value is an upper bound
/// on the true minimum; the exhaustive mode is exact over deterministic K.
pub fn delta_star_search(
    dist: &JointDistribution,
    k: usize,
    mode: SearchMode,
    seed: u64,
) -> Result<CommonInfoResult, AuxError> {
    if dist.num_variables() != 2 {
        return Err(AuxError::NotTwoVariables(dist.num_variables()));
    }
    if k == 0 {
        return Err(AuxError::EmptyAlphabet);
    }
    let s = dist.support_size();
    let result = match mode {
        SearchMode::Exhaustive => {
            let space = (k as u128).saturating_pow(s as u32);
            if space > EXHAUSTIVE_CAP {
                return Err(AuxError::SearchSpaceTooLarge(space, EXHAUSTIVE_CAP));
            }
            let mut assignment = vec![0usize; s];
            let mut best: Option<(f64, Vec<Vec<f64>>, (f64, f64, f64))> = None;
            loop {
                let conditional: Vec<Vec<f64>> = assignment
                    .iter()
                    .map(|&a| {
                        let mut row = vec![0.0; k];
                        row[a] = 1.0;
                        row
                    })
                    .collect();
                let triple = evaluate_triple(dist, &conditional);
                let delta = triple.0.max(triple.1).max(triple.2);
                if best.as_ref().map_or(true, |(b, _, _)| delta < *b - 1e-15) {
                    best = Some((delta, conditional, triple));
                }
                let mut pos = s;
                let mut done = true;
                while pos > 0 {
                    pos -= 1;
                    assignment[pos] += 1;
                    if assignment[pos] < k {
                        done = false;
                        break;
                    }
                    assignment[pos] = 0;
                }
                if done {
                    break;
                }
            }
            best.expect("at least one assignment")
        }
        SearchMode::LocalSearch { restarts, grid } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let step = 1.0 / grid as f64;
            let mut best: Option<(f64, Vec<Vec<f64>>, (f64, f64, f64))> = None;
            for _ in 0..restarts.max(1) {
                // random grid point on each atom's simplex
                let mut conditional: Vec<Vec<f64>> = (0..s)
                    .map(|_| {
                        let mut units = vec![0u32; k];
                        for _ in 0..grid {
                            units[rng.gen_range(0..k)] += 1;
                        }
                        units.iter().map(|&u| u as f64 * step).collect()
                    })
                    .collect();
                let mut current = evaluate_triple(dist, &conditional);
                let mut current_delta = current.0.max(current.1).max(current.2);
                loop {
                    let mut improved = false;
                    for atom in 0..s {
                        for from in 0..k {
                            if conditional[atom][from] < step / 2.0 {
                                continue;
                            }
                            for to in 0..k {
                                if to == from {
                                    continue;
                                }
                                conditional[atom][from] -= step;
                                conditional[atom][to] += step;
                                let t = evaluate_triple(dist, &conditional);
                                let d = t.0.max(t.1).max(t.2);
                                if d < current_delta - 1e-12 {
                                    current = t;
                                    current_delta = d;
                                    improved = true;
                                } else {
                                    conditional[atom][from] += step;
                                    conditional[atom][to] -= step;
                                }
                            }
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                if best
                    .as_ref()
                    .map_or(true, |(b, _, _)| current_delta < *b - 1e-15)
                {
                    best = Some((current_delta, conditional, current));
                }
            }
            best.expect("at least one restart")
        }
    };
    let (delta, conditional, triple) = result;
    let k_masses: Vec<f64> = (0..k)
        .map(|i| {
            dist.support()
                .zip(&conditional)
                .map(|((_, p), row)| p.to_f64() * row[i])
                .sum()
        })
        .collect();
    Ok(CommonInfoResult {
        entropy: EntropyMeasure::Shannon.of_masses(&k_masses),
        conditional,
        triple,
        delta,
        x_class: None,
        y_class: None,
    })
}
