//! Networks with correlated sources and their capacity outer bounds.
//!
//! A network is a directed acyclic multigraph; an edge may have several
//! head nodes (a lossless fan-out, standing in for relay links of ample
//! capacity). Sources live at nodes and are demanded at disjoint nodes.
//!
//! [`compile_bound`] turns a network plus a description of the source
//! correlation into an exact linear program over the set function on
//! `sources + edges (+ auxiliaries)`:
//!
//! * entropy equalities pinning `h` on every subset of the source
//!   (and auxiliary) variables,
//! * one encoding equality per edge (`h(e | inputs at its tail) = 0`),
//! * one decoding equality per demanded source per sink,
//! * capacity rows `h(e) <= C_e`, either with a concrete tuple or scaled
//!   by a scalar `t` to be minimized,
//! * the elemental inequalities over the whole ground set.
//!
//! Three variants differ only in the first group: the basic bound uses the
//! sources alone, the auxiliary bound adjoins extra random variables given
//! by a joint distribution extending the sources, and the partition-subset
//! bound adjoins selected binary partition variables of the joint source
//! distribution.

pub mod code;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::partitions::{PartitionError, PartitionLabel, PartitionSystem};
use crate::polycone::{
    elemental_inequalities, lp_solve, LinearConstraint, LinearProgram, LpOutcome, Objective,
    PolyconeError, Relation, Sense, VarKey,
};
use crate::probdist::{EntropyMeasure, JointDistribution, ProbDistError};
use crate::ratio::Rat;
use crate::setfunc::submasks;
use crate::LP_GROUND_CAP;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("the network graph contains a cycle")]
    CyclicGraph,
    #[error("edge {0} has nonpositive capacity")]
    NonPositiveCapacity(String),
    #[error("source {0} is demanded at one of its own nodes")]
    SourceDemandOverlap(String),
    #[error("reference to unknown node or label: {0}")]
    DanglingReference(String),
    #[error("duplicate label: {0}")]
    DuplicateLabel(String),
    #[error("ground set of {0} exceeds the cap of {1}")]
    GroundSetTooLarge(usize, usize),
    #[error("invalid source entropy table: {0}")]
    InvalidEntropyTable(String),
    #[error("this bound variant needs the sources as a distribution, not a table")]
    VariantNeedsDistribution,
    #[error("auxiliary joint does not extend the source distribution: {0}")]
    AuxMismatch(String),
    #[error("capacity tuple has {got} entries, the network has {expected} edges")]
    TupleLengthMismatch { expected: usize, got: usize },
    #[error("capacity tuple entry for edge {0} is negative")]
    NegativeTupleEntry(String),
    #[error("scaling direction must be positive on every edge, offending edge {0}")]
    NonPositiveDirection(String),
    #[error(transparent)]
    Poly(#[from] PolyconeError),
    #[error(transparent)]
    Prob(#[from] ProbDistError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("network code error: {0}")]
    Code(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Edge {
    pub tail: String,
    pub heads: Vec<String>,
    pub capacity: Rat,
    pub label: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Source {
    pub label: String,
    pub at: Vec<String>,
    pub demanded_at: Vec<String>,
}

/// Raw network description (what the JSON holds).
#[derive(Clone, Debug)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub sources: Vec<Source>,
}

/// A validated network with cached topological structure.
#[derive(Clone, Debug)]
pub struct Network {
    spec: NetworkSpec,
    node_of: HashMap<String, usize>,
    /// edge indices in a topological processing order
    edge_order: Vec<usize>,
}

impl NetworkSpec {
    pub fn validate(self) -> Result<Network, NetError> {
        let mut node_of = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if node_of.insert(n.clone(), i).is_some() {
                return Err(NetError::DuplicateLabel(n.clone()));
            }
        }
        let mut edge_labels = HashSet::new();
        for e in &self.edges {
            if !edge_labels.insert(e.label.clone()) {
                return Err(NetError::DuplicateLabel(e.label.clone()));
            }
            if !e.capacity.is_positive() {
                return Err(NetError::NonPositiveCapacity(e.label.clone()));
            }
            if !node_of.contains_key(&e.tail) {
                return Err(NetError::DanglingReference(e.tail.clone()));
            }
            if e.heads.is_empty() {
                return Err(NetError::DanglingReference(format!(
                    "edge {} has no head",
                    e.label
                )));
            }
            for h in &e.heads {
                if !node_of.contains_key(h) {
                    return Err(NetError::DanglingReference(h.clone()));
                }
            }
        }
        let mut source_labels = HashSet::new();
        for s in &self.sources {
            if !source_labels.insert(s.label.clone()) {
                return Err(NetError::DuplicateLabel(s.label.clone()));
            }
            for n in s.at.iter().chain(&s.demanded_at) {
                if !node_of.contains_key(n) {
                    return Err(NetError::DanglingReference(n.clone()));
                }
            }
            if s.at.iter().any(|n| s.demanded_at.contains(n)) {
                return Err(NetError::SourceDemandOverlap(s.label.clone()));
            }
        }
        // Kahn's algorithm over the node graph.
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            let t = node_of[&e.tail];
            for h in &e.heads {
                let hh = node_of[h];
                adj[t].push(hh);
                indeg[hh] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo_pos = vec![usize::MAX; n];
        let mut seen = 0;
        while let Some(&u) = queue.first() {
            queue.remove(0);
            topo_pos[u] = seen;
            seen += 1;
            for &v in &adj[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if seen != n {
            return Err(NetError::CyclicGraph);
        }
        let mut edge_order: Vec<usize> = (0..self.edges.len()).collect();
        edge_order.sort_by_key(|&i| (topo_pos[node_of[&self.edges[i].tail]], i));
        Ok(Network {
            spec: self,
            node_of,
            edge_order,
        })
    }
}

impl Network {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn num_edges(&self) -> usize {
        self.spec.edges.len()
    }

    pub fn num_sources(&self) -> usize {
        self.spec.sources.len()
    }

    /// Edge indices in a valid processing order.
    pub fn edge_order(&self) -> &[usize] {
        &self.edge_order
    }

    /// Edges whose head set contains the node.
    pub fn in_edges(&self, node: &str) -> Vec<usize> {
        self.spec
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.heads.iter().any(|h| h == node))
            .map(|(i, _)| i)
            .collect()
    }

    /// Sources available at the node.
    pub fn sources_at(&self, node: &str) -> Vec<usize> {
        self.spec
            .sources
            .iter()
            .enumerate()
            .filter(|(_, s)| s.at.iter().any(|a| a == node))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn node_exists(&self, node: &str) -> bool {
        self.node_of.contains_key(node)
    }
}

/// How the source correlation is described.
#[derive(Clone, Debug)]
pub enum SourceEntropySpec {
    /// A joint distribution whose variables are exactly the source labels.
    Distribution(JointDistribution),
    /// Direct entropies in bits for every nonempty source subset, keyed by
    /// subset mask over the network's source order.
    Table(BTreeMap<usize, Rat>),
}

impl SourceEntropySpec {
    fn distribution(&self) -> Option<&JointDistribution> {
        match self {
            SourceEntropySpec::Distribution(d) => Some(d),
            SourceEntropySpec::Table(_) => None,
        }
    }
}

/// Which outer bound to compile.
#[derive(Clone, Debug)]
pub enum BoundVariant {
    Basic,
    /// Auxiliary random variables adjoined through a joint distribution
    /// over `sources + auxiliaries` that extends the source distribution.
    Auxiliary { joint: JointDistribution },
    /// Selected binary partition variables of the joint source support.
    PartitionSubset { labels: Vec<PartitionLabel> },
}

/// Capacity side of the program.
#[derive(Clone, Debug)]
pub enum CapacityForm<'a> {
    /// `h(e) <= tuple[e]` for every edge.
    Tuple(&'a [Rat]),
    /// `h(e) <= t * direction[e]`, `t >= 0`, minimize `t`.
    Scaled(&'a [Rat]),
}

/// A compiled bound: the linear program plus compilation metadata.
#[derive(Clone, Debug)]
pub struct CompiledBound {
    pub program: LinearProgram,
    /// Names of the auxiliary ground elements, if any.
    pub aux_names: Vec<String>,
    /// True when some entropy right-hand side had to be rounded to a
    /// dyadic rational (denominator 2^20).
    pub approximate: bool,
}

fn rational_bits(v: f64) -> (Rat, bool) {
    let r = Rat::dyadic_round(v, 20);
    let approx = (r.to_f64() - v).abs() > 1e-9;
    (r, approx)
}

/// Compile the chosen bound variant into an exact linear program.
pub fn compile_bound(
    network: &Network,
    entropy: &SourceEntropySpec,
    variant: &BoundVariant,
    capacity: CapacityForm<'_>,
) -> Result<CompiledBound, NetError> {
    let spec = network.spec();
    let nsources = spec.sources.len();
    let nedges = spec.edges.len();
    let source_names: Vec<String> = spec.sources.iter().map(|s| s.label.clone()).collect();

    // The joint distribution that pins h on the source(+aux) block, and the
    // auxiliary variable names.
    let mut approximate = false;
    let (pin_dist, aux_names): (Option<JointDistribution>, Vec<String>) = match variant {
        BoundVariant::Basic => (entropy.distribution().cloned(), Vec::new()),
        BoundVariant::Auxiliary { joint } => {
            let Some(sources) = entropy.distribution() else {
                return Err(NetError::VariantNeedsDistribution);
            };
            let marg = joint.marginalize(&source_names).map_err(|e| {
                NetError::AuxMismatch(format!("joint must contain every source: {e}"))
            })?;
            if &marg != sources {
                return Err(NetError::AuxMismatch(
                    "source marginal of the joint differs from the source distribution".into(),
                ));
            }
            let aux: Vec<String> = joint
                .variables()
                .iter()
                .filter(|v| !source_names.contains(v))
                .cloned()
                .collect();
            (Some(joint.clone()), aux)
        }
        BoundVariant::PartitionSubset { labels } => {
            let Some(sources) = entropy.distribution() else {
                return Err(NetError::VariantNeedsDistribution);
            };
            let system = PartitionSystem::build(sources, Some(labels.clone()))?;
            let ext = system.extended_distribution();
            let aux: Vec<String> = ext
                .variables()
                .iter()
                .filter(|v| !source_names.contains(v))
                .cloned()
                .collect();
            (Some(ext), aux)
        }
    };

    let ground_size = nsources + nedges + aux_names.len();
    if ground_size > LP_GROUND_CAP {
        return Err(NetError::GroundSetTooLarge(ground_size, LP_GROUND_CAP));
    }
    let mut ground: Vec<String> = source_names.clone();
    ground.extend(spec.edges.iter().map(|e| e.label.clone()));
    ground.extend(aux_names.iter().cloned());
    let mut program = LinearProgram::new(ground.clone());

    let source_bit = |i: usize| 1usize << i;
    let edge_bit = |i: usize| 1usize << (nsources + i);
    let aux_offset = nsources + nedges;

    // 1. entropy equalities over the source (+aux) block
    let pin_count = nsources + aux_names.len();
    match (&pin_dist, entropy) {
        (Some(d), _) => {
            // subset masks over the pin block map onto ground masks directly:
            // sources occupy the low bits, auxiliaries sit after the edges
            let pin_vars: Vec<String> = source_names
                .iter()
                .chain(aux_names.iter())
                .cloned()
                .collect();
            for pin_mask in 1usize..(1 << pin_count) {
                let vars: Vec<String> = pin_vars
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| pin_mask & (1 << i) != 0)
                    .map(|(_, v)| v.clone())
                    .collect();
                let h = d.subset_entropy(&vars, EntropyMeasure::Shannon)?;
                let (rhs, approx) = rational_bits(h);
                approximate |= approx;
                let mut ground_mask = 0usize;
                for i in 0..pin_count {
                    if pin_mask & (1 << i) != 0 {
                        ground_mask |= if i < nsources {
                            source_bit(i)
                        } else {
                            1usize << (aux_offset + (i - nsources))
                        };
                    }
                }
                program.constraints.push(LinearConstraint::new(
                    [(VarKey::Subset(ground_mask), Rat::one())],
                    Relation::Eq,
                    rhs,
                    "source-entropy",
                ));
            }
        }
        (None, SourceEntropySpec::Table(table)) => {
            validate_entropy_table(table, nsources)?;
            for mask in 1usize..(1 << nsources) {
                let rhs = table
                    .get(&mask)
                    .cloned()
                    .ok_or_else(|| {
                        NetError::InvalidEntropyTable(format!("missing subset mask {mask:#b}"))
                    })?;
                let mut ground_mask = 0usize;
                for i in 0..nsources {
                    if mask & (1 << i) != 0 {
                        ground_mask |= source_bit(i);
                    }
                }
                program.constraints.push(LinearConstraint::new(
                    [(VarKey::Subset(ground_mask), Rat::one())],
                    Relation::Eq,
                    rhs,
                    "source-entropy",
                ));
            }
        }
        (None, SourceEntropySpec::Distribution(_)) => unreachable!(),
    }

    // 2. encoding equalities
    for (ei, e) in spec.edges.iter().enumerate() {
        let mut inputs = 0usize;
        for si in network.sources_at(&e.tail) {
            inputs |= source_bit(si);
        }
        for fi in network.in_edges(&e.tail) {
            inputs |= edge_bit(fi);
        }
        let mut coeffs = vec![(VarKey::Subset(inputs | edge_bit(ei)), Rat::one())];
        if inputs != 0 {
            coeffs.push((VarKey::Subset(inputs), -Rat::one()));
        }
        program.constraints.push(LinearConstraint::new(
            coeffs,
            Relation::Eq,
            Rat::zero(),
            "encoding",
        ));
    }

    // 3. decoding equalities
    for (si, s) in spec.sources.iter().enumerate() {
        for sink in &s.demanded_at {
            let mut given = 0usize;
            for s2 in network.sources_at(sink) {
                given |= source_bit(s2);
            }
            for fi in network.in_edges(sink) {
                given |= edge_bit(fi);
            }
            let mut coeffs = vec![(VarKey::Subset(given | source_bit(si)), Rat::one())];
            if given != 0 {
                coeffs.push((VarKey::Subset(given), -Rat::one()));
            }
            program.constraints.push(LinearConstraint::new(
                coeffs,
                Relation::Eq,
                Rat::zero(),
                "decoding",
            ));
        }
    }

    // 4. capacity rows
    match capacity {
        CapacityForm::Tuple(tuple) => {
            if tuple.len() != nedges {
                return Err(NetError::TupleLengthMismatch {
                    expected: nedges,
                    got: tuple.len(),
                });
            }
            for (ei, cap) in tuple.iter().enumerate() {
                if cap.is_negative() {
                    return Err(NetError::NegativeTupleEntry(
                        spec.edges[ei].label.clone(),
                    ));
                }
                program.constraints.push(LinearConstraint::new(
                    [(VarKey::Subset(edge_bit(ei)), Rat::one())],
                    Relation::Le,
                    cap.clone(),
                    "capacity",
                ));
            }
        }
        CapacityForm::Scaled(direction) => {
            if direction.len() != nedges {
                return Err(NetError::TupleLengthMismatch {
                    expected: nedges,
                    got: direction.len(),
                });
            }
            program.scalars.push("t".into());
            for (ei, d) in direction.iter().enumerate() {
                if !d.is_positive() {
                    return Err(NetError::NonPositiveDirection(
                        spec.edges[ei].label.clone(),
                    ));
                }
                program.constraints.push(LinearConstraint::new(
                    [
                        (VarKey::Subset(edge_bit(ei)), Rat::one()),
                        (VarKey::Scalar(0), -d),
                    ],
                    Relation::Le,
                    Rat::zero(),
                    "capacity",
                ));
            }
            program.constraints.push(LinearConstraint::new(
                [(VarKey::Scalar(0), Rat::one())],
                Relation::Ge,
                Rat::zero(),
                "scaling",
            ));
            program.objective = Some(Objective {
                sense: Sense::Minimize,
                coeffs: [(VarKey::Scalar(0), Rat::one())].into_iter().collect(),
            });
        }
    }

    // 5. elemental inequalities over the full ground set
    program
        .constraints
        .extend(elemental_inequalities(ground_size)?);

    program.validate()?;
    Ok(CompiledBound {
        program,
        aux_names,
        approximate,
    })
}

/// Direct tables must themselves satisfy the polymatroid axioms.
fn validate_entropy_table(table: &BTreeMap<usize, Rat>, nsources: usize) -> Result<(), NetError> {
    let full = (1usize << nsources) - 1;
    for mask in 1..=full {
        let v = table
            .get(&mask)
            .ok_or_else(|| NetError::InvalidEntropyTable(format!("missing mask {mask:#b}")))?;
        if v.is_negative() {
            return Err(NetError::InvalidEntropyTable(format!(
                "negative entropy at mask {mask:#b}"
            )));
        }
        // monotonicity against submasks
        for sub in submasks(mask) {
            if sub != mask && table[&sub] > *v {
                return Err(NetError::InvalidEntropyTable(format!(
                    "monotonicity fails between masks {sub:#b} and {mask:#b}"
                )));
            }
        }
    }
    // submodularity
    for a in 1..=full {
        for b in 1..=full {
            let (i, u) = (a & b, a | b);
            let lhs = &table[&a] + &table[&b];
            let mut rhs = table[&u].clone();
            if i != 0 {
                rhs += &table[&i];
            }
            if lhs < rhs {
                return Err(NetError::InvalidEntropyTable(format!(
                    "submodularity fails for masks {a:#b}, {b:#b}"
                )));
            }
        }
    }
    Ok(())
}

/// Is a capacity tuple inside the compiled bound region?
pub fn check_tuple(
    network: &Network,
    entropy: &SourceEntropySpec,
    variant: &BoundVariant,
    tuple: &[Rat],
) -> Result<(LpOutcome, CompiledBound), NetError> {
    let compiled = compile_bound(network, entropy, variant, CapacityForm::Tuple(tuple))?;
    let outcome = lp_solve(&compiled.program)?;
    Ok((outcome, compiled))
}

/// Minimal `t` such that `t * direction` lies in the bound region.
pub fn min_scaling(
    network: &Network,
    entropy: &SourceEntropySpec,
    variant: &BoundVariant,
    direction: &[Rat],
) -> Result<(Rat, LpOutcome, CompiledBound), NetError> {
    let compiled = compile_bound(network, entropy, variant, CapacityForm::Scaled(direction))?;
    let outcome = lp_solve(&compiled.program)?;
    let t = outcome
        .optimum
        .clone()
        .ok_or_else(|| NetError::Code("scaling program returned no optimum".into()))?;
    Ok((t, outcome, compiled))
}

/// Closed-form row count of a compiled bound (without the scaling row).
pub fn expected_row_count(
    nsources: usize,
    nedges: usize,
    naux: usize,
    total_demands: usize,
) -> usize {
    let ground = nsources + nedges + naux;
    crate::polycone::elemental_count(ground) + ((1usize << (nsources + naux)) - 1)
        + nedges
        + total_demands
        + nedges
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum HeadSpec {
    One(String),
    Many(Vec<String>),
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    tail: String,
    head: HeadSpec,
    cap: Rat,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct SourceFile {
    label: String,
    at: Vec<String>,
    demanded_at: Vec<String>,
}

/// On-disk network format. `head` may be a single node or a list.
#[derive(Serialize, Deserialize)]
pub struct NetworkFile {
    nodes: Vec<String>,
    edges: Vec<EdgeFile>,
    sources: Vec<SourceFile>,
}

pub fn network_to_json(spec: &NetworkSpec) -> String {
    let file = NetworkFile {
        nodes: spec.nodes.clone(),
        edges: spec
            .edges
            .iter()
            .map(|e| EdgeFile {
                tail: e.tail.clone(),
                head: if e.heads.len() == 1 {
                    HeadSpec::One(e.heads[0].clone())
                } else {
                    HeadSpec::Many(e.heads.clone())
                },
                cap: e.capacity.clone(),
                label: e.label.clone(),
            })
            .collect(),
        sources: spec
            .sources
            .iter()
            .map(|s| SourceFile {
                label: s.label.clone(),
                at: s.at.clone(),
                demanded_at: s.demanded_at.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn network_from_json(s: &str) -> Result<NetworkSpec, NetError> {
    let file: NetworkFile =
        serde_json::from_str(s).map_err(|e| NetError::DanglingReference(e.to_string()))?;
    Ok(NetworkSpec {
        nodes: file.nodes,
        edges: file
            .edges
            .into_iter()
            .map(|e| Edge {
                tail: e.tail,
                heads: match e.head {
                    HeadSpec::One(h) => vec![h],
                    HeadSpec::Many(hs) => hs,
                },
                capacity: e.cap,
                label: e.label,
            })
            .collect(),
        sources: file
            .sources
            .into_iter()
            .map(|s| Source {
                label: s.label,
                at: s.at,
                demanded_at: s.demanded_at,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxgen::{linearly_correlated, SubspaceBasis};
    use crate::polycone::{verify_witness, LpStatus, Witness};
    use crate::setfunc::SetFunction;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn e(i: usize, m: usize) -> Vec<u64> {
        let mut v = vec![0u64; m];
        v[i] = 1;
        v
    }

    pub(crate) fn three_source_basis() -> SubspaceBasis {
        SubspaceBasis {
            q: 2,
            m: 3,
            bases: vec![
                vec![e(0, 3), e(1, 3)],
                vec![e(0, 3), e(2, 3)],
                vec![e(1, 3), e(2, 3)],
            ],
        }
    }

    /// The hub-and-spokes example network: one edge into a relay whose
    /// fan-out reaches all three sinks, plus one direct edge per sink.
    pub(crate) fn hub_network() -> Network {
        NetworkSpec {
            nodes: vec!["1".into(), "3".into(), "4".into(), "5".into()],
            edges: vec![
                Edge {
                    tail: "1".into(),
                    heads: vec!["3".into(), "4".into(), "5".into()],
                    capacity: r("1"),
                    label: "e1".into(),
                },
                Edge {
                    tail: "1".into(),
                    heads: vec!["3".into()],
                    capacity: r("1"),
                    label: "e2".into(),
                },
                Edge {
                    tail: "1".into(),
                    heads: vec!["4".into()],
                    capacity: r("1"),
                    label: "e3".into(),
                },
                Edge {
                    tail: "1".into(),
                    heads: vec!["5".into()],
                    capacity: r("1"),
                    label: "e4".into(),
                },
            ],
            sources: vec![
                Source {
                    label: "s1".into(),
                    at: vec!["1".into()],
                    demanded_at: vec!["3".into()],
                },
                Source {
                    label: "s2".into(),
                    at: vec!["1".into()],
                    demanded_at: vec!["4".into()],
                },
                Source {
                    label: "s3".into(),
                    at: vec!["1".into()],
                    demanded_at: vec!["5".into()],
                },
            ],
        }
        .validate()
        .unwrap()
    }

    fn hub_sources() -> SourceEntropySpec {
        let d = linearly_correlated(&three_source_basis())
            .unwrap()
            .distribution
            .with_variable_names(vec!["s1".into(), "s2".into(), "s3".into()])
            .unwrap();
        SourceEntropySpec::Distribution(d)
    }

    #[test]
    fn validation_errors() {
        let cyclic = NetworkSpec {
            nodes: vec!["a".into(), "b".into()],
            edges: vec![
                Edge {
                    tail: "a".into(),
                    heads: vec!["b".into()],
                    capacity: r("1"),
                    label: "x".into(),
                },
                Edge {
                    tail: "b".into(),
                    heads: vec!["a".into()],
                    capacity: r("1"),
                    label: "y".into(),
                },
            ],
            sources: vec![],
        };
        assert!(matches!(cyclic.validate(), Err(NetError::CyclicGraph)));

        let zero_cap = NetworkSpec {
            nodes: vec!["a".into(), "b".into()],
            edges: vec![Edge {
                tail: "a".into(),
                heads: vec!["b".into()],
                capacity: r("0"),
                label: "x".into(),
            }],
            sources: vec![],
        };
        assert!(matches!(
            zero_cap.validate(),
            Err(NetError::NonPositiveCapacity(_))
        ));

        let overlap = NetworkSpec {
            nodes: vec!["a".into()],
            edges: vec![],
            sources: vec![Source {
                label: "s".into(),
                at: vec!["a".into()],
                demanded_at: vec!["a".into()],
            }],
        };
        assert!(matches!(
            overlap.validate(),
            Err(NetError::SourceDemandOverlap(_))
        ));
    }

    #[test]
    fn hub_network_compiles_to_the_expected_rows() {
        let net = hub_network();
        let entropy = hub_sources();
        let tuple = vec![r("1"); 4];
        let compiled = compile_bound(
            &net,
            &entropy,
            &BoundVariant::Basic,
            CapacityForm::Tuple(&tuple),
        )
        .unwrap();
        assert!(!compiled.approximate);
        let p = &compiled.program;
        assert_eq!(p.ground.len(), 7);
        assert_eq!(
            p.constraints.len(),
            expected_row_count(3, 4, 0, 3)
        );

        let mask = |labels: &[&str]| VarKey::Subset(p.mask_of(labels).unwrap());
        let find = |coeffs: Vec<(VarKey, Rat)>, rel: Relation, rhs: &str, tag: &str| {
            let want = LinearConstraint::new(coeffs, rel, r(rhs), tag);
            assert!(
                p.constraints.iter().any(|c| *c == want),
                "missing row: {}",
                want.render(&p.ground, &p.scalars)
            );
        };
        // source entropies: h(si) = 2, pairs = 3, triple = 3
        for s in ["s1", "s2", "s3"] {
            find(vec![(mask(&[s]), r("1"))], Relation::Eq, "2", "source-entropy");
        }
        for pair in [["s1", "s2"], ["s1", "s3"], ["s2", "s3"]] {
            find(vec![(mask(&pair), r("1"))], Relation::Eq, "3", "source-entropy");
        }
        find(
            vec![(mask(&["s1", "s2", "s3"]), r("1"))],
            Relation::Eq,
            "3",
            "source-entropy",
        );
        // encoding: h(ei | s1 s2 s3) = 0
        for edge in ["e1", "e2", "e3", "e4"] {
            find(
                vec![
                    (mask(&["s1", "s2", "s3", edge]), r("1")),
                    (mask(&["s1", "s2", "s3"]), r("-1")),
                ],
                Relation::Eq,
                "0",
                "encoding",
            );
        }
        // decoding: h(s1|e1,e2), h(s2|e1,e3), h(s3|e1,e4)
        for (s, edge) in [("s1", "e2"), ("s2", "e3"), ("s3", "e4")] {
            find(
                vec![
                    (mask(&[s, "e1", edge]), r("1")),
                    (mask(&["e1", edge]), r("-1")),
                ],
                Relation::Eq,
                "0",
                "decoding",
            );
        }
        // capacity rows
        for edge in ["e1", "e2", "e3", "e4"] {
            find(vec![(mask(&[edge]), r("1"))], Relation::Le, "1", "capacity");
        }
    }

    /// The admissible point built from independent bits with the third
    /// source replaced by (b0, b1 xor b2): its entropy vector satisfies the
    /// basic system exactly.
    pub(crate) fn hub_admissible_point(program: &LinearProgram) -> Witness {
        // variables: s1=(b0,b1) s2=(b0,b2) s3'=(b0,b1^b2) e1=b0 e2=b1 e3=b2 e4=b1^b2
        let mut entries = Vec::new();
        for b0 in 0..2usize {
            for b1 in 0..2usize {
                for b2 in 0..2usize {
                    let x = b1 ^ b2;
                    entries.push((
                        vec![
                            format!("{b0}{b1}"),
                            format!("{b0}{b2}"),
                            format!("{b0}{x}"),
                            format!("{b0}"),
                            format!("{b1}"),
                            format!("{b2}"),
                            format!("{x}"),
                        ],
                        r("1/8"),
                    ));
                }
            }
        }
        let pairs: Vec<String> = vec!["00", "01", "10", "11"]
            .into_iter()
            .map(String::from)
            .collect();
        let bits: Vec<String> = vec!["0".into(), "1".into()];
        let d = JointDistribution::from_table(
            vec![
                "s1".into(),
                "s2".into(),
                "s3".into(),
                "e1".into(),
                "e2".into(),
                "e3".into(),
                "e4".into(),
            ],
            vec![
                pairs.clone(),
                pairs.clone(),
                pairs,
                bits.clone(),
                bits.clone(),
                bits.clone(),
                bits,
            ],
            entries,
        )
        .unwrap();
        let v = d
            .entropy_vector(&program.ground.to_vec(), EntropyMeasure::Shannon)
            .unwrap();
        let mut sets = SetFunction::<Rat>::zeroes(program.ground.clone());
        for (m, h) in v.iter() {
            let (rat, approx) = rational_bits(*h);
            assert!(!approx, "hub point entropies are integral");
            sets.set(m, rat).unwrap();
        }
        Witness {
            sets,
            scalars: vec![],
        }
    }

    #[test]
    fn admissible_point_passes_basic_but_not_auxiliary_rows() {
        let net = hub_network();
        let entropy = hub_sources();
        let tuple = vec![r("1"); 4];
        let compiled = compile_bound(
            &net,
            &entropy,
            &BoundVariant::Basic,
            CapacityForm::Tuple(&tuple),
        )
        .unwrap();
        let w = hub_admissible_point(&compiled.program);
        assert!(verify_witness(&compiled.program, &w).unwrap());

        // The same point extended with k1=b0, k2=b1, k3=b2 violates the
        // auxiliary equalities: h(s3, k2, k3) would need to be 2 but is 3.
        let joint = linearly_correlated(&three_source_basis())
            .unwrap()
            .with_keys
            .with_variable_names(vec![
                "s1".into(),
                "s2".into(),
                "s3".into(),
                "K1".into(),
                "K2".into(),
                "K3".into(),
            ])
            .unwrap();
        let compiled_aux = compile_bound(
            &net,
            &entropy,
            &BoundVariant::Auxiliary { joint },
            CapacityForm::Tuple(&tuple),
        )
        .unwrap();
        assert_eq!(compiled_aux.program.ground.len(), 10);
        let mut entries = Vec::new();
        for b0 in 0..2usize {
            for b1 in 0..2usize {
                for b2 in 0..2usize {
                    let x = b1 ^ b2;
                    entries.push((
                        vec![
                            format!("{b0}{b1}"),
                            format!("{b0}{b2}"),
                            format!("{b0}{x}"),
                            format!("{b0}"),
                            format!("{b1}"),
                            format!("{b2}"),
                            format!("{x}"),
                            format!("{b0}"),
                            format!("{b1}"),
                            format!("{b2}"),
                        ],
                        r("1/8"),
                    ));
                }
            }
        }
        let pairs: Vec<String> = vec!["00", "01", "10", "11"]
            .into_iter()
            .map(String::from)
            .collect();
        let bits: Vec<String> = vec!["0".into(), "1".into()];
        let d = JointDistribution::from_table(
            compiled_aux.program.ground.clone(),
            vec![
                pairs.clone(),
                pairs.clone(),
                pairs,
                bits.clone(),
                bits.clone(),
                bits.clone(),
                bits.clone(),
                bits.clone(),
                bits.clone(),
                bits,
            ],
            entries,
        )
        .unwrap();
        let v = d
            .entropy_vector(&compiled_aux.program.ground.to_vec(), EntropyMeasure::Shannon)
            .unwrap();
        let mut sets = SetFunction::<Rat>::zeroes(compiled_aux.program.ground.clone());
        for (m, h) in v.iter() {
            sets.set(m, rational_bits(*h).0).unwrap();
        }
        let w_aux = Witness {
            sets,
            scalars: vec![],
        };
        assert!(!verify_witness(&compiled_aux.program, &w_aux).unwrap());
    }

    #[test]
    fn zero_tuple_is_infeasible() {
        let net = hub_network();
        let entropy = hub_sources();
        let tuple = vec![r("0"), r("0"), r("0"), r("0")];
        let err = check_tuple(&net, &entropy, &BoundVariant::Basic, &tuple);
        // zero capacities violate positivity at validation time? no: the
        // tuple is an argument, not the network capacity, and may be 0.
        let (outcome, compiled) = err.unwrap();
        assert_eq!(outcome.status, LpStatus::Infeasible);
        let cert = outcome.certificate.unwrap();
        assert!(crate::polycone::verify_certificate(&compiled.program, &cert));
    }

    #[test]
    fn entropy_table_round_trip_and_validation() {
        let net = hub_network();
        // direct table matching the distribution entropies
        let mut table = BTreeMap::new();
        for mask in 1usize..8 {
            let bits = mask.count_ones();
            let v = if bits == 1 { r("2") } else { r("3") };
            table.insert(mask, v);
        }
        let tuple = vec![r("1"); 4];
        let compiled = compile_bound(
            &net,
            &SourceEntropySpec::Table(table.clone()),
            &BoundVariant::Basic,
            CapacityForm::Tuple(&tuple),
        )
        .unwrap();
        assert!(!compiled.approximate);

        // a non-polymatroid table is rejected
        let mut bad = table;
        bad.insert(0b111, r("10"));
        assert!(matches!(
            compile_bound(
                &net,
                &SourceEntropySpec::Table(bad),
                &BoundVariant::Basic,
                CapacityForm::Tuple(&tuple),
            ),
            Err(NetError::InvalidEntropyTable(_))
        ));
    }

    #[test]
    fn empty_network_compiles_sources_only() {
        let net = NetworkSpec {
            nodes: vec!["a".into()],
            edges: vec![],
            sources: vec![Source {
                label: "s".into(),
                at: vec!["a".into()],
                demanded_at: vec![],
            }],
        }
        .validate()
        .unwrap();
        let d = JointDistribution::scalar("s", &[("0", r("1/2")), ("1", r("1/2"))]).unwrap();
        let compiled = compile_bound(
            &net,
            &SourceEntropySpec::Distribution(d),
            &BoundVariant::Basic,
            CapacityForm::Tuple(&[]),
        )
        .unwrap();
        // one source row + one elemental row
        assert_eq!(compiled.program.constraints.len(), 2);
        let out = lp_solve(&compiled.program).unwrap();
        assert_eq!(out.status, LpStatus::Feasible);
    }

    #[test]
    fn json_round_trip() {
        let spec = hub_network().spec().clone();
        let s = network_to_json(&spec);
        let back = network_from_json(&s).unwrap();
        assert_eq!(back.nodes, spec.nodes);
        assert_eq!(back.edges.len(), spec.edges.len());
        assert_eq!(back.edges[0].heads, spec.edges[0].heads);
        back.validate().unwrap();
    }
}
