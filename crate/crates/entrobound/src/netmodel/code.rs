//! Single-symbol network code evaluation.
//!
//! A code gives each edge a lookup table from its inputs (the source
//! symbols available at the tail, then the symbols on the edges feeding the
//! tail, both in network order) to an output symbol from the edge's
//! declared alphabet, and each (sink, demanded source) pair a decoding
//! table over the sink's inputs. Evaluation walks the support of the source
//! distribution in topological edge order, checks decoding on every atom
//! (success is probability-1 by construction), and reports each edge's
//! message entropy and raw rate against its capacity. Block codes are
//! expressed by using product alphabets on a single symbol.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::probdist::{EntropyMeasure, JointDistribution};
use crate::ratio::Rat;

use super::{NetError, Network};

/// A lookup table keyed by input symbol tuples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeTable {
    #[serde(default)]
    pub alphabet: Vec<String>,
    pub table: Vec<TableRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "in")]
    pub input: Vec<String>,
    pub out: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeCode {
    pub label: String,
    #[serde(flatten)]
    pub table: CodeTable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecoderCode {
    pub sink: String,
    pub source: String,
    #[serde(flatten)]
    pub table: CodeTable,
}

/// On-disk network code: per-edge encoders and per-(sink, source) decoders.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkCode {
    pub edges: Vec<EdgeCode>,
    pub decoders: Vec<DecoderCode>,
}

impl NetworkCode {
    pub fn from_json(s: &str) -> Result<Self, NetError> {
        serde_json::from_str(s).map_err(|e| NetError::Code(format!("bad code JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeReport {
    pub label: String,
    /// H(U_e) in bits under the source distribution.
    pub entropy: f64,
    /// log2 of the declared alphabet size.
    pub rate: f64,
    pub capacity: Rat,
    pub entropy_exceeds_capacity: bool,
    pub rate_exceeds_capacity: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecodeReport {
    pub source: String,
    pub sink: String,
    pub ok: bool,
    /// Sample of failing atoms: (source outcome, decoded, expected).
    pub failures: Vec<(Vec<String>, String, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CodeReport {
    pub edges: Vec<EdgeReport>,
    pub decodings: Vec<DecodeReport>,
    pub success: bool,
}

impl CodeReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("edge  entropy  rate  capacity  ok\n");
        for e in &self.edges {
            out.push_str(&format!(
                "{:<5} {:<8.4} {:<5.3} {:<9} {}\n",
                e.label,
                e.entropy,
                e.rate,
                e.capacity.to_string(),
                if e.rate_exceeds_capacity || e.entropy_exceeds_capacity {
                    "over"
                } else {
                    "ok"
                }
            ));
        }
        for d in &self.decodings {
            out.push_str(&format!(
                "decode {} at {}: {}\n",
                d.source,
                d.sink,
                if d.ok { "ok" } else { "FAILS" }
            ));
            for (outcome, got, want) in &d.failures {
                out.push_str(&format!(
                    "  outcome {:?}: decoded {:?}, expected {:?}\n",
                    outcome, got, want
                ));
            }
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.success { "success" } else { "FAILURE" }
        ));
        out
    }
}

/// Run the code over every support atom and compile the report.
pub fn evaluate_code(
    network: &Network,
    dist: &JointDistribution,
    code: &NetworkCode,
) -> Result<CodeReport, NetError> {
    let spec = network.spec();
    // source label -> variable position in dist
    let mut source_pos = Vec::with_capacity(spec.sources.len());
    for s in &spec.sources {
        let pos = dist
            .variables()
            .iter()
            .position(|v| *v == s.label)
            .ok_or_else(|| {
                NetError::Code(format!("distribution does not cover source {}", s.label))
            })?;
        source_pos.push(pos);
    }
    let mut edge_table: Vec<Option<&CodeTable>> = vec![None; spec.edges.len()];
    for ec in &code.edges {
        let idx = spec
            .edges
            .iter()
            .position(|e| e.label == ec.label)
            .ok_or_else(|| NetError::DanglingReference(ec.label.clone()))?;
        edge_table[idx] = Some(&ec.table);
    }
    for (i, t) in edge_table.iter().enumerate() {
        if t.is_none() {
            return Err(NetError::Code(format!(
                "no encoding table for edge {}",
                spec.edges[i].label
            )));
        }
    }

    let atoms: Vec<(Vec<usize>, Rat)> = dist
        .support()
        .map(|(o, p)| (o.clone(), p.clone()))
        .collect();
    // edge messages per atom
    let mut messages: Vec<Vec<String>> = vec![Vec::new(); atoms.len()];
    for (ai, (outcome, _)) in atoms.iter().enumerate() {
        let mut symbols: Vec<Option<String>> = vec![None; spec.edges.len()];
        for &ei in network.edge_order() {
            let e = &spec.edges[ei];
            let mut input = Vec::new();
            for si in network.sources_at(&e.tail) {
                input.push(dist.alphabet(source_pos[si])[outcome[source_pos[si]]].clone());
            }
            for fi in network.in_edges(&e.tail) {
                let sym = symbols[fi].clone().ok_or_else(|| {
                    NetError::Code(format!(
                        "edge {} consumed before being produced",
                        spec.edges[fi].label
                    ))
                })?;
                input.push(sym);
            }
            let table = edge_table[ei].expect("checked above");
            let row = table
                .table
                .iter()
                .find(|r| r.input == input)
                .ok_or_else(|| {
                    NetError::Code(format!(
                        "missing table entry for edge {} on input {:?}",
                        e.label, input
                    ))
                })?;
            if !table.alphabet.is_empty() && !table.alphabet.contains(&row.out) {
                return Err(NetError::Code(format!(
                    "edge {} emits {:?} which is outside its declared alphabet",
                    e.label, row.out
                )));
            }
            symbols[ei] = Some(row.out.clone());
        }
        messages[ai] = symbols.into_iter().map(Option::unwrap).collect();
    }

    // per-edge entropy and rate
    let mut edge_reports = Vec::with_capacity(spec.edges.len());
    for (ei, e) in spec.edges.iter().enumerate() {
        let mut groups: BTreeMap<&str, Rat> = BTreeMap::new();
        for (ai, (_, p)) in atoms.iter().enumerate() {
            let entry = groups
                .entry(messages[ai][ei].as_str())
                .or_insert_with(Rat::zero);
            *entry += p;
        }
        let masses: Vec<f64> = groups.values().map(Rat::to_f64).collect();
        let entropy = EntropyMeasure::Shannon.of_masses(&masses);
        let table = edge_table[ei].expect("checked above");
        let alphabet_size = if table.alphabet.is_empty() {
            groups.len()
        } else {
            table.alphabet.len()
        };
        let rate = (alphabet_size as f64).log2();
        let cap = e.capacity.to_f64();
        edge_reports.push(EdgeReport {
            label: e.label.clone(),
            entropy,
            rate,
            capacity: e.capacity.clone(),
            entropy_exceeds_capacity: entropy > cap + 1e-9,
            rate_exceeds_capacity: rate > cap + 1e-9,
        });
    }

    // decoding checks
    let mut decodings = Vec::new();
    let mut success = true;
    for (si, s) in spec.sources.iter().enumerate() {
        for sink in &s.demanded_at {
            let table = code
                .decoders
                .iter()
                .find(|d| d.sink == *sink && d.source == s.label)
                .ok_or_else(|| {
                    NetError::Code(format!(
                        "no decoding table for source {} at sink {sink}",
                        s.label
                    ))
                })?;
            let mut ok = true;
            let mut failures = Vec::new();
            for (ai, (outcome, _)) in atoms.iter().enumerate() {
                let mut input = Vec::new();
                for s2 in network.sources_at(sink) {
                    input.push(dist.alphabet(source_pos[s2])[outcome[source_pos[s2]]].clone());
                }
                for fi in network.in_edges(sink) {
                    input.push(messages[ai][fi].clone());
                }
                let row = table.table.table.iter().find(|r| r.input == input);
                let want = dist.alphabet(source_pos[si])[outcome[source_pos[si]]].clone();
                let got = match row {
                    Some(r) => r.out.clone(),
                    None => {
                        return Err(NetError::Code(format!(
                            "missing decoding entry for source {} at sink {sink} on input {:?}",
                            s.label, input
                        )))
                    }
                };
                if got != want {
                    ok = false;
                    if failures.len() < 8 {
                        failures.push((dist.outcome_symbols(outcome), got, want));
                    }
                }
            }
            success &= ok;
            decodings.push(DecodeReport {
                source: s.label.clone(),
                sink: sink.clone(),
                ok,
                failures,
            });
        }
    }

    Ok(CodeReport {
        edges: edge_reports,
        decodings,
        success,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Edge, NetworkSpec, Source};

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn bit_strings() -> Vec<String> {
        vec!["0".into(), "1".into()]
    }

    /// Two sources at separate nodes, a shared bottleneck carrying their
    /// xor, and cross edges so each sink can solve for the other source.
    fn butterfly() -> Network {
        let mk = |tail: &str, head: &str, label: &str| Edge {
            tail: tail.into(),
            heads: vec![head.into()],
            capacity: r("1"),
            label: label.into(),
        };
        NetworkSpec {
            nodes: vec![
                "a".into(),
                "b".into(),
                "c".into(),
                "d".into(),
                "e".into(),
                "f".into(),
            ],
            edges: vec![
                mk("a", "c", "ac"),
                mk("b", "c", "bc"),
                mk("c", "d", "cd"),
                mk("d", "e", "de"),
                mk("d", "f", "df"),
                mk("a", "e", "ae"),
                mk("b", "f", "bf"),
            ],
            sources: vec![
                Source {
                    label: "s1".into(),
                    at: vec!["a".into()],
                    demanded_at: vec!["f".into()],
                },
                Source {
                    label: "s2".into(),
                    at: vec!["b".into()],
                    demanded_at: vec!["e".into()],
                },
            ],
        }
        .validate()
        .unwrap()
    }

    fn two_fair_bits() -> JointDistribution {
        let mut entries = Vec::new();
        for x in 0..2usize {
            for y in 0..2usize {
                entries.push((vec![x.to_string(), y.to_string()], r("1/4")));
            }
        }
        JointDistribution::from_table(
            vec!["s1".into(), "s2".into()],
            vec![bit_strings(), bit_strings()],
            entries,
        )
        .unwrap()
    }

    fn identity_table(inputs: usize) -> CodeTable {
        // forward a single input bit (inputs = 1)
        assert_eq!(inputs, 1);
        CodeTable {
            alphabet: bit_strings(),
            table: vec![
                TableRow {
                    input: vec!["0".into()],
                    out: "0".into(),
                },
                TableRow {
                    input: vec!["1".into()],
                    out: "1".into(),
                },
            ],
        }
    }

    fn xor_table() -> CodeTable {
        let mut rows = Vec::new();
        for x in 0..2usize {
            for y in 0..2usize {
                rows.push(TableRow {
                    input: vec![x.to_string(), y.to_string()],
                    out: ((x + y) % 2).to_string(),
                });
            }
        }
        CodeTable {
            alphabet: bit_strings(),
            table: rows,
        }
    }

    fn butterfly_code() -> NetworkCode {
        NetworkCode {
            edges: vec![
                EdgeCode {
                    label: "ac".into(),
                    table: identity_table(1),
                },
                EdgeCode {
                    label: "bc".into(),
                    table: identity_table(1),
                },
                EdgeCode {
                    label: "cd".into(),
                    table: xor_table(),
                },
                EdgeCode {
                    label: "de".into(),
                    table: identity_table(1),
                },
                EdgeCode {
                    label: "df".into(),
                    table: identity_table(1),
                },
                EdgeCode {
                    label: "ae".into(),
                    table: identity_table(1),
                },
                EdgeCode {
                    label: "bf".into(),
                    table: identity_table(1),
                },
            ],
            decoders: vec![
                DecoderCode {
                    sink: "e".into(),
                    source: "s2".into(),
                    table: xor_table(),
                },
                DecoderCode {
                    sink: "f".into(),
                    source: "s1".into(),
                    table: xor_table(),
                },
            ],
        }
    }

    #[test]
    fn butterfly_xor_code_succeeds() {
        let net = butterfly();
        let report = evaluate_code(&net, &two_fair_bits(), &butterfly_code()).unwrap();
        assert!(report.success, "{}", report.render_text());
        let bottleneck = report.edges.iter().find(|e| e.label == "cd").unwrap();
        assert!((bottleneck.entropy - 1.0).abs() < 1e-12);
        assert!(!bottleneck.rate_exceeds_capacity);
    }

    #[test]
    fn identity_single_edge() {
        let net = NetworkSpec {
            nodes: vec!["a".into(), "b".into()],
            edges: vec![Edge {
                tail: "a".into(),
                heads: vec!["b".into()],
                capacity: r("1"),
                label: "ab".into(),
            }],
            sources: vec![Source {
                label: "s".into(),
                at: vec!["a".into()],
                demanded_at: vec!["b".into()],
            }],
        }
        .validate()
        .unwrap();
        let d = JointDistribution::scalar("s", &[("0", r("1/2")), ("1", r("1/2"))]).unwrap();
        let code = NetworkCode {
            edges: vec![EdgeCode {
                label: "ab".into(),
                table: identity_table(1),
            }],
            decoders: vec![DecoderCode {
                sink: "b".into(),
                source: "s".into(),
                table: identity_table(1),
            }],
        };
        let report = evaluate_code(&net, &d, &code).unwrap();
        assert!(report.success);
        assert!((report.edges[0].entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_entry_is_reported() {
        let net = butterfly();
        let mut code = butterfly_code();
        code.edges[2].table.table.pop();
        let err = evaluate_code(&net, &two_fair_bits(), &code).unwrap_err();
        assert!(err.to_string().contains("missing table entry"));
    }

    #[test]
    fn alphabet_violation_is_reported() {
        let net = butterfly();
        let mut code = butterfly_code();
        code.edges[2].table.table[0].out = "7".into();
        let err = evaluate_code(&net, &two_fair_bits(), &code).unwrap_err();
        assert!(err.to_string().contains("outside its declared alphabet"));
    }
}
