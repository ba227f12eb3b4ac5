use entrobound::auxgen::{linearly_correlated, SubspaceBasis};
use entrobound::netmodel::*;
use entrobound::polycone::LpStatus;
use entrobound::ratio::Rat;
use std::time::Instant;

fn e(i: usize, m: usize) -> Vec<u64> { let mut v = vec![0u64; m]; v[i] = 1; v }

fn main() {
    let basis = SubspaceBasis { q: 2, m: 3, bases: vec![
        vec![e(0,3), e(1,3)], vec![e(0,3), e(2,3)], vec![e(1,3), e(2,3)]] };
    let built = linearly_correlated(&basis).unwrap();
    let sources = built.distribution.with_variable_names(vec!["s1".into(),"s2".into(),"s3".into()]).unwrap();
    let joint = built.with_keys.with_variable_names(vec!["s1".into(),"s2".into(),"s3".into(),"K1".into(),"K2".into(),"K3".into()]).unwrap();
    let r = |s: &str| -> Rat { s.parse().unwrap() };
    let net = NetworkSpec {
        nodes: vec!["1".into(),"3".into(),"4".into(),"5".into()],
        edges: vec![
            Edge { tail:"1".into(), heads: vec!["3".into(),"4".into(),"5".into()], capacity: r("1"), label:"e1".into() },
            Edge { tail:"1".into(), heads: vec!["3".into()], capacity: r("1"), label:"e2".into() },
            Edge { tail:"1".into(), heads: vec!["4".into()], capacity: r("1"), label:"e3".into() },
            Edge { tail:"1".into(), heads: vec!["5".into()], capacity: r("1"), label:"e4".into() },
        ],
        sources: vec![
            Source { label:"s1".into(), at: vec!["1".into()], demanded_at: vec!["3".into()] },
            Source { label:"s2".into(), at: vec!["1".into()], demanded_at: vec!["4".into()] },
            Source { label:"s3".into(), at: vec!["1".into()], demanded_at: vec!["5".into()] },
        ],
    }.validate().unwrap();
    eprintln!("built inputs");
    let espec = SourceEntropySpec::Distribution(sources);
    let tuple = vec![r("1"), r("1"), r("1"), r("1")];

    let t0 = Instant::now();
    let (out, _) = check_tuple(&net, &espec, &BoundVariant::Basic, &tuple).unwrap();
    println!("basic  : {:?} in {:.2?}", out.status, t0.elapsed());
    assert_eq!(out.status, LpStatus::Feasible);

    let t0 = Instant::now();
    let (out, _) = check_tuple(&net, &espec, &BoundVariant::Auxiliary { joint: joint.clone() }, &tuple).unwrap();
    println!("aux    : {:?} in {:.2?}", out.status, t0.elapsed());
    assert_eq!(out.status, LpStatus::Infeasible);

    let t0 = Instant::now();
    let (t, _, _) = min_scaling(&net, &espec, &BoundVariant::Basic, &tuple).unwrap();
    println!("scale b: t*={} in {:.2?}", t, t0.elapsed());

    let t0 = Instant::now();
    let (t, _, _) = min_scaling(&net, &espec, &BoundVariant::Auxiliary { joint }, &tuple).unwrap();
    println!("scale a: t*={} in {:.2?}", t, t0.elapsed());
}
