//! Named small categories used throughout the tests and suites.

use crate::fincat::{Arrow, FinCat};

fn ids(objects: &[&str]) -> (Vec<String>, Vec<Arrow>, Vec<usize>) {
    let objs: Vec<String> = objects.iter().map(|s| s.to_string()).collect();
    let arrows = objs.iter().enumerate().map(|(i, o)| Arrow::new(format!("id_{o}"), i, i)).collect();
    (objs, arrows, (0..objects.len()).collect())
}

/// The interval `0 -> 1`.
pub fn interval() -> FinCat {
    let (o, mut a, i) = ids(&["0", "1"]);
    a.push(Arrow::new("f", 0, 1));
    FinCat::build("I", o, a, i, |_, _| unreachable!()).expect("interval")
}

/// The walking isomorphism `J`.
pub fn walking_iso() -> FinCat {
    let (o, mut a, i) = ids(&["0", "1"]);
    a.push(Arrow::new("f", 0, 1));
    a.push(Arrow::new("g", 1, 0));
    FinCat::build("J", o, a, i, |g, f| match (g, f) {
        (3, 2) => 0,
        (2, 3) => 1,
        _ => unreachable!(),
    })
    .expect("walking isomorphism")
}

/// One object with an idempotent `e . e = e`.
pub fn walking_idempotent() -> FinCat {
    let (o, mut a, i) = ids(&["*"]);
    a.push(Arrow::new("e", 0, 0));
    FinCat::build("Idem", o, a, i, |_, _| 1).expect("walking idempotent")
}

/// Objects `a, b`, a section `s: a -> b`, a retraction `r: b -> a` with
/// `r . s = id_a`, and the idempotent `e = s . r` on `b`.
pub fn walking_section_retraction() -> FinCat {
    let (o, mut a, i) = ids(&["a", "b"]);
    a.push(Arrow::new("s", 0, 1)); // 2
    a.push(Arrow::new("r", 1, 0)); // 3
    a.push(Arrow::new("e", 1, 1)); // 4
    FinCat::build("Split", o, a, i, |g, f| match (g, f) {
        (3, 2) => 0,
        (2, 3) => 4,
        (4, 2) => 2,
        (3, 4) => 3,
        (4, 4) => 4,
        _ => unreachable!(),
    })
    .expect("section-retraction pair")
}

/// The poset `[n] = {0 < 1 < ... < n}`.
pub fn poset(n: usize) -> FinCat {
    thin(&format!("[{n}]"), n + 1, |i, j| i <= j)
}

/// Thin category on `0..n` for a reflexive transitive relation.
pub fn thin(name: &str, n: usize, le: impl Fn(usize, usize) -> bool) -> FinCat {
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut arrows: Vec<Arrow> = (0..n).map(|i| Arrow::new(format!("id_{i}"), i, i)).collect();
    let mut index = vec![vec![usize::MAX; n]; n];
    for (i, row) in index.iter_mut().enumerate() {
        row[i] = i;
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && le(i, j) {
                index[i][j] = arrows.len();
                arrows.push(Arrow::new(format!("{i}<{j}"), i, j));
            }
        }
    }
    let ends: Vec<(usize, usize)> = arrows.iter().map(|a| (a.src, a.tgt)).collect();
    FinCat::build(name, labels, arrows, (0..n).collect(), |g, f| index[ends[f].0][ends[g].1]).expect("thin category")
}

pub fn discrete(n: usize) -> FinCat {
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    discrete_on(&format!("Disc{n}"), &labels)
}

pub fn discrete_on(name: &str, labels: &[String]) -> FinCat {
    let arrows = labels.iter().enumerate().map(|(i, o)| Arrow::new(format!("id_{o}"), i, i)).collect();
    FinCat::build(name, labels.to_vec(), arrows, (0..labels.len()).collect(), |_, _| unreachable!())
        .expect("discrete category")
}

pub fn terminal() -> FinCat {
    let (o, a, i) = ids(&["*"]);
    FinCat::build("1", o, a, i, |_, _| unreachable!()).expect("terminal")
}

pub fn empty() -> FinCat {
    FinCat::build("0", vec![], vec![], vec![], |_, _| unreachable!()).expect("empty")
}

/// Two parallel arrows `f, g: x -> y`.
pub fn parallel_pair() -> FinCat {
    let (o, mut a, i) = ids(&["x", "y"]);
    a.push(Arrow::new("f", 0, 1));
    a.push(Arrow::new("g", 0, 1));
    FinCat::build("Par", o, a, i, |_, _| unreachable!()).expect("parallel pair")
}

/// Cyclic group of order `n` as a one-object category; arrow `k` is `g^k`.
pub fn cyclic_group(n: usize) -> FinCat {
    assert!(n >= 1);
    let o = vec!["*".to_string()];
    let mut a = vec![Arrow::new("id_*", 0, 0)];
    for k in 1..n {
        a.push(Arrow::new(format!("g^{k}"), 0, 0));
    }
    FinCat::build(format!("Z{n}"), o, a, vec![0], |g, f| (g + f) % n).expect("cyclic group")
}

/// The fixture library used by the core-law checks.
pub fn library() -> Vec<FinCat> {
    vec![
        interval(),
        walking_iso(),
        walking_idempotent(),
        walking_section_retraction(),
        poset(0),
        poset(1),
        poset(2),
        poset(3),
        parallel_pair(),
        cyclic_group(2),
        cyclic_group(3),
        terminal(),
        empty(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_satisfy_the_laws() {
        for c in library() {
            c.verify_laws().unwrap_or_else(|e| panic!("{}: {e}", c.name()));
        }
    }

    #[test]
    fn fixture_shapes() {
        assert_eq!(interval().num_arrows(), 3);
        assert!(walking_iso().is_groupoid());
        assert_eq!(walking_idempotent().num_arrows(), 2);
        let s = walking_section_retraction();
        assert_eq!(s.num_arrows(), 5);
        assert_eq!(s.hom(1, 1).len(), 2);
        assert_eq!(poset(2).num_arrows(), 6);
        assert_eq!(poset(3).num_arrows(), 10);
        assert!(cyclic_group(3).is_groupoid());
    }
}
