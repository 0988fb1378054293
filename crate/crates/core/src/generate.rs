//! Seeded instance generators and exhaustive enumeration of tiny categories.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::constructions::is_equivalence as is_equivalence_transport;
use crate::fibration::{unstraighten, MarkedFibration, Pseudofunctor};
use crate::fincat::{ArrId, Arrow, FinCat, ObjId};
use crate::fixtures::*;
use crate::functor::Functor;
use crate::search::{all_functors, find_isomorphism, SearchOptions};
use crate::fincat::Budget;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Free category on a quiver without cycles; arrows are paths.
pub fn free_on_dag(name: &str, n: usize, edges: &[(ObjId, ObjId)]) -> FinCat {
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut ends: Vec<(ObjId, ObjId)> = Vec::new();
    for x in 0..n {
        paths.push(Vec::new());
        ends.push((x, x));
    }
    let mut frontier: Vec<usize> = (0..n).collect();
    while let Some(k) = frontier.pop() {
        let (s, t) = ends[k];
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a == t {
                let mut p = paths[k].clone();
                p.push(e);
                paths.push(p);
                ends.push((s, b));
                frontier.push(paths.len() - 1);
            }
        }
    }
    let index: HashMap<Vec<usize>, usize> = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let label = |k: usize| -> String {
        if paths[k].is_empty() {
            format!("id_{}", ends[k].0)
        } else {
            paths[k].iter().map(|e| format!("e{e}")).collect::<Vec<_>>().join(".")
        }
    };
    let arrows = (0..paths.len()).map(|k| Arrow::new(label(k), ends[k].0, ends[k].1)).collect();
    let objects = (0..n).map(|x| x.to_string()).collect();
    FinCat::build(name, objects, arrows, (0..n).collect(), |g, f| {
        let mut p = paths[f].clone();
        p.extend(&paths[g]);
        index[&p]
    })
    .expect("free category on an acyclic quiver")
}

/// A random finite category with at most `max_objects` objects.
pub fn random_fincat(rng: &mut ChaCha8Rng, max_objects: usize) -> FinCat {
    let n = rng.gen_range(1..=max_objects.max(1));
    match rng.gen_range(0..4) {
        0 => {
            // random preorder: transitive closure of a random relation
            let mut le = vec![vec![false; n]; n];
            for (i, row) in le.iter_mut().enumerate() {
                row[i] = true;
            }
            for _ in 0..rng.gen_range(0..=n * 2) {
                let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                le[i][j] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if le[i][k] && le[k][j] {
                            le[i][j] = true;
                        }
                    }
                }
            }
            thin("Pre", n, |i, j| le[i][j])
        }
        1 => {
            let m = rng.gen_range(0..=n + 1);
            let edges: Vec<(ObjId, ObjId)> = (0..m)
                .filter_map(|_| {
                    let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    (a < b).then_some((a, b))
                })
                .collect();
            free_on_dag("Free", n, &edges)
        }
        2 => {
            let small = [walking_idempotent(), cyclic_group(2), cyclic_group(3), walking_iso(), walking_section_retraction()];
            small.choose(rng).expect("nonempty").clone()
        }
        _ => {
            let a = Arc::new(poset(rng.gen_range(0..=1)));
            let b = Arc::new([walking_idempotent(), cyclic_group(2), terminal(), interval()].choose(rng).expect("nonempty").clone());
            crate::constructions::product(&a, &b, &Budget::default()).expect("small product").cat.as_ref().clone()
        }
    }
}

/// Fibres used for generated opfibrations.
pub fn fibre_library() -> Vec<FinCat> {
    vec![terminal(), poset(1), discrete(2), walking_iso(), walking_idempotent(), cyclic_group(2), walking_section_retraction()]
}

/// Bases for generated opfibrations: thin forests plus `J` and `Idem`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseShape {
    Chain(usize),
    Vee,
    Wedge,
    Discrete(usize),
    Iso,
    Idempotent,
}

impl BaseShape {
    pub fn all() -> Vec<BaseShape> {
        vec![
            BaseShape::Chain(0),
            BaseShape::Chain(1),
            BaseShape::Chain(2),
            BaseShape::Chain(3),
            BaseShape::Vee,
            BaseShape::Wedge,
            BaseShape::Discrete(2),
            BaseShape::Iso,
            BaseShape::Idempotent,
        ]
    }

    pub fn cat(self) -> FinCat {
        match self {
            BaseShape::Chain(n) => poset(n),
            BaseShape::Vee => thin("V", 3, |i, j| i == j || i == 0),
            BaseShape::Wedge => thin("Lambda", 3, |i, j| i == j || j == 2),
            BaseShape::Discrete(n) => discrete(n),
            BaseShape::Iso => walking_iso(),
            BaseShape::Idempotent => walking_idempotent(),
        }
    }

    /// Generating arrows `(src, tgt)` of a thin forest base.
    fn covers(self) -> Vec<(ObjId, ObjId)> {
        match self {
            BaseShape::Chain(n) => (0..n).map(|i| (i, i + 1)).collect(),
            BaseShape::Vee => vec![(0, 1), (0, 2)],
            BaseShape::Wedge => vec![(0, 2), (1, 2)],
            _ => Vec::new(),
        }
    }
}

fn random_functor(a: &Arc<FinCat>, b: &Arc<FinCat>, rng: &mut ChaCha8Rng) -> Option<Functor> {
    let fs = all_functors(a, b, &SearchOptions::default(), &Budget::default()).ok()?;
    fs.choose(rng).cloned()
}

fn automorphisms(a: &Arc<FinCat>) -> Vec<Functor> {
    all_functors(a, a, &SearchOptions::iso(), &Budget::default()).unwrap_or_default()
}

/// A seeded strict functor into small categories, unstraightened.
///
/// With probability `iso_bias` a generating arrow gets an automorphism of
/// its (shared) fibre as transport. Returns the pseudofunctor, the
/// fibration and the generating arrows whose transport is invertible.
pub fn random_opfibration(rng: &mut ChaCha8Rng, shape: BaseShape, iso_bias: f64) -> (Pseudofunctor, MarkedFibration, Vec<ArrId>) {
    let lib = fibre_library();
    let base = Arc::new(shape.cat());
    let pick = |rng: &mut ChaCha8Rng| Arc::new(lib.choose(rng).expect("nonempty").clone());
    let (fibres, maps, isos) = match shape {
        BaseShape::Iso => {
            let a = pick(rng);
            let autos = automorphisms(&a);
            let s = autos.choose(rng).expect("identity is an automorphism").clone();
            let inv = s.inverse().expect("automorphism");
            // arrows: id_0, id_1, f, g
            let maps = vec![Functor::identity(a.clone()), Functor::identity(a.clone()), s, inv];
            (vec![a.clone(), a], maps, vec![2, 3])
        }
        BaseShape::Idempotent => {
            let a = pick(rng);
            let e = if rng.gen_bool(0.5) { Functor::identity(a.clone()) } else { Functor::constant(a.clone(), a.clone(), rng.gen_range(0..a.num_objects())) };
            let iso = e.is_identity();
            (vec![a.clone()], vec![Functor::identity(a), e], if iso { vec![1] } else { vec![] })
        }
        _ => {
            let n = base.num_objects();
            let covers = shape.covers();
            let mut fibres: Vec<Option<Arc<FinCat>>> = vec![None; n];
            let mut gen: BTreeMap<(ObjId, ObjId), Functor> = BTreeMap::new();
            let mut isos = Vec::new();
            // covers are listed so that a source is assigned before its target, except in the wedge
            for &(s, t) in &covers {
                let fs = fibres[s].get_or_insert_with(|| pick(rng)).clone();
                let make_iso = rng.gen_bool(iso_bias);
                if make_iso && fibres[t].is_none() {
                    fibres[t] = Some(fs.clone());
                }
                let ft = fibres[t].get_or_insert_with(|| pick(rng)).clone();
                let m = if Arc::ptr_eq(&fs, &ft) && make_iso {
                    automorphisms(&fs).choose(rng).expect("identity").clone()
                } else {
                    random_functor(&fs, &ft, rng).unwrap_or_else(|| Functor::constant(fs.clone(), ft.clone(), 0))
                };
                if is_equivalence_transport(&m) {
                    isos.push((s, t));
                }
                gen.insert((s, t), m);
            }
            let fibres: Vec<Arc<FinCat>> = fibres.into_iter().map(|f| f.unwrap_or_else(|| pick(rng))).collect();
            let maps = strict_on_forest(&base, &fibres, &gen);
            let isos = isos.iter().map(|&(s, t)| base.hom(s, t)[0]).collect();
            (fibres, maps, isos)
        }
    };
    let pf = Pseudofunctor::strict(base, fibres, maps).expect("generated data is a strict functor");
    let mf = unstraighten(&pf).expect("unstraightening of a strict functor");
    (pf, mf, isos)
}

/// Extend functors on the generating arrows of a thin forest to all arrows.
fn strict_on_forest(base: &Arc<FinCat>, fibres: &[Arc<FinCat>], gen: &BTreeMap<(ObjId, ObjId), Functor>) -> Vec<Functor> {
    fn path(gen: &BTreeMap<(ObjId, ObjId), Functor>, s: ObjId, t: ObjId) -> Option<Vec<(ObjId, ObjId)>> {
        if s == t {
            return Some(Vec::new());
        }
        for &(a, b) in gen.keys() {
            if a == s {
                if let Some(mut rest) = path(gen, b, t) {
                    rest.insert(0, (a, b));
                    return Some(rest);
                }
            }
        }
        None
    }
    (0..base.num_arrows())
        .map(|f| {
            let (s, t) = (base.src(f), base.tgt(f));
            let steps = path(gen, s, t).expect("every arrow of a thin forest is a path of covers");
            steps.iter().fold(Functor::identity(fibres[s].clone()), |acc, k| acc.then(&gen[k]))
        })
        .collect()
}

/// A seeded opfibration together with a nonempty `W` of arrows with invertible transport.
pub fn random_localisation_instance(rng: &mut ChaCha8Rng) -> (MarkedFibration, Vec<ArrId>) {
    let shapes = [BaseShape::Chain(1), BaseShape::Chain(2), BaseShape::Vee, BaseShape::Wedge, BaseShape::Chain(3)];
    loop {
        let shape = *shapes.choose(rng).expect("nonempty");
        let (_, mf, isos) = random_opfibration(rng, shape, 0.7);
        if isos.is_empty() {
            continue;
        }
        let mut w: Vec<ArrId> = isos.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        if w.is_empty() {
            w.push(isos[0]);
        }
        return (mf, w);
    }
}

/// Span `B <-f- A -g-> C`, opfibrations over `B` and `C`, and a
/// cocartesian functor `phi: f^*Y -> g^*Z` over `A`.
#[derive(Clone, Debug)]
pub struct CocommaInstance {
    pub mf_p: MarkedFibration,
    pub mf_q: MarkedFibration,
    pub f: Functor,
    pub g: Functor,
    pub phi: Functor,
}

/// A seeded cocomma gluing instance, or `None` when no `phi` exists.
pub fn random_cocomma_instance(rng: &mut ChaCha8Rng) -> Option<CocommaInstance> {
    let shapes = [BaseShape::Chain(0), BaseShape::Chain(1), BaseShape::Discrete(2), BaseShape::Iso];
    let apexes = [terminal(), discrete(2), poset(1)];
    let sp = *shapes.choose(rng)?;
    let (_, mf_p, _) = random_opfibration(rng, sp, 0.5);
    let sq = *shapes.choose(rng)?;
    let (_, mf_q, _) = random_opfibration(rng, sq, 0.5);
    let a = Arc::new(apexes.choose(rng)?.clone());
    let f = random_functor(&a, &mf_p.p.cod, rng)?;
    let g = random_functor(&a, &mf_q.p.cod, rng)?;
    let (fy, gz) = crate::descent_colimits::cocomma_pullbacks(&mf_p, &mf_q, &f, &g).ok()?;
    let phis = crate::descent::cocartesian_functors(&fy, &gz);
    let phi = phis.choose(rng)?.clone();
    Some(CocommaInstance { mf_p, mf_q, f, g, phi })
}

/// All categories with at most `max_objects` objects and `max_arrows` arrows, up to isomorphism.
pub fn small_categories(max_objects: usize, max_arrows: usize) -> Vec<FinCat> {
    let mut out: Vec<FinCat> = Vec::new();
    for n in 1..=max_objects {
        let pairs: Vec<(ObjId, ObjId)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
        let mut sizes = vec![0usize; pairs.len()];
        loop {
            let total: usize = sizes.iter().sum::<usize>() + n;
            if total <= max_arrows {
                for cat in categories_with_hom_sizes(n, &pairs, &sizes) {
                    let c = Arc::new(cat);
                    if !out.iter().any(|d| find_isomorphism(&Arc::new(d.clone()), &c).is_some()) {
                        out.push(c.as_ref().clone());
                    }
                }
            }
            // odometer over extra (non-identity) arrow counts
            let mut k = 0;
            loop {
                if k == sizes.len() {
                    break;
                }
                sizes[k] += 1;
                if sizes.iter().sum::<usize>() + n <= max_arrows {
                    break;
                }
                sizes[k] = 0;
                k += 1;
            }
            if k == sizes.len() {
                break;
            }
        }
    }
    out
}

fn categories_with_hom_sizes(n: usize, pairs: &[(ObjId, ObjId)], extra: &[usize]) -> Vec<FinCat> {
    let mut arrows: Vec<Arrow> = (0..n).map(|x| Arrow::new(format!("id_{x}"), x, x)).collect();
    for (k, &(x, y)) in pairs.iter().enumerate() {
        for i in 0..extra[k] {
            arrows.push(Arrow::new(format!("a{x}{y}_{i}"), x, y));
        }
    }
    let m = arrows.len();
    let homs: Vec<Vec<ArrId>> = pairs.iter().map(|&(x, y)| (0..m).filter(|&a| arrows[a].src == x && arrows[a].tgt == y).collect()).collect();
    let hom = |x: ObjId, y: ObjId| &homs[x * n + y];
    let ends: Vec<(ObjId, ObjId)> = arrows.iter().map(|a| (a.src, a.tgt)).collect();
    let ends = &ends;
    let slots: Vec<(ArrId, ArrId)> = (n..m).flat_map(|f| (n..m).filter(move |&g| ends[g].0 == ends[f].1).map(move |g| (g, f))).collect();
    let choices: Vec<&Vec<ArrId>> = slots.iter().map(|&(g, f)| hom(arrows[f].src, arrows[g].tgt)).collect();
    if choices.iter().any(|c| c.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut pick = vec![0usize; slots.len()];
    loop {
        let table: HashMap<(ArrId, ArrId), ArrId> = slots.iter().zip(&pick).enumerate().map(|(k, (&s, &c))| (s, choices[k][c])).collect();
        let objects = (0..n).map(|x| x.to_string()).collect();
        if let Ok(c) = FinCat::build("Small", objects, arrows.clone(), (0..n).collect(), |g, f| table[&(g, f)]) {
            if c.verify_laws().is_ok() {
                out.push(c);
            }
        }
        let mut k = 0;
        while k < pick.len() {
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_on_dag_counts_paths() {
        let c = free_on_dag("Q", 3, &[(0, 1), (1, 2), (0, 2)]);
        // 3 identities, 3 edges, one path of length 2
        assert_eq!(c.num_arrows(), 7);
        assert_eq!(c.hom(0, 2).len(), 2);
        c.verify_laws().unwrap();
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        for seed in 0..20 {
            let a = random_fincat(&mut rng(seed), 5);
            let b = random_fincat(&mut rng(seed), 5);
            assert_eq!(a, b);
            a.verify_laws().unwrap();
            assert!(a.num_objects() <= 5);
        }
    }

    #[test]
    fn tiny_category_census() {
        // categories with one object and at most 3 arrows: monoids of order 1, 2, 3 (1 + 2 + 7)
        assert_eq!(small_categories(1, 3).len(), 10);
        // two objects and at most 3 arrows: discrete, an arrow, and a point beside Idem or Z2
        assert_eq!(small_categories(2, 3).len() - small_categories(1, 3).len(), 4);
    }

    #[test]
    fn random_opfibrations_are_fibrations() {
        let mut r = rng(4);
        for shape in BaseShape::all() {
            let (pf, mf, isos) = random_opfibration(&mut r, shape, 0.5);
            pf.check().unwrap();
            mf.check().unwrap();
            for f in isos {
                assert!(is_equivalence_transport(mf.transport(f)));
            }
        }
    }
}
