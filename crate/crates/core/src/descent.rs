//! Descent for cocartesian fibrations along localisations, cocommas,
//! sequential colimits and groupoids.

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::constructions::{is_pullback_of_sets, pullback, Span};
use crate::fibration::{fibre, inverts_w, is_cocartesian, is_cocartesian_fibration, FibrationError, MarkedFibration, Result};
use crate::fincat::{ArrId, Budget, FinCat, ObjId};
use crate::functor::Functor;
use crate::presentation::{localize, Localisation, Status};
use crate::search::{for_each_functor, SearchOptions};

/// `q: E -> C` together with `i_u: E -> E[W_u^-1]`, `i: C -> C[W^-1]` and the induced `q'`.
#[derive(Clone, Debug)]
pub struct LocalizedFunctor {
    pub q: Functor,
    pub w: Vec<ArrId>,
    pub w_u: Vec<ArrId>,
    pub i_u: Functor,
    pub i: Functor,
    pub q_prime: Functor,
}

fn exact(loc: &Localisation, what: &str) -> Result<Functor> {
    match (&loc.i, loc.saturation.status) {
        (Some(i), Status::Exact) => Ok(i.clone()),
        _ => Err(FibrationError::Truncated(format!("{what}: growth {:?}", loc.saturation.growth))),
    }
}

/// Localise both levels of `q` and extend `q` to the localisations.
pub fn localize_functor(q: &Functor, w_u: &[ArrId], w: &[ArrId], max_word_len: usize) -> Result<LocalizedFunctor> {
    let (e, c) = (&q.dom, &q.cod);
    let le = localize(e, w_u, max_word_len)?;
    let lc = localize(c, w, max_word_len)?;
    let i_u = exact(&le, "total category")?;
    let i = exact(&lc, "base")?;
    let cp = i.cod.clone();
    let mut gen_map = vec![usize::MAX; le.saturation.presentation.generators.len()];
    for a in 0..e.num_arrows() {
        if let Some(g) = le.gen_of[a] {
            gen_map[g] = i.arr[q.arr[a]];
        }
    }
    for &(a, k) in &le.inverse_gen {
        gen_map[k] = cp
            .inverse(i.arr[q.arr[a]])
            .ok_or_else(|| FibrationError::Precondition(format!("`{}` does not lie over W", e.arr_label(a))))?;
    }
    let obj: Vec<ObjId> = q.obj.clone();
    let q_prime = le.saturation.functor_to(&cp, &obj, &gen_map)?;
    Ok(LocalizedFunctor { q: q.clone(), w: w.to_vec(), w_u: w_u.to_vec(), i_u, i, q_prime })
}

/// The gap functor `X -> P` into a pullback span, from `u: X -> A` and `v: X -> B`.
pub fn gap_map(span: &Span, u: &Functor, v: &Functor) -> Option<Functor> {
    let p = &span.cat;
    let objs: HashMap<(ObjId, ObjId), ObjId> = (0..p.num_objects()).map(|o| ((span.left.obj[o], span.right.obj[o]), o)).collect();
    let arrs: HashMap<(ArrId, ArrId), ArrId> = (0..p.num_arrows()).map(|a| ((span.left.arr[a], span.right.arr[a]), a)).collect();
    let x = &u.dom;
    let obj = (0..x.num_objects()).map(|o| objs.get(&(u.obj[o], v.obj[o])).copied()).collect::<Option<Vec<_>>>()?;
    let arr = (0..x.num_arrows()).map(|a| arrs.get(&(u.arr[a], v.arr[a])).copied()).collect::<Option<Vec<_>>>()?;
    Some(Functor::new_unchecked(x.clone(), p.clone(), obj, arr))
}

/// Result of localising a cocartesian fibration at `W`.
#[derive(Clone, Debug)]
pub struct LocalizedFibration {
    pub loc: LocalizedFunctor,
    /// `q'` as a marked fibration, when it is one.
    pub fibration: Option<MarkedFibration>,
    /// `E -> E' x_{C'} C` is an isomorphism.
    pub square_is_pullback: bool,
    /// Images of marked arrows of `q` are marked for `q'`.
    pub marks_preserved: bool,
}

impl LocalizedFibration {
    pub fn verified(&self) -> bool {
        self.fibration.is_some() && self.square_is_pullback && self.marks_preserved
    }
}

/// Marked lifts of the arrows of `W`.
pub fn cocartesian_lifts(mf: &MarkedFibration, w: &[ArrId]) -> Vec<ArrId> {
    (0..mf.p.dom.num_arrows()).filter(|&a| mf.marked[a] && w.contains(&mf.p.arr[a])).collect()
}

pub fn localize_fibration(mf: &MarkedFibration, w: &[ArrId], max_word_len: usize) -> Result<LocalizedFibration> {
    if !inverts_w(mf, w) {
        return Err(FibrationError::Precondition("transport along W is not invertible".into()));
    }
    let w_u = cocartesian_lifts(mf, w);
    let loc = localize_functor(&mf.p, &w_u, w, max_word_len)?;
    let fibration = is_cocartesian_fibration(&loc.q_prime).ok();
    let span = pullback(&loc.q_prime, &loc.i, &Budget::default())?;
    let square_is_pullback = gap_map(&span, &loc.i_u, &mf.p).is_some_and(|g| g.is_bijective());
    let marks_preserved = (0..mf.p.dom.num_arrows()).filter(|&a| mf.marked[a]).all(|a| is_cocartesian(&loc.q_prime, loc.i_u.arr[a]));
    Ok(LocalizedFibration { loc, fibration, square_is_pullback, marks_preserved })
}

/// `E(x, y) -> E'(x, y)` over `C(qx, qy) -> C'(qx, qy)` is a pullback of sets.
pub fn mapping_square_a(lf: &LocalizedFunctor, x: ObjId, y: ObjId) -> bool {
    let (q, e, c) = (&lf.q, &*lf.q.dom, &*lf.q.cod);
    let (ep, cp) = (&*lf.i_u.cod, &*lf.i.cod);
    let d = e.hom(x, y);
    let d_to_b: Vec<usize> = d.iter().map(|&h| ep.hom_index(lf.i_u.arr[h])).collect();
    let d_to_c: Vec<usize> = d.iter().map(|&h| c.hom_index(q.arr[h])).collect();
    let b_to_a: Vec<usize> = ep.hom(x, y).iter().map(|&h| cp.hom_index(lf.q_prime.arr[h])).collect();
    let c_to_a: Vec<usize> = c.hom(q.obj[x], q.obj[y]).iter().map(|&h| cp.hom_index(lf.i.arr[h])).collect();
    is_pullback_of_sets(&d_to_b, &d_to_c, &b_to_a, &c_to_a)
}

/// Components of `x / E_c / i_u y` over `C(qx, c) x C'(c, qy)` and `E'(x, y)`.
pub fn mapping_square_b(lf: &LocalizedFunctor, x: ObjId, y: ObjId, c: ObjId) -> bool {
    let (q, e, base) = (&lf.q, &*lf.q.dom, &*lf.q.cod);
    let (ep, cp) = (&*lf.i_u.cod, &*lf.i.cod);
    let fib = fibre(q, c);
    let mut triples = Vec::new();
    for &z in &fib.incl.obj {
        for &u in e.hom(x, z) {
            for &v in ep.hom(z, y) {
                triples.push((z, u, v));
            }
        }
    }
    let pos: HashMap<(ObjId, ArrId, ArrId), usize> = triples.iter().enumerate().map(|(k, &t)| (t, k)).collect();
    let mut uf = UnionFind::new(triples.len());
    for (k, &(z, u, v)) in triples.iter().enumerate() {
        for &h in &fib.incl.arr {
            if e.src(h) != z {
                continue;
            }
            let z2 = e.tgt(h);
            for &v2 in ep.hom(z2, y) {
                if ep.compose(v2, lf.i_u.arr[h]) == v {
                    uf.union(k, pos[&(z2, e.compose(h, u), v2)]);
                }
            }
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    let mut seen = HashMap::new();
    for k in 0..triples.len() {
        let r = uf.find(k);
        if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(r) {
            slot.insert(reps.len());
            reps.push(k);
        }
    }
    let left = base.hom(q.obj[x], c);
    let right = cp.hom(c, q.obj[y]);
    let d_to_b: Vec<usize> = reps
        .iter()
        .map(|&k| {
            let (_, u, v) = triples[k];
            ep.hom_index(ep.compose(v, lf.i_u.arr[u]))
        })
        .collect();
    let d_to_c: Vec<usize> = reps
        .iter()
        .map(|&k| {
            let (_, u, v) = triples[k];
            base.hom_index(q.arr[u]) * right.len() + cp.hom_index(lf.q_prime.arr[v])
        })
        .collect();
    let b_to_a: Vec<usize> = ep.hom(x, y).iter().map(|&h| cp.hom_index(lf.q_prime.arr[h])).collect();
    let c_to_a: Vec<usize> = left
        .iter()
        .flat_map(|&a| right.iter().map(move |&b| (a, b)))
        .map(|(a, b)| cp.hom_index(cp.compose(b, lf.i.arr[a])))
        .collect();
    is_pullback_of_sets(&d_to_b, &d_to_c, &b_to_a, &c_to_a)
}

/// Both squares for every pair of objects (and every `c` for the second).
pub fn mapping_squares_all(lf: &LocalizedFunctor) -> (bool, bool) {
    let e = &*lf.q.dom;
    let n = e.num_objects();
    let a = (0..n).all(|x| (0..n).all(|y| mapping_square_a(lf, x, y)));
    let b = (0..n).all(|x| (0..n).all(|y| (0..lf.q.cod.num_objects()).all(|c| mapping_square_b(lf, x, y, c))));
    (a, b)
}

/// Pull back a fibration over `C'` along `i: C -> C'`.
pub fn pullback_fibration(mf: &MarkedFibration, i: &Functor) -> Result<(MarkedFibration, Span)> {
    let span = pullback(&mf.p, i, &Budget::default())?;
    Ok((is_cocartesian_fibration(&span.right)?, span))
}

/// Functors `X -> Y` over the common base sending marked arrows to marked arrows.
pub fn cocartesian_functors(x: &MarkedFibration, y: &MarkedFibration) -> Vec<Functor> {
    let (px, py) = (x.p.clone(), y.p.clone());
    let (mx, my) = (x.marked.clone(), y.marked.clone());
    let (px2, py2) = (px.clone(), py.clone());
    let opts = SearchOptions::default()
        .with_obj_filter(move |a, b| px.obj[a] == py.obj[b])
        .with_arr_filter(move |a, b| px2.arr[a] == py2.arr[b] && (!mx[a] || my[b]));
    let mut out = Vec::new();
    for_each_functor(&x.p.dom, &y.p.dom, &opts, &mut |f| {
        out.push(f.clone());
        true
    });
    out
}

/// Some equivalence `X -> Y` over the base, if one exists.
pub fn find_equivalence_over(x: &Functor, y: &Functor) -> Option<Functor> {
    let (px, py) = (x.clone(), y.clone());
    let (px2, py2) = (x.clone(), y.clone());
    let opts = SearchOptions::default()
        .with_obj_filter(move |a, b| px.obj[a] == py.obj[b])
        .with_arr_filter(move |a, b| px2.arr[a] == py2.arr[b]);
    let mut found = None;
    for_each_functor(&x.dom, &y.dom, &opts, &mut |f| {
        if crate::constructions::is_equivalence(f) {
            found = Some(f.clone());
            false
        } else {
            true
        }
    });
    found
}

/// `G |-> i^* G` from cocartesian functors over `C'` to those over `C` is a bijection.
pub fn pullback_is_bijective_on_functors(x: &MarkedFibration, y: &MarkedFibration, i: &Functor) -> Result<bool> {
    let (px, sx) = pullback_fibration(x, i)?;
    let (py, sy) = pullback_fibration(y, i)?;
    let over_c = cocartesian_functors(&px, &py);
    let over_cp = cocartesian_functors(x, y);
    let mut images = Vec::new();
    for g in &over_cp {
        let u = sx.left.then(g);
        let Some(h) = gap_map(&sy, &u, &sx.right) else {
            return Ok(false);
        };
        images.push((h.obj, h.arr));
    }
    let distinct: std::collections::HashSet<_> = images.iter().cloned().collect();
    let members = images.iter().all(|im| over_c.iter().any(|f| (&f.obj, &f.arr) == (&im.0, &im.1)));
    Ok(distinct.len() == images.len() && members && over_c.len() == images.len())
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DescentReport {
    pub inverts_w: bool,
    /// Pulling `q'` back along `i` gives a cocartesian fibration inverting `W`.
    pub pullback_inverts_w: bool,
    /// `q'` is a cocartesian fibration whose pullback is `q`.
    pub preimage: bool,
    /// Cocartesian functors `q' -> q'` over `C'` biject with those between the pullbacks.
    pub fully_faithful: bool,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.inverts_w && self.pullback_inverts_w && self.preimage && self.fully_faithful
    }
}

pub fn descent_localisation_check(mf: &MarkedFibration, w: &[ArrId], max_word_len: usize) -> Result<DescentReport> {
    let lf = localize_fibration(mf, w, max_word_len)?;
    let Some(qp) = lf.fibration.clone() else {
        return Ok(DescentReport { inverts_w: true, pullback_inverts_w: false, preimage: false, fully_faithful: false });
    };
    let (back, _) = pullback_fibration(&qp, &lf.loc.i)?;
    let pullback_inverts_w = inverts_w(&back, w);
    let fully_faithful = pullback_is_bijective_on_functors(&qp, &qp, &lf.loc.i)?;
    Ok(DescentReport { inverts_w: true, pullback_inverts_w, preimage: lf.verified(), fully_faithful })
}

/// Localisation of the base, exposed for callers holding only the category.
pub fn base_localisation(c: &Arc<FinCat>, w: &[ArrId], max_word_len: usize) -> Result<Functor> {
    exact(&localize(c, w, max_word_len)?, "base")
}

/// Outcome of the exhaustive descent census over the interval with `W = {f}`.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DescentCensus {
    pub fibres: usize,
    /// Opfibrations over `J` generated, one per fibre and automorphism.
    pub over_iso: usize,
    /// Opfibrations over the interval with equivalence transport.
    pub over_interval: usize,
    /// Every pullback along `i: I -> J` inverts `f`.
    pub pullbacks_invert_w: bool,
    /// Every opfibration over the interval inverting `f` is, up to equivalence, a pullback.
    pub essentially_surjective: bool,
    /// Pullbacks are equivalent only if the originals are.
    pub injective: bool,
    /// Cocartesian functor sets biject under pullback, for every ordered pair.
    pub fully_faithful: bool,
    pub fully_faithful_pairs: usize,
}

impl DescentCensus {
    pub fn passed(&self) -> bool {
        self.pullbacks_invert_w && self.essentially_surjective && self.injective && self.fully_faithful
    }
}

/// Opfibrations over `J` and over the interval with equivalence transport, for
/// fibres with at most `max_objects` objects and `max_arrows` arrows, and the
/// comparison along the localisation `I -> J`.
pub fn descent_interval_census(max_objects: usize, max_arrows: usize, max_word_len: usize) -> Result<DescentCensus> {
    use crate::constructions::is_equivalence;
    use crate::fibration::{unstraighten, Pseudofunctor};
    use crate::search::all_functors;
    use rayon::prelude::*;

    let interval = Arc::new(crate::fixtures::interval());
    let f = interval.find_arrow("f").expect("interval arrow");
    let i = base_localisation(&interval, &[f], max_word_len)?;
    let j = i.cod.clone();
    let (fj, gj) = (i.arr[f], j.inverse(i.arr[f]).expect("localisation inverts f"));
    let mut fibres: Vec<Arc<FinCat>> = vec![Arc::new(crate::fixtures::empty())];
    fibres.extend(crate::generate::small_categories(max_objects, max_arrows).into_iter().map(Arc::new));
    let budget = Budget::default();

    let mut over_j = Vec::new();
    for a in &fibres {
        for s in all_functors(a, a, &SearchOptions::iso(), &budget)? {
            let inv = s.inverse().expect("automorphism");
            let mut maps = vec![Functor::identity(a.clone()); j.num_arrows()];
            maps[fj] = s;
            maps[gj] = inv;
            let pf = Pseudofunctor::strict(j.clone(), vec![a.clone(), a.clone()], maps)?;
            over_j.push(unstraighten(&pf)?);
        }
    }
    let mut over_i = Vec::new();
    for a in &fibres {
        for b in &fibres {
            for g in all_functors(a, b, &SearchOptions::default(), &budget)? {
                if !is_equivalence(&g) {
                    continue;
                }
                let pf = Pseudofunctor::strict(interval.clone(), vec![a.clone(), b.clone()], vec![Functor::identity(a.clone()), Functor::identity(b.clone()), g])?;
                over_i.push(unstraighten(&pf)?);
            }
        }
    }

    let pulled: Vec<MarkedFibration> = over_j.par_iter().map(|y| pullback_fibration(y, &i).map(|r| r.0)).collect::<Result<_>>()?;
    let pullbacks_invert_w = pulled.iter().all(|x| inverts_w(x, &[f]));
    let essentially_surjective = over_i
        .par_iter()
        .map(|x| -> Result<bool> {
            let lf = localize_fibration(x, &[f], max_word_len)?;
            let Some(xp) = lf.fibration.as_ref().filter(|_| lf.verified()) else { return Ok(false) };
            Ok(over_j.iter().any(|y| find_equivalence_over(&xp.p, &y.p).is_some()))
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    let n = over_j.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let injective = pairs.par_iter().filter(|&&(a, b)| a < b).all(|&(a, b)| {
        let down = find_equivalence_over(&pulled[a].p, &pulled[b].p).is_some();
        !down || find_equivalence_over(&over_j[a].p, &over_j[b].p).is_some()
    });
    let ff: Vec<bool> = pairs.par_iter().map(|&(a, b)| pullback_is_bijective_on_functors(&over_j[a], &over_j[b], &i)).collect::<Result<_>>()?;
    Ok(DescentCensus {
        fibres: fibres.len(),
        over_iso: over_j.len(),
        over_interval: over_i.len(),
        pullbacks_invert_w,
        essentially_surjective,
        injective,
        fully_faithful: ff.iter().all(|&b| b),
        fully_faithful_pairs: ff.len(),
    })
}

/// The Conduché fibration `q: E -> [3]` with fibres `A, B, A, B`
/// (`A` the walking idempotent, `B` the walking section-retraction pair) and
/// profunctors `F, F^-1, F` along `0 -> 1 -> 2 -> 3`, where `F: A -> B`
/// sends `e` to the idempotent on `b`.
///
/// Heteromorphisms `x_i -> y_j` (`i <= j`) are `B(Fx, Fy)`, reading `F` as
/// the identity on `B`-levels; composition is composition in `B`.
pub fn delta3_conduche() -> Functor {
    use crate::fincat::Arrow;
    use crate::fixtures::{poset, walking_idempotent, walking_section_retraction};
    let a = walking_idempotent();
    let b = walking_section_retraction();
    let b_of_a = b.find_object("b").expect("object b");
    // (level, object of B it is sent to, label)
    let mut objs: Vec<(usize, ObjId, String)> = Vec::new();
    for level in 0..4 {
        if level % 2 == 0 {
            objs.push((level, b_of_a, format!("{level}:{}", a.obj_label(0))));
        } else {
            for o in 0..b.num_objects() {
                objs.push((level, o, format!("{level}:{}", b.obj_label(o))));
            }
        }
    }
    let mut arrows = Vec::new();
    let mut key = Vec::new();
    let mut index = HashMap::new();
    for (x, &(i, bx, ref lx)) in objs.iter().enumerate() {
        for (y, &(j, by, _)) in objs.iter().enumerate() {
            if i > j {
                continue;
            }
            for &beta in b.hom(bx, by) {
                let label = if x == y && b.is_identity(beta) { format!("id_{lx}") } else { format!("{i}{j}:{}:{}", lx, b.arr_label(beta)) };
                let label = if x == y || i != j { label } else { format!("{i}:{}", b.arr_label(beta)) };
                index.insert((i, j, x, beta), arrows.len());
                key.push((i, j, x, beta));
                arrows.push(Arrow::new(label, x, y));
            }
        }
    }
    let ident: Vec<ArrId> = objs.iter().enumerate().map(|(x, &(i, bx, _))| index[&(i, i, x, b.id(bx))]).collect();
    let names = objs.iter().map(|o| o.2.clone()).collect();
    let e = FinCat::build("E_D3", names, arrows, ident, |g, f| {
        let (i, _, x, beta) = key[f];
        let (_, k, _, beta2) = key[g];
        index[&(i, k, x, b.compose(beta2, beta))]
    })
    .expect("profunctor composition is a category");
    let d3 = Arc::new(poset(3));
    let e = Arc::new(e);
    let obj = objs.iter().map(|o| o.0).collect();
    let arr = key.iter().map(|&(i, j, _, _)| d3.hom(i, j)[0]).collect();
    Functor::new(e, d3, obj, arr).expect("projection to the levels")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::product;
    use crate::fibration::{conduche_inverts_w, is_conduche};
    use crate::fixtures::{interval, walking_idempotent, walking_iso, walking_section_retraction};
    use crate::generate::{random_localisation_instance, rng};
    use crate::search::find_equivalence;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    fn product_over_interval(f: FinCat) -> MarkedFibration {
        let span = product(&arc(interval()), &arc(f), &Budget::default()).unwrap();
        is_cocartesian_fibration(&span.left).unwrap()
    }

    #[test]
    fn empty_w_changes_nothing() {
        let mf = product_over_interval(walking_idempotent());
        let lf = localize_fibration(&mf, &[], 8).unwrap();
        assert!(lf.verified());
        assert!(lf.loc.i_u.is_bijective() && lf.loc.i.is_bijective());
        assert_eq!(mapping_squares_all(&lf.loc), (true, true));
    }

    #[test]
    fn product_over_interval_localises_to_product_over_iso() {
        let mf = product_over_interval(walking_section_retraction());
        let f = mf.p.cod.find_arrow("f").unwrap();
        let lf = localize_fibration(&mf, &[f], 8).unwrap();
        assert!(lf.verified());
        let total = &lf.loc.q_prime.dom;
        let expected = product(&arc(walking_iso()), &arc(walking_section_retraction()), &Budget::default()).unwrap();
        assert!(find_equivalence(total, &expected.cat).is_some());
        assert_eq!(total.num_objects(), 4);
        assert_eq!(total.num_arrows(), 4 * walking_section_retraction().num_arrows());
        assert_eq!(mapping_squares_all(&lf.loc), (true, true));
        let report = descent_localisation_check(&mf, &[f], 8).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn non_invertible_transport_is_rejected() {
        // transport of the dom fibration over the interval is the constant map
        let i = arc(interval());
        let thin = crate::fixtures::thin("le", 3, |a, b| a <= b);
        let q = Functor::from_objects_thin(arc(thin), i.clone(), vec![0, 0, 1]).unwrap();
        let mf = is_cocartesian_fibration(&q).unwrap();
        let f = i.find_arrow("f").unwrap();
        assert!(matches!(localize_fibration(&mf, &[f], 8), Err(FibrationError::Precondition(_))));
    }

    #[test]
    fn seeded_instances_satisfy_descent() {
        let mut r = rng(5);
        for _ in 0..12 {
            let (mf, w) = random_localisation_instance(&mut r);
            let lf = localize_fibration(&mf, &w, 10).unwrap();
            assert!(lf.verified(), "{}", mf.p.dom.name());
            assert_eq!(mapping_squares_all(&lf.loc), (true, true));
        }
    }

    #[test]
    fn delta3_is_conduche_inverting_w_but_not_cocartesian() {
        let q = delta3_conduche();
        assert_eq!(q.dom.num_objects(), 6);
        assert!(is_conduche(&q));
        let base = &q.cod;
        let w = [base.hom(0, 2)[0], base.hom(1, 3)[0]];
        assert!(conduche_inverts_w(&q, &w));
        assert!(is_cocartesian_fibration(&q).is_err());
        let fib = crate::fibration::fibres(&q);
        assert!(find_equivalence(&fib[0].cat, &walking_idempotent().into()).is_some());
        assert!(find_equivalence(&fib[1].cat, &walking_section_retraction().into()).is_some());
        assert!(crate::search::find_equivalence(&fib[0].cat, &fib[1].cat).is_none());
        let eq = base_localisation(base, &w, 8).unwrap();
        // 2-out-of-6: every arrow of [3] becomes invertible
        assert_eq!(eq.cod.num_arrows(), 16);
        assert!(find_equivalence(&eq.cod, &crate::fixtures::terminal().into()).is_some());
    }

    #[test]
    fn census_over_the_interval_one_object_fibres() {
        let c = descent_interval_census(1, 3, 10).unwrap();
        assert!(c.passed(), "{c:?}");
        assert!(c.over_iso >= c.fibres);
    }

    #[test]
    fn census_over_the_interval_full_bound() {
        let c = descent_interval_census(2, 4, 10).unwrap();
        assert!(c.passed(), "{c:?}");
        assert_eq!(c.fully_faithful_pairs, c.over_iso * c.over_iso);
    }
}
