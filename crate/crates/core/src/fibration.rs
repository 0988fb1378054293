//! Fibrations of finite categories: left/right fibrations, cofinal functors,
//! cocartesian fibrations with a cleavage and transport, the Conduché
//! condition, and (un)straightening.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::constructions::{is_equivalence, pi0_of_graph};
use crate::error::CatError;
use crate::fincat::{ArrId, Arrow, FinCat, ObjId};
use crate::functor::{Functor, NatTrans};
use crate::presentation::PresentationError;
use crate::presheaf::Copresheaf;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FibrationError {
    #[error("no cocartesian lift of `{arrow}` at `{object}`")]
    NoLift { object: String, arrow: String },
    #[error("pseudofunctor law violated: {0}")]
    Pseudofunctor(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("saturation did not stabilise: {0}")]
    Truncated(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Cat(#[from] CatError),
}

pub type Result<T, E = FibrationError> = std::result::Result<T, E>;

/// Is `f: e -> e'` `p`-cocartesian? For every `e''`, the map
/// `E(e', e'') -> E(e, e'') x_{B(pe, pe'')} B(pe', pe'')` must be bijective.
pub fn is_cocartesian(p: &Functor, f: ArrId) -> bool {
    let (e, b) = (&*p.dom, &*p.cod);
    let (x, y) = (e.src(f), e.tgt(f));
    let pf = p.arr[f];
    for z in 0..e.num_objects() {
        let mut seen = HashSet::new();
        for &g in e.hom(y, z) {
            if !seen.insert((e.compose(g, f), p.arr[g])) {
                return false;
            }
        }
        let pairs = e
            .hom(x, z)
            .iter()
            .map(|&h| b.hom(p.obj[y], p.obj[z]).iter().filter(|&&v| b.compose(v, pf) == p.arr[h]).count())
            .sum::<usize>();
        if pairs != seen.len() {
            return false;
        }
    }
    true
}

/// Is `f: e -> e'` `p`-cartesian? Dual of [`is_cocartesian`].
pub fn is_cartesian(p: &Functor, f: ArrId) -> bool {
    let (e, b) = (&*p.dom, &*p.cod);
    let (x, y) = (e.src(f), e.tgt(f));
    let pf = p.arr[f];
    for z in 0..e.num_objects() {
        let mut seen = HashSet::new();
        for &g in e.hom(z, x) {
            if !seen.insert((e.compose(f, g), p.arr[g])) {
                return false;
            }
        }
        let pairs = e
            .hom(z, y)
            .iter()
            .map(|&h| b.hom(p.obj[z], p.obj[x]).iter().filter(|&&v| b.compose(pf, v) == p.arr[h]).count())
            .sum::<usize>();
        if pairs != seen.len() {
            return false;
        }
    }
    true
}

pub fn cocartesian_arrows(p: &Functor) -> Vec<ArrId> {
    (0..p.dom.num_arrows()).filter(|&f| is_cocartesian(p, f)).collect()
}

pub fn cartesian_arrows(p: &Functor) -> Vec<ArrId> {
    (0..p.dom.num_arrows()).filter(|&f| is_cartesian(p, f)).collect()
}

/// Arrows of `E` lying over `f`.
pub fn arrows_over(p: &Functor, f: ArrId) -> Vec<ArrId> {
    (0..p.dom.num_arrows()).filter(|&g| p.arr[g] == f).collect()
}

/// Discrete opfibration: unique lifts with given source.
pub fn is_left_fibration(p: &Functor) -> bool {
    let (e, b) = (&*p.dom, &*p.cod);
    (0..e.num_objects()).all(|x| b.out(p.obj[x]).iter().all(|&f| e.out(x).iter().filter(|&&g| p.arr[g] == f).count() == 1))
}

/// Discrete fibration: unique lifts with given target.
pub fn is_right_fibration(p: &Functor) -> bool {
    let (e, b) = (&*p.dom, &*p.cod);
    (0..e.num_objects())
        .all(|y| b.incoming(p.obj[y]).iter().all(|&f| e.incoming(y).iter().filter(|&&g| p.arr[g] == f).count() == 1))
}

/// Components of `F / d`: objects `(c, u: Fc -> d)`, listed by `c` then `u`.
fn comma_components(f: &Functor, d: ObjId) -> (Vec<(ObjId, ArrId)>, Vec<usize>, usize) {
    let (c, dd) = (&*f.dom, &*f.cod);
    let objs: Vec<(ObjId, ArrId)> = (0..c.num_objects()).flat_map(|x| dd.hom(f.obj[x], d).iter().map(move |&u| (x, u))).collect();
    let pos = |x: ObjId, u: ArrId| objs.iter().position(|&o| o == (x, u)).expect("comma object");
    let mut edges = Vec::new();
    for (k, &(x, u)) in objs.iter().enumerate() {
        for &h in c.out(x) {
            // (x, u' . Fh) -> (x', u')
            for &u2 in dd.hom(f.obj[c.tgt(h)], d) {
                if dd.compose(u2, f.arr[h]) == u {
                    edges.push((k, pos(c.tgt(h), u2)));
                }
            }
        }
    }
    let pi = pi0_of_graph(objs.len(), edges);
    (objs, pi.comp, pi.count)
}

/// `F` is left cofinal iff every `F / d` is connected and nonempty.
pub fn is_left_cofinal(f: &Functor) -> bool {
    (0..f.cod.num_objects()).all(|d| comma_components(f, d).2 == 1)
}

/// `F = fib . cof` with `fib` the left fibration of `d |-> pi0(F / d)`.
pub fn cofinal_factorization(f: &Functor) -> (Functor, Functor) {
    let dd = &*f.cod;
    let comps: Vec<_> = (0..dd.num_objects()).map(|d| comma_components(f, d)).collect();
    let sets = comps.iter().map(|c| c.2).collect();
    let act = (0..dd.num_arrows())
        .map(|g| {
            let (s, t) = (dd.src(g), dd.tgt(g));
            let (objs, comp, count) = &comps[s];
            let mut row = vec![0; *count];
            for (k, &(x, u)) in objs.iter().enumerate() {
                let v = dd.compose(g, u);
                let j = comps[t].0.iter().position(|&o| o == (x, v)).expect("comma object");
                row[comp[k]] = comps[t].1[j];
            }
            row
        })
        .collect();
    let q = Copresheaf::new(f.cod.clone(), sets, act).expect("pi0 of comma categories is functorial");
    let (el, fib) = q.elements();
    let mut offset = vec![0; dd.num_objects() + 1];
    for d in 0..dd.num_objects() {
        offset[d + 1] = offset[d] + q.sets[d];
    }
    let c = &*f.dom;
    let at = |x: ObjId| {
        let d = f.obj[x];
        let (objs, comp, _) = &comps[d];
        offset[d] + comp[objs.iter().position(|&o| o == (x, dd.id(d))).expect("identity object")]
    };
    let obj: Vec<ObjId> = (0..c.num_objects()).map(at).collect();
    let arr = (0..c.num_arrows())
        .map(|h| *el.hom(obj[c.src(h)], obj[c.tgt(h)]).iter().find(|&&a| fib.arr[a] == f.arr[h]).expect("lift in elements"))
        .collect();
    (Functor::new_unchecked(f.dom.clone(), el, obj, arr), fib)
}

/// The fibre over `b` with its inclusion into `E`.
#[derive(Clone, Debug)]
pub struct Fibre {
    pub cat: Arc<FinCat>,
    pub incl: Functor,
}

impl Fibre {
    pub fn index_of(&self, e: ObjId) -> Option<ObjId> {
        self.incl.obj.iter().position(|&x| x == e)
    }

    pub fn arrow_index(&self, g: ArrId) -> Option<ArrId> {
        self.incl.arr.iter().position(|&x| x == g)
    }
}

pub type FibreFamily = Vec<Fibre>;

pub fn fibre(p: &Functor, b: ObjId) -> Fibre {
    let (e, base) = (&p.dom, &p.cod);
    let objs: Vec<ObjId> = (0..e.num_objects()).filter(|&x| p.obj[x] == b).collect();
    let arrs: Vec<ArrId> = (0..e.num_arrows()).filter(|&g| p.arr[g] == base.id(b)).collect();
    let pos = |x: ObjId| objs.iter().position(|&o| o == x).expect("object in fibre");
    let arrows: Vec<Arrow> = arrs.iter().map(|&g| Arrow::new(e.arr_label(g), pos(e.src(g)), pos(e.tgt(g)))).collect();
    let ident = objs.iter().map(|&x| arrs.iter().position(|&g| g == e.id(x)).expect("identity in fibre")).collect();
    let cat = FinCat::build(
        format!("fib({})", base.obj_label(b)),
        objs.iter().map(|&x| e.obj_label(x).to_string()).collect(),
        arrows,
        ident,
        |g, f| arrs.iter().position(|&h| h == e.compose(arrs[g], arrs[f])).expect("fibre closed under composition"),
    )
    .expect("fibre of a functor is a category");
    let cat = Arc::new(cat);
    Fibre { incl: Functor::new_unchecked(cat.clone(), e.clone(), objs, arrs), cat }
}

pub fn fibres(p: &Functor) -> FibreFamily {
    (0..p.cod.num_objects()).map(|b| fibre(p, b)).collect()
}

/// The vertical `k` with `k . ell = target`, if any.
pub fn vertical_factor(p: &Functor, ell: ArrId, target: ArrId) -> Option<ArrId> {
    let e = &*p.dom;
    let b = p.obj[e.tgt(ell)];
    e.hom(e.tgt(ell), e.tgt(target))
        .iter()
        .copied()
        .find(|&k| p.arr[k] == p.cod.id(b) && e.compose(k, ell) == target)
}

/// A cocartesian fibration with its marked arrows, cleavage and transports.
#[derive(Clone, Debug)]
pub struct MarkedFibration {
    pub p: Functor,
    pub marked: Vec<bool>,
    /// `(e, f)` with `f: p e -> b` to the chosen cocartesian lift.
    pub cleavage: BTreeMap<(ObjId, ArrId), ArrId>,
    pub fibres: FibreFamily,
    /// Transport along each arrow of the base.
    pub transport_cache: Vec<Functor>,
}

/// Marked arrows, cleavage (least-indexed lift, identities at identities) and transports.
pub fn is_cocartesian_fibration(p: &Functor) -> Result<MarkedFibration> {
    let (e, b) = (&*p.dom, &*p.cod);
    let marked: Vec<bool> = (0..e.num_arrows()).map(|g| is_cocartesian(p, g)).collect();
    let mut cleavage = BTreeMap::new();
    for x in 0..e.num_objects() {
        for &f in b.out(p.obj[x]) {
            let lift = if b.is_identity(f) {
                Some(e.id(x))
            } else {
                e.out(x).iter().copied().find(|&g| p.arr[g] == f && marked[g])
            };
            match lift {
                Some(g) => {
                    cleavage.insert((x, f), g);
                }
                None => {
                    return Err(FibrationError::NoLift { object: e.obj_label(x).to_string(), arrow: b.arr_label(f).to_string() })
                }
            }
        }
    }
    let fibres = fibres(p);
    let mut mf = MarkedFibration { p: p.clone(), marked, cleavage, fibres, transport_cache: Vec::new() };
    mf.transport_cache = (0..b.num_arrows()).map(|f| mf.compute_transport(f)).collect();
    Ok(mf)
}

impl MarkedFibration {
    pub fn base(&self) -> &Arc<FinCat> {
        &self.p.cod
    }

    pub fn total(&self) -> &Arc<FinCat> {
        &self.p.dom
    }

    pub fn lift(&self, e: ObjId, f: ArrId) -> ArrId {
        self.cleavage[&(e, f)]
    }

    fn compute_transport(&self, f: ArrId) -> Functor {
        let (e, b) = (&*self.p.dom, &*self.p.cod);
        let (from, to) = (&self.fibres[b.src(f)], &self.fibres[b.tgt(f)]);
        let obj = from.incl.obj.iter().map(|&x| to.index_of(e.tgt(self.lift(x, f))).expect("lift lands in the fibre")).collect();
        let arr = from
            .incl
            .arr
            .iter()
            .map(|&h| {
                let (x, y) = (e.src(h), e.tgt(h));
                let (lx, ly) = (self.lift(x, f), self.lift(y, f));
                let k = vertical_factor(&self.p, lx, e.compose(ly, h)).expect("cocartesian factorisation");
                to.arrow_index(k).expect("vertical arrow")
            })
            .collect();
        Functor::new_unchecked(from.cat.clone(), to.cat.clone(), obj, arr)
    }

    pub fn transport(&self, f: ArrId) -> &Functor {
        &self.transport_cache[f]
    }

    /// Every marked arrow is cocartesian, every cleavage lift is marked and lies over its arrow.
    pub fn check(&self) -> Result<()> {
        let (e, b) = (&*self.p.dom, &*self.p.cod);
        for g in 0..e.num_arrows() {
            if self.marked[g] != is_cocartesian(&self.p, g) {
                return Err(FibrationError::Precondition(format!("marking of `{}` is wrong", e.arr_label(g))));
            }
        }
        for (&(x, f), &g) in &self.cleavage {
            if !self.marked[g] || self.p.arr[g] != f || e.src(g) != x {
                return Err(FibrationError::Precondition(format!("bad lift of `{}` at `{}`", b.arr_label(f), e.obj_label(x))));
            }
        }
        for f in 0..b.num_arrows() {
            self.transport_cache[f].check()?;
        }
        Ok(())
    }

    /// Two marked lifts of the same `(e, f)` differ by a unique vertical isomorphism.
    pub fn lifts_unique_up_to_iso(&self) -> bool {
        let e = &*self.p.dom;
        for &(x, f) in self.cleavage.keys() {
            let lifts: Vec<ArrId> = e.out(x).iter().copied().filter(|&g| self.p.arr[g] == f && self.marked[g]).collect();
            for &g1 in &lifts {
                for &g2 in &lifts {
                    let between: Vec<ArrId> = e
                        .hom(e.tgt(g1), e.tgt(g2))
                        .iter()
                        .copied()
                        .filter(|&k| self.p.arr[k] == self.p.cod.id(self.p.obj[e.tgt(g1)]) && e.compose(k, g1) == g2)
                        .collect();
                    if between.len() != 1 || !e.is_iso(between[0]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// For all `x, z` in `E` and `b` in `B`, components of `x / E_b / z` biject with
/// `E(x, z) x_{B(px, pz)} (B(px, b) x B(b, pz))`.
pub fn is_conduche(p: &Functor) -> bool {
    conduche_witness(p).is_none()
}

/// First `(x, b, z)` where the Conduché condition fails.
pub fn conduche_witness(p: &Functor) -> Option<(ObjId, ObjId, ObjId)> {
    let (e, base) = (&*p.dom, &*p.cod);
    let fibs = fibres(p);
    for x in 0..e.num_objects() {
        for z in 0..e.num_objects() {
            for (b, fib) in fibs.iter().enumerate() {
                let mut triples = Vec::new();
                for &m in &fib.incl.obj {
                    for &u in e.hom(x, m) {
                        for &v in e.hom(m, z) {
                            triples.push((m, u, v));
                        }
                    }
                }
                let pos = |t: (ObjId, ArrId, ArrId)| triples.iter().position(|&s| s == t).expect("triple");
                let mut uf = UnionFind::new(triples.len());
                for (k, &(m, u, v)) in triples.iter().enumerate() {
                    for &h in &fib.incl.arr {
                        if e.src(h) != m {
                            continue;
                        }
                        let m2 = e.tgt(h);
                        for &v2 in e.hom(m2, z) {
                            if e.compose(v2, h) == v {
                                uf.union(k, pos((m2, e.compose(h, u), v2)));
                            }
                        }
                    }
                }
                let mut images = HashSet::new();
                let mut reps = HashSet::new();
                for (k, &(_, u, v)) in triples.iter().enumerate() {
                    if reps.insert(uf.find(k)) {
                        images.insert((e.compose(v, u), p.arr[u], p.arr[v]));
                    }
                }
                let target: usize = e
                    .hom(x, z)
                    .iter()
                    .map(|&h| {
                        base.hom(p.obj[x], b)
                            .iter()
                            .flat_map(|&s| base.hom(b, p.obj[z]).iter().map(move |&t| (s, t)))
                            .filter(|&(s, t)| base.compose(t, s) == p.arr[h])
                            .count()
                    })
                    .sum();
                if images.len() != reps.len() || images.len() != target {
                    return Some((x, b, z));
                }
            }
        }
    }
    None
}

/// Every transport along `w` in `W` is an equivalence of fibres.
pub fn inverts_w(mf: &MarkedFibration, w: &[ArrId]) -> bool {
    w.iter().all(|&f| is_equivalence(mf.transport(f)))
}

/// Every `w` has cocartesian lifts at all sources, cartesian lifts at all
/// targets, and the cocartesian and cartesian arrows over `w` coincide.
pub fn conduche_inverts_w(p: &Functor, w: &[ArrId]) -> bool {
    let (e, b) = (&*p.dom, &*p.cod);
    w.iter().all(|&f| {
        let over = arrows_over(p, f);
        let cocart: Vec<ArrId> = over.iter().copied().filter(|&g| is_cocartesian(p, g)).collect();
        let cart: Vec<ArrId> = over.iter().copied().filter(|&g| is_cartesian(p, g)).collect();
        let sources = (0..e.num_objects()).filter(|&x| p.obj[x] == b.src(f)).all(|x| cocart.iter().any(|&g| e.src(g) == x));
        let targets = (0..e.num_objects()).filter(|&y| p.obj[y] == b.tgt(f)).all(|y| cart.iter().any(|&g| e.tgt(g) == y));
        sources && targets && cocart == cart
    })
}

/// For `f` with invertible transport: its cocartesian lifts are exactly its
/// cartesian lifts and every object over the target receives one.
pub fn invertible_transport_check(mf: &MarkedFibration, f: ArrId) -> Result<bool> {
    if !is_equivalence(mf.transport(f)) {
        return Err(FibrationError::Precondition(format!("transport along `{}` is not an equivalence", mf.base().arr_label(f))));
    }
    let (p, e) = (&mf.p, &*mf.p.dom);
    let over = arrows_over(p, f);
    let cocart: Vec<ArrId> = over.iter().copied().filter(|&g| mf.marked[g]).collect();
    let cart: Vec<ArrId> = over.iter().copied().filter(|&g| is_cartesian(p, g)).collect();
    let tgt = mf.base().tgt(f);
    let reached = (0..e.num_objects()).filter(|&y| p.obj[y] == tgt).all(|y| cart.iter().any(|&g| e.tgt(g) == y));
    Ok(cocart == cart && reached)
}

/// Summary of a fibration for reports.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FibrationSummary {
    pub total_objects: usize,
    pub total_arrows: usize,
    pub marked: Vec<String>,
    pub fibre_sizes: Vec<(usize, usize)>,
}

impl MarkedFibration {
    pub fn summary(&self) -> FibrationSummary {
        let e = &*self.p.dom;
        FibrationSummary {
            total_objects: e.num_objects(),
            total_arrows: e.num_arrows(),
            marked: (0..e.num_arrows()).filter(|&g| self.marked[g]).map(|g| e.arr_label(g).to_string()).collect(),
            fibre_sizes: self.fibres.iter().map(|f| (f.cat.num_objects(), f.cat.num_arrows())).collect(),
        }
    }
}

/// A normalised pseudofunctor `B -> Cat` on finite data: `F(id) = id`
/// strictly, and comparison isomorphisms `F(g) F(f) => F(g f)`.
#[derive(Clone, Debug)]
pub struct Pseudofunctor {
    pub base: Arc<FinCat>,
    pub fibres: Vec<Arc<FinCat>>,
    pub maps: Vec<Functor>,
    /// `(g, f) -> mu` with `mu_x: F(g)(F(f) x) -> F(g f) x`; missing pairs are identities.
    pub comparison: BTreeMap<(ArrId, ArrId), NatTrans>,
}

impl Pseudofunctor {
    /// A strict functor; the comparisons are identities.
    pub fn strict(base: Arc<FinCat>, fibres: Vec<Arc<FinCat>>, maps: Vec<Functor>) -> Result<Pseudofunctor> {
        let p = Pseudofunctor { base, fibres, maps, comparison: BTreeMap::new() };
        p.check()?;
        Ok(p)
    }

    /// Constant at `d`.
    pub fn constant(base: Arc<FinCat>, d: Arc<FinCat>) -> Pseudofunctor {
        let fibres = vec![d.clone(); base.num_objects()];
        let maps = (0..base.num_arrows()).map(|_| Functor::identity(d.clone())).collect();
        Pseudofunctor { base, fibres, maps, comparison: BTreeMap::new() }
    }

    /// Component of the comparison for `(g, f)` at `x`.
    pub fn mu(&self, g: ArrId, f: ArrId, x: ObjId) -> ArrId {
        match self.comparison.get(&(g, f)) {
            Some(t) => t.comp[x],
            None => self.fibres[self.base.tgt(g)].id(self.maps[self.base.compose(g, f)].obj[x]),
        }
    }

    pub fn check(&self) -> Result<()> {
        let b = &*self.base;
        let bad = |s: String| Err(FibrationError::Pseudofunctor(s));
        if self.fibres.len() != b.num_objects() || self.maps.len() != b.num_arrows() {
            return bad("wrong number of fibres or maps".into());
        }
        for f in 0..b.num_arrows() {
            let m = &self.maps[f];
            if !Arc::ptr_eq(&m.dom, &self.fibres[b.src(f)]) && *m.dom != *self.fibres[b.src(f)]
                || !Arc::ptr_eq(&m.cod, &self.fibres[b.tgt(f)]) && *m.cod != *self.fibres[b.tgt(f)]
            {
                return bad(format!("F({}) has the wrong endpoints", b.arr_label(f)));
            }
            m.check()?;
            if b.is_identity(f) && !m.is_identity() {
                return bad(format!("F({}) is not the identity", b.arr_label(f)));
            }
        }
        for f in 0..b.num_arrows() {
            for &g in b.out(b.tgt(f)) {
                let gf = b.compose(g, f);
                let (fa, fc) = (&self.fibres[b.src(f)], &self.fibres[b.tgt(g)]);
                for x in 0..fa.num_objects() {
                    let m = self.mu(g, f, x);
                    let lhs = self.maps[g].obj[self.maps[f].obj[x]];
                    if fc.src(m) != lhs || fc.tgt(m) != self.maps[gf].obj[x] || !fc.is_iso(m) {
                        return bad(format!("comparison ({}, {}) at {}", b.arr_label(g), b.arr_label(f), fa.obj_label(x)));
                    }
                    if (b.is_identity(f) || b.is_identity(g)) && !fc.is_identity(m) {
                        return bad(format!("comparison with an identity is not trivial at {}", fa.obj_label(x)));
                    }
                }
                for h in 0..fa.num_arrows() {
                    let (x, y) = (fa.src(h), fa.tgt(h));
                    let lhs = fc.compose(self.mu(g, f, y), self.maps[g].arr[self.maps[f].arr[h]]);
                    let rhs = fc.compose(self.maps[gf].arr[h], self.mu(g, f, x));
                    if lhs != rhs {
                        return bad(format!("comparison ({}, {}) is not natural", b.arr_label(g), b.arr_label(f)));
                    }
                }
                for &h in b.out(b.tgt(g)) {
                    let fd = &self.fibres[b.tgt(h)];
                    for x in 0..fa.num_objects() {
                        let left = fd.compose(self.mu(h, gf, x), self.maps[h].arr[self.mu(g, f, x)]);
                        let right = fd.compose(self.mu(b.compose(h, g), f, x), self.mu(h, g, self.maps[f].obj[x]));
                        if left != right {
                            return bad(format!("associativity at ({}, {}, {})", b.arr_label(h), b.arr_label(g), b.arr_label(f)));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Total category of `F`: objects `(c, x)`, arrows `(g: c -> c', phi: F(g) x -> x')`.
pub fn unstraighten(f: &Pseudofunctor) -> Result<MarkedFibration> {
    Ok(unstraighten_with_key(f)?.0)
}

/// [`unstraighten`] together with `(g, x, phi)` for every arrow of the total category.
pub fn unstraighten_with_key(f: &Pseudofunctor) -> Result<(MarkedFibration, Vec<(ArrId, ObjId, ArrId)>)> {
    f.check()?;
    let b = &*f.base;
    let mut objects = Vec::new();
    let mut obj_of = Vec::new();
    let mut offset = vec![0; b.num_objects()];
    for c in 0..b.num_objects() {
        offset[c] = objects.len();
        for x in 0..f.fibres[c].num_objects() {
            objects.push(format!("{}:{}", b.obj_label(c), f.fibres[c].obj_label(x)));
            obj_of.push(c);
        }
    }
    let mut arrows = Vec::new();
    let mut key = Vec::new();
    let mut index = std::collections::HashMap::new();
    for g in 0..b.num_arrows() {
        let (c, c2) = (b.src(g), b.tgt(g));
        let (fc, fc2) = (&f.fibres[c], &f.fibres[c2]);
        for x in 0..fc.num_objects() {
            let gx = f.maps[g].obj[x];
            for x2 in 0..fc2.num_objects() {
                for &phi in fc2.hom(gx, x2) {
                    let label = if b.is_identity(g) && fc2.is_identity(phi) {
                        format!("id_{}", objects[offset[c] + x])
                    } else {
                        format!("{}@{};{}", b.arr_label(g), fc.obj_label(x), fc2.arr_label(phi))
                    };
                    index.insert((g, x, phi), arrows.len());
                    key.push((g, x, phi));
                    arrows.push(Arrow::new(label, offset[c] + x, offset[c2] + x2));
                }
            }
        }
    }
    let ident: Vec<ArrId> = (0..objects.len())
        .map(|o| {
            let c = obj_of[o];
            let x = o - offset[c];
            index[&(b.id(c), x, f.fibres[c].id(x))]
        })
        .collect();
    let total = FinCat::build(format!("Un({})", b.name()), objects, arrows, ident, |a2, a1| {
        let ((g, x, phi), (g2, _, phi2)) = (key[a1], key[a2]);
        let gg = b.compose(g2, g);
        let fd = &f.fibres[b.tgt(g2)];
        let inv = fd.inverse(f.mu(g2, g, x)).expect("comparison is invertible");
        let psi = fd.compose(phi2, fd.compose(f.maps[g2].arr[phi], inv));
        index[&(gg, x, psi)]
    })?;
    let total = Arc::new(total);
    let obj = obj_of;
    let arr = key.iter().map(|&(g, _, _)| g).collect();
    let p = Functor::new(total, f.base.clone(), obj, arr)?;
    Ok((is_cocartesian_fibration(&p)?, key))
}

/// Fibres, transports and comparisons read off the cleavage.
pub fn straighten_finite(mf: &MarkedFibration) -> Pseudofunctor {
    let (e, b) = (&*mf.p.dom, &*mf.p.cod);
    let fibres: Vec<Arc<FinCat>> = mf.fibres.iter().map(|f| f.cat.clone()).collect();
    let maps: Vec<Functor> = mf.transport_cache.clone();
    let mut comparison = BTreeMap::new();
    for f in b.non_identity_arrows() {
        for &g in b.out(b.tgt(f)) {
            if b.is_identity(g) {
                continue;
            }
            let gf = b.compose(g, f);
            let (from, to) = (&mf.fibres[b.src(f)], &mf.fibres[b.tgt(g)]);
            let comp = from
                .incl
                .obj
                .iter()
                .map(|&x| {
                    let lf = mf.lift(x, f);
                    let ell = e.compose(mf.lift(e.tgt(lf), g), lf);
                    let k = vertical_factor(&mf.p, ell, mf.lift(x, gf)).expect("cocartesian factorisation");
                    to.arrow_index(k).expect("vertical arrow")
                })
                .collect();
            let src = maps[f].then(&maps[g]);
            comparison.insert((g, f), NatTrans { src, tgt: maps[gf].clone(), comp });
        }
    }
    Pseudofunctor { base: mf.p.cod.clone(), fibres, maps, comparison }
}

/// The comparison `Un(St(E)) -> E`, `(g, x, phi) |-> phi . lift(x, g)`.
pub fn unstraighten_comparison(mf: &MarkedFibration, un: &MarkedFibration, key: &[(ArrId, ObjId, ArrId)]) -> Functor {
    let (e, b) = (&*mf.p.dom, &*mf.p.cod);
    let ue = &*un.p.dom;
    let obj: Vec<ObjId> = (0..ue.num_objects())
        .map(|o| {
            let c = un.p.obj[o];
            mf.fibres[c].incl.obj[un.fibres[c].index_of(o).expect("object in its fibre")]
        })
        .collect();
    let arr = key
        .iter()
        .map(|&(g, x, phi)| {
            let x = mf.fibres[b.src(g)].incl.obj[x];
            e.compose(mf.fibres[b.tgt(g)].incl.arr[phi], mf.lift(x, g))
        })
        .collect();
    Functor::new_unchecked(un.p.dom.clone(), mf.p.dom.clone(), obj, arr)
}

/// `Un(St(E)) -> E` is a functor over the base and an equivalence.
pub fn straightening_roundtrip(mf: &MarkedFibration) -> Result<bool> {
    let st = straighten_finite(mf);
    let (un, key) = unstraighten_with_key(&st)?;
    let cmp = unstraighten_comparison(mf, &un, &key);
    if cmp.check().is_err() {
        return Ok(false);
    }
    let over = (0..cmp.dom.num_arrows()).all(|a| mf.p.arr[cmp.arr[a]] == un.p.arr[a]);
    Ok(over && is_equivalence(&cmp))
}

/// `St(Un(F))` agrees with `F`: each fibre of `Un(F)` is identified with
/// `F(c)` and each transport is naturally isomorphic to `F(g)`.
pub fn unstraighten_roundtrip(f: &Pseudofunctor) -> Result<bool> {
    let (un, key) = unstraighten_with_key(f)?;
    let b = &*f.base;
    let ident = |c: ObjId| -> Functor {
        let fib = &un.fibres[c];
        let obj = fib.incl.obj.iter().map(|&o| key[un.p.dom.id(o)].1).collect();
        let arr = fib.incl.arr.iter().map(|&a| key[a].2).collect();
        Functor::new_unchecked(fib.cat.clone(), f.fibres[c].clone(), obj, arr)
    };
    for c in 0..b.num_objects() {
        if !ident(c).is_bijective() {
            return Ok(false);
        }
    }
    for g in 0..b.num_arrows() {
        let lhs = un.transport(g).then(&ident(b.tgt(g)));
        let rhs = ident(b.src(g)).then(&f.maps[g]);
        if !crate::search::naturally_isomorphic(&lhs, &rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{comma, product};
    use crate::fincat::Budget;
    use crate::fixtures::*;
    use crate::presheaf::Presheaf;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    fn projection(b: FinCat, f: FinCat) -> Functor {
        product(&arc(b), &arc(f), &Budget::default()).unwrap().left
    }

    #[test]
    fn left_and_right_fibrations() {
        let c = arc(poset(2));
        let (_, cod) = Copresheaf::corepresentable(c.clone(), 0).elements();
        assert!(is_left_fibration(&cod));
        let (_, dom) = Presheaf::representable(c.clone(), 0).elements();
        assert!(is_right_fibration(&dom));
        assert!(!is_left_fibration(&dom));
        assert!(is_left_fibration(&projection(poset(2), discrete(2))));
        let to_point = Functor::constant(arc(interval()), arc(terminal()), 0);
        assert!(!is_left_fibration(&to_point));
    }

    #[test]
    fn cofinality() {
        let c = arc(poset(2));
        let one = arc(terminal());
        assert!(is_left_cofinal(&Functor::constant(one.clone(), c.clone(), 0)));
        assert!(!is_left_cofinal(&Functor::constant(one.clone(), arc(interval()), 1)));
        let id = Functor::identity(arc(walking_idempotent()));
        assert!(is_left_cofinal(&id));
        let (cof, fib) = cofinal_factorization(&id);
        assert!(cof.is_bijective() && fib.is_bijective());
        // 1 -> I at the target: the fibration part is the representable's elements
        let end = Functor::constant(one, arc(interval()), 1);
        let (cof, fib) = cofinal_factorization(&end);
        cof.check().unwrap();
        assert!(is_left_fibration(&fib));
        assert!(is_left_cofinal(&cof));
        assert_eq!(cof.then(&fib).obj, end.obj);
        assert_eq!(fib.dom.num_objects(), 1);
    }

    #[test]
    fn product_fibration_marks_pairs_with_an_iso() {
        let p = projection(poset(1), poset(1));
        let mf = is_cocartesian_fibration(&p).unwrap();
        mf.check().unwrap();
        let e = &*p.dom;
        // 9 arrows in [1] x [1]; marked ones have an identity second component
        let marked: Vec<&str> = (0..e.num_arrows()).filter(|&g| mf.marked[g]).map(|g| e.arr_label(g)).collect();
        assert_eq!(marked.len(), 6, "{marked:?}");
        for f in 0..p.cod.num_arrows() {
            let t = mf.transport(f);
            assert!(t.obj.iter().enumerate().all(|(i, &x)| i == x) && t.arr.iter().enumerate().all(|(i, &x)| i == x));
            assert!(invertible_transport_check(&mf, f).unwrap());
        }
        assert!(inverts_w(&mf, &[0, 1, 2]));
        assert!(mf.lifts_unique_up_to_iso());
        let iso = is_cocartesian_fibration(&projection(poset(1), walking_iso())).unwrap();
        assert!(iso.marked.iter().all(|&m| m));
    }

    #[test]
    fn identity_and_dom_fibrations() {
        let c = arc(walking_section_retraction());
        let mf = is_cocartesian_fibration(&Functor::identity(c.clone())).unwrap();
        assert!(mf.marked.iter().all(|&m| m));
        assert!(is_conduche(&mf.p));
        let i = arc(interval());
        let id = Functor::identity(i.clone());
        let ar = comma(&id, &id, &Budget::default()).unwrap();
        let mf = is_cocartesian_fibration(&ar.dom).unwrap();
        assert!(is_conduche(&mf.p));
        assert!(straightening_roundtrip(&mf).unwrap());
        // the fibre over c is c / I
        assert_eq!(mf.fibres[0].cat.num_objects(), 2);
        assert_eq!(mf.fibres[1].cat.num_objects(), 1);
        // I -> 1 is one (the base has no non-identity arrows); [1] -> [2] missing 1 is not
        assert!(is_cocartesian_fibration(&Functor::constant(arc(interval()), arc(terminal()), 0)).is_ok());
        let gap = Functor::from_objects_thin(arc(poset(1)), arc(poset(2)), vec![0, 2]).unwrap();
        assert!(matches!(is_cocartesian_fibration(&gap), Err(FibrationError::NoLift { .. })));
    }

    #[test]
    fn non_conduche_poset_example() {
        let e = arc(poset(1));
        let p = Functor::from_objects_thin(e, arc(poset(2)), vec![0, 2]).unwrap();
        assert!(!is_conduche(&p));
        assert_eq!(conduche_witness(&p), Some((0, 1, 1)));
        assert!(is_conduche(&Functor::identity(arc(poset(2)))));
    }

    #[test]
    fn unstraighten_constant_and_discrete() {
        let d = arc(walking_idempotent());
        let mf = unstraighten(&Pseudofunctor::constant(arc(terminal()), d.clone())).unwrap();
        assert_eq!(mf.p.dom.num_arrows(), d.num_arrows());
        assert!(crate::search::find_isomorphism(&mf.p.dom, &d).is_some());
        let base = arc(discrete(2));
        let f = Pseudofunctor::strict(base.clone(), vec![arc(interval()), d.clone()], vec![
            Functor::identity(arc(interval())),
            Functor::identity(d.clone()),
        ])
        .unwrap();
        let mf = unstraighten(&f).unwrap();
        assert_eq!(mf.p.dom.num_arrows(), 3 + 2);
        assert!(unstraighten_roundtrip(&f).unwrap());
    }

    #[test]
    fn unstraighten_an_arrow() {
        // I -> Cat picking the unique functor J -> 1
        let base = arc(interval());
        let (a, b) = (arc(walking_iso()), arc(terminal()));
        let g = Functor::constant(a.clone(), b.clone(), 0);
        let f = Pseudofunctor::strict(base.clone(), vec![a.clone(), b.clone()], vec![
            Functor::identity(a.clone()),
            Functor::identity(b.clone()),
            g.clone(),
        ])
        .unwrap();
        let (mf, _) = unstraighten_with_key(&f).unwrap();
        mf.check().unwrap();
        assert_eq!(mf.fibres[0].cat.num_arrows(), 4);
        assert_eq!(mf.fibres[1].cat.num_arrows(), 1);
        assert!(crate::search::naturally_isomorphic(mf.transport(2), &g.retarget(mf.fibres[0].cat.clone(), mf.fibres[1].cat.clone())));
        assert!(unstraighten_roundtrip(&f).unwrap());
        assert!(straightening_roundtrip(&mf).unwrap());
        assert!(is_conduche(&mf.p));
        let st = straighten_finite(&mf);
        st.check().unwrap();
    }

    #[test]
    fn pseudofunctor_law_violations_are_reported() {
        let base = arc(interval());
        let a = arc(poset(1));
        let swap = Functor::from_objects_thin(a.clone(), a.clone(), vec![1, 1]).unwrap();
        let bad = Pseudofunctor { base, fibres: vec![a.clone(), a.clone()], maps: vec![swap, Functor::identity(a.clone()), Functor::identity(a)], comparison: BTreeMap::new() };
        assert!(matches!(bad.check(), Err(FibrationError::Pseudofunctor(_))));
    }
}
