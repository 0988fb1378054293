//! The pointed endofunctor `S` built from a cospan `B -> A <- C` of
//! categories with left adjoints, its iterate `S^inf`, and the instance that
//! computes hom-sets of localisations.
//!
//! `B` is always a presheaf category here; `A` and `C` are left abstract.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::CatError;
use crate::fincat::{ArrId, FinCat, ObjId};
use crate::fixtures::discrete_on;
use crate::functor::{Functor, NatTrans};
use crate::presheaf::{self, all_maps, count_maps, lan, lan_counit, Lan, Presheaf, PresheafMap, PresheafPushout};

/// `f^*: B -> A`, `g^*: C -> A` with left adjoints, presented through the
/// composites the construction needs.
pub trait ReflectorCospan {
    /// Objects of `A`.
    type A: Clone;
    /// Morphisms of `A`.
    type AMap;

    fn base(&self) -> &Arc<FinCat>;
    fn f_star(&self, x: &Presheaf) -> Self::A;
    fn f_shriek(&self, a: &Self::A) -> Presheaf;
    fn f_shriek_map(&self, m: &Self::AMap) -> PresheafMap;
    /// `eta_g: a -> g^* g_! a`.
    fn eta_g(&self, a: &Self::A) -> Self::AMap;
    /// `eps_f: f_! f^* x -> x`.
    fn eps_f(&self, x: &Presheaf) -> PresheafMap;
    /// Does `a` lie in the image of `g^*`?
    fn in_subcategory(&self, a: &Self::A) -> bool;
}

/// `S x` and the pointing `s_x: x -> S x`.
pub fn kelly_s<R: ReflectorCospan>(cs: &R, x: &Presheaf) -> (Presheaf, PresheafMap) {
    let a = cs.f_star(x);
    let eps = cs.eps_f(x);
    let side = cs.f_shriek_map(&cs.eta_g(&a));
    let po = presheaf::pushout(&eps, &side).expect("both legs start at f_! f^* x");
    (po.value, po.inl)
}

#[derive(Clone, Debug)]
pub enum SInfty {
    Stable {
        value: Presheaf,
        /// Composite pointing `x -> S^inf x`.
        unit: PresheafMap,
        iterations: usize,
    },
    Truncated {
        /// Total number of elements at each iteration.
        growth: Vec<usize>,
        last: Presheaf,
    },
}

impl SInfty {
    pub fn value(&self) -> Option<&Presheaf> {
        match self {
            SInfty::Stable { value, .. } => Some(value),
            SInfty::Truncated { .. } => None,
        }
    }
}

/// Iterates `S` until the pointing is componentwise bijective.
pub fn kelly_s_infty<R: ReflectorCospan>(cs: &R, x: &Presheaf, max_iters: usize) -> SInfty {
    kelly_s_infty_traced(cs, x, max_iters).0
}

/// Is precomposition with `s_x` a bijection `B(S x, y) -> B(x, y)`?
/// Requires `f^* y` to lie in the subcategory.
pub fn s_ortho_check<R: ReflectorCospan>(cs: &R, x: &Presheaf, y: &Presheaf) -> Result<bool, CatError> {
    if !cs.in_subcategory(&cs.f_star(y)) {
        return Err(CatError::Precondition("f^* y is not in the subcategory".into()));
    }
    let (sx, s) = kelly_s(cs, x);
    Ok(precomposition_bijective(&s, &sx, x, y))
}

/// Same check for the composite pointing into `S^inf x`.
pub fn s_infty_ortho_check(unit: &PresheafMap, y: &Presheaf) -> bool {
    precomposition_bijective(unit, &unit.tgt, &unit.src, y)
}

fn precomposition_bijective(s: &PresheafMap, sx: &Presheaf, x: &Presheaf, y: &Presheaf) -> bool {
    let mut images = HashSet::new();
    for m in all_maps(sx, y) {
        if !images.insert(s.then(&m).comp) {
            return false;
        }
    }
    images.len() == count_maps(x, y)
}

/// Commuting square in `A = Ar(Psh(W))`: `top: U -> U'`, `bottom: V -> V'`.
#[derive(Clone, Debug)]
pub struct Square {
    pub src: PresheafMap,
    pub tgt: PresheafMap,
    pub top: PresheafMap,
    pub bottom: PresheafMap,
}

/// The cospan `Psh(C) -> Ar(Psh(W)) <- Psh(W)` attached to `m: k => l`
/// for `k, l: W -> C`; its `S^inf` is reflection into presheaves that
/// invert every `m_w`.
#[derive(Clone, Debug)]
pub struct LocalisationCospan {
    pub c: Arc<FinCat>,
    pub w: Arc<FinCat>,
    pub m: NatTrans,
}

impl LocalisationCospan {
    pub fn new(m: NatTrans) -> Result<LocalisationCospan, CatError> {
        m.check()?;
        Ok(LocalisationCospan { c: m.src.cod.clone(), w: m.src.dom.clone(), m })
    }

    /// `W` discrete on the chosen arrows, `k = src`, `l = tgt`.
    pub fn at_arrows(c: &Arc<FinCat>, arrows: &[ArrId]) -> LocalisationCospan {
        let labels: Vec<String> = arrows.iter().map(|&f| c.arr_label(f).to_string()).collect();
        let w = Arc::new(discrete_on("W", &labels));
        let k = Functor::new_unchecked(w.clone(), c.clone(), arrows.iter().map(|&f| c.src(f)).collect(), arrows.iter().map(|&f| c.id(c.src(f))).collect());
        let l = Functor::new_unchecked(w.clone(), c.clone(), arrows.iter().map(|&f| c.tgt(f)).collect(), arrows.iter().map(|&f| c.id(c.tgt(f))).collect());
        let m = NatTrans { src: k, tgt: l, comp: arrows.to_vec() };
        LocalisationCospan { c: c.clone(), w, m }
    }

    pub fn k(&self) -> &Functor {
        &self.m.src
    }

    pub fn l(&self) -> &Functor {
        &self.m.tgt
    }

    /// `k_! U -> l_! U`, `[(f, u)] |-> [(m_w . f, u)]`.
    fn mate(&self, ku: &Lan, lu: &Lan) -> PresheafMap {
        let c = &*self.c;
        let mut comp: Vec<Vec<usize>> = ku.value.sets.iter().map(|&n| vec![0; n]).collect();
        for (d, w, f, u, cls) in ku.generators() {
            comp[d][cls] = lu.class_of(d, w, c.compose(self.m.comp[w], f), u);
        }
        PresheafMap { src: ku.value.clone(), tgt: lu.value.clone(), comp }
    }

    /// `m_!(phi) = l_! U +_{k_! U} k_! V` with its legs.
    fn m_shriek_pushout(&self, phi: &PresheafMap) -> (PresheafPushout, Lan, Lan, Lan) {
        let (ku, lu, kv) = (lan(self.k(), &phi.src), lan(self.l(), &phi.src), lan(self.k(), &phi.tgt));
        let mate = self.mate(&ku, &lu);
        let kphi = ku.map_to(&kv, phi);
        let po = presheaf::pushout(&mate, &kphi).expect("legs share k_! U");
        (po, ku, lu, kv)
    }

    /// `hom(m_! X, Y)` and `hom(X, m^* Y)` counted independently.
    pub fn adjunction_counts(&self, x: &PresheafMap, y: &Presheaf) -> (usize, usize) {
        let left = count_maps(&self.f_shriek(x), y);
        let my = self.f_star(y);
        let tops = all_maps(&x.src, &my.src);
        let bottoms = all_maps(&x.tgt, &my.tgt);
        let right = tops
            .iter()
            .map(|a| bottoms.iter().filter(|b| x.then(b).comp == a.then(&my).comp).count())
            .sum();
        (left, right)
    }
}

/// Map out of a pushout from maps out of its legs.
pub fn copair(po: &PresheafPushout, left: &PresheafMap, right: &PresheafMap) -> PresheafMap {
    let mut comp: Vec<Vec<usize>> = po.value.sets.iter().map(|&n| vec![0; n]).collect();
    for (x, row) in comp.iter_mut().enumerate() {
        for (e, &k) in po.inl.comp[x].iter().enumerate() {
            row[k] = left.comp[x][e];
        }
        for (e, &k) in po.inr.comp[x].iter().enumerate() {
            row[k] = right.comp[x][e];
        }
    }
    PresheafMap { src: po.value.clone(), tgt: left.tgt.clone(), comp }
}

impl ReflectorCospan for LocalisationCospan {
    type A = PresheafMap;
    type AMap = Square;

    fn base(&self) -> &Arc<FinCat> {
        &self.c
    }

    /// `m^* P = P(m): l^* P -> k^* P`.
    fn f_star(&self, x: &Presheaf) -> PresheafMap {
        let comp = self.m.comp.iter().map(|&a| x.act[a].clone()).collect();
        PresheafMap { src: x.restrict(self.l()), tgt: x.restrict(self.k()), comp }
    }

    fn f_shriek(&self, a: &PresheafMap) -> Presheaf {
        self.m_shriek_pushout(a).0.value
    }

    fn f_shriek_map(&self, sq: &Square) -> PresheafMap {
        let (po, _, lu, kv) = self.m_shriek_pushout(&sq.src);
        let (po2, _, lu2, kv2) = self.m_shriek_pushout(&sq.tgt);
        let left = lu.map_to(&lu2, &sq.top).then(&po2.inl);
        let right = kv.map_to(&kv2, &sq.bottom).then(&po2.inr);
        copair(&po, &left, &right)
    }

    fn eta_g(&self, a: &PresheafMap) -> Square {
        let id = PresheafMap::identity(&a.tgt);
        Square { src: a.clone(), tgt: id.clone(), top: a.clone(), bottom: id }
    }

    fn eps_f(&self, x: &Presheaf) -> PresheafMap {
        let a = self.f_star(x);
        let (po, _, _, _) = self.m_shriek_pushout(&a);
        let (_, eps_l) = lan_counit(self.l(), x);
        let (_, eps_k) = lan_counit(self.k(), x);
        copair(&po, &eps_l, &eps_k)
    }

    fn in_subcategory(&self, a: &PresheafMap) -> bool {
        a.is_iso()
    }
}

/// Result of computing a hom-set of a localisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomCount {
    Exact(usize),
    /// Size of the component after each iteration.
    Truncated(Vec<usize>),
}

impl HomCount {
    pub fn exact(&self) -> Option<usize> {
        match self {
            HomCount::Exact(n) => Some(*n),
            HomCount::Truncated(_) => None,
        }
    }
}

/// `C[W^-1](x, y)` as `(S^inf yo(y))(x)`.
pub fn localisation_homs_via_s(c: &Arc<FinCat>, w: &[ArrId], x: ObjId, y: ObjId, max_iters: usize) -> HomCount {
    localisation_column_via_s(c, w, y, max_iters).swap_remove(x)
}

/// `C[W^-1](x, y)` for every `x`, from one `S^inf` computation.
pub fn localisation_column_via_s(c: &Arc<FinCat>, w: &[ArrId], y: ObjId, max_iters: usize) -> Vec<HomCount> {
    let cs = LocalisationCospan::at_arrows(c, w);
    let yo = Presheaf::representable(c.clone(), y);
    match kelly_s_infty_traced(&cs, &yo, max_iters) {
        (SInfty::Stable { value, .. }, _) => value.sets.iter().map(|&n| HomCount::Exact(n)).collect(),
        (SInfty::Truncated { .. }, trace) => {
            (0..c.num_objects()).map(|x| HomCount::Truncated(trace.iter().map(|s| s[x]).collect())).collect()
        }
    }
}

/// `S^inf` together with the componentwise sizes at every iteration.
///
/// Stops when `s` is bijective, or when the image of a stage in the next
/// one is already local: a local quotient of `x_n` receiving the reflection
/// map is the reflection itself.
pub fn kelly_s_infty_traced<R: ReflectorCospan>(cs: &R, x: &Presheaf, max_iters: usize) -> (SInfty, Vec<Vec<usize>>) {
    let mut cur = x.clone();
    let mut unit = PresheafMap::identity(x);
    let mut trace = vec![cur.sets.clone()];
    for i in 0..=max_iters {
        let (next, s) = kelly_s(cs, &cur);
        if s.is_iso() {
            return (SInfty::Stable { value: cur, unit, iterations: i }, trace);
        }
        let (onto, _) = s.image();
        if cs.in_subcategory(&cs.f_star(&onto.tgt)) {
            trace.push(onto.tgt.sets.clone());
            let value = onto.tgt.clone();
            return (SInfty::Stable { value, unit: unit.then(&onto), iterations: i + 1 }, trace);
        }
        if i == max_iters {
            break;
        }
        unit = unit.then(&s);
        cur = next;
        trace.push(cur.sets.clone());
    }
    let growth = trace.iter().map(|s| s.iter().sum()).collect();
    (SInfty::Truncated { growth, last: cur }, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    #[test]
    fn empty_w_is_identity() {
        let c = arc(walking_section_retraction());
        let cs = LocalisationCospan::at_arrows(&c, &[]);
        let p = Presheaf::representable(c.clone(), 1);
        let (sp, s) = kelly_s(&cs, &p);
        assert_eq!(sp, p);
        assert!(s.is_iso());
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(localisation_homs_via_s(&c, &[], x, y, 4), HomCount::Exact(c.hom(x, y).len()));
            }
        }
    }

    #[test]
    fn one_step_on_interval_adds_inverse() {
        let c = arc(interval());
        let f = c.find_arrow("f").unwrap();
        let cs = LocalisationCospan::at_arrows(&c, &[f]);
        let (sp, _) = kelly_s(&cs, &Presheaf::representable(c.clone(), 0));
        assert_eq!(sp.sets, vec![1, 1]);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(localisation_homs_via_s(&c, &[f], x, y, 8), HomCount::Exact(1));
            }
        }
    }

    #[test]
    fn local_object_stabilises_immediately() {
        let c = arc(interval());
        let f = c.find_arrow("f").unwrap();
        let cs = LocalisationCospan::at_arrows(&c, &[f]);
        match kelly_s_infty(&cs, &Presheaf::terminal(c.clone()), 4) {
            SInfty::Stable { iterations, .. } => assert!(iterations <= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parallel_pair_grows() {
        let c = arc(parallel_pair());
        let f = c.find_arrow("f").unwrap();
        match localisation_homs_via_s(&c, &[f], 1, 1, 6) {
            HomCount::Truncated(g) => assert!(g.windows(2).all(|w| w[0] < w[1]), "{g:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn agrees_with_zigzag_localisation() {
        let cases: Vec<(FinCat, &str)> = vec![(interval(), "f"), (poset(2), "0<1"), (walking_idempotent(), "e"), (walking_section_retraction(), "s"), (walking_section_retraction(), "e")];
        for (c, a) in cases {
            let c = arc(c);
            let w = [c.find_arrow(a).unwrap()];
            let loc = crate::presentation::localize(&c, &w, 16).unwrap();
            let lc = loc.cat().unwrap();
            for y in 0..c.num_objects() {
                let col = localisation_column_via_s(&c, &w, y, 16);
                for x in 0..c.num_objects() {
                    assert_eq!(col[x], HomCount::Exact(lc.hom(x, y).len()), "{} at {a}: ({x},{y})", c.name());
                }
            }
        }
    }

    #[test]
    fn s_orthogonality() {
        let c = arc(walking_section_retraction());
        let r = c.find_arrow("r").unwrap();
        let cs = LocalisationCospan::at_arrows(&c, &[r]);
        let y = Presheaf::terminal(c.clone());
        for x in 0..2 {
            assert!(s_ortho_check(&cs, &Presheaf::representable(c.clone(), x), &y).unwrap());
        }
        assert!(s_ortho_check(&cs, &y, &Presheaf::representable(c.clone(), 1)).is_err());
        assert!(s_ortho_check(&cs, &Presheaf::representable(c.clone(), 1), &Presheaf::representable(c.clone(), 0)).unwrap());
    }

    #[test]
    fn m_shriek_is_left_adjoint() {
        let c = arc(interval());
        let f = c.find_arrow("f").unwrap();
        let cs = LocalisationCospan::at_arrows(&c, &[f]);
        let w = cs.w.clone();
        let u = Presheaf::terminal(w.clone());
        let v = Presheaf::new(w.clone(), vec![2], vec![vec![0, 1]]).unwrap();
        for x in all_maps(&u, &v) {
            for y in [Presheaf::terminal(c.clone()), Presheaf::representable(c.clone(), 1), Presheaf::representable(c.clone(), 0)] {
                let (a, b) = cs.adjunction_counts(&x, &y);
                assert_eq!(a, b);
            }
        }
    }
}
