//! Gluing `Gl(q^*)` of presheaf categories along `q: A_u -> A_d`.
//!
//! An object is `x_u` over `A_u`, `x_d` over `A_d` and a comparison
//! `x_u -> q^* x_d`; a map is cartesian when every comparison square is a
//! pullback of sets.

use std::sync::Arc;

use crate::constructions::is_pullback_of_sets;
use crate::error::CatError;
use crate::fibration::is_cocartesian;
use crate::fincat::{ArrId, Arrow, FinCat, ObjId};
use crate::fixtures::{discrete_on, terminal};
use crate::functor::{Functor, NatTrans};
use crate::presheaf::{self, lan, lan_counit, Lan, Presheaf, PresheafMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedObject {
    pub up: Presheaf,
    pub down: Presheaf,
    pub comparison: PresheafMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedMap {
    pub src: GluedObject,
    pub tgt: GluedObject,
    pub up: PresheafMap,
    pub down: PresheafMap,
}

impl GluedMap {
    /// `other . self`.
    pub fn then(&self, other: &GluedMap) -> GluedMap {
        GluedMap { src: self.src.clone(), tgt: other.tgt.clone(), up: self.up.then(&other.up), down: self.down.then(&other.down) }
    }
}

/// The gluing along a fixed `q`.
#[derive(Clone, Debug)]
pub struct Gluing {
    pub q: Functor,
}

impl Gluing {
    pub fn new(q: Functor) -> Gluing {
        Gluing { q }
    }

    pub fn object(&self, up: Presheaf, down: Presheaf, comp: Vec<Vec<usize>>) -> Result<GluedObject, CatError> {
        let comparison = PresheafMap::new(up.clone(), down.restrict(&self.q), comp)
            .map_err(|e| CatError::Naturality(e.to_string()))?;
        Ok(GluedObject { up, down, comparison })
    }

    pub fn map(&self, src: &GluedObject, tgt: &GluedObject, up: PresheafMap, down: PresheafMap) -> Result<GluedMap, CatError> {
        let m = GluedMap { src: src.clone(), tgt: tgt.clone(), up, down };
        self.check_map(&m)?;
        Ok(m)
    }

    pub fn check_map(&self, m: &GluedMap) -> Result<(), CatError> {
        let e = |s: presheaf::PresheafError| CatError::Naturality(s.to_string());
        m.up.check().map_err(e)?;
        m.down.check().map_err(e)?;
        let lhs = m.up.then(&m.tgt.comparison);
        let rhs = m.src.comparison.then(&m.down.restrict(&self.q));
        if lhs.comp != rhs.comp {
            return Err(CatError::Naturality("comparison square does not commute".into()));
        }
        Ok(())
    }

    pub fn identity(&self, x: &GluedObject) -> GluedMap {
        GluedMap { src: x.clone(), tgt: x.clone(), up: PresheafMap::identity(&x.up), down: PresheafMap::identity(&x.down) }
    }

    /// `yo(a) -> q^* yo(q a)`, `u |-> q u`.
    pub fn yo_gl(&self, a: ObjId) -> GluedObject {
        let (au, ad) = (&self.q.dom, &self.q.cod);
        let up = Presheaf::representable(au.clone(), a);
        let down = Presheaf::representable(ad.clone(), self.q.obj[a]);
        let comp = (0..au.num_objects()).map(|b| au.hom(b, a).iter().map(|&u| ad.hom_index(self.q.arr[u])).collect()).collect();
        let comparison = PresheafMap { src: up.clone(), tgt: down.restrict(&self.q), comp };
        GluedObject { up, down, comparison }
    }

    pub fn is_cartesian(&self, m: &GluedMap) -> bool {
        (0..self.q.dom.num_objects()).all(|a| {
            is_pullback_of_sets(&m.up.comp[a], &m.src.comparison.comp[a], &m.tgt.comparison.comp[a], &m.down.comp[self.q.obj[a]])
        })
    }

    /// Objectwise pushout; the comparison is induced.
    pub fn pushout(&self, a: &GluedMap, b: &GluedMap) -> Result<(GluedObject, GluedMap, GluedMap), CatError> {
        let e = |s: presheaf::PresheafError| CatError::Precondition(s.to_string());
        let pu = presheaf::pushout(&a.up, &b.up).map_err(e)?;
        let pd = presheaf::pushout(&a.down, &b.down).map_err(e)?;
        let left = a.tgt.comparison.then(&pd.inl.restrict(&self.q));
        let right = b.tgt.comparison.then(&pd.inr.restrict(&self.q));
        let mut comp: Vec<Vec<usize>> = pu.value.sets.iter().map(|&n| vec![0; n]).collect();
        for (x, row) in comp.iter_mut().enumerate() {
            for (i, &k) in pu.inl.comp[x].iter().enumerate() {
                row[k] = left.comp[x][i];
            }
            for (i, &k) in pu.inr.comp[x].iter().enumerate() {
                row[k] = right.comp[x][i];
            }
        }
        let obj = GluedObject {
            comparison: PresheafMap { src: pu.value.clone(), tgt: pd.value.restrict(&self.q), comp },
            up: pu.value,
            down: pd.value,
        };
        let inl = GluedMap { src: a.tgt.clone(), tgt: obj.clone(), up: pu.inl, down: pd.inl };
        let inr = GluedMap { src: b.tgt.clone(), tgt: obj.clone(), up: pu.inr, down: pd.inr };
        Ok((obj, inl, inr))
    }

    /// Map out of a pushout from compatible maps out of its legs.
    pub fn copair(&self, inl: &GluedMap, inr: &GluedMap, left: &GluedMap, right: &GluedMap) -> GluedMap {
        let fill = |i: &PresheafMap, j: &PresheafMap, l: &PresheafMap, r: &PresheafMap| {
            let mut comp: Vec<Vec<usize>> = i.tgt.sets.iter().map(|&n| vec![0; n]).collect();
            for (x, row) in comp.iter_mut().enumerate() {
                for (e, &k) in i.comp[x].iter().enumerate() {
                    row[k] = l.comp[x][e];
                }
                for (e, &k) in j.comp[x].iter().enumerate() {
                    row[k] = r.comp[x][e];
                }
            }
            PresheafMap { src: i.tgt.clone(), tgt: l.tgt.clone(), comp }
        };
        GluedMap {
            src: inl.tgt.clone(),
            tgt: left.tgt.clone(),
            up: fill(&inl.up, &inr.up, &left.up, &right.up),
            down: fill(&inl.down, &inr.down, &left.down, &right.down),
        }
    }

    /// Objectwise pullback of a cospan of glued maps.
    pub fn pullback(&self, a: &GluedMap, b: &GluedMap) -> Result<(GluedObject, GluedMap, GluedMap), CatError> {
        let e = |s: presheaf::PresheafError| CatError::Precondition(s.to_string());
        let (pu, pu1, pu2) = presheaf::pullback(&a.up, &b.up).map_err(e)?;
        let (pd, pd1, pd2) = presheaf::pullback(&a.down, &b.down).map_err(e)?;
        // element (i, j) of the up pullback goes to (c_a(i), c_b(j)) below
        let ca = pu1.then(&a.src.comparison);
        let cb = pu2.then(&b.src.comparison);
        let q = &self.q;
        let mut comp = Vec::with_capacity(pu.sets.len());
        for x in 0..pu.sets.len() {
            let qx = q.obj[x];
            let row = (0..pu.sets[x])
                .map(|k| {
                    let (l, r) = (ca.comp[x][k], cb.comp[x][k]);
                    (0..pd.sets[qx]).find(|&t| pd1.comp[qx][t] == l && pd2.comp[qx][t] == r).expect("pair lies in the pullback")
                })
                .collect();
            comp.push(row);
        }
        let obj = GluedObject { comparison: PresheafMap { src: pu.clone(), tgt: pd.restrict(q), comp }, up: pu, down: pd };
        let p1 = GluedMap { src: obj.clone(), tgt: a.src.clone(), up: pu1, down: pd1 };
        let p2 = GluedMap { src: obj.clone(), tgt: b.src.clone(), up: pu2, down: pd2 };
        Ok((obj, p1, p2))
    }

    /// The map into a pullback induced by `u` and `v`.
    pub fn pair(&self, u: &GluedMap, v: &GluedMap, p1: &GluedMap, p2: &GluedMap) -> GluedMap {
        GluedMap {
            src: u.src.clone(),
            tgt: p1.src.clone(),
            up: presheaf::pair(&u.up, &v.up, &p1.up, &p2.up),
            down: presheaf::pair(&u.down, &v.down, &p1.down, &p2.down),
        }
    }

    /// Image of `x` under restriction along `g: A' -> A_u`, glued over `q g`.
    pub fn restrict_up(&self, g: &Functor, x: &GluedObject) -> GluedObject {
        let up = x.up.restrict(g);
        let qg = g.then(&self.q);
        let comp = g.obj.iter().map(|&a| x.comparison.comp[a].clone()).collect();
        GluedObject { comparison: PresheafMap { src: up.clone(), tgt: x.down.restrict(&qg), comp }, up, down: x.down.clone() }
    }

    pub fn restrict_up_map(&self, g: &Functor, m: &GluedMap) -> GluedMap {
        GluedMap { src: self.restrict_up(g, &m.src), tgt: self.restrict_up(g, &m.tgt), up: m.up.restrict(g), down: m.down.clone() }
    }

    /// The cartesian map into `y` over a map `d: x_d -> y_d`.
    pub fn cartesian_lift(&self, y: &GluedObject, d: &PresheafMap) -> GluedMap {
        let qd = d.restrict(&self.q);
        let (pu, to_y, to_x) = presheaf::pullback(&y.comparison, &qd).expect("common target q^* y_d");
        let src = GluedObject { up: pu.clone(), down: d.src.clone(), comparison: PresheafMap { src: pu, tgt: qd.src.clone(), comp: to_x.comp } };
        GluedMap { src, tgt: y.clone(), up: to_y, down: d.clone() }
    }
}

/// A commutative square `q k_u = k_d r` along which glued objects over `r`
/// are pushed forward by left Kan extension.
#[derive(Clone, Debug)]
pub struct GluedSquare {
    pub k_u: Functor,
    pub k_d: Functor,
    pub r: Functor,
    pub q: Functor,
}

/// Left Kan extension of a glued object with the two component extensions.
#[derive(Clone, Debug)]
pub struct GluedLan {
    pub value: GluedObject,
    pub up: Lan,
    pub down: Lan,
}

impl GluedSquare {
    pub fn check(&self) -> Result<(), CatError> {
        if self.k_u.then(&self.q) != self.r.then(&self.k_d) {
            return Err(CatError::Functor("square does not commute".into()));
        }
        Ok(())
    }

    /// `k^* x` for `x` glued over `q`.
    pub fn restrict(&self, x: &GluedObject) -> GluedObject {
        let comp = self.k_u.obj.iter().map(|&a| x.comparison.comp[a].clone()).collect();
        let up = x.up.restrict(&self.k_u);
        let down = x.down.restrict(&self.k_d);
        GluedObject { comparison: PresheafMap { src: up.clone(), tgt: down.restrict(&self.r), comp }, up, down }
    }

    /// `k_! x` for `x` glued over `r`; comparison `[(f, e)] |-> [(q f, c e)]`.
    pub fn lan(&self, x: &GluedObject) -> GluedLan {
        let up = lan(&self.k_u, &x.up);
        let down = lan(&self.k_d, &x.down);
        let mut comp: Vec<Vec<usize>> = up.value.sets.iter().map(|&n| vec![0; n]).collect();
        for (a, c, f, e, k) in up.generators() {
            comp[a][k] = down.class_of(self.q.obj[a], self.r.obj[c], self.q.arr[f], x.comparison.comp[c][e]);
        }
        let value = GluedObject {
            comparison: PresheafMap { src: up.value.clone(), tgt: down.value.restrict(&self.q), comp },
            up: up.value.clone(),
            down: down.value.clone(),
        };
        GluedLan { value, up, down }
    }

    pub fn lan_map(&self, from: &GluedLan, to: &GluedLan, m: &GluedMap) -> GluedMap {
        GluedMap {
            src: from.value.clone(),
            tgt: to.value.clone(),
            up: from.up.map_to(&to.up, &m.up),
            down: from.down.map_to(&to.down, &m.down),
        }
    }

    /// Counit `k_! k^* x -> x`.
    pub fn counit(&self, x: &GluedObject) -> GluedMap {
        let src = self.lan(&self.restrict(x)).value;
        let (_, up) = lan_counit(&self.k_u, &x.up);
        let (_, down) = lan_counit(&self.k_d, &x.down);
        GluedMap { src, tgt: x.clone(), up, down }
    }
}

/// `W_d` (discrete on chosen arrows of `A_d`), its cocartesian lifts `W_u`,
/// and the two localisation cospans glued along `q` and `p: W_u -> W_d`.
#[derive(Clone, Debug)]
pub struct LocalisationGluing {
    pub gl: Gluing,
    pub over_w: Gluing,
    pub w_d: Vec<ArrId>,
    /// Underlying arrow of `A_u` for each object of `W_u`.
    pub w_u: Vec<ArrId>,
    pub s: GluedSquare,
    pub t: GluedSquare,
    pub m_u: NatTrans,
    pub m_d: NatTrans,
}

impl LocalisationGluing {
    pub fn new(q: &Functor, w_d: &[ArrId]) -> Result<LocalisationGluing, CatError> {
        let (au, ad) = (q.dom.clone(), q.cod.clone());
        let wd_cat = Arc::new(discrete_on("W_d", &w_d.iter().map(|&f| ad.arr_label(f).to_string()).collect::<Vec<_>>()));
        let lifts: Vec<(ArrId, usize)> = (0..au.num_arrows())
            .filter_map(|f| w_d.iter().position(|&w| w == q.arr[f]).map(|i| (f, i)))
            .filter(|&(f, _)| is_cocartesian(q, f))
            .collect();
        let n = lifts.len();
        let objects: Vec<String> = lifts.iter().map(|&(f, _)| au.arr_label(f).to_string()).collect();
        let mut arrows = Vec::new();
        let mut pairs = Vec::new();
        let mut ident = vec![0; n];
        for (i, &(f, wi)) in lifts.iter().enumerate() {
            for (j, &(g, wj)) in lifts.iter().enumerate() {
                if wi != wj {
                    continue;
                }
                for &alpha in au.hom(au.src(f), au.src(g)) {
                    if !ad.is_identity(q.arr[alpha]) {
                        continue;
                    }
                    for &beta in au.hom(au.tgt(f), au.tgt(g)) {
                        if ad.is_identity(q.arr[beta]) && au.compose(beta, f) == au.compose(g, alpha) {
                            if i == j && au.is_identity(alpha) && au.is_identity(beta) {
                                ident[i] = arrows.len();
                            }
                            arrows.push(Arrow::new(format!("({},{})", au.arr_label(alpha), au.arr_label(beta)), i, j));
                            pairs.push((alpha, beta));
                        }
                    }
                }
            }
        }
        let ends: Vec<(usize, usize)> = arrows.iter().map(|a: &Arrow| (a.src, a.tgt)).collect();
        let wu_cat = FinCat::build("W_u", objects, arrows, ident, |g, f| {
            let ((a1, b1), (a2, b2)) = (pairs[f], pairs[g]);
            let target = (au.compose(a2, a1), au.compose(b2, b1));
            (0..pairs.len()).find(|&k| pairs[k] == target && ends[k] == (ends[f].0, ends[g].1)).expect("closed under composition")
        })?;
        let wu_cat = Arc::new(wu_cat);
        let p = Functor::new(
            wu_cat.clone(),
            wd_cat.clone(),
            lifts.iter().map(|&(_, i)| i).collect(),
            ends.iter().map(|&(s, _)| lifts[s].1).collect(),
        )?;
        let s_u = Functor::new(wu_cat.clone(), au.clone(), lifts.iter().map(|&(f, _)| au.src(f)).collect(), pairs.iter().map(|p| p.0).collect())?;
        let t_u = Functor::new(wu_cat.clone(), au.clone(), lifts.iter().map(|&(f, _)| au.tgt(f)).collect(), pairs.iter().map(|p| p.1).collect())?;
        let s_d = Functor::new(wd_cat.clone(), ad.clone(), w_d.iter().map(|&f| ad.src(f)).collect(), w_d.iter().map(|&f| ad.id(ad.src(f))).collect())?;
        let t_d = Functor::new(wd_cat.clone(), ad.clone(), w_d.iter().map(|&f| ad.tgt(f)).collect(), w_d.iter().map(|&f| ad.id(ad.tgt(f))).collect())?;
        let m_u = NatTrans::new(s_u.clone(), t_u.clone(), lifts.iter().map(|&(f, _)| f).collect())?;
        let m_d = NatTrans::new(s_d.clone(), t_d.clone(), w_d.to_vec())?;
        let s = GluedSquare { k_u: s_u, k_d: s_d, r: p.clone(), q: q.clone() };
        let t = GluedSquare { k_u: t_u, k_d: t_d, r: p.clone(), q: q.clone() };
        s.check()?;
        t.check()?;
        Ok(LocalisationGluing {
            gl: Gluing::new(q.clone()),
            over_w: Gluing::new(p),
            w_d: w_d.to_vec(),
            w_u: lifts.iter().map(|&(f, _)| f).collect(),
            s,
            t,
            m_u,
            m_d,
        })
    }

    /// `m^* x` as the map `t^* x -> s^* x` of `Gl(p^*)`.
    pub fn m_star(&self, x: &GluedObject) -> GluedMap {
        let src = self.t.restrict(x);
        let tgt = self.s.restrict(x);
        let up = PresheafMap { src: src.up.clone(), tgt: tgt.up.clone(), comp: self.m_u.comp.iter().map(|&f| x.up.act[f].clone()).collect() };
        let down = PresheafMap { src: src.down.clone(), tgt: tgt.down.clone(), comp: self.m_d.comp.iter().map(|&f| x.down.act[f].clone()).collect() };
        GluedMap { src, tgt, up, down }
    }

    /// Mate `s_! U -> t_! U` of `m`, componentwise.
    fn mate(&self, su: &GluedLan, tu: &GluedLan) -> GluedMap {
        let one = |ku: &Lan, lu: &Lan, m: &NatTrans| {
            let c = &m.src.cod;
            let mut comp: Vec<Vec<usize>> = ku.value.sets.iter().map(|&n| vec![0; n]).collect();
            for (d, w, f, u, k) in ku.generators() {
                comp[d][k] = lu.class_of(d, w, c.compose(m.comp[w], f), u);
            }
            PresheafMap { src: ku.value.clone(), tgt: lu.value.clone(), comp }
        };
        GluedMap { src: su.value.clone(), tgt: tu.value.clone(), up: one(&su.up, &tu.up, &self.m_u), down: one(&su.down, &tu.down, &self.m_d) }
    }

    /// `m_! phi` for `phi: U -> V` in `Gl(p^*)`, with its pushout legs.
    pub fn m_shriek(&self, phi: &GluedMap) -> (GluedObject, GluedMap, GluedMap) {
        let su = self.s.lan(&phi.src);
        let tu = self.t.lan(&phi.src);
        let sv = self.s.lan(&phi.tgt);
        let mate = self.mate(&su, &tu);
        let sphi = self.s.lan_map(&su, &sv, phi);
        self.gl.pushout(&mate, &sphi).expect("legs share s_! U")
    }

    /// Counit `m_! m^* x -> x`.
    pub fn eps_m(&self, x: &GluedObject) -> GluedMap {
        let (_, inl, inr) = self.m_shriek(&self.m_star(x));
        let eps_t = self.t.counit(x);
        let eps_s = self.s.counit(x);
        self.gl.copair(&inl, &inr, &eps_t, &eps_s)
    }

    /// `t^* x -> s^* x` and `eps_m x` are both cartesian.
    pub fn check_good(&self, x: &GluedObject) -> bool {
        self.over_w.is_cartesian(&self.m_star(x)) && self.gl.is_cartesian(&self.eps_m(x))
    }

    /// The fibre inclusion of `q` over `c`, as a square over `{c} -> A_d`.
    pub fn fibre_square(&self, c: ObjId) -> Result<GluedSquare, CatError> {
        fibre_square(&self.gl.q, c)
    }

    /// The counit `k_! k^* x -> x` along the fibre over `c` is cartesian.
    pub fn check_nice(&self, x: &GluedObject, c: ObjId) -> Result<bool, CatError> {
        let sq = self.fibre_square(c)?;
        Ok(self.gl.is_cartesian(&sq.counit(x)))
    }
}

/// `fib_q(c) -> A_u` over `{c} -> A_d`.
pub fn fibre_square(q: &Functor, c: ObjId) -> Result<GluedSquare, CatError> {
    let (au, ad) = (&q.dom, &q.cod);
    let objs: Vec<ObjId> = (0..au.num_objects()).filter(|&a| q.obj[a] == c).collect();
    let arrs: Vec<ArrId> = (0..au.num_arrows())
        .filter(|&f| q.obj[au.src(f)] == c && q.obj[au.tgt(f)] == c && q.arr[f] == ad.id(c))
        .collect();
    let pos = |a: ObjId| objs.iter().position(|&b| b == a).unwrap();
    let arrows: Vec<Arrow> = arrs.iter().map(|&f| Arrow::new(au.arr_label(f), pos(au.src(f)), pos(au.tgt(f)))).collect();
    let ident = objs.iter().map(|&a| arrs.iter().position(|&f| f == au.id(a)).unwrap()).collect();
    let fib = FinCat::build(
        format!("fib({})", ad.obj_label(c)),
        objs.iter().map(|&a| au.obj_label(a).to_string()).collect(),
        arrows,
        ident,
        |g, f| arrs.iter().position(|&h| h == au.compose(arrs[g], arrs[f])).unwrap(),
    )?;
    let fib = Arc::new(fib);
    let one = Arc::new(terminal());
    let k_u = Functor::new(fib.clone(), au.clone(), objs.clone(), arrs.clone())?;
    let k_d = Functor::new(one.clone(), ad.clone(), vec![c], vec![ad.id(c)])?;
    let r = Functor::constant(fib, one, 0);
    let sq = GluedSquare { k_u, k_d, r, q: q.clone() };
    sq.check()?;
    Ok(sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::product;
    use crate::fincat::Budget;
    use crate::fixtures::*;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    fn projection() -> (Functor, ArrId) {
        let i = arc(poset(1));
        let sq = product(&i, &i, &Budget::default()).unwrap();
        (sq.right.clone(), i.find_arrow("0<1").unwrap())
    }

    #[test]
    fn identity_is_cartesian() {
        let (q, _) = projection();
        let gl = Gluing::new(q.clone());
        for a in 0..q.dom.num_objects() {
            let x = gl.yo_gl(a);
            gl.check_map(&gl.identity(&x)).unwrap();
            assert!(gl.is_cartesian(&gl.identity(&x)));
        }
    }

    #[test]
    fn non_injective_gap_is_not_cartesian() {
        let one = arc(terminal());
        let gl = Gluing::new(Functor::identity(one.clone()));
        let two = Presheaf::new(one.clone(), vec![2], vec![vec![0, 1]]).unwrap();
        let pt = Presheaf::terminal(one.clone());
        // x = (2 -> 1), y = (1 -> 1); map x -> y is identity below
        let x = gl.object(two.clone(), pt.clone(), vec![vec![0, 0]]).unwrap();
        let y = gl.object(pt.clone(), pt.clone(), vec![vec![0]]).unwrap();
        let m = gl.map(&x, &y, PresheafMap::new(two, pt.clone(), vec![vec![0, 0]]).unwrap(), PresheafMap::identity(&pt)).unwrap();
        assert!(!gl.is_cartesian(&m));
    }

    #[test]
    fn cartesian_lifts_compose() {
        let (q, _) = projection();
        let gl = Gluing::new(q.clone());
        let y = gl.yo_gl(3);
        let sub = presheaf::all_maps(&Presheaf::representable(q.cod.clone(), 0), &y.down).pop().unwrap();
        let g = gl.cartesian_lift(&y, &sub);
        gl.check_map(&g).unwrap();
        assert!(gl.is_cartesian(&g));
        let h = gl.cartesian_lift(&y, &PresheafMap::identity(&y.down));
        assert!(gl.is_cartesian(&h));
        let g2 = gl.cartesian_lift(&h.src, &sub);
        assert!(gl.is_cartesian(&g2.then(&h)));
    }

    #[test]
    fn representables_over_opfibration_are_good_and_nice() {
        let (q, w) = projection();
        let lg = LocalisationGluing::new(&q, &[w]).unwrap();
        assert_eq!(lg.w_u.len(), 2);
        for a in 0..q.dom.num_objects() {
            let x = lg.gl.yo_gl(a);
            lg.gl.check_map(&lg.eps_m(&x)).unwrap();
            assert!(lg.check_good(&x), "object {a}");
            for c in 0..q.cod.num_objects() {
                assert!(lg.check_nice(&x, c).unwrap());
            }
        }
    }

    #[test]
    fn broken_comparison_is_not_good() {
        let (q, w) = projection();
        let lg = LocalisationGluing::new(&q, &[w]).unwrap();
        let a = 0;
        let good = lg.gl.yo_gl(a);
        let pt = Presheaf::terminal(q.cod.clone());
        let comp = good.up.sets.iter().map(|&n| vec![0; n]).collect();
        let broken = lg.gl.object(good.up.clone(), pt, comp).unwrap();
        assert!(!lg.check_good(&broken));
    }
}
