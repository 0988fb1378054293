//! Backtracking search for functors, natural transformations,
//! isomorphisms and equivalences.

use std::sync::Arc;

use crate::constructions::{self, Subcat};
use crate::error::{CatError, Result};
use crate::fincat::{ArrId, Budget, FinCat, ObjId};
use crate::functor::{Functor, NatTrans};

type ObjFilter = Box<dyn Fn(ObjId, ObjId) -> bool + Send + Sync>;
type ArrFilter = Box<dyn Fn(ArrId, ArrId) -> bool + Send + Sync>;

#[derive(Default)]
pub struct SearchOptions {
    pub injective_objects: bool,
    pub injective_arrows: bool,
    /// Require `|C(x,y)| = |D(Fx,Fy)|` for all pairs; used for isomorphisms.
    pub preserve_hom_sizes: bool,
    /// `obj_filter(x, y)`: may `x` be sent to `y`?
    pub obj_filter: Option<ObjFilter>,
    /// `arr_filter(f, g)`: may `f` be sent to `g`?
    pub arr_filter: Option<ArrFilter>,
}

impl SearchOptions {
    pub fn iso() -> Self {
        SearchOptions { injective_objects: true, injective_arrows: true, preserve_hom_sizes: true, ..Default::default() }
    }

    pub fn with_obj_filter(mut self, f: impl Fn(ObjId, ObjId) -> bool + Send + Sync + 'static) -> Self {
        self.obj_filter = Some(Box::new(f));
        self
    }

    pub fn with_arr_filter(mut self, f: impl Fn(ArrId, ArrId) -> bool + Send + Sync + 'static) -> Self {
        self.arr_filter = Some(Box::new(f));
        self
    }
}

/// Static plan for assigning the non-identity arrows of a domain.
struct Plan {
    order: Vec<ArrId>,
    forced: Vec<Option<(ArrId, ArrId)>>,
    checks: Vec<Vec<(ArrId, ArrId, ArrId)>>,
}

impl Plan {
    fn new(c: &FinCat) -> Plan {
        let m = c.num_arrows();
        let mut factors: Vec<Vec<(ArrId, ArrId)>> = vec![Vec::new(); m];
        let mut pairs = Vec::new();
        for f in c.non_identity_arrows() {
            for &g in c.out(c.tgt(f)) {
                if !c.is_identity(g) {
                    let h = c.compose(g, f);
                    if !c.is_identity(h) {
                        factors[h].push((g, f));
                    }
                    pairs.push((g, f, h));
                }
            }
        }
        let mut placed: Vec<bool> = (0..m).map(|f| c.is_identity(f)).collect();
        let mut remaining: Vec<ArrId> = c.non_identity_arrows().collect();
        let mut order = Vec::new();
        let mut forced = Vec::new();
        while !remaining.is_empty() {
            let hit = remaining.iter().enumerate().find_map(|(k, &a)| {
                factors[a].iter().find(|&&(g, f)| placed[g] && placed[f]).map(|&p| (k, a, p))
            });
            let (k, a, p) = match hit {
                Some((k, a, p)) => (k, a, Some(p)),
                None => (0, remaining[0], None),
            };
            remaining.remove(k);
            placed[a] = true;
            order.push(a);
            forced.push(p);
        }
        let mut pos = vec![0usize; m];
        for (i, &a) in order.iter().enumerate() {
            pos[a] = i;
        }
        let mut checks = vec![Vec::new(); order.len()];
        for (g, f, h) in pairs {
            let mut key = pos[g].max(pos[f]);
            if !c.is_identity(h) {
                key = key.max(pos[h]);
            }
            checks[key].push((g, f, h));
        }
        Plan { order, forced, checks }
    }
}

struct FunctorSearch<'a> {
    c: &'a Arc<FinCat>,
    d: &'a Arc<FinCat>,
    opts: &'a SearchOptions,
    plan: Plan,
    obj: Vec<ObjId>,
    arr: Vec<ArrId>,
    obj_used: Vec<bool>,
    arr_used: Vec<bool>,
    sig_c: Vec<(usize, usize, usize)>,
    sig_d: Vec<(usize, usize, usize)>,
}

fn signature(c: &FinCat, x: ObjId) -> (usize, usize, usize) {
    (c.hom(x, x).len(), c.out(x).len(), c.incoming(x).len())
}

impl<'a> FunctorSearch<'a> {
    fn obj_ok(&self, x: ObjId, y: ObjId) -> bool {
        let (c, d) = (&**self.c, &**self.d);
        if self.opts.injective_objects && self.obj_used[y] {
            return false;
        }
        if let Some(f) = &self.opts.obj_filter {
            if !f(x, y) {
                return false;
            }
        }
        if self.opts.preserve_hom_sizes && self.sig_c[x] != self.sig_d[y] {
            return false;
        }
        for x2 in 0..=x {
            let y2 = if x2 == x { y } else { self.obj[x2] };
            for (a, b, fa, fb) in [(x2, x, y2, y), (x, x2, y, y2)] {
                let (n, k) = (c.hom(a, b).len(), d.hom(fa, fb).len());
                if n > 0 && k == 0 {
                    return false;
                }
                if self.opts.preserve_hom_sizes && n != k {
                    return false;
                }
                if self.opts.injective_arrows && k < n {
                    return false;
                }
            }
        }
        true
    }

    fn objects(&mut self, x: ObjId, visit: &mut dyn FnMut(&Functor) -> bool) -> bool {
        if x == self.c.num_objects() {
            for (x, &y) in self.obj.iter().enumerate() {
                self.arr[self.c.id(x)] = self.d.id(y);
            }
            if self.opts.injective_arrows {
                for &y in &self.obj {
                    self.arr_used[self.d.id(y)] = true;
                }
            }
            let go = self.arrows(0, visit);
            if self.opts.injective_arrows {
                for &y in &self.obj {
                    self.arr_used[self.d.id(y)] = false;
                }
            }
            return go;
        }
        for y in 0..self.d.num_objects() {
            if self.obj_ok(x, y) {
                self.obj[x] = y;
                self.obj_used[y] = true;
                let go = self.objects(x + 1, visit);
                self.obj_used[y] = false;
                if !go {
                    return false;
                }
            }
        }
        true
    }

    fn try_arrow(&mut self, i: usize, a: ArrId, b: ArrId, visit: &mut dyn FnMut(&Functor) -> bool) -> bool {
        if self.opts.injective_arrows && self.arr_used[b] {
            return true;
        }
        if let Some(f) = &self.opts.arr_filter {
            if !f(a, b) {
                return true;
            }
        }
        self.arr[a] = b;
        let d = &**self.d;
        let ok = self.plan.checks[i].iter().all(|&(g, f, h)| d.compose(self.arr[g], self.arr[f]) == self.arr[h]);
        if !ok {
            return true;
        }
        self.arr_used[b] = true;
        let go = self.arrows(i + 1, visit);
        self.arr_used[b] = false;
        go
    }

    fn arrows(&mut self, i: usize, visit: &mut dyn FnMut(&Functor) -> bool) -> bool {
        if i == self.plan.order.len() {
            let f = Functor::new_unchecked(self.c.clone(), self.d.clone(), self.obj.clone(), self.arr.clone());
            return visit(&f);
        }
        let a = self.plan.order[i];
        if let Some((g, f)) = self.plan.forced[i] {
            let b = self.d.compose(self.arr[g], self.arr[f]);
            return self.try_arrow(i, a, b, visit);
        }
        let (x, y) = (self.obj[self.c.src(a)], self.obj[self.c.tgt(a)]);
        let cands: Vec<ArrId> = self.d.hom(x, y).to_vec();
        for b in cands {
            if !self.try_arrow(i, a, b, visit) {
                return false;
            }
        }
        true
    }
}

/// Visits every functor `C -> D` allowed by `opts`, in a deterministic order,
/// until `visit` returns `false`.
pub fn for_each_functor(c: &Arc<FinCat>, d: &Arc<FinCat>, opts: &SearchOptions, visit: &mut dyn FnMut(&Functor) -> bool) {
    let mut s = FunctorSearch {
        c,
        d,
        opts,
        plan: Plan::new(c),
        obj: vec![0; c.num_objects()],
        arr: vec![0; c.num_arrows()],
        obj_used: vec![false; d.num_objects()],
        arr_used: vec![false; d.num_arrows()],
        sig_c: (0..c.num_objects()).map(|x| signature(c, x)).collect(),
        sig_d: (0..d.num_objects()).map(|x| signature(d, x)).collect(),
    };
    s.objects(0, visit);
}

pub fn all_functors(c: &Arc<FinCat>, d: &Arc<FinCat>, opts: &SearchOptions, budget: &Budget) -> Result<Vec<Functor>> {
    let mut out = Vec::new();
    let mut over = false;
    for_each_functor(c, d, opts, &mut |f| {
        if out.len() >= budget.max_objects {
            over = true;
            return false;
        }
        out.push(f.clone());
        true
    });
    if over {
        return Err(CatError::Size { what: "functor enumeration".into(), limit: budget.max_objects });
    }
    Ok(out)
}

pub fn count_functors(c: &Arc<FinCat>, d: &Arc<FinCat>) -> usize {
    let mut n = 0;
    for_each_functor(c, d, &SearchOptions::default(), &mut |_| {
        n += 1;
        true
    });
    n
}

pub fn find_functor(c: &Arc<FinCat>, d: &Arc<FinCat>, opts: &SearchOptions) -> Option<Functor> {
    let mut found = None;
    for_each_functor(c, d, opts, &mut |f| {
        found = Some(f.clone());
        false
    });
    found
}

pub fn find_isomorphism(c: &Arc<FinCat>, d: &Arc<FinCat>) -> Option<Functor> {
    if c.num_objects() != d.num_objects() || c.num_arrows() != d.num_arrows() {
        return None;
    }
    find_functor(c, d, &SearchOptions::iso())
}

/// Visits the natural transformations `F => G` (only invertible ones if
/// `iso_only`), until `visit` returns `false`.
pub fn for_each_nat_trans(f: &Functor, g: &Functor, iso_only: bool, visit: &mut dyn FnMut(&NatTrans) -> bool) {
    let (c, d) = (&*f.dom, &*f.cod);
    let n = c.num_objects();
    let mut by_max: Vec<Vec<ArrId>> = vec![Vec::new(); n];
    for a in c.non_identity_arrows() {
        by_max[c.src(a).max(c.tgt(a))].push(a);
    }
    let cands: Vec<Vec<ArrId>> = (0..n)
        .map(|x| d.hom(f.obj[x], g.obj[x]).iter().copied().filter(|&a| !iso_only || d.is_iso(a)).collect())
        .collect();
    let mut comp = vec![0; n];
    fn go(
        x: usize,
        comp: &mut Vec<ArrId>,
        cands: &[Vec<ArrId>],
        by_max: &[Vec<ArrId>],
        f: &Functor,
        g: &Functor,
        visit: &mut dyn FnMut(&NatTrans) -> bool,
    ) -> bool {
        let (c, d) = (&*f.dom, &*f.cod);
        if x == cands.len() {
            let t = NatTrans { src: f.clone(), tgt: g.clone(), comp: comp.clone() };
            return visit(&t);
        }
        for &a in &cands[x] {
            comp[x] = a;
            let ok = by_max[x].iter().all(|&e| {
                let (s, t) = (c.src(e), c.tgt(e));
                d.compose(comp[t], f.arr[e]) == d.compose(g.arr[e], comp[s])
            });
            if ok && !go(x + 1, comp, cands, by_max, f, g, visit) {
                return false;
            }
        }
        true
    }
    go(0, &mut comp, &cands, &by_max, f, g, visit);
}

pub fn all_nat_trans(f: &Functor, g: &Functor) -> Vec<NatTrans> {
    let mut out = Vec::new();
    for_each_nat_trans(f, g, false, &mut |t| {
        out.push(t.clone());
        true
    });
    out
}

pub fn find_nat_iso(f: &Functor, g: &Functor) -> Option<NatTrans> {
    let mut found = None;
    for_each_nat_trans(f, g, true, &mut |t| {
        found = Some(t.clone());
        false
    });
    found
}

pub fn naturally_isomorphic(f: &Functor, g: &Functor) -> bool {
    find_nat_iso(f, g).is_some()
}

/// Full subcategory on the least object of each isomorphism class, with a
/// retraction `C -> sk C` built from chosen isomorphisms `x -> rep x`.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub sub: Subcat,
    pub retraction: Functor,
    /// `theta[x]`: chosen isomorphism from `x` to its representative.
    pub theta: Vec<ArrId>,
}

pub fn skeleton(c: &Arc<FinCat>) -> Skeleton {
    let n = c.num_objects();
    let mut rep = vec![0; n];
    let mut theta = vec![0; n];
    for x in 0..n {
        let (r, t) = (0..=x).find_map(|r| c.iso_between(x, r).map(|t| (r, t))).expect("x is iso to itself");
        rep[x] = r;
        theta[x] = if r == x { c.id(x) } else { t };
    }
    let sub = constructions::full_subcategory(c, |x| rep[x] == x);
    let obj: Vec<ObjId> = (0..n).map(|x| sub.obj_index[rep[x]].expect("representative kept")).collect();
    let arr: Vec<ArrId> = (0..c.num_arrows())
        .map(|f| {
            let (x, y) = (c.src(f), c.tgt(f));
            let inv = c.inverse(theta[x]).expect("iso");
            let g = c.compose(theta[y], c.compose(f, inv));
            sub.arr_index[g].expect("full subcategory")
        })
        .collect();
    let retraction = Functor::new_unchecked(c.clone(), sub.cat.clone(), obj, arr);
    Skeleton { sub, retraction, theta }
}

/// Some equivalence `C -> D`, via an isomorphism of skeleta.
pub fn find_equivalence(c: &Arc<FinCat>, d: &Arc<FinCat>) -> Option<Functor> {
    let (sc, sd) = (skeleton(c), skeleton(d));
    let iso = find_isomorphism(&sc.sub.cat, &sd.sub.cat)?;
    Some(sc.retraction.then(&iso).then(&sd.sub.incl))
}

pub fn equivalent(c: &Arc<FinCat>, d: &Arc<FinCat>) -> bool {
    find_equivalence(c, d).is_some()
}

/// Brute force: is there `G: D -> C` with `GF ~ id` and `FG ~ id`?
pub fn has_quasi_inverse_by_search(f: &Functor) -> bool {
    let (c, d) = (&f.dom, &f.cod);
    let idc = Functor::identity(c.clone());
    let idd = Functor::identity(d.clone());
    let mut found = false;
    for_each_functor(d, c, &SearchOptions::default(), &mut |g| {
        if naturally_isomorphic(&f.then(g), &idc) && naturally_isomorphic(&g.then(f), &idd) {
            found = true;
            return false;
        }
        true
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    #[test]
    fn functor_counts() {
        let i = arc(interval());
        assert_eq!(count_functors(&i, &i), 3);
        let e = arc(walking_idempotent());
        let s = arc(walking_section_retraction());
        // functors from the idempotent pick an idempotent endomorphism
        assert_eq!(count_functors(&e, &s), 3);
        assert_eq!(count_functors(&s, &e), 1);
        let z2 = arc(cyclic_group(2));
        let z3 = arc(cyclic_group(3));
        assert_eq!(count_functors(&z2, &z3), 1);
        assert_eq!(count_functors(&z3, &z3), 3);
        assert_eq!(count_functors(&arc(poset(2)), &arc(poset(2))), 10);
    }

    #[test]
    fn every_found_functor_is_lawful() {
        let lib: Vec<_> = library().into_iter().map(arc).collect();
        for c in &lib {
            for d in &lib {
                for_each_functor(c, d, &SearchOptions::default(), &mut |f| {
                    f.check().unwrap();
                    true
                });
            }
        }
    }

    #[test]
    fn isomorphism_search() {
        let s = arc(walking_section_retraction());
        assert!(find_isomorphism(&s, &s).is_some());
        assert!(find_isomorphism(&arc(interval()), &arc(walking_iso())).is_none());
    }

    #[test]
    fn idempotent_is_not_equivalent_to_split_pair() {
        assert!(!equivalent(&arc(walking_idempotent()), &arc(walking_section_retraction())));
        assert!(equivalent(&arc(walking_iso()), &arc(terminal())));
    }

    #[test]
    fn nat_iso_search() {
        let j = arc(walking_iso());
        let c0 = Functor::constant(j.clone(), j.clone(), 0);
        let c1 = Functor::constant(j.clone(), j.clone(), 1);
        assert!(naturally_isomorphic(&c0, &c1));
        let i = arc(interval());
        let d0 = Functor::constant(i.clone(), i.clone(), 0);
        let d1 = Functor::constant(i.clone(), i.clone(), 1);
        assert!(!naturally_isomorphic(&d0, &d1));
        assert_eq!(all_nat_trans(&d0, &d1).len(), 1);
    }

    #[test]
    fn skeleton_of_groupoid() {
        let j = arc(walking_iso());
        let sk = skeleton(&j);
        assert_eq!(sk.sub.cat.num_objects(), 1);
        sk.retraction.check().unwrap();
    }
}
