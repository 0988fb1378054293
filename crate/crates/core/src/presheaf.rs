//! Set-valued presheaves and copresheaves on finite categories.
//!
//! Elements of `P(x)` are `0..P.sets[x]`. A presheaf stores, for every
//! arrow `f: x -> y`, the restriction `P(y) -> P(x)`.

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::constructions::opposite;
use crate::fincat::{ArrId, Arrow, FinCat, ObjId};
use crate::functor::{same_cat, Functor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresheafError {
    #[error("restriction along `{0}` has the wrong shape")]
    Shape(String),
    #[error("restriction along identity `{0}` is not the identity")]
    Identity(String),
    #[error("restriction does not respect the composite `{0}`")]
    Composite(String),
    #[error("component at `{0}` is not natural")]
    NotNatural(String),
    #[error("presheaves live over different bases")]
    BaseMismatch,
    #[error("maps do not share a source")]
    SpanMismatch,
}

pub type Result<T> = std::result::Result<T, PresheafError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    pub base: Arc<FinCat>,
    pub sets: Vec<usize>,
    /// `act[f][q] = P(f)(q)` for `q` in `P(tgt f)`.
    pub act: Vec<Vec<usize>>,
}

impl Presheaf {
    pub fn new(base: Arc<FinCat>, sets: Vec<usize>, act: Vec<Vec<usize>>) -> Result<Presheaf> {
        let p = Presheaf { base, sets, act };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        let c = &*self.base;
        if self.sets.len() != c.num_objects() || self.act.len() != c.num_arrows() {
            return Err(PresheafError::Shape("<all>".into()));
        }
        for f in 0..c.num_arrows() {
            let (x, y) = (c.src(f), c.tgt(f));
            if self.act[f].len() != self.sets[y] || self.act[f].iter().any(|&p| p >= self.sets[x]) {
                return Err(PresheafError::Shape(c.arr_label(f).into()));
            }
        }
        for x in 0..c.num_objects() {
            if self.act[c.id(x)].iter().enumerate().any(|(i, &p)| i != p) {
                return Err(PresheafError::Identity(c.arr_label(c.id(x)).into()));
            }
        }
        for f in 0..c.num_arrows() {
            for &g in c.out(c.tgt(f)) {
                let gf = c.compose(g, f);
                if (0..self.sets[c.tgt(g)]).any(|q| self.act[gf][q] != self.act[f][self.act[g][q]]) {
                    return Err(PresheafError::Composite(format!("{} . {}", c.arr_label(g), c.arr_label(f))));
                }
            }
        }
        Ok(())
    }

    pub fn empty(base: Arc<FinCat>) -> Presheaf {
        let act = vec![Vec::new(); base.num_arrows()];
        Presheaf { sets: vec![0; base.num_objects()], act, base }
    }

    pub fn terminal(base: Arc<FinCat>) -> Presheaf {
        let act = vec![vec![0]; base.num_arrows()];
        Presheaf { sets: vec![1; base.num_objects()], act, base }
    }

    /// `yo(y) = C(-, y)`; element `i` of `yo(y)(x)` is `C.hom(x, y)[i]`.
    pub fn representable(base: Arc<FinCat>, y: ObjId) -> Presheaf {
        let c = &*base;
        let sets = (0..c.num_objects()).map(|x| c.hom(x, y).len()).collect();
        let act = (0..c.num_arrows())
            .map(|f| c.hom(c.tgt(f), y).iter().map(|&u| c.hom_index(c.compose(u, f))).collect())
            .collect();
        Presheaf { base, sets, act }
    }

    pub fn restrict_elem(&self, f: ArrId, q: usize) -> usize {
        self.act[f][q]
    }

    pub fn total(&self) -> usize {
        self.sets.iter().sum()
    }

    /// Precomposition with `F: C -> base`.
    pub fn restrict(&self, f: &Functor) -> Presheaf {
        debug_assert!(same_cat(&f.cod, &self.base));
        Presheaf {
            base: f.dom.clone(),
            sets: f.obj.iter().map(|&y| self.sets[y]).collect(),
            act: f.arr.iter().map(|&g| self.act[g].clone()).collect(),
        }
    }

    /// Category of elements with its projection (a discrete fibration).
    pub fn elements(&self) -> (Arc<FinCat>, Functor) {
        let c = &*self.base;
        let mut offset = vec![0; c.num_objects() + 1];
        for x in 0..c.num_objects() {
            offset[x + 1] = offset[x] + self.sets[x];
        }
        let mut objects = Vec::new();
        for x in 0..c.num_objects() {
            for p in 0..self.sets[x] {
                objects.push(format!("{}:{}", c.obj_label(x), p));
            }
        }
        let mut arrows = Vec::new();
        let mut base_arr = Vec::new();
        let mut index = HashMap::new();
        for x in 0..c.num_objects() {
            for p in 0..self.sets[x] {
                let f = c.id(x);
                index.insert((f, p), arrows.len());
                arrows.push(Arrow::new(format!("id_{}:{}", c.obj_label(x), p), offset[x] + p, offset[x] + p));
                base_arr.push(f);
            }
        }
        for f in c.non_identity_arrows() {
            let (x, y) = (c.src(f), c.tgt(f));
            for q in 0..self.sets[y] {
                index.insert((f, q), arrows.len());
                arrows.push(Arrow::new(format!("{}@{}", c.arr_label(f), q), offset[x] + self.act[f][q], offset[y] + q));
                base_arr.push(f);
            }
        }
        let ident = (0..objects.len()).collect();
        let key: Vec<(ArrId, usize)> = {
            let mut k = vec![(0, 0); arrows.len()];
            for (&kk, &i) in &index {
                k[i] = kk;
            }
            k
        };
        let el = FinCat::build(format!("el({})", c.name()), objects, arrows, ident, |g, f| {
            let ((fa, _), (ga, r)) = (key[f], key[g]);
            index[&(c.compose(ga, fa), r)]
        })
        .expect("category of elements");
        let el = Arc::new(el);
        let obj = (0..c.num_objects()).flat_map(|x| std::iter::repeat_n(x, self.sets[x])).collect();
        let proj = Functor::new_unchecked(el.clone(), self.base.clone(), obj, base_arr);
        (el, proj)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafMap {
    pub src: Presheaf,
    pub tgt: Presheaf,
    pub comp: Vec<Vec<usize>>,
}

impl PresheafMap {
    pub fn new(src: Presheaf, tgt: Presheaf, comp: Vec<Vec<usize>>) -> Result<PresheafMap> {
        let m = PresheafMap { src, tgt, comp };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        if self.src.base != self.tgt.base {
            return Err(PresheafError::BaseMismatch);
        }
        let c = &*self.src.base;
        for x in 0..c.num_objects() {
            if self.comp[x].len() != self.src.sets[x] || self.comp[x].iter().any(|&q| q >= self.tgt.sets[x]) {
                return Err(PresheafError::NotNatural(c.obj_label(x).into()));
            }
        }
        for f in 0..c.num_arrows() {
            let (x, y) = (c.src(f), c.tgt(f));
            for p in 0..self.src.sets[y] {
                if self.comp[x][self.src.act[f][p]] != self.tgt.act[f][self.comp[y][p]] {
                    return Err(PresheafError::NotNatural(c.obj_label(x).into()));
                }
            }
        }
        Ok(())
    }

    pub fn identity(p: &Presheaf) -> PresheafMap {
        PresheafMap { src: p.clone(), tgt: p.clone(), comp: p.sets.iter().map(|&n| (0..n).collect()).collect() }
    }

    /// `other . self`.
    pub fn then(&self, other: &PresheafMap) -> PresheafMap {
        let comp = self.comp.iter().zip(&other.comp).map(|(a, b)| a.iter().map(|&i| b[i]).collect()).collect();
        PresheafMap { src: self.src.clone(), tgt: other.tgt.clone(), comp }
    }

    pub fn is_injective(&self) -> bool {
        self.comp.iter().zip(&self.tgt.sets).all(|(c, &n)| {
            let mut seen = vec![false; n];
            c.iter().all(|&q| !std::mem::replace(&mut seen[q], true))
        })
    }

    pub fn is_iso(&self) -> bool {
        self.src.sets == self.tgt.sets && self.is_injective()
    }

    /// Image factorisation `src ->> im >-> tgt`.
    pub fn image(&self) -> (PresheafMap, PresheafMap) {
        let base = self.tgt.base.clone();
        let mut renumber: Vec<Vec<Option<usize>>> = self.tgt.sets.iter().map(|&n| vec![None; n]).collect();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.tgt.sets.len()];
        for (x, c) in self.comp.iter().enumerate() {
            for &q in c {
                if renumber[x][q].is_none() {
                    renumber[x][q] = Some(members[x].len());
                    members[x].push(q);
                }
            }
        }
        let act = (0..base.num_arrows())
            .map(|f| {
                let (x, y) = (base.src(f), base.tgt(f));
                members[y].iter().map(|&q| renumber[x][self.tgt.act[f][q]].expect("images are closed")).collect()
            })
            .collect();
        let im = Presheaf { base, sets: members.iter().map(Vec::len).collect(), act };
        let onto = self.comp.iter().enumerate().map(|(x, c)| c.iter().map(|&q| renumber[x][q].unwrap()).collect()).collect();
        (
            PresheafMap { src: self.src.clone(), tgt: im.clone(), comp: onto },
            PresheafMap { src: im, tgt: self.tgt.clone(), comp: members },
        )
    }

    pub fn restrict(&self, f: &Functor) -> PresheafMap {
        PresheafMap {
            src: self.src.restrict(f),
            tgt: self.tgt.restrict(f),
            comp: f.obj.iter().map(|&y| self.comp[y].clone()).collect(),
        }
    }
}

/// Visits every natural map `P -> Q`; stop early by returning `false`.
pub fn for_each_map(p: &Presheaf, q: &Presheaf, mut visit: impl FnMut(&[Vec<usize>]) -> bool) {
    let c = &*p.base;
    let n = c.num_objects();
    let mut offset = vec![0; n + 1];
    for x in 0..n {
        offset[x + 1] = offset[x] + p.sets[x];
    }
    let var = |x: ObjId, e: usize| offset[x] + e;
    // constraint (f, r): alpha_src(P f r) = Q f (alpha_tgt r), checked at the later variable
    let mut checks: Vec<Vec<(ArrId, usize)>> = vec![Vec::new(); offset[n]];
    for f in 0..c.num_arrows() {
        let (a, b) = (c.src(f), c.tgt(f));
        for r in 0..p.sets[b] {
            let later = var(a, p.act[f][r]).max(var(b, r));
            checks[later].push((f, r));
        }
    }
    let mut owner = Vec::with_capacity(offset[n]);
    for x in 0..n {
        owner.extend(std::iter::repeat_n(x, p.sets[x]));
    }
    let mut flat = vec![0usize; offset[n]];
    fn rec(
        i: usize,
        flat: &mut Vec<usize>,
        ctx: &(&Presheaf, &Presheaf, &[usize], &[usize], &[Vec<(ArrId, usize)>]),
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let (p, q, offset, owner, checks) = *ctx;
        if i == flat.len() {
            return visit(flat);
        }
        let x = owner[i];
        let c = &*p.base;
        for v in 0..q.sets[x] {
            flat[i] = v;
            let ok = checks[i].iter().all(|&(f, r)| {
                let (a, b) = (c.src(f), c.tgt(f));
                flat[offset[a] + p.act[f][r]] == q.act[f][flat[offset[b] + r]]
            });
            if ok && !rec(i + 1, flat, ctx, visit) {
                return false;
            }
        }
        true
    }
    let ctx = (p, q, &offset[..], &owner[..], &checks[..]);
    let mut unflat = |flat: &[usize]| {
        let comp: Vec<Vec<usize>> = (0..n).map(|x| flat[offset[x]..offset[x + 1]].to_vec()).collect();
        visit(&comp)
    };
    rec(0, &mut flat, &ctx, &mut unflat);
}

pub fn all_maps(p: &Presheaf, q: &Presheaf) -> Vec<PresheafMap> {
    let mut out = Vec::new();
    for_each_map(p, q, |c| {
        out.push(PresheafMap { src: p.clone(), tgt: q.clone(), comp: c.to_vec() });
        true
    });
    out
}

pub fn count_maps(p: &Presheaf, q: &Presheaf) -> usize {
    let mut n = 0;
    for_each_map(p, q, |_| {
        n += 1;
        true
    });
    n
}

pub fn find_iso(p: &Presheaf, q: &Presheaf) -> Option<PresheafMap> {
    if p.sets != q.sets {
        return None;
    }
    let mut found = None;
    for_each_map(p, q, |c| {
        let m = PresheafMap { src: p.clone(), tgt: q.clone(), comp: c.to_vec() };
        if m.is_iso() {
            found = Some(m);
            false
        } else {
            true
        }
    });
    found
}

/// Left Kan extension `F_! P` with the class of every generating pair.
#[derive(Clone, Debug)]
pub struct Lan {
    pub functor: Functor,
    pub source: Presheaf,
    pub value: Presheaf,
    /// `class[d][(c, u, p)]` for `u: d -> F c` and `p` in `P(c)`.
    class: Vec<HashMap<(ObjId, ArrId, usize), usize>>,
}

impl Lan {
    pub fn class_of(&self, d: ObjId, c: ObjId, u: ArrId, p: usize) -> usize {
        self.class[d][&(c, u, p)]
    }

    /// Every generating pair `(d, c, u, p)` with its class in `F_! P (d)`.
    pub fn generators(&self) -> impl Iterator<Item = (ObjId, ObjId, ArrId, usize, usize)> + '_ {
        self.class.iter().enumerate().flat_map(|(d, t)| t.iter().map(move |(&(c, u, p), &k)| (d, c, u, p, k)))
    }

    /// `P -> F^* F_! P`, `p |-> [(id, p)]`.
    pub fn unit(&self) -> PresheafMap {
        let (f, dcat) = (&self.functor, &*self.functor.cod);
        let comp = (0..self.source.sets.len())
            .map(|c| (0..self.source.sets[c]).map(|p| self.class_of(f.obj[c], c, dcat.id(f.obj[c]), p)).collect())
            .collect();
        PresheafMap { src: self.source.clone(), tgt: self.value.restrict(f), comp }
    }

    /// `F_! phi: F_! P -> F_! P'` given the Kan extension of the target.
    pub fn map_to(&self, other: &Lan, phi: &PresheafMap) -> PresheafMap {
        let mut comp: Vec<Vec<usize>> = self.value.sets.iter().map(|&n| vec![usize::MAX; n]).collect();
        for (dd, table) in self.class.iter().enumerate() {
            for (&(c, u, p), &k) in table {
                comp[dd][k] = other.class_of(dd, c, u, phi.comp[c][p]);
            }
        }
        debug_assert!(comp.iter().flatten().all(|&v| v != usize::MAX));
        PresheafMap { src: self.value.clone(), tgt: other.value.clone(), comp }
    }
}

pub fn lan(f: &Functor, p: &Presheaf) -> Lan {
    let (cc, d) = (&*f.dom, &*f.cod);
    let mut class = Vec::with_capacity(d.num_objects());
    let mut sets = Vec::with_capacity(d.num_objects());
    for dd in 0..d.num_objects() {
        let mut elems: Vec<(ObjId, ArrId, usize)> = Vec::new();
        let mut idx: HashMap<(ObjId, ArrId, usize), usize> = HashMap::new();
        for c in 0..cc.num_objects() {
            for &u in d.hom(dd, f.obj[c]) {
                for e in 0..p.sets[c] {
                    idx.insert((c, u, e), elems.len());
                    elems.push((c, u, e));
                }
            }
        }
        let mut uf = UnionFind::new(elems.len());
        for g in cc.non_identity_arrows() {
            let (c, c2) = (cc.src(g), cc.tgt(g));
            for &u in d.hom(dd, f.obj[c]) {
                let fu = d.compose(f.arr[g], u);
                for e in 0..p.sets[c2] {
                    uf.union(idx[&(c2, fu, e)], idx[&(c, u, p.act[g][e])]);
                }
            }
        }
        let mut number = HashMap::new();
        let mut table = HashMap::with_capacity(elems.len());
        for (i, &key) in elems.iter().enumerate() {
            let k = number.len();
            let k = *number.entry(uf.find(i)).or_insert(k);
            table.insert(key, k);
        }
        sets.push(number.len());
        class.push(table);
    }
    let mut act = Vec::with_capacity(d.num_arrows());
    let mut reps: Vec<Vec<(ObjId, ArrId, usize)>> = sets.iter().map(|&n| vec![(0, 0, 0); n]).collect();
    for (dd, table) in class.iter().enumerate() {
        for (&key, &k) in table {
            reps[dd][k] = key;
        }
    }
    for h in 0..d.num_arrows() {
        let (d1, d2) = (d.src(h), d.tgt(h));
        act.push(reps[d2].iter().map(|&(c, u, e)| class[d1][&(c, d.compose(u, h), e)]).collect());
    }
    let value = Presheaf { base: f.cod.clone(), sets, act };
    Lan { functor: f.clone(), source: p.clone(), value, class }
}

/// Counit `F_! F^* Q -> Q`, `[(u, q)] |-> Q(u) q`.
pub fn lan_counit(f: &Functor, q: &Presheaf) -> (Lan, PresheafMap) {
    let l = lan(f, &q.restrict(f));
    let mut comp: Vec<Vec<usize>> = l.value.sets.iter().map(|&n| vec![0; n]).collect();
    for (dd, table) in l.class.iter().enumerate() {
        for (&(_, u, e), &k) in table {
            comp[dd][k] = q.act[u][e];
        }
    }
    let m = PresheafMap { src: l.value.clone(), tgt: q.clone(), comp };
    (l, m)
}

/// Pushout `B <- A -> C` computed objectwise.
#[derive(Clone, Debug)]
pub struct PresheafPushout {
    pub value: Presheaf,
    pub inl: PresheafMap,
    pub inr: PresheafMap,
}

pub fn pushout(a: &PresheafMap, b: &PresheafMap) -> Result<PresheafPushout> {
    if a.src != b.src {
        return Err(PresheafError::SpanMismatch);
    }
    let (pl, pr) = (&a.tgt, &b.tgt);
    let base = pl.base.clone();
    let n = base.num_objects();
    let mut sets = Vec::with_capacity(n);
    let mut inl = Vec::with_capacity(n);
    let mut inr = Vec::with_capacity(n);
    for x in 0..n {
        let nl = pl.sets[x];
        let mut uf = UnionFind::new(nl + pr.sets[x]);
        for z in 0..a.src.sets[x] {
            uf.union(a.comp[x][z], nl + b.comp[x][z]);
        }
        let mut number = HashMap::new();
        let mut cls = Vec::with_capacity(nl + pr.sets[x]);
        for i in 0..nl + pr.sets[x] {
            let k = number.len();
            cls.push(*number.entry(uf.find(i)).or_insert(k));
        }
        sets.push(number.len());
        inr.push(cls[nl..].to_vec());
        cls.truncate(nl);
        inl.push(cls);
    }
    let mut act = Vec::with_capacity(base.num_arrows());
    for f in 0..base.num_arrows() {
        let (x, y) = (base.src(f), base.tgt(f));
        let mut row = vec![usize::MAX; sets[y]];
        for (e, &k) in inl[y].iter().enumerate() {
            row[k] = inl[x][pl.act[f][e]];
        }
        for (e, &k) in inr[y].iter().enumerate() {
            row[k] = inr[x][pr.act[f][e]];
        }
        act.push(row);
    }
    let value = Presheaf { base, sets, act };
    Ok(PresheafPushout {
        inl: PresheafMap { src: pl.clone(), tgt: value.clone(), comp: inl },
        inr: PresheafMap { src: pr.clone(), tgt: value.clone(), comp: inr },
        value,
    })
}

#[derive(Clone, Debug)]
pub enum PresheafColimit {
    Stable { stage: usize, value: Presheaf, cocone: Vec<PresheafMap> },
    Truncated { growth: Vec<usize> },
}

/// Colimit of `P_0 -> P_1 -> ...`: stable once every later link is invertible.
pub fn seq_colimit(links: &[PresheafMap], max_stages: usize) -> PresheafColimit {
    let stages: Vec<&Presheaf> =
        links.first().map(|l| &l.src).into_iter().chain(links.iter().map(|l| &l.tgt)).collect();
    let n = stages.len().min(max_stages.max(1));
    if n == 0 {
        return PresheafColimit::Truncated { growth: vec![] };
    }
    let mut start = n - 1;
    while start > 0 && links[start - 1].is_iso() {
        start -= 1;
    }
    if n > 1 && start == n - 1 {
        return PresheafColimit::Truncated { growth: stages[..n].iter().map(|s| s.total()).collect() };
    }
    let value = stages[start].clone();
    let mut cocone = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = PresheafMap::identity(stages[i]);
        if i <= start {
            for l in &links[i..start] {
                m = m.then(l);
            }
        } else {
            for l in links[start..i].iter().rev() {
                m = m.then(&invert(l));
            }
        }
        cocone.push(m);
    }
    PresheafColimit::Stable { stage: start, value, cocone }
}

pub fn invert(m: &PresheafMap) -> PresheafMap {
    let comp = m
        .comp
        .iter()
        .map(|c| {
            let mut inv = vec![0; c.len()];
            for (i, &j) in c.iter().enumerate() {
                inv[j] = i;
            }
            inv
        })
        .collect();
    PresheafMap { src: m.tgt.clone(), tgt: m.src.clone(), comp }
}

/// Objectwise pullback `P x_R Q` with its projections.
pub fn pullback(a: &PresheafMap, b: &PresheafMap) -> Result<(Presheaf, PresheafMap, PresheafMap)> {
    if a.tgt != b.tgt {
        return Err(PresheafError::SpanMismatch);
    }
    let base = a.tgt.base.clone();
    let n = base.num_objects();
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    let mut index: Vec<HashMap<(usize, usize), usize>> = Vec::with_capacity(n);
    for x in 0..n {
        let mut v = Vec::new();
        for (i, &ai) in a.comp[x].iter().enumerate() {
            for (j, &bj) in b.comp[x].iter().enumerate() {
                if ai == bj {
                    v.push((i, j));
                }
            }
        }
        index.push(v.iter().enumerate().map(|(k, &ij)| (ij, k)).collect());
        pairs.push(v);
    }
    let act = (0..base.num_arrows())
        .map(|f| {
            let (x, y) = (base.src(f), base.tgt(f));
            pairs[y].iter().map(|&(i, j)| index[x][&(a.src.act[f][i], b.src.act[f][j])]).collect()
        })
        .collect();
    let value = Presheaf { base, sets: pairs.iter().map(Vec::len).collect(), act };
    let pr1 = PresheafMap { src: value.clone(), tgt: a.src.clone(), comp: pairs.iter().map(|v| v.iter().map(|p| p.0).collect()).collect() };
    let pr2 = PresheafMap { src: value.clone(), tgt: b.src.clone(), comp: pairs.iter().map(|v| v.iter().map(|p| p.1).collect()).collect() };
    Ok((value, pr1, pr2))
}

/// The map `S -> V` into a pullback `V` (with projections `pr1`, `pr2`)
/// induced by `u: S -> P` and `v: S -> Q`.
pub fn pair(u: &PresheafMap, v: &PresheafMap, pr1: &PresheafMap, pr2: &PresheafMap) -> PresheafMap {
    let comp = (0..u.comp.len())
        .map(|x| {
            let index: HashMap<(usize, usize), usize> =
                pr1.comp[x].iter().zip(&pr2.comp[x]).enumerate().map(|(k, (&i, &j))| ((i, j), k)).collect();
            u.comp[x].iter().zip(&v.comp[x]).map(|(&i, &j)| index[&(i, j)]).collect()
        })
        .collect();
    PresheafMap { src: u.src.clone(), tgt: pr1.src.clone(), comp }
}

/// Coproduct of presheaves over one base with its injections.
pub fn coproduct(parts: &[Presheaf], base: &Arc<FinCat>) -> (Presheaf, Vec<PresheafMap>) {
    let n = base.num_objects();
    let mut sets = vec![0; n];
    let mut offsets = Vec::with_capacity(parts.len());
    for p in parts {
        offsets.push(sets.clone());
        for x in 0..n {
            sets[x] += p.sets[x];
        }
    }
    let act = (0..base.num_arrows())
        .map(|f| {
            let x = base.src(f);
            parts.iter().zip(&offsets).flat_map(|(p, o)| p.act[f].iter().map(move |&e| e + o[x])).collect()
        })
        .collect();
    let value = Presheaf { base: base.clone(), sets, act };
    let inj = parts
        .iter()
        .zip(&offsets)
        .map(|(p, o)| PresheafMap { src: p.clone(), tgt: value.clone(), comp: (0..n).map(|x| (0..p.sets[x]).map(|e| e + o[x]).collect()).collect() })
        .collect();
    (value, inj)
}

/// Free presheaf on generators at the given objects, `sum_i yo(g_i)`.
pub fn free(base: &Arc<FinCat>, gens: &[ObjId]) -> Presheaf {
    let parts: Vec<Presheaf> = gens.iter().map(|&g| Presheaf::representable(base.clone(), g)).collect();
    coproduct(&parts, base).0
}

/// The map `sum_i yo(g_i) -> Q` sending generator `i` to `elems[i]` in `Q(g_i)`.
pub fn free_map(base: &Arc<FinCat>, gens: &[ObjId], q: &Presheaf, elems: &[usize]) -> PresheafMap {
    let src = free(base, gens);
    let comp = (0..base.num_objects())
        .map(|x| gens.iter().zip(elems).flat_map(|(&g, &e)| base.hom(x, g).iter().map(move |&u| q.act[u][e])).collect())
        .collect();
    PresheafMap { src, tgt: q.clone(), comp }
}

/// Random finite presheaf: a free presheaf on up to `max_gens` generators
/// with up to `max_glue` random identifications of elements.
pub fn random_presheaf(base: &Arc<FinCat>, rng: &mut impl rand::Rng, max_gens: usize, max_glue: usize) -> Presheaf {
    let n = base.num_objects();
    if n == 0 {
        return Presheaf::empty(base.clone());
    }
    let gens: Vec<ObjId> = (0..rng.gen_range(0..=max_gens)).map(|_| rng.gen_range(0..n)).collect();
    let mut p = free(base, &gens);
    for _ in 0..rng.gen_range(0..=max_glue) {
        let x = rng.gen_range(0..n);
        if p.sets[x] < 2 {
            continue;
        }
        let (e1, e2) = (rng.gen_range(0..p.sets[x]), rng.gen_range(0..p.sets[x]));
        let two = free(base, &[x, x]);
        let pair = free_map(base, &[x, x], &p, &[e1, e2]);
        let yo = Presheaf::representable(base.clone(), x);
        let id_elem = base.hom_index(base.id(x));
        let fold = PresheafMap { src: two.clone(), tgt: yo.clone(), comp: free_map(base, &[x, x], &yo, &[id_elem, id_elem]).comp };
        p = pushout(&pair, &fold).expect("shared source").value;
    }
    p
}

/// A random map into `q` out of a random free presheaf.
pub fn random_map_into(q: &Presheaf, rng: &mut impl rand::Rng, max_gens: usize) -> PresheafMap {
    let base = &q.base;
    let avail: Vec<ObjId> = (0..base.num_objects()).filter(|&x| q.sets[x] > 0).collect();
    if avail.is_empty() {
        return PresheafMap { src: Presheaf::empty(base.clone()), tgt: q.clone(), comp: vec![Vec::new(); base.num_objects()] };
    }
    let gens: Vec<ObjId> = (0..rng.gen_range(0..=max_gens)).map(|_| avail[rng.gen_range(0..avail.len())]).collect();
    let elems: Vec<usize> = gens.iter().map(|&g| rng.gen_range(0..q.sets[g])).collect();
    free_map(base, &gens, q, &elems)
}

/// Covariant set-valued functor, stored as a presheaf on the opposite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Copresheaf {
    pub base: Arc<FinCat>,
    pub sets: Vec<usize>,
    /// `act[f][p] = Q(f)(p)` for `p` in `Q(src f)`.
    pub act: Vec<Vec<usize>>,
}

impl Copresheaf {
    pub fn new(base: Arc<FinCat>, sets: Vec<usize>, act: Vec<Vec<usize>>) -> Result<Copresheaf> {
        let op = Arc::new(opposite(&base));
        Presheaf::new(op, sets.clone(), act.clone())?;
        Ok(Copresheaf { base, sets, act })
    }

    /// `C(x, -)`; element `i` of the value at `y` is `C.hom(x, y)[i]`.
    pub fn corepresentable(base: Arc<FinCat>, x: ObjId) -> Copresheaf {
        let c = &*base;
        let sets = (0..c.num_objects()).map(|y| c.hom(x, y).len()).collect();
        let act = (0..c.num_arrows())
            .map(|f| c.hom(x, c.src(f)).iter().map(|&u| c.hom_index(c.compose(f, u))).collect())
            .collect();
        Copresheaf { base, sets, act }
    }

    pub fn to_presheaf_on_op(&self) -> Presheaf {
        Presheaf { base: Arc::new(opposite(&self.base)), sets: self.sets.clone(), act: self.act.clone() }
    }

    pub fn restrict(&self, f: &Functor) -> Copresheaf {
        Copresheaf {
            base: f.dom.clone(),
            sets: f.obj.iter().map(|&y| self.sets[y]).collect(),
            act: f.arr.iter().map(|&g| self.act[g].clone()).collect(),
        }
    }

    /// Category of elements with its projection (a discrete opfibration).
    pub fn elements(&self) -> (Arc<FinCat>, Functor) {
        let c = &*self.base;
        let mut offset = vec![0; c.num_objects() + 1];
        for x in 0..c.num_objects() {
            offset[x + 1] = offset[x] + self.sets[x];
        }
        let objects: Vec<String> =
            (0..c.num_objects()).flat_map(|x| (0..self.sets[x]).map(move |p| format!("{}:{}", c.obj_label(x), p))).collect();
        let mut arrows = Vec::new();
        let mut key = Vec::new();
        let mut index = HashMap::new();
        for x in 0..c.num_objects() {
            for p in 0..self.sets[x] {
                index.insert((c.id(x), p), arrows.len());
                key.push((c.id(x), p));
                arrows.push(Arrow::new(format!("id_{}:{}", c.obj_label(x), p), offset[x] + p, offset[x] + p));
            }
        }
        for f in c.non_identity_arrows() {
            let (x, y) = (c.src(f), c.tgt(f));
            for p in 0..self.sets[x] {
                index.insert((f, p), arrows.len());
                key.push((f, p));
                arrows.push(Arrow::new(format!("{}@{}", c.arr_label(f), p), offset[x] + p, offset[y] + self.act[f][p]));
            }
        }
        let ident = (0..objects.len()).collect();
        let el = FinCat::build(format!("el({})", c.name()), objects, arrows, ident, |g, f| {
            let ((fa, p), (ga, _)) = (key[f], key[g]);
            index[&(c.compose(ga, fa), p)]
        })
        .expect("category of elements");
        let el = Arc::new(el);
        let obj = (0..c.num_objects()).flat_map(|x| std::iter::repeat_n(x, self.sets[x])).collect();
        let arr = key.iter().map(|&(f, _)| f).collect();
        (el.clone(), Functor::new_unchecked(el, self.base.clone(), obj, arr))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    #[test]
    fn representables_are_functorial() {
        for c in library() {
            let c = arc(c);
            for y in 0..c.num_objects() {
                Presheaf::representable(c.clone(), y).check().unwrap();
                let q = Copresheaf::corepresentable(c.clone(), y);
                Copresheaf::new(c.clone(), q.sets.clone(), q.act.clone()).unwrap();
            }
        }
    }

    #[test]
    fn restrict_examples() {
        let i = arc(interval());
        let one = arc(terminal());
        let at0 = Functor::new(one.clone(), i.clone(), vec![0], vec![0]).unwrap();
        let at1 = Functor::new(one.clone(), i.clone(), vec![1], vec![1]).unwrap();
        let y1 = Presheaf::representable(i.clone(), 1);
        assert_eq!(y1.restrict(&at0).sets, vec![1]);
        assert_eq!(y1.restrict(&at1).sets, vec![1]);
        assert_eq!(y1.restrict(&Functor::identity(i.clone())), y1);
    }

    #[test]
    fn lan_of_point_at_zero() {
        let i = arc(interval());
        let one = arc(terminal());
        let at0 = Functor::new(one.clone(), i.clone(), vec![0], vec![0]).unwrap();
        let l = lan(&at0, &Presheaf::terminal(one));
        assert_eq!(l.value.sets, vec![1, 0]);
    }

    #[test]
    fn lan_of_representable_is_representable() {
        let c = arc(walking_idempotent());
        let d = arc(walking_section_retraction());
        for f in crate::search::all_functors(&c, &d, &Default::default(), &Default::default()).unwrap() {
            let l = lan(&f, &Presheaf::representable(c.clone(), 0));
            assert!(find_iso(&l.value, &Presheaf::representable(d.clone(), f.obj[0])).is_some());
        }
    }

    #[test]
    fn lan_along_identity() {
        let c = arc(walking_section_retraction());
        let p = Presheaf::representable(c.clone(), 1);
        let l = lan(&Functor::identity(c), &p);
        assert!(find_iso(&l.value, &p).is_some());
        assert!(l.unit().is_iso());
    }

    #[test]
    fn triangle_identities() {
        let c = arc(poset(1));
        let d = arc(walking_section_retraction());
        let f = Functor::new(c.clone(), d.clone(), vec![0, 1], vec![0, 1, 2]).unwrap();
        let p = Presheaf::representable(c.clone(), 1);
        // (eps F_!) . (F_! eta) = id
        let l = lan(&f, &p);
        let eta = l.unit();
        let (l2, eps) = lan_counit(&f, &l.value);
        let comp = l.map_to(&l2, &eta).then(&eps);
        assert_eq!(comp, PresheafMap::identity(&l.value));
        // (F^* eps) . (eta F^*) = id
        let q = Presheaf::representable(d.clone(), 1);
        let (lq, eps_q) = lan_counit(&f, &q);
        let eta_q = lq.unit();
        assert_eq!(eta_q.then(&eps_q.restrict(&f)), PresheafMap::identity(&q.restrict(&f)));
    }

    #[test]
    fn maps_between_representables_are_arrows() {
        let c = arc(walking_section_retraction());
        for x in 0..2 {
            for y in 0..2 {
                let n = count_maps(&Presheaf::representable(c.clone(), x), &Presheaf::representable(c.clone(), y));
                assert_eq!(n, c.hom(x, y).len());
            }
        }
    }

    #[test]
    fn pushout_examples() {
        let c = arc(interval());
        let p = Presheaf::representable(c.clone(), 1);
        let id = PresheafMap::identity(&p);
        let po = pushout(&id, &id).unwrap();
        assert_eq!(po.value, p);
        let e = Presheaf::empty(c.clone());
        let ide = PresheafMap::identity(&e);
        assert_eq!(pushout(&ide, &ide).unwrap().value.total(), 0);
        // glue two copies of yo(1) along yo(0)
        let y0 = Presheaf::representable(c.clone(), 0);
        let inc = all_maps(&y0, &p).pop().unwrap();
        let po = pushout(&inc, &inc).unwrap();
        assert_eq!(po.value.sets, vec![1, 2]);
        po.value.check().unwrap();
    }

    #[test]
    fn elements_of_representable_have_terminal_object() {
        let c = arc(walking_section_retraction());
        let (el, proj) = Presheaf::representable(c.clone(), 0).elements();
        el.verify_laws().unwrap();
        proj.check().unwrap();
        assert!((0..el.num_objects()).any(|x| el.is_terminal(x)));
        let (el, proj) = Copresheaf::corepresentable(c.clone(), 0).elements();
        el.verify_laws().unwrap();
        proj.check().unwrap();
        assert!((0..el.num_objects()).any(|x| el.is_initial(x)));
    }

    #[test]
    fn free_maps_are_natural_and_random_presheaves_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for c in library() {
            let c = arc(c);
            for _ in 0..5 {
                let p = random_presheaf(&c, &mut rng, 3, 3);
                p.check().unwrap();
                let m = random_map_into(&p, &mut rng, 3);
                m.check().unwrap();
                let (im, inc) = m.image();
                im.check().unwrap();
                inc.check().unwrap();
                assert!(inc.is_injective());
            }
        }
    }

    #[test]
    fn pullback_is_objectwise() {
        let c = arc(walking_section_retraction());
        let y = Presheaf::representable(c.clone(), 1);
        let t = Presheaf::terminal(c.clone());
        let to_t = all_maps(&y, &t).pop().unwrap();
        let (pb, p1, p2) = pullback(&to_t, &to_t).unwrap();
        pb.check().unwrap();
        p1.check().unwrap();
        p2.check().unwrap();
        assert_eq!(pb.sets, vec![1, 4]);
    }

    #[test]
    fn seq_colimit_stabilises_on_isos() {
        let c = arc(walking_iso());
        let p = Presheaf::representable(c.clone(), 0);
        let id = PresheafMap::identity(&p);
        match seq_colimit(&[id.clone(), id], 8) {
            PresheafColimit::Stable { stage, .. } => assert_eq!(stage, 0),
            other => panic!("{other:?}"),
        }
    }
}
