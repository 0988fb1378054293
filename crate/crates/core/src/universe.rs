//! Universes of cocartesian fibrations.
//!
//! [`fun_cocart`] and [`virtual_join`] work on arbitrary finite fibrations
//! over a groupoid. The completion tower [`univalent_completion`] instead
//! works with strict families of skeletal gaunt fibres kept as
//! presentations, since intermediate stages can be infinite.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::constructions::{is_equivalence, quasi_inverse, wide_subcategory, Span};
use crate::descent::{cocartesian_functors, find_equivalence_over, localize_fibration, pullback_fibration, LocalizedFibration};
use crate::descent_colimits::{cocomma_fibration, CocommaFibration};
use crate::error::CatError;
use crate::fibration::{straighten_finite, unstraighten, vertical_factor, FibrationError, MarkedFibration, Pseudofunctor};
use crate::fincat::{ArrId, Arrow, Budget, FinCat, ObjId};
use crate::functor::Functor;
use crate::presentation::{saturate, GenId, Path, Presentation, PresentationError, Saturation, Status};
use crate::search::{all_functors, find_equivalence, find_isomorphism, for_each_nat_trans, naturally_isomorphic, skeleton, SearchOptions};

#[derive(Debug, Error)]
pub enum UniverseError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("not exact: {0}")]
    Truncated(String),
    #[error(transparent)]
    Fibration(#[from] FibrationError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Cat(#[from] CatError),
}

pub type Result<T> = std::result::Result<T, UniverseError>;

fn pre<T>(s: impl Into<String>) -> Result<T> {
    Err(UniverseError::Precondition(s.into()))
}

fn functors(c: &Arc<FinCat>, d: &Arc<FinCat>) -> Result<Vec<Functor>> {
    Ok(all_functors(c, d, &SearchOptions::default(), &Budget::default())?)
}

fn same_functor(f: &Functor, g: &Functor) -> bool {
    f.obj == g.obj && f.arr == g.arr
}

/// A strict functor from a presented category to finite categories, given on generators.
#[derive(Clone, Debug)]
pub struct StrictFamily {
    pub pres: Presentation,
    pub fibres: Vec<Arc<FinCat>>,
    pub gen_maps: Vec<Functor>,
}

impl StrictFamily {
    pub fn transport(&self, p: &Path) -> Functor {
        p.word.iter().fold(Functor::identity(self.fibres[p.src].clone()), |acc, &g| acc.then(&self.gen_maps[g]))
    }

    /// Every relation holds on the nose.
    pub fn check(&self) -> Result<()> {
        for (l, r) in &self.pres.relations {
            if !same_functor(&self.transport(l), &self.transport(r)) {
                return pre(format!("relation {} = {} fails strictly", self.pres.word_label(l), self.pres.word_label(r)));
            }
        }
        Ok(())
    }

    /// The family on an exact saturation of its presentation.
    pub fn pseudofunctor(&self, sat: &Saturation) -> Result<Pseudofunctor> {
        let cat = sat.exact().ok_or_else(|| UniverseError::Truncated(format!("growth {:?}", sat.growth)))?;
        let maps = sat.words.iter().map(|w| self.transport(w)).collect();
        Ok(Pseudofunctor::strict(cat.clone(), self.fibres.clone(), maps)?)
    }

    /// The same family over the composition table of `c`, which must present the same category.
    fn over_table(c: &Arc<FinCat>, fibres: Vec<Arc<FinCat>>, map_of: impl Fn(ArrId) -> Functor) -> (StrictFamily, Vec<Option<GenId>>) {
        let (pres, gen_of) = Presentation::from_fincat(c);
        let mut gen_maps: Vec<Option<Functor>> = vec![None; pres.generators.len()];
        for a in c.non_identity_arrows() {
            gen_maps[gen_of[a].expect("non-identity")] = Some(map_of(a));
        }
        let gen_maps = gen_maps.into_iter().map(|m| m.expect("every generator mapped")).collect();
        (StrictFamily { pres, fibres, gen_maps }, gen_of)
    }
}

fn is_gaunt(c: &FinCat) -> bool {
    (0..c.num_arrows()).all(|a| !c.is_iso(a) || c.is_identity(a))
}

/// Replace every fibre by its skeleton; fails unless the skeleta are gaunt.
pub fn rigidify(mf: &MarkedFibration) -> Result<StrictFamily> {
    let b = mf.base();
    let sks: Vec<_> = mf.fibres.iter().map(|f| skeleton(&f.cat)).collect();
    if let Some(c) = (0..b.num_objects()).find(|&c| !is_gaunt(&sks[c].sub.cat)) {
        return pre(format!("fibre over `{}` has a non-trivial automorphism", b.obj_label(c)));
    }
    let fibres = sks.iter().map(|s| s.sub.cat.clone()).collect();
    let (fam, _) = StrictFamily::over_table(b, fibres, |a| sks[b.src(a)].sub.incl.then(mf.transport(a)).then(&sks[b.tgt(a)].retraction));
    fam.check()?;
    Ok(fam)
}

/// `Fun_cocart(E0, E1)` over `C0 x C1` with its evaluation data.
#[derive(Clone, Debug)]
pub struct FunCocart {
    /// All natural transformations as 2-cells.
    pub full: Arc<FinCat>,
    /// The wide subcategory of invertible 2-cells.
    pub cat: Arc<FinCat>,
    /// `(c0, c1, a: E0_c0 -> E1_c1)` for each object.
    pub objects: Vec<(ObjId, ObjId, Functor)>,
    /// `(g0, g1, beta)` for each arrow of `full`, `beta: E1(g1) a => a' E0(g0)`.
    pub arrows: Vec<(ArrId, ArrId, Vec<ArrId>)>,
    pub marked: Vec<bool>,
    pub incl: Functor,
    pub u0: Functor,
    pub u1: Functor,
}

pub fn fun_cocart(mf0: &MarkedFibration, mf1: &MarkedFibration) -> Result<FunCocart> {
    let (c0, c1) = (mf0.base().clone(), mf1.base().clone());
    if !c0.is_groupoid() {
        return pre("the first base must be a groupoid");
    }
    let (p0, p1) = (straighten_finite(mf0), straighten_finite(mf1));
    let mut objects = Vec::new();
    let mut labels = Vec::new();
    for x0 in 0..c0.num_objects() {
        for x1 in 0..c1.num_objects() {
            for (k, a) in functors(&p0.fibres[x0], &p1.fibres[x1])?.into_iter().enumerate() {
                labels.push(format!("({},{},{k})", c0.obj_label(x0), c1.obj_label(x1)));
                objects.push((x0, x1, a));
            }
        }
    }
    let mut cells: Vec<(ObjId, ObjId, ArrId, ArrId, Vec<ArrId>)> = Vec::new();
    for (s, (x0, x1, a)) in objects.iter().enumerate() {
        for &g0 in c0.out(*x0) {
            for &g1 in c1.out(*x1) {
                let lhs = a.then(&p1.maps[g1]);
                for (t, (y0, y1, a2)) in objects.iter().enumerate() {
                    if *y0 != c0.tgt(g0) || *y1 != c1.tgt(g1) {
                        continue;
                    }
                    let rhs = p0.maps[g0].then(a2);
                    for_each_nat_trans(&lhs, &rhs, false, &mut |n| {
                        cells.push((s, t, g0, g1, n.comp.clone()));
                        true
                    });
                }
            }
        }
    }
    let index: HashMap<(ObjId, ObjId, ArrId, ArrId, Vec<ArrId>), ArrId> = cells.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let ident = objects
        .iter()
        .enumerate()
        .map(|(s, (x0, x1, a))| {
            let comp = (0..a.dom.num_objects()).map(|e| p1.fibres[*x1].id(a.obj[e])).collect();
            index[&(s, s, c0.id(*x0), c1.id(*x1), comp)]
        })
        .collect();
    let arrows: Vec<Arrow> = cells.iter().enumerate().map(|(i, c)| Arrow::new(format!("m{i}"), c.0, c.1)).collect();
    let full = FinCat::build("Fun'", labels, arrows, ident, |g, f| {
        let (s, _, g0, g1, ref beta) = cells[f];
        let (_, u, h0, h1, ref beta2) = cells[g];
        let (x0, _, a) = &objects[s];
        let a2 = &objects[u].2;
        let fd = &p1.fibres[c1.tgt(h1)];
        let comp = (0..p0.fibres[*x0].num_objects())
            .map(|e| {
                let back = fd.inverse(p1.mu(h1, g1, a.obj[e])).expect("comparison is invertible");
                let moved = p1.maps[h1].arr[beta[e]];
                let next = beta2[p0.maps[g0].obj[e]];
                let last = a2.arr[p0.mu(h0, g0, e)];
                fd.compose(last, fd.compose(next, fd.compose(moved, back)))
            })
            .collect();
        index[&(s, u, c0.compose(h0, g0), c1.compose(h1, g1), comp)]
    })?;
    let full = Arc::new(full);
    let marked: Vec<bool> = cells
        .iter()
        .map(|(_, _, _, g1, beta)| {
            let fd = &p1.fibres[c1.tgt(*g1)];
            beta.iter().all(|&b| fd.is_iso(b))
        })
        .collect();
    let sub = wide_subcategory(&full, |m| marked[m])?;
    let cat = sub.cat.clone();
    let u0 = Functor::new(cat.clone(), c0.clone(), objects.iter().map(|o| o.0).collect(), sub.incl.arr.iter().map(|&m| cells[m].2).collect())?;
    let u1 = Functor::new(cat.clone(), c1.clone(), objects.iter().map(|o| o.1).collect(), sub.incl.arr.iter().map(|&m| cells[m].3).collect())?;
    let arrows = cells.into_iter().map(|(_, _, g0, g1, b)| (g0, g1, b)).collect();
    Ok(FunCocart { full, cat, objects, arrows, marked, incl: sub.incl, u0, u1 })
}

/// `ev: u0^*E0 -> u1^*E1` over `Fun_cocart`, on the pullbacks returned by
/// `pullback_fibration` along `u0` and `u1`.
pub fn evaluation(fun: &FunCocart, mf0: &MarkedFibration, mf1: &MarkedFibration, s0: &Span, s1: &Span) -> Result<Functor> {
    let e1 = mf1.total();
    let objs: HashMap<(ObjId, ObjId), ObjId> = (0..s1.cat.num_objects()).map(|o| ((s1.left.obj[o], s1.right.obj[o]), o)).collect();
    let arrs: HashMap<(ArrId, ArrId), ArrId> = (0..s1.cat.num_arrows()).map(|a| ((s1.left.arr[a], s1.right.arr[a]), a)).collect();
    let image = |xi: ObjId, e: ObjId| -> ObjId {
        let (x0, x1, a) = &fun.objects[xi];
        let le = mf0.fibres[*x0].index_of(e).expect("object in its fibre");
        mf1.fibres[*x1].incl.obj[a.obj[le]]
    };
    let obj = (0..s0.cat.num_objects())
        .map(|o| {
            let (e, xi) = (s0.left.obj[o], s0.right.obj[o]);
            objs[&(image(xi, e), xi)]
        })
        .collect();
    let f = &fun.cat;
    let arr = (0..s0.cat.num_arrows())
        .map(|m| {
            let (k, mu) = (s0.left.arr[m], s0.right.arr[m]);
            let (g0, g1, beta) = &fun.arrows[fun.incl.arr[mu]];
            let (xi, xi2) = (f.src(mu), f.tgt(mu));
            let (x0, x1, a) = &fun.objects[xi];
            let (y0, y1, a2) = &fun.objects[xi2];
            let e = mf0.total().src(k);
            let le = mf0.fibres[*x0].index_of(e).expect("object in its fibre");
            let kv = vertical_factor(&mf0.p, mf0.lift(e, *g0), k).expect("cocartesian factorisation");
            let kv = mf0.fibres[*y0].arrow_index(kv).expect("vertical arrow");
            let lift1 = mf1.lift(mf1.fibres[*x1].incl.obj[a.obj[le]], *g1);
            let tgt_fib = &mf1.fibres[*y1].incl;
            let ell = e1.compose(tgt_fib.arr[a2.arr[kv]], e1.compose(tgt_fib.arr[beta[le]], lift1));
            arrs[&(ell, mu)]
        })
        .collect();
    Ok(Functor::new(s0.cat.clone(), s1.cat.clone(), obj, arr)?)
}

/// `B(x, y)` against isomorphism classes of functors `E_x -> E_y`: the
/// first pair where transport is not a bijection, if any.
pub fn univalence_defect(mf: &MarkedFibration) -> Result<Option<String>> {
    let b = mf.base();
    for x in 0..b.num_objects() {
        for y in 0..b.num_objects() {
            let mut reps: Vec<Functor> = Vec::new();
            for f in functors(&mf.fibres[x].cat, &mf.fibres[y].cat)? {
                if !reps.iter().any(|r| naturally_isomorphic(r, &f)) {
                    reps.push(f);
                }
            }
            let mut hits = vec![0usize; reps.len()];
            for &h in b.hom(x, y) {
                let t = mf.transport(h);
                let c = reps.iter().position(|r| naturally_isomorphic(r, t)).expect("transport is a functor");
                hits[c] += 1;
            }
            if hits.iter().any(|&n| n != 1) {
                return Ok(Some(format!("{} -> {}: {} arrows, {} functor classes", b.obj_label(x), b.obj_label(y), b.hom(x, y).len(), reps.len())));
            }
        }
    }
    Ok(None)
}

pub fn is_directed_univalent(mf: &MarkedFibration) -> Result<bool> {
    Ok(univalence_defect(mf)?.is_none())
}

/// One virtual join step on finite data.
#[derive(Clone, Debug)]
pub struct VirtualJoin {
    pub fun: FunCocart,
    pub glued: CocommaFibration,
    pub localized: LocalizedFibration,
    pub i0: Functor,
    pub i1: Functor,
    /// Base change along `i0`, `i1` recovers `E0`, `E1`.
    pub recovered: [bool; 2],
}

impl VirtualJoin {
    pub fn base(&self) -> &Arc<FinCat> {
        &self.i0.cod
    }

    pub fn fibration(&self) -> &MarkedFibration {
        self.localized.fibration.as_ref().expect("checked on construction")
    }

    pub fn verified(&self) -> bool {
        self.localized.verified() && self.recovered.iter().all(|&r| r)
    }
}

/// Glue `E0 -> C0` and `E1 -> C1` along `Fun_cocart`, then invert the cells at equivalences.
pub fn virtual_join(mf0: &MarkedFibration, mf1: &MarkedFibration, max_word_len: usize) -> Result<VirtualJoin> {
    let fun = fun_cocart(mf0, mf1)?;
    let (_, s0) = pullback_fibration(mf0, &fun.u0)?;
    let (_, s1) = pullback_fibration(mf1, &fun.u1)?;
    let ev = evaluation(&fun, mf0, mf1, &s0, &s1)?;
    let glued = cocomma_fibration(mf0, mf1, &fun.u0, &fun.u1, &ev, max_word_len)?;
    let (k, l, alpha) = match (&glued.base.k, &glued.base.l, &glued.base.alpha) {
        (Some(k), Some(l), Some(a)) => (k.clone(), l.clone(), a.clone()),
        _ => return Err(UniverseError::Truncated("base cocomma".into())),
    };
    let mut w: Vec<ArrId> = (0..fun.cat.num_objects()).filter(|&o| is_equivalence(&fun.objects[o].2)).map(|o| alpha.comp[o]).collect();
    w.sort_unstable();
    w.dedup();
    let localized = localize_fibration(&glued.glue.fibration, &w, max_word_len)?;
    let q = localized.fibration.clone().ok_or_else(|| UniverseError::Precondition("localised map is not a cocartesian fibration".into()))?;
    let (i0, i1) = (k.then(&localized.loc.i), l.then(&localized.loc.i));
    let back0 = pullback_fibration(&q, &i0)?.0;
    let back1 = pullback_fibration(&q, &i1)?.0;
    let recovered = [find_equivalence_over(&back0.p, &mf0.p).is_some(), find_equivalence_over(&back1.p, &mf1.p).is_some()];
    Ok(VirtualJoin { fun, glued, localized, i0, i1, recovered })
}

/// `A ->*_V X` on strict families: the cocomma of `A <- Fun_cocart -> X`
/// with the cells at isomorphisms inverted. Returns the offsets of the
/// objects and generators of `X`.
pub fn virtual_join_step(p: &StrictFamily, q: &StrictFamily, name: &str) -> Result<(StrictFamily, usize, usize)> {
    let na = p.pres.objects.len();
    let mut objects: Vec<String> = p.pres.objects.iter().map(|o| format!("{o}@{name}")).collect();
    objects.extend(q.pres.objects.iter().cloned());
    let mut generators: Vec<Arrow> = p.pres.generators.iter().map(|g| Arrow::new(format!("{}@{name}", g.label), g.src, g.tgt)).collect();
    let x_gen = generators.len();
    generators.extend(q.pres.generators.iter().map(|g| Arrow::new(g.label.clone(), g.src + na, g.tgt + na)));
    let shift = |w: &Path| Path { src: w.src + na, tgt: w.tgt + na, word: w.word.iter().map(|&g| g + x_gen).collect() };
    let mut relations = p.pres.relations.clone();
    relations.extend(q.pres.relations.iter().map(|(l, r)| (shift(l), shift(r))));
    let mut fibres = p.fibres.clone();
    fibres.extend(q.fibres.iter().cloned());
    let mut gen_maps = p.gen_maps.clone();
    gen_maps.extend(q.gen_maps.iter().cloned());

    let key = |c: ObjId, x: ObjId, h: &Functor| (c, x, h.obj.clone(), h.arr.clone());
    let mut cells: Vec<(ObjId, ObjId, Functor, GenId)> = Vec::new();
    let mut cell_of = HashMap::new();
    for c in 0..na {
        for x in 0..q.pres.objects.len() {
            for (k, h) in functors(&p.fibres[c], &q.fibres[x])?.into_iter().enumerate() {
                let g = generators.len();
                generators.push(Arrow::new(format!("al{name}[{}|{k}|{}]", p.pres.objects[c], q.pres.objects[x]), c, x + na));
                gen_maps.push(h.clone());
                cell_of.insert(key(c, x, &h), g);
                cells.push((c, x, h, g));
            }
        }
    }
    let inverse_of: Vec<Functor> = p
        .gen_maps
        .iter()
        .enumerate()
        .map(|(u, m)| m.inverse().ok_or_else(|| UniverseError::Precondition(format!("transport along `{}` is not invertible", p.pres.generators[u].label))))
        .collect::<Result<_>>()?;
    for (c, x, h, g) in &cells {
        let (c, x, g) = (*c, *x, *g);
        let here = Path { src: c, tgt: x + na, word: vec![g] };
        for (u, gen) in p.pres.generators.iter().enumerate().filter(|(_, gen)| gen.src == c) {
            let h2 = inverse_of[u].then(h);
            let lhs = Path { src: c, tgt: x + na, word: vec![u, cell_of[&key(gen.tgt, x, &h2)]] };
            relations.push((lhs, here.clone()));
        }
        for (v, gen) in q.pres.generators.iter().enumerate().filter(|(_, gen)| gen.src == x) {
            let h2 = h.then(&q.gen_maps[v]);
            let lhs = Path { src: c, tgt: gen.tgt + na, word: vec![g, v + x_gen] };
            let rhs = Path { src: c, tgt: gen.tgt + na, word: vec![cell_of[&key(c, gen.tgt, &h2)]] };
            relations.push((lhs, rhs));
        }
        if let Some(hinv) = h.inverse() {
            let gi = generators.len();
            generators.push(Arrow::new(format!("{}^-1", generators[g].label), x + na, c));
            gen_maps.push(hinv);
            relations.push((Path { src: c, tgt: c, word: vec![g, gi] }, Path::id(c)));
            relations.push((Path { src: x + na, tgt: x + na, word: vec![gi, g] }, Path::id(x + na)));
        }
    }
    let pres = Presentation::new(format!("V{name}"), objects, generators, relations)?;
    let fam = StrictFamily { pres, fibres, gen_maps };
    fam.check()?;
    Ok((fam, na, x_gen))
}

/// Report for one stage of the completion tower.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct UniverseStage {
    pub index: usize,
    pub status: Status,
    pub generators: usize,
    pub relations: usize,
    pub objects: Option<usize>,
    pub arrows: Option<usize>,
    pub growth: Vec<usize>,
    pub link_equivalence: Option<bool>,
    /// Base change along the link recovers the previous stage.
    pub recovers_previous: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct UniverseTower {
    pub stages: Vec<UniverseStage>,
    pub stable_stage: Option<usize>,
    /// The classifying fibration on a skeleton of the stable stage.
    pub universe: Option<MarkedFibration>,
    pub directed_univalent: bool,
    /// Fibres of the universe and of `p` agree up to equivalence.
    pub same_fibres: bool,
}

impl UniverseTower {
    pub fn verified(&self) -> bool {
        self.stable_stage.is_some() && self.universe.is_some() && self.directed_univalent && self.same_fibres
    }
}

/// An exact stage on a skeleton of its category.
struct Compressed {
    cat: Arc<FinCat>,
    family: StrictFamily,
    gen_of: Vec<Option<GenId>>,
    pf: Pseudofunctor,
}

fn compress(pf: &Pseudofunctor) -> Result<Compressed> {
    let sk = skeleton(&pf.base);
    let cat = sk.sub.cat.clone();
    let fibres: Vec<Arc<FinCat>> = sk.sub.incl.obj.iter().map(|&o| pf.fibres[o].clone()).collect();
    let (family, gen_of) = StrictFamily::over_table(&cat, fibres.clone(), |a| pf.maps[sk.sub.incl.arr[a]].clone());
    let maps = sk.sub.incl.arr.iter().map(|&a| pf.maps[a].clone()).collect();
    let pf = Pseudofunctor::strict(cat.clone(), fibres, maps)?;
    Ok(Compressed { cat, family, gen_of, pf })
}

fn stage_report(index: usize, sat: &Saturation, link_equivalence: Option<bool>, recovers_previous: Option<bool>) -> UniverseStage {
    UniverseStage {
        index,
        status: sat.status,
        generators: sat.presentation.generators.len(),
        relations: sat.presentation.relations.len(),
        objects: sat.exact().map(|c| c.num_objects()),
        arrows: sat.exact().map(|c| c.num_arrows()),
        growth: sat.growth.clone(),
        link_equivalence,
        recovers_previous,
    }
}

fn classified_by(fibres: &[Arc<FinCat>], by: &[Arc<FinCat>]) -> bool {
    fibres.iter().all(|f| by.iter().any(|g| find_isomorphism(f, g).is_some()))
}

/// Iterate `X_{n+1} = A ->*_V X_n` from `q0`, where `p: E -> A` is a
/// fibration over a groupoid with gaunt fibres classifying those of `q0`.
pub fn univalent_completion(mf_p: &MarkedFibration, mf_q0: &MarkedFibration, max_stages: usize, max_word_len: usize) -> Result<UniverseTower> {
    if !mf_p.base().is_groupoid() {
        return pre("p must lie over a groupoid");
    }
    let p = rigidify(mf_p)?;
    let q0 = rigidify(mf_q0)?;
    if !classified_by(&q0.fibres, &p.fibres) {
        return pre("a fibre of q0 is not equivalent to a fibre of p");
    }
    let sat0 = saturate(&q0.pres, max_word_len)?;
    let mut prev = Some(compress(&q0.pseudofunctor(&sat0)?)?);
    let mut current = prev.as_ref().expect("exact").family.clone();
    let mut stages = vec![stage_report(0, &sat0, None, None)];
    let mut links: Vec<bool> = Vec::new();
    for n in 1..=max_stages {
        let (fam, x_obj, x_gen) = virtual_join_step(&p, &current, &n.to_string())?;
        let sat = saturate(&fam.pres, max_word_len)?;
        let (mut link_eq, mut recovers) = (None, None);
        if sat.is_exact() {
            let pf = fam.pseudofunctor(&sat)?;
            if let Some(s) = &prev {
                let obj: Vec<ObjId> = (0..s.cat.num_objects()).map(|o| o + x_obj).collect();
                let link = sat.functor_from(&s.cat, &obj, |v| Path {
                    src: s.cat.src(v) + x_obj,
                    tgt: s.cat.tgt(v) + x_obj,
                    word: s.gen_of[v].map(|g| g + x_gen).into_iter().collect(),
                })?;
                link_eq = Some(is_equivalence(&link));
                let back = pullback_fibration(&unstraighten(&pf)?, &link)?.0;
                recovers = Some(find_equivalence_over(&back.p, &unstraighten(&s.pf)?.p).is_some());
            }
            let c = compress(&pf)?;
            current = c.family.clone();
            prev = Some(c);
        } else {
            current = fam;
            prev = None;
        }
        stages.push(stage_report(n, &sat, link_eq, recovers));
        links.push(link_eq == Some(true) && recovers == Some(true));
        let k = links.len();
        if k >= 2 && links[k - 1] && links[k - 2] {
            let s = prev.expect("stable stages are exact");
            let universe = unstraighten(&s.pf)?;
            let directed_univalent = is_directed_univalent(&universe)?;
            let same_fibres = classified_by(&s.pf.fibres, &p.fibres) && classified_by(&p.fibres, &s.pf.fibres);
            return Ok(UniverseTower { stages, stable_stage: Some(n - 2), universe: Some(universe), directed_univalent, same_fibres });
        }
    }
    Ok(UniverseTower { stages, stable_stage: None, universe: None, directed_univalent: false, same_fibres: false })
}

/// The classifying functor `C -> B` of `D -> C` against a universe `E -> B`.
#[derive(Clone, Debug)]
pub struct Straightening {
    pub functor: Functor,
    /// `D_c -> E_{f c}` for each object of `C`.
    pub fibre_equivalences: Vec<Functor>,
    /// An equivalence `D -> C x_B E` over `C`, when one exists.
    pub comparison: Option<Functor>,
}

impl Straightening {
    pub fn verified(&self) -> bool {
        self.comparison.is_some()
    }
}

pub fn straighten_against(universe: &MarkedFibration, mf_q: &MarkedFibration) -> Result<Straightening> {
    if let Some(d) = univalence_defect(universe)? {
        return pre(format!("universe is not directed univalent ({d})"));
    }
    let (b, c) = (universe.base(), mf_q.base());
    let mut obj = Vec::new();
    let mut fibre_equivalences = Vec::new();
    for x in 0..c.num_objects() {
        let fx = &mf_q.fibres[x].cat;
        let found = (0..b.num_objects()).find_map(|y| find_equivalence(fx, &universe.fibres[y].cat).map(|e| (y, e)));
        let Some((y, e)) = found else {
            return pre(format!("fibre over `{}` is not classified", c.obj_label(x)));
        };
        obj.push(y);
        fibre_equivalences.push(e);
    }
    let inverses: Vec<Functor> = fibre_equivalences.iter().map(|e| quasi_inverse(e).expect("equivalence").0).collect();
    let arr = (0..c.num_arrows())
        .map(|g| {
            let (x, x2) = (c.src(g), c.tgt(g));
            let target = inverses[x].then(mf_q.transport(g)).then(&fibre_equivalences[x2]);
            b.hom(obj[x], obj[x2])
                .iter()
                .copied()
                .find(|&h| naturally_isomorphic(universe.transport(h), &target))
                .ok_or_else(|| UniverseError::Precondition(format!("no arrow of the universe classifies `{}`", c.arr_label(g))))
        })
        .collect::<Result<Vec<_>>>()?;
    let functor = Functor::new(c.clone(), b.clone(), obj, arr)?;
    let pulled = pullback_fibration(universe, &functor)?.0;
    let comparison = find_equivalence_over(&mf_q.p, &pulled.p);
    Ok(Straightening { functor, fibre_equivalences, comparison })
}

/// Natural transformations `f => g` against cocartesian functors
/// `f^*E -> g^*E` over `C` up to vertical isomorphism.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct UniquenessCount {
    pub nat_trans: usize,
    pub cocartesian_classes: usize,
}

impl UniquenessCount {
    pub fn agrees(&self) -> bool {
        self.nat_trans == self.cocartesian_classes
    }
}

pub fn straightening_uniqueness_check(universe: &MarkedFibration, f: &Functor, g: &Functor) -> Result<UniquenessCount> {
    let mut nat_trans = 0;
    for_each_nat_trans(f, g, false, &mut |_| {
        nat_trans += 1;
        true
    });
    let x = pullback_fibration(universe, f)?.0;
    let y = pullback_fibration(universe, g)?.0;
    let vertical = |n: &crate::functor::NatTrans| n.comp.iter().all(|&a| y.p.cod.is_identity(y.p.arr[a]));
    let mut reps: Vec<Functor> = Vec::new();
    for h in cocartesian_functors(&x, &y) {
        let mut seen = false;
        for r in &reps {
            for_each_nat_trans(r, &h, true, &mut |n| {
                seen = vertical(n);
                !seen
            });
            if seen {
                break;
            }
        }
        if !seen {
            reps.push(h);
        }
    }
    Ok(UniquenessCount { nat_trans, cocartesian_classes: reps.len() })
}

/// The fibration over a point with the given fibre.
pub fn over_point(fibre: FinCat) -> MarkedFibration {
    let p = Functor::constant(Arc::new(fibre), Arc::new(crate::fixtures::terminal()), 0);
    crate::fibration::is_cocartesian_fibration(&p).expect("every functor to a point is a cocartesian fibration")
}

/// `p` over the discrete category on `{a, b}` with fibres `1` and `I`, and
/// its component over `a`.
pub fn point_and_interval_family() -> (MarkedFibration, MarkedFibration) {
    use crate::fixtures::{discrete_on, interval, terminal};
    let base = Arc::new(discrete_on("{a,b}", &["a".to_string(), "b".to_string()]));
    let fibres = vec![Arc::new(terminal()), Arc::new(interval())];
    let maps = (0..base.num_arrows()).map(|a| Functor::identity(fibres[base.src(a)].clone())).collect();
    let p = unstraighten(&Pseudofunctor::strict(base, fibres, maps).expect("identity transports")).expect("strict family");
    (p, over_point(terminal()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::is_cocartesian_fibration;
    use crate::fixtures::{discrete, empty, interval, terminal, walking_idempotent, walking_iso};
    use crate::search::equivalent;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    fn point_and_interval() -> MarkedFibration {
        point_and_interval_family().0
    }

    #[test]
    fn fun_cocart_of_point_into_interval() {
        let fun = fun_cocart(&over_point(terminal()), &over_point(interval())).unwrap();
        assert_eq!(fun.objects.len(), 2);
        assert_eq!(fun.full.num_arrows(), 3);
        assert_eq!(fun.cat.num_arrows(), 2);
        assert_eq!(fun.marked.iter().filter(|&&m| m).count(), 2);
    }

    #[test]
    fn fun_cocart_over_an_iso_is_the_iso() {
        let j = arc(walking_iso());
        let pf = Pseudofunctor::constant(j.clone(), arc(terminal()));
        let fun = fun_cocart(&unstraighten(&pf).unwrap(), &over_point(terminal())).unwrap();
        assert_eq!(fun.cat.num_objects(), 2);
        assert_eq!(fun.cat.num_arrows(), 4);
        assert!(equivalent(&fun.cat, &j));
    }

    #[test]
    fn fun_cocart_needs_a_groupoid() {
        let i = arc(interval());
        let mf = unstraighten(&Pseudofunctor::constant(i, arc(terminal()))).unwrap();
        assert!(matches!(fun_cocart(&mf, &over_point(terminal())), Err(UniverseError::Precondition(_))));
    }

    #[test]
    fn univalence_oracles() {
        assert!(is_directed_univalent(&over_point(terminal())).unwrap());
        assert!(!is_directed_univalent(&over_point(crate::fixtures::cyclic_group(2))).unwrap());
        assert!(!is_directed_univalent(&point_and_interval()).unwrap());
        let j = unstraighten(&Pseudofunctor::constant(arc(walking_iso()), arc(terminal()))).unwrap();
        assert!(is_directed_univalent(&j).unwrap());
    }

    #[test]
    fn rigidify_rejects_automorphisms() {
        assert!(rigidify(&over_point(walking_iso())).is_ok());
        assert!(matches!(rigidify(&over_point(crate::fixtures::cyclic_group(2))), Err(UniverseError::Precondition(_))));
    }

    #[test]
    fn virtual_join_of_points() {
        let vj = virtual_join(&over_point(terminal()), &over_point(terminal()), 8).unwrap();
        assert!(vj.verified());
        assert!(equivalent(vj.base(), &arc(terminal())));
    }

    #[test]
    fn virtual_join_with_inequivalent_fibres_keeps_the_arrow() {
        let vj = virtual_join(&over_point(walking_idempotent()), &over_point(terminal()), 8).unwrap();
        assert!(vj.verified());
        assert!(equivalent(vj.base(), &arc(interval())));
    }

    #[test]
    fn virtual_join_onto_empty_base() {
        let e = arc(empty());
        let mf1 = is_cocartesian_fibration(&Functor::new(e.clone(), e, vec![], vec![]).unwrap()).unwrap();
        let vj = virtual_join(&point_and_interval(), &mf1, 8).unwrap();
        assert!(vj.verified());
        assert!(equivalent(vj.base(), &arc(discrete(2))));
    }

    #[test]
    fn finite_and_presented_steps_agree() {
        let p = point_and_interval();
        let q0 = over_point(terminal());
        let vj = virtual_join(&p, &q0, 8).unwrap();
        assert!(vj.verified());
        let (fam, _, _) = virtual_join_step(&rigidify(&p).unwrap(), &rigidify(&q0).unwrap(), "1").unwrap();
        let sat = saturate(&fam.pres, 8).unwrap();
        let x1 = sat.exact().unwrap();
        assert!(equivalent(vj.base(), x1));
        assert!(equivalent(vj.base(), &arc(interval())));
    }

    fn universe_of_point_and_interval() -> UniverseTower {
        univalent_completion(&point_and_interval(), &over_point(terminal()), 5, 10).unwrap()
    }

    fn hom_sizes(u: &MarkedFibration) -> (usize, usize, usize, usize) {
        let b = u.base();
        let one = (0..b.num_objects()).find(|&x| u.fibres[x].cat.num_objects() == 1).unwrap();
        let int = (0..b.num_objects()).find(|&x| u.fibres[x].cat.num_objects() == 2).unwrap();
        (b.hom(one, one).len(), b.hom(one, int).len(), b.hom(int, one).len(), b.hom(int, int).len())
    }

    #[test]
    fn completion_of_point_and_interval() {
        let t = universe_of_point_and_interval();
        assert!(t.verified(), "{:?}", t.stages);
        let u = t.universe.as_ref().unwrap();
        assert_eq!(u.base().num_objects(), 2);
        assert_eq!(hom_sizes(u), (1, 2, 1, 3));
        assert_eq!(t.stages[1].objects, Some(3));
    }

    #[test]
    fn completion_requires_classified_fibres() {
        let r = univalent_completion(&point_and_interval(), &over_point(walking_idempotent()), 4, 8);
        assert!(matches!(r, Err(UniverseError::Precondition(_))));
    }

    #[test]
    fn straightening_against_the_universe() {
        let t = universe_of_point_and_interval();
        let u = t.universe.unwrap();
        // fibres 1 -> I over the interval, picking the bottom object
        let i = arc(interval());
        let (one, int) = (arc(terminal()), arc(interval()));
        let pick = Functor::constant(one.clone(), int.clone(), 0);
        let pf = Pseudofunctor::strict(i.clone(), vec![one.clone(), int.clone()], (0..i.num_arrows()).map(|a| if i.is_identity(a) { Functor::identity(if i.src(a) == 0 { one.clone() } else { int.clone() }) } else { pick.clone() }).collect()).unwrap();
        let q = unstraighten(&pf).unwrap();
        let s = straighten_against(&u, &q).unwrap();
        assert!(s.verified());
        assert_eq!(u.fibres[s.functor.obj[0]].cat.num_objects(), 1);
        assert_eq!(u.fibres[s.functor.obj[1]].cat.num_objects(), 2);
        let r = straighten_against(&u, &over_point(walking_idempotent()));
        assert!(matches!(r, Err(UniverseError::Precondition(_))));
    }

    #[test]
    fn uniqueness_counts_over_a_point() {
        let u = universe_of_point_and_interval().universe.unwrap();
        let b = u.base().clone();
        let pt = arc(terminal());
        let at = |x: ObjId| Functor::constant(pt.clone(), b.clone(), x);
        let one = (0..b.num_objects()).find(|&x| u.fibres[x].cat.num_objects() == 1).unwrap();
        let int = 1 - one;
        for (x, y, n) in [(one, one, 1), (one, int, 2), (int, one, 1), (int, int, 3)] {
            let c = straightening_uniqueness_check(&u, &at(x), &at(y)).unwrap();
            assert_eq!(c, UniquenessCount { nat_trans: n, cocartesian_classes: n });
        }
    }

    #[test]
    fn uniqueness_counts_over_the_interval() {
        let u = universe_of_point_and_interval().universe.unwrap();
        let fs = functors(&arc(interval()), u.base()).unwrap();
        assert_eq!(fs.len(), u.base().num_arrows());
        assert_eq!(fs.len(), 7);
        for f in &fs {
            for g in &fs {
                let c = straightening_uniqueness_check(&u, f, g).unwrap();
                assert!(c.agrees(), "{c:?}");
            }
        }
    }

    #[test]
    fn universe_rejects_non_univalent_target() {
        assert!(matches!(straighten_against(&point_and_interval(), &over_point(terminal())), Err(UniverseError::Precondition(_))));
    }
}
