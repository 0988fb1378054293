//! The directed join `A0 ->*_B A1` and the full-image tower.
//!
//! Stages are kept as presentations over `B`. A stage may present an
//! infinite category even when the colimit is finite (the tower for
//! `1 -> Idem` has the free monoid on one generator as its first stage), so
//! saturation is only used to report a stage and to detect stabilisation,
//! never to build the next one. Exact stages are replaced by skeleta, which
//! changes the tower only up to equivalence.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::constructions::{comma, is_fully_faithful};
use crate::error::CatError;
use crate::fincat::{ArrId, Arrow, Budget, FinCat, ObjId};
use crate::functor::{Functor, NatTrans};
use crate::presentation::{saturate, GenId, Path, Presentation, PresentationError, Saturation, Status};
use crate::search::skeleton;

#[derive(Debug, Error)]
pub enum JoinError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Cat(#[from] CatError),
}

pub type Result<T> = std::result::Result<T, JoinError>;

/// A presented category with a functor to `B`, given on objects and generators.
#[derive(Clone, Debug)]
pub struct Over {
    pub pres: Presentation,
    pub obj: Vec<ObjId>,
    pub gen: Vec<ArrId>,
}

impl Over {
    /// The domain of `g` presented by its composition table.
    pub fn from_functor(g: &Functor) -> (Over, Vec<Option<GenId>>) {
        let (pres, gen_of) = Presentation::from_fincat(&g.dom);
        let gen = g.dom.non_identity_arrows().map(|a| g.arr[a]).collect();
        (Over { pres, obj: g.obj.clone(), gen }, gen_of)
    }

    pub fn eval(&self, b: &FinCat, p: &Path) -> ArrId {
        p.word.iter().fold(b.id(self.obj[p.src]), |acc, &g| b.compose(self.gen[g], acc))
    }
}

/// `A ->*_B X` as a presentation, with the positions of its pieces.
#[derive(Clone, Debug)]
pub struct JoinPresentation {
    pub over: Over,
    /// Generator of each non-identity arrow of `A`.
    pub a_gen: Vec<Option<GenId>>,
    /// Offsets of the objects and generators of `X`.
    pub x_obj: usize,
    pub x_gen: usize,
    /// `(a, x, beta)` with its cell generator, in comma order.
    pub cells: Vec<(ObjId, ObjId, ArrId, GenId)>,
}

/// One directed join step: `A` (via `f`) joined onto the presented `X`.
pub fn join_presentation(f: &Functor, x: &Over, name: &str) -> JoinPresentation {
    let (a, b) = (&*f.dom, &*f.cod);
    let (pa, a_gen) = Presentation::from_fincat(a);
    let na = a.num_objects();
    let mut objects: Vec<String> = a.objects().iter().map(|o| format!("{o}@{name}")).collect();
    objects.extend(x.pres.objects.iter().cloned());
    let mut generators: Vec<Arrow> = pa.generators.iter().map(|g| Arrow::new(format!("{}@{name}", g.label), g.src, g.tgt)).collect();
    let x_gen = generators.len();
    generators.extend(x.pres.generators.iter().map(|g| Arrow::new(g.label.clone(), g.src + na, g.tgt + na)));
    let mut obj: Vec<ObjId> = f.obj.clone();
    obj.extend(x.obj.iter().copied());
    let mut gen: Vec<ArrId> = a.non_identity_arrows().map(|u| f.arr[u]).collect();
    gen.extend(x.gen.iter().copied());
    let shift = |p: &Path| Path { src: p.src + na, tgt: p.tgt + na, word: p.word.iter().map(|&g| g + x_gen).collect() };
    let mut relations = pa.relations.clone();
    relations.extend(x.pres.relations.iter().map(|(l, r)| (shift(l), shift(r))));

    let nx = x.pres.objects.len();
    let mut cells = Vec::new();
    let mut cell_of = std::collections::HashMap::new();
    for ao in 0..na {
        for xo in 0..nx {
            for &beta in b.hom(f.obj[ao], x.obj[xo]) {
                let g = generators.len();
                generators.push(Arrow::new(format!("al{name}[{}|{}|{}]", a.obj_label(ao), b.arr_label(beta), x.pres.objects[xo]), ao, xo + na));
                gen.push(beta);
                cell_of.insert((ao, xo, beta), g);
                cells.push((ao, xo, beta, g));
            }
        }
    }
    for &(ao, xo, beta, g) in &cells {
        let here = Path { src: ao, tgt: xo + na, word: vec![g] };
        // naturality along generators of A: cell' . u = cell
        for u in a.non_identity_arrows().filter(|&u| a.src(u) == ao) {
            let a2 = a.tgt(u);
            for &beta2 in b.hom(f.obj[a2], x.obj[xo]) {
                if b.compose(beta2, f.arr[u]) == beta {
                    let lhs = Path { src: ao, tgt: xo + na, word: vec![a_gen[u].expect("non-identity"), cell_of[&(a2, xo, beta2)]] };
                    relations.push((lhs, here.clone()));
                }
            }
        }
        // naturality along generators of X: v . cell = cell'
        for (v, arrow) in x.pres.generators.iter().enumerate() {
            if arrow.src != xo {
                continue;
            }
            let beta2 = b.compose(x.gen[v], beta);
            let lhs = Path { src: ao, tgt: arrow.tgt + na, word: vec![g, v + x_gen] };
            let rhs = Path { src: ao, tgt: arrow.tgt + na, word: vec![cell_of[&(ao, arrow.tgt, beta2)]] };
            relations.push((lhs, rhs));
        }
    }
    for &(ao, xo, beta, g) in &cells {
        if let Some(inv) = b.inverse(beta) {
            let k = generators.len();
            generators.push(Arrow::new(format!("{}^-1", generators[g].label), xo + na, ao));
            gen.push(inv);
            relations.push((Path { src: ao, tgt: ao, word: vec![g, k] }, Path::id(ao)));
            relations.push((Path { src: xo + na, tgt: xo + na, word: vec![k, g] }, Path::id(xo + na)));
        }
    }
    let pres = Presentation { name: format!("{}->*{}", a.name(), x.pres.name), objects, generators, relations };
    JoinPresentation { over: Over { pres, obj, gen }, a_gen, x_obj: na, x_gen, cells }
}

/// `A0 ->*_B A1` with its inclusions, cell and functor to `B` on exact results.
#[derive(Clone, Debug)]
pub struct DirectedJoin {
    pub saturation: Saturation,
    pub presentation: JoinPresentation,
    pub i0: Option<Functor>,
    pub i1: Option<Functor>,
    /// `alpha: i0 dom => i1 cod` over the comma `f0 / f1`.
    pub alpha: Option<NatTrans>,
    pub to_base: Option<Functor>,
}

impl DirectedJoin {
    pub fn cat(&self) -> Option<&Arc<FinCat>> {
        self.saturation.exact()
    }
}

pub fn directed_join(f0: &Functor, f1: &Functor, max_word_len: usize) -> Result<DirectedJoin> {
    if !crate::functor::same_cat(&f0.cod, &f1.cod) {
        return Err(JoinError::Precondition("functors into different categories".into()));
    }
    let (x, x_gen_of) = Over::from_functor(f1);
    let jp = join_presentation(f0, &x, "0");
    let sat = saturate(&jp.over.pres, max_word_len)?;
    let (mut i0, mut i1, mut alpha, mut to_base) = (None, None, None, None);
    if sat.is_exact() {
        let (a0, a1) = (&f0.dom, &f1.dom);
        let a_obj: Vec<ObjId> = (0..a0.num_objects()).collect();
        let j0 = sat.functor_from(a0, &a_obj, |u| Path { src: a0.src(u), tgt: a0.tgt(u), word: jp.a_gen[u].into_iter().collect() })?;
        let x_obj: Vec<ObjId> = (0..a1.num_objects()).map(|o| o + jp.x_obj).collect();
        let j1 = sat.functor_from(a1, &x_obj, |v| Path { src: a1.src(v) + jp.x_obj, tgt: a1.tgt(v) + jp.x_obj, word: x_gen_of[v].map(|g| g + jp.x_gen).into_iter().collect() })?;
        let cm = comma(f0, f1, &Budget::default())?;
        let comp = cm
            .triples
            .iter()
            .map(|&(ao, xo, beta)| {
                let g = jp.cells.iter().find(|c| (c.0, c.1, c.2) == (ao, xo, beta)).expect("cell per comma object").3;
                sat.arrow_of(&Path { src: ao, tgt: xo + jp.x_obj, word: vec![g] }).expect("generator has a normal form")
            })
            .collect();
        alpha = Some(NatTrans::new(cm.dom.then(&j0), cm.cod.then(&j1), comp)?);
        to_base = Some(sat.functor_to(&f0.cod, &jp.over.obj, &jp.over.gen)?);
        i0 = Some(j0);
        i1 = Some(j1);
    }
    Ok(DirectedJoin { saturation: sat, presentation: jp, i0, i1, alpha, to_base })
}

/// Report for one stage of a tower.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct JoinStage {
    pub index: usize,
    pub status: Status,
    pub generators: usize,
    pub relations: usize,
    /// Objects and arrows of the stage, on exact results.
    pub objects: Option<usize>,
    pub arrows: Option<usize>,
    pub growth: Vec<usize>,
    /// Whether the link from the previous stage is an equivalence, when both are exact.
    pub link_equivalence: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct JoinTower {
    pub stages: Vec<JoinStage>,
    /// Least `n` with the links `X_n -> X_{n+1} -> X_{n+2}` both equivalences.
    pub stable_stage: Option<usize>,
    /// `g_inf` on a skeleton of the stable stage.
    pub limit: Option<Functor>,
    pub fully_faithful: bool,
    /// The iso-closed images of `g_inf` and `f` coincide.
    pub image_matches: bool,
}

impl JoinTower {
    pub fn verified(&self) -> bool {
        self.stable_stage.is_some() && self.fully_faithful && self.image_matches
    }
}

/// Objects of `B` isomorphic to something in the image of `h`.
pub fn iso_closed_image(h: &Functor) -> Vec<bool> {
    let b = &h.cod;
    (0..b.num_objects()).map(|y| h.obj.iter().any(|&x| b.iso_between(x, y).is_some())).collect()
}

/// A skeleton of an exact stage, restricted over `B`.
fn compress(cat: &Arc<FinCat>, to_base: &Functor) -> (Functor, Functor) {
    let sk = skeleton(cat);
    (sk.sub.incl.clone(), sk.sub.incl.then(to_base))
}

fn stage_report(index: usize, sat: &Saturation, link_equivalence: Option<bool>) -> JoinStage {
    JoinStage {
        index,
        status: sat.status,
        generators: sat.presentation.generators.len(),
        relations: sat.presentation.relations.len(),
        objects: sat.exact().map(|c| c.num_objects()),
        arrows: sat.exact().map(|c| c.num_arrows()),
        growth: sat.growth.clone(),
        link_equivalence,
    }
}

/// Iterate `X_{n+1} = A ->*_B X_n` from `g0: X0 -> B` for up to `max_stages` joins.
pub fn join_tower(f: &Functor, g0: &Functor, max_stages: usize, max_word_len: usize) -> Result<JoinTower> {
    if !crate::functor::same_cat(&f.cod, &g0.cod) {
        return Err(JoinError::Precondition("functors into different categories".into()));
    }
    let img_f = iso_closed_image(f);
    if let Some(x) = (0..g0.dom.num_objects()).find(|&x| !img_f[g0.obj[x]]) {
        return Err(JoinError::Precondition(format!("`{}` is not in the image of f", g0.dom.obj_label(x))));
    }
    let b = &f.cod;
    let mut stages = Vec::new();
    // the previous exact stage as a skeleton over B, presented by its table
    let (_, mut prev_sk) = compress(&g0.dom, g0);
    let mut prev_exact = true;
    let (mut current, _) = Over::from_functor(&prev_sk);
    let sat0 = saturate(&current.pres, max_word_len)?;
    stages.push(stage_report(0, &sat0, None));
    let mut equivalent_links: Vec<bool> = Vec::new();
    for n in 1..=max_stages {
        let jp = join_presentation(f, &current, &n.to_string());
        let sat = saturate(&jp.over.pres, max_word_len)?;
        let mut link_eq = None;
        if let Some(cat) = sat.exact() {
            let to_base = sat.functor_to(b, &jp.over.obj, &jp.over.gen)?;
            if prev_exact {
                let s = &prev_sk.dom;
                let x_obj: Vec<ObjId> = (0..s.num_objects()).map(|o| o + jp.x_obj).collect();
                let gen_of: Vec<Option<GenId>> = Presentation::from_fincat(s).1;
                let link = sat.functor_from(s, &x_obj, |v| Path { src: s.src(v) + jp.x_obj, tgt: s.tgt(v) + jp.x_obj, word: gen_of[v].map(|g| g + jp.x_gen).into_iter().collect() })?;
                link_eq = Some(crate::constructions::is_equivalence(&link));
            }
            let (_, sk) = compress(cat, &to_base);
            prev_sk = sk;
            prev_exact = true;
            current = Over::from_functor(&prev_sk).0;
        } else {
            prev_exact = false;
            current = jp.over.clone();
        }
        stages.push(stage_report(n, &sat, link_eq));
        equivalent_links.push(link_eq == Some(true));
        let k = equivalent_links.len();
        if k >= 2 && equivalent_links[k - 1] && equivalent_links[k - 2] {
            let limit = prev_sk.clone();
            let fully_faithful = is_fully_faithful(&limit);
            let image_matches = iso_closed_image(&limit) == img_f;
            return Ok(JoinTower { stages, stable_stage: Some(n - 2), limit: Some(limit), fully_faithful, image_matches });
        }
    }
    Ok(JoinTower { stages, stable_stage: None, limit: None, fully_faithful: false, image_matches: false })
}

/// The core inclusion `C^~ -> C`.
pub fn core_inclusion(c: &Arc<FinCat>) -> Functor {
    crate::constructions::core(c).incl
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{discrete, empty, interval, poset, walking_idempotent, walking_iso};
    use crate::search::{equivalent, find_equivalence};

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    #[test]
    fn empty_side_gives_the_other() {
        let b = arc(interval());
        let f0 = Functor::identity(b.clone());
        let e = arc(empty());
        let f1 = Functor::new(e, b.clone(), vec![], vec![]).unwrap();
        let j = directed_join(&f0, &f1, 8).unwrap();
        let cat = j.cat().unwrap();
        assert!(equivalent(cat, &b));
        assert!(j.i0.unwrap().is_bijective());
    }

    #[test]
    fn two_points_over_the_interval() {
        let b = arc(interval());
        let f = core_inclusion(&b);
        let j = directed_join(&f, &f, 8).unwrap();
        let cat = j.cat().unwrap();
        assert!(equivalent(cat, &b));
        let g = j.to_base.unwrap();
        assert!(crate::constructions::is_equivalence(&g));
        j.alpha.unwrap().check().unwrap();
    }

    #[test]
    fn groupoid_with_itself_collapses() {
        let b = arc(walking_iso());
        let id = Functor::identity(b.clone());
        let j = directed_join(&id, &id, 8).unwrap();
        assert!(equivalent(j.cat().unwrap(), &b));
    }

    #[test]
    fn identity_tower_is_immediately_stable() {
        let b = arc(poset(2));
        let id = Functor::identity(b.clone());
        let t = join_tower(&id, &id, 6, 12).unwrap();
        assert_eq!(t.stable_stage, Some(0));
        assert!(t.verified());
    }

    #[test]
    fn core_towers_reach_the_full_image() {
        for (b, stage) in [(interval(), 1), (poset(2), 2), (walking_iso(), 0)] {
            let b = arc(b);
            let f = core_inclusion(&b);
            let t = join_tower(&f, &f, 6, 12).unwrap();
            assert!(t.verified(), "{}: {:?}", b.name(), t.stages);
            assert_eq!(t.stable_stage, Some(stage), "{}", b.name());
            assert!(find_equivalence(&t.limit.unwrap().dom, &b).is_some());
        }
    }

    #[test]
    fn idempotent_tower_passes_through_an_infinite_stage() {
        let b = arc(walking_idempotent());
        let f = core_inclusion(&b);
        let t = join_tower(&f, &f, 6, 12).unwrap();
        assert_eq!(t.stages[1].status, Status::Truncated);
        assert!(t.verified(), "{:?}", t.stages);
        assert_eq!(t.stable_stage, Some(2));
    }

    #[test]
    fn image_precondition() {
        let b = arc(interval());
        let f = Functor::new(arc(poset(0)), b.clone(), vec![0], vec![b.id(0)]).unwrap();
        let g = Functor::new(arc(discrete(1)), b.clone(), vec![1], vec![b.id(1)]).unwrap();
        assert!(matches!(join_tower(&f, &g, 3, 8), Err(JoinError::Precondition(_))));
    }
}
