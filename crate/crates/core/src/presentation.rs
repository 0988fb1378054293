//! Finitely presented categories and bounded saturation.
//!
//! Words are paths in diagrammatic order (first arrow first). Relations are
//! oriented into shortlex-decreasing rules and completed by bounded
//! Knuth-Bendix; irreducible words are then enumerated breadth-first.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::CatError;
use crate::fincat::{ArrId, Arrow, Budget, FinCat, ObjId};
use crate::functor::{Functor, NatTrans};

pub type GenId = usize;

pub const DEFAULT_MAX_WORD_LEN: usize = 16;
pub const DEFAULT_MAX_STAGES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("generator #{0} does not exist")]
    UnknownGenerator(GenId),
    #[error("generator `{0}` has an endpoint outside the object list")]
    DanglingGenerator(String),
    #[error("word in relation {0} is not a composable path")]
    NotComposable(usize),
    #[error("sides of relation {0} are not parallel")]
    NonParallel(usize),
    #[error("max_word_len must be at least 1")]
    ZeroBound,
    #[error("functors do not share a domain")]
    SpanMismatch,
    #[error("stage {0} does not match the domain or codomain of its link")]
    StageMismatch(usize),
    #[error("{0}")]
    Cat(#[from] CatError),
}

/// A path `src -> tgt` spelled in generators, first arrow first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub src: ObjId,
    pub tgt: ObjId,
    pub word: Vec<GenId>,
}

impl Path {
    pub fn id(x: ObjId) -> Path {
        Path { src: x, tgt: x, word: vec![] }
    }

    pub fn gen(p: &Presentation, g: GenId) -> Path {
        Path { src: p.generators[g].src, tgt: p.generators[g].tgt, word: vec![g] }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Path) -> Path {
        debug_assert_eq!(self.tgt, next.src);
        let mut word = self.word.clone();
        word.extend_from_slice(&next.word);
        Path { src: self.src, tgt: next.tgt, word }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub name: String,
    pub objects: Vec<String>,
    pub generators: Vec<Arrow>,
    pub relations: Vec<(Path, Path)>,
}

impl Presentation {
    pub fn new(
        name: impl Into<String>,
        objects: Vec<String>,
        generators: Vec<Arrow>,
        relations: Vec<(Path, Path)>,
    ) -> Result<Presentation, PresentationError> {
        let p = Presentation { name: name.into(), objects, generators, relations };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PresentationError> {
        let n = self.objects.len();
        for g in &self.generators {
            if g.src >= n || g.tgt >= n {
                return Err(PresentationError::DanglingGenerator(g.label.clone()));
            }
        }
        for (i, (a, b)) in self.relations.iter().enumerate() {
            for p in [a, b] {
                if !self.is_path(p)? {
                    return Err(PresentationError::NotComposable(i));
                }
            }
            if a.src != b.src || a.tgt != b.tgt {
                return Err(PresentationError::NonParallel(i));
            }
        }
        Ok(())
    }

    fn is_path(&self, p: &Path) -> Result<bool, PresentationError> {
        if p.src >= self.objects.len() || p.tgt >= self.objects.len() {
            return Ok(false);
        }
        let mut at = p.src;
        for &g in &p.word {
            let a = self.generators.get(g).ok_or(PresentationError::UnknownGenerator(g))?;
            if a.src != at {
                return Ok(false);
            }
            at = a.tgt;
        }
        Ok(at == p.tgt)
    }

    /// Generators are the non-identity arrows, relations the composition table.
    pub fn from_fincat(c: &FinCat) -> (Presentation, Vec<Option<GenId>>) {
        let mut gen_of = vec![None; c.num_arrows()];
        let mut generators = Vec::new();
        for f in c.non_identity_arrows() {
            gen_of[f] = Some(generators.len());
            generators.push(c.arrows()[f].clone());
        }
        let mut relations = Vec::new();
        for f in c.non_identity_arrows() {
            for &g in c.out(c.tgt(f)) {
                if c.is_identity(g) {
                    continue;
                }
                let h = c.compose(g, f);
                let lhs = Path { src: c.src(f), tgt: c.tgt(g), word: vec![gen_of[f].unwrap(), gen_of[g].unwrap()] };
                let rhs = Path { src: c.src(f), tgt: c.tgt(g), word: gen_of[h].into_iter().collect() };
                relations.push((lhs, rhs));
            }
        }
        let p = Presentation { name: c.name().to_string(), objects: c.objects().to_vec(), generators, relations };
        (p, gen_of)
    }

    pub fn word_label(&self, p: &Path) -> String {
        if p.word.is_empty() {
            return format!("id_{}", self.objects[p.src]);
        }
        p.word.iter().rev().map(|&g| self.generators[g].label.as_str()).collect::<Vec<_>>().join(".")
    }
}

fn shortlex(a: &[GenId], b: &[GenId]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Rewriting system with rules indexed by their last letter.
#[derive(Clone, Debug, Default)]
pub struct Rewriter {
    rules: Vec<Option<(Vec<GenId>, Vec<GenId>)>>,
    by_last: HashMap<GenId, Vec<usize>>,
}

impl Rewriter {
    pub fn rules(&self) -> impl Iterator<Item = (&[GenId], &[GenId])> {
        self.rules.iter().flatten().map(|(l, r)| (l.as_slice(), r.as_slice()))
    }

    pub fn num_rules(&self) -> usize {
        self.rules.iter().flatten().count()
    }

    pub fn reduce(&self, w: &[GenId]) -> Vec<GenId> {
        let mut out: Vec<GenId> = Vec::with_capacity(w.len());
        let mut input: Vec<GenId> = w.iter().rev().copied().collect();
        while let Some(a) = input.pop() {
            out.push(a);
            if let Some(rs) = self.by_last.get(&a) {
                for &r in rs {
                    let (lhs, rhs) = self.rules[r].as_ref().expect("indexed rules are live");
                    if out.ends_with(lhs) {
                        out.truncate(out.len() - lhs.len());
                        input.extend(rhs.iter().rev());
                        break;
                    }
                }
            }
        }
        out
    }

    /// Does some rule's left side occur as a suffix of `w`?
    fn has_suffix_redex(&self, w: &[GenId]) -> bool {
        let Some(&a) = w.last() else { return false };
        self.by_last
            .get(&a)
            .is_some_and(|rs| rs.iter().any(|&r| w.ends_with(&self.rules[r].as_ref().unwrap().0)))
    }

    fn push(&mut self, lhs: Vec<GenId>, rhs: Vec<GenId>) -> usize {
        let k = self.rules.len();
        self.by_last.entry(*lhs.last().expect("non-empty lhs")).or_default().push(k);
        self.rules.push(Some((lhs, rhs)));
        k
    }

    fn delete(&mut self, k: usize) -> (Vec<GenId>, Vec<GenId>) {
        let (l, r) = self.rules[k].take().expect("live rule");
        if let Some(v) = self.by_last.get_mut(l.last().unwrap()) {
            v.retain(|&j| j != k);
        }
        (l, r)
    }
}

fn contains(hay: &[GenId], needle: &[GenId]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Bounded Knuth-Bendix completion. Returns the system and whether it is
/// certified confluent.
pub fn complete(relations: &[(Path, Path)], max_rule_len: usize, max_rules: usize) -> (Rewriter, bool) {
    let mut rw = Rewriter::default();
    let mut complete = true;
    let mut eqs: VecDeque<(Vec<GenId>, Vec<GenId>)> =
        relations.iter().map(|(a, b)| (a.word.clone(), b.word.clone())).collect();
    let mut created = 0usize;

    let mut process = |rw: &mut Rewriter, eqs: &mut VecDeque<(Vec<GenId>, Vec<GenId>)>, complete: &mut bool| {
        while let Some((a, b)) = eqs.pop_front() {
            let (a, b) = (rw.reduce(&a), rw.reduce(&b));
            let (l, r) = match shortlex(&a, &b) {
                Ordering::Equal => continue,
                Ordering::Greater => (a, b),
                Ordering::Less => (b, a),
            };
            if l.len() > max_rule_len || created >= max_rules {
                *complete = false;
                continue;
            }
            created += 1;
            let k = rw.push(l.clone(), r);
            for j in 0..rw.rules.len() {
                if j == k {
                    continue;
                }
                let Some((lj, _)) = &rw.rules[j] else { continue };
                if contains(lj, &l) {
                    let pair = rw.delete(j);
                    eqs.push_back(pair);
                } else {
                    let rj = rw.rules[j].as_ref().unwrap().1.clone();
                    let nr = rw.reduce(&rj);
                    rw.rules[j].as_mut().unwrap().1 = nr;
                }
            }
        }
    };

    process(&mut rw, &mut eqs, &mut complete);
    let mut i = 0;
    while i < rw.rules.len() {
        let mut j = 0;
        while j <= i && rw.rules[i].is_some() {
            if rw.rules[j].is_some() {
                for (a, b) in [(i, j), (j, i)] {
                    let (Some((u, ru)), Some((v, rv))) = (&rw.rules[a], &rw.rules[b]) else { continue };
                    for k in 1..u.len().min(v.len()) {
                        if u[u.len() - k..] == v[..k] {
                            let mut left = ru.clone();
                            left.extend_from_slice(&v[k..]);
                            let mut right = u[..u.len() - k].to_vec();
                            right.extend_from_slice(rv);
                            eqs.push_back((left, right));
                        }
                    }
                }
                process(&mut rw, &mut eqs, &mut complete);
            }
            j += 1;
        }
        i += 1;
    }
    (rw, complete)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Exact,
    Truncated,
}

/// Result of saturating a presentation.
#[derive(Clone, Debug)]
pub struct Saturation {
    pub presentation: Presentation,
    pub status: Status,
    pub bound: usize,
    /// `growth[k]`: number of normal forms of length at most `k`.
    pub growth: Vec<usize>,
    /// Whether completion finished within its bounds.
    pub confluent: bool,
    pub rewriter: Rewriter,
    /// Normal forms found, identities first, then shortlex order.
    pub words: Vec<Path>,
    /// The presented category, on exact results.
    pub cat: Option<Arc<FinCat>>,
    index: HashMap<(ObjId, Vec<GenId>), usize>,
}

impl Saturation {
    pub fn is_exact(&self) -> bool {
        self.status == Status::Exact
    }

    pub fn exact(&self) -> Option<&Arc<FinCat>> {
        self.cat.as_ref()
    }

    pub fn normal_form(&self, p: &Path) -> Path {
        Path { src: p.src, tgt: p.tgt, word: self.rewriter.reduce(&p.word) }
    }

    /// Arrow of the presented category named by a path (exact results).
    pub fn arrow_of(&self, p: &Path) -> Option<ArrId> {
        self.cat.as_ref()?;
        self.index.get(&(p.src, self.rewriter.reduce(&p.word))).copied()
    }

    /// Number of normal forms `x -> y` found within the bound.
    pub fn hom_count(&self, x: ObjId, y: ObjId) -> usize {
        self.words.iter().filter(|p| p.src == x && p.tgt == y).count()
    }

    /// Composite `b . a` of enumerated words, if its normal form is within bound.
    pub fn partial_compose(&self, b: usize, a: usize) -> Option<usize> {
        let (pa, pb) = (&self.words[a], &self.words[b]);
        if pa.tgt != pb.src {
            return None;
        }
        let nf = self.rewriter.reduce(&pa.then(pb).word);
        self.index.get(&(pa.src, nf)).copied()
    }

    /// The functor out of the presented category sending generator `g` to
    /// `gen_map[g]`; fails if a relation is not respected.
    pub fn functor_to(&self, target: &Arc<FinCat>, obj_map: &[ObjId], gen_map: &[ArrId]) -> Result<Functor, CatError> {
        let cat = self.cat.as_ref().ok_or_else(|| CatError::Precondition("presentation not saturated exactly".into()))?;
        let eval = |p: &Path| -> Result<ArrId, CatError> {
            let mut acc = target.id(obj_map[p.src]);
            for &g in &p.word {
                acc = target
                    .try_compose(gen_map[g], acc)
                    .ok_or_else(|| CatError::Functor(format!("generator `{}` sent to a non-composable arrow", self.presentation.generators[g].label)))?;
            }
            Ok(acc)
        };
        for (a, b) in &self.presentation.relations {
            if eval(a)? != eval(b)? {
                return Err(CatError::Functor(format!(
                    "relation {} = {} not respected",
                    self.presentation.word_label(a),
                    self.presentation.word_label(b)
                )));
            }
        }
        let arr = self.words.iter().map(eval).collect::<Result<Vec<_>, _>>()?;
        Functor::new(cat.clone(), target.clone(), obj_map.to_vec(), arr)
    }

    /// The functor `C -> presented` given an object map and a path for every
    /// arrow of `C`.
    pub fn functor_from(
        &self,
        dom: &Arc<FinCat>,
        obj_map: &[ObjId],
        path_of: impl Fn(ArrId) -> Path,
    ) -> Result<Functor, CatError> {
        let cat = self.cat.as_ref().ok_or_else(|| CatError::Precondition("presentation not saturated exactly".into()))?;
        let arr = (0..dom.num_arrows())
            .map(|f| self.arrow_of(&path_of(f)).ok_or_else(|| CatError::Functor("path has no normal form".into())))
            .collect::<Result<Vec<_>, _>>()?;
        Functor::new(dom.clone(), cat.clone(), obj_map.to_vec(), arr)
    }
}

/// Saturates with the default arrow budget.
pub fn saturate(p: &Presentation, max_word_len: usize) -> Result<Saturation, PresentationError> {
    saturate_with(p, max_word_len, &Budget::default())
}

pub fn saturate_with(p: &Presentation, max_word_len: usize, budget: &Budget) -> Result<Saturation, PresentationError> {
    if max_word_len == 0 {
        return Err(PresentationError::ZeroBound);
    }
    p.validate()?;
    let longest = p.relations.iter().map(|(a, b)| a.word.len().max(b.word.len())).max().unwrap_or(0);
    let (rewriter, confluent) = complete(&p.relations, (2 * max_word_len).max(longest), 4096);

    let limit = max_word_len + 1;
    let mut words: Vec<Path> = (0..p.objects.len()).map(Path::id).collect();
    let mut level: Vec<usize> = (0..words.len()).collect();
    let mut per_len = vec![words.len()];
    let mut over_budget = false;
    let mut out_gens: Vec<Vec<GenId>> = vec![Vec::new(); p.objects.len()];
    for (g, a) in p.generators.iter().enumerate() {
        out_gens[a.src].push(g);
    }
    for _len in 1..=limit {
        let mut next = Vec::new();
        'outer: for &w in &level {
            let (src, tgt) = (words[w].src, words[w].tgt);
            for &g in &out_gens[tgt] {
                let mut word = words[w].word.clone();
                word.push(g);
                if rewriter.has_suffix_redex(&word) {
                    continue;
                }
                if words.len() + next.len() >= budget.max_arrows {
                    over_budget = true;
                    break 'outer;
                }
                next.push(Path { src, tgt: p.generators[g].tgt, word });
            }
        }
        per_len.push(next.len());
        let start = words.len();
        words.extend(next);
        level = (start..words.len()).collect();
        if over_budget || level.is_empty() {
            break;
        }
    }
    let closed = per_len.iter().skip(1).any(|&k| k == 0) || (p.generators.is_empty());
    let exact = confluent && closed && !over_budget;

    let mut growth = Vec::new();
    let mut acc = 0;
    for k in 0..=max_word_len {
        acc += per_len.get(k).copied().unwrap_or(0);
        growth.push(acc);
    }
    if !exact {
        words.retain(|w| w.word.len() <= max_word_len);
    }
    let index: HashMap<(ObjId, Vec<GenId>), usize> =
        words.iter().enumerate().map(|(i, w)| ((w.src, w.word.clone()), i)).collect();
    let cat = if exact { Some(Arc::new(build_cat(p, &words, &index, &rewriter)?)) } else { None };
    Ok(Saturation {
        presentation: p.clone(),
        status: if exact { Status::Exact } else { Status::Truncated },
        bound: max_word_len,
        growth,
        confluent,
        rewriter,
        words,
        cat,
        index,
    })
}

fn build_cat(
    p: &Presentation,
    words: &[Path],
    index: &HashMap<(ObjId, Vec<GenId>), usize>,
    rw: &Rewriter,
) -> Result<FinCat, CatError> {
    let arrows = words.iter().map(|w| Arrow::new(p.word_label(w), w.src, w.tgt)).collect();
    let ident = (0..p.objects.len()).collect();
    FinCat::build(p.name.clone(), p.objects.clone(), arrows, ident, |g, f| {
        let w = words[f].then(&words[g]);
        index[&(w.src, rw.reduce(&w.word))]
    })
}

/// Pushout of `B <- A -> C` with its coprojections on exact results.
#[derive(Clone, Debug)]
pub struct Pushout {
    pub saturation: Saturation,
    pub inl: Option<Functor>,
    pub inr: Option<Functor>,
}

fn disjoint_labels(b: &FinCat, c: &FinCat) -> (Vec<String>, Vec<String>, Vec<String>, Vec<String>) {
    let clash = b.objects().iter().any(|o| c.find_object(o).is_some())
        || b.arrows().iter().any(|a| c.find_arrow(&a.label).is_some());
    let tag = |s: &str, l: &str| if clash { format!("{s}:{l}") } else { l.to_string() };
    (
        b.objects().iter().map(|o| tag("l", o)).collect(),
        c.objects().iter().map(|o| tag("r", o)).collect(),
        b.arrows().iter().map(|a| tag("l", &a.label)).collect(),
        c.arrows().iter().map(|a| tag("r", &a.label)).collect(),
    )
}

/// Presentation of `B + C` with object map `obj_of` into a quotient of
/// `B + C`, the tables of both as relations, and generator indices.
struct Glued {
    objects: Vec<String>,
    generators: Vec<Arrow>,
    relations: Vec<(Path, Path)>,
    b_obj: Vec<ObjId>,
    c_obj: Vec<ObjId>,
    b_gen: Vec<Option<GenId>>,
    c_gen: Vec<Option<GenId>>,
}

impl Glued {
    fn path_b(&self, b: &FinCat, f: ArrId) -> Path {
        Path { src: self.b_obj[b.src(f)], tgt: self.b_obj[b.tgt(f)], word: self.b_gen[f].into_iter().collect() }
    }

    fn path_c(&self, c: &FinCat, f: ArrId) -> Path {
        Path { src: self.c_obj[c.src(f)], tgt: self.c_obj[c.tgt(f)], word: self.c_gen[f].into_iter().collect() }
    }
}

fn glue(b: &FinCat, c: &FinCat, identify: &[(ObjId, ObjId)]) -> Glued {
    let (bo, co, ba, ca) = disjoint_labels(b, c);
    let nb = b.num_objects();
    let mut uf = UnionFind::new(nb + c.num_objects());
    for &(x, y) in identify {
        uf.union(x, nb + y);
    }
    let all_labels: Vec<&String> = bo.iter().chain(co.iter()).collect();
    let mut class_index = HashMap::new();
    let mut objects = Vec::new();
    let mut map = vec![0; all_labels.len()];
    for (i, l) in all_labels.iter().enumerate() {
        let r = uf.find(i);
        let k = *class_index.entry(r).or_insert_with(|| {
            objects.push((*l).clone());
            objects.len() - 1
        });
        map[i] = k;
    }
    let b_obj = map[..nb].to_vec();
    let c_obj = map[nb..].to_vec();
    let mut generators = Vec::new();
    let mut b_gen = vec![None; b.num_arrows()];
    for f in b.non_identity_arrows() {
        b_gen[f] = Some(generators.len());
        generators.push(Arrow::new(ba[f].clone(), b_obj[b.src(f)], b_obj[b.tgt(f)]));
    }
    let mut c_gen = vec![None; c.num_arrows()];
    for f in c.non_identity_arrows() {
        c_gen[f] = Some(generators.len());
        generators.push(Arrow::new(ca[f].clone(), c_obj[c.src(f)], c_obj[c.tgt(f)]));
    }
    let mut g = Glued { objects, generators, relations: Vec::new(), b_obj, c_obj, b_gen, c_gen };
    let mut rels = Vec::new();
    for f in b.non_identity_arrows() {
        for &h in b.out(b.tgt(f)) {
            if !b.is_identity(h) {
                rels.push((g.path_b(b, f).then(&g.path_b(b, h)), g.path_b(b, b.compose(h, f))));
            }
        }
    }
    for f in c.non_identity_arrows() {
        for &h in c.out(c.tgt(f)) {
            if !c.is_identity(h) {
                rels.push((g.path_c(c, f).then(&g.path_c(c, h)), g.path_c(c, c.compose(h, f))));
            }
        }
    }
    g.relations = rels;
    g
}

pub fn pushout(f: &Functor, g: &Functor, max_word_len: usize) -> Result<Pushout, PresentationError> {
    if !crate::functor::same_cat(&f.dom, &g.dom) {
        return Err(PresentationError::SpanMismatch);
    }
    let (a, b, c) = (&f.dom, &f.cod, &g.cod);
    let ident: Vec<(ObjId, ObjId)> = (0..a.num_objects()).map(|x| (f.obj[x], g.obj[x])).collect();
    let mut gl = glue(b, c, &ident);
    for w in a.non_identity_arrows() {
        let (pb, pc) = (gl.path_b(b, f.arr[w]), gl.path_c(c, g.arr[w]));
        gl.relations.push((pb, pc));
    }
    let p = Presentation::new(format!("{}+{}", b.name(), c.name()), gl.objects.clone(), gl.generators.clone(), gl.relations.clone())?;
    let sat = saturate(&p, max_word_len)?;
    let (inl, inr) = if sat.is_exact() {
        (
            Some(sat.functor_from(b, &gl.b_obj, |h| gl.path_b(b, h))?),
            Some(sat.functor_from(c, &gl.c_obj, |h| gl.path_c(c, h))?),
        )
    } else {
        (None, None)
    };
    Ok(Pushout { saturation: sat, inl, inr })
}

/// Cocomma of `B <- A -> C`: inclusions `k`, `l` and the 2-cell `k f => l g`.
#[derive(Clone, Debug)]
pub struct Cocomma {
    pub saturation: Saturation,
    pub k: Option<Functor>,
    pub l: Option<Functor>,
    pub alpha: Option<NatTrans>,
    /// Generator index of the heteromorphism at each object of `A`.
    pub alpha_gen: Vec<GenId>,
    pub b_obj: Vec<ObjId>,
    pub c_obj: Vec<ObjId>,
    pub b_gen: Vec<Option<GenId>>,
    pub c_gen: Vec<Option<GenId>>,
}

pub fn cocomma(f: &Functor, g: &Functor, max_word_len: usize) -> Result<Cocomma, PresentationError> {
    if !crate::functor::same_cat(&f.dom, &g.dom) {
        return Err(PresentationError::SpanMismatch);
    }
    let (a, b, c) = (&f.dom, &f.cod, &g.cod);
    let mut gl = glue(b, c, &[]);
    let mut alpha_gen = Vec::new();
    for x in 0..a.num_objects() {
        alpha_gen.push(gl.generators.len());
        gl.generators.push(Arrow::new(format!("alpha[{}]", a.obj_label(x)), gl.b_obj[f.obj[x]], gl.c_obj[g.obj[x]]));
    }
    let al = |x: ObjId, gl: &Glued| Path { src: gl.b_obj[f.obj[x]], tgt: gl.c_obj[g.obj[x]], word: vec![alpha_gen[x]] };
    for w in a.non_identity_arrows() {
        let (x, y) = (a.src(w), a.tgt(w));
        let lhs = gl.path_b(b, f.arr[w]).then(&al(y, &gl));
        let rhs = al(x, &gl).then(&gl.path_c(c, g.arr[w]));
        gl.relations.push((lhs, rhs));
    }
    let p = Presentation::new(format!("{}<-{}->{}", b.name(), a.name(), c.name()), gl.objects.clone(), gl.generators.clone(), gl.relations.clone())?;
    let sat = saturate(&p, max_word_len)?;
    let (mut k, mut l, mut alpha) = (None, None, None);
    if sat.is_exact() {
        let kk = sat.functor_from(b, &gl.b_obj, |h| gl.path_b(b, h))?;
        let ll = sat.functor_from(c, &gl.c_obj, |h| gl.path_c(c, h))?;
        let comp = (0..a.num_objects()).map(|x| sat.arrow_of(&al(x, &gl)).expect("generator")).collect();
        alpha = Some(NatTrans::new(f.then(&kk), g.then(&ll), comp)?);
        k = Some(kk);
        l = Some(ll);
    }
    Ok(Cocomma { saturation: sat, k, l, alpha, alpha_gen, b_obj: gl.b_obj, c_obj: gl.c_obj, b_gen: gl.b_gen, c_gen: gl.c_gen })
}

/// `C[W^-1]` with the localisation functor on exact results.
#[derive(Clone, Debug)]
pub struct Localisation {
    pub saturation: Saturation,
    pub i: Option<Functor>,
    pub gen_of: Vec<Option<GenId>>,
    /// Formal inverse generator for each arrow of `W`, in the order given.
    pub inverse_gen: Vec<(ArrId, GenId)>,
}

impl Localisation {
    pub fn cat(&self) -> Option<&Arc<FinCat>> {
        self.saturation.exact()
    }

    /// Path in the presentation naming the image of an arrow of `C`.
    pub fn path_of(&self, c: &FinCat, f: ArrId) -> Path {
        Path { src: c.src(f), tgt: c.tgt(f), word: self.gen_of[f].into_iter().collect() }
    }
}

pub fn localize(c: &Arc<FinCat>, w: &[ArrId], max_word_len: usize) -> Result<Localisation, PresentationError> {
    let (mut p, gen_of) = Presentation::from_fincat(c);
    p.name = format!("{}[W^-1]", c.name());
    let mut inverse_gen = Vec::new();
    for &f in w {
        if c.is_identity(f) || inverse_gen.iter().any(|&(g, _)| g == f) {
            continue;
        }
        let k = p.generators.len();
        p.generators.push(Arrow::new(format!("{}^-1", c.arr_label(f)), c.tgt(f), c.src(f)));
        inverse_gen.push((f, k));
        let g = gen_of[f].unwrap();
        p.relations.push((Path { src: c.src(f), tgt: c.src(f), word: vec![g, k] }, Path::id(c.src(f))));
        p.relations.push((Path { src: c.tgt(f), tgt: c.tgt(f), word: vec![k, g] }, Path::id(c.tgt(f))));
    }
    p.validate()?;
    let sat = saturate(&p, max_word_len)?;
    let i = if sat.is_exact() {
        let obj: Vec<ObjId> = (0..c.num_objects()).collect();
        let i = sat.functor_from(c, &obj, |f| Path { src: c.src(f), tgt: c.tgt(f), word: gen_of[f].into_iter().collect() })?;
        for &(f, _) in &inverse_gen {
            debug_assert!(i.cod.is_iso(i.arr[f]), "localisation must invert W");
        }
        Some(i)
    } else {
        None
    };
    Ok(Localisation { saturation: sat, i, gen_of, inverse_gen })
}

/// Outcome of a sequential colimit computation.
#[derive(Clone, Debug)]
pub enum SeqColimit {
    Stable {
        stage: usize,
        cat: Arc<FinCat>,
        /// Map from every stage into the colimit.
        cocone: Vec<Functor>,
    },
    Truncated {
        /// `(objects, arrows)` per stage inspected.
        growth: Vec<(usize, usize)>,
    },
}

pub fn sequential_colimit(stages: &[Arc<FinCat>], links: &[Functor], max_stages: usize) -> Result<SeqColimit, PresentationError> {
    if stages.is_empty() || links.len() + 1 != stages.len() {
        return Err(PresentationError::StageMismatch(links.len()));
    }
    for (i, l) in links.iter().enumerate() {
        if !crate::functor::same_cat(&l.dom, &stages[i]) || !crate::functor::same_cat(&l.cod, &stages[i + 1]) {
            return Err(PresentationError::StageMismatch(i));
        }
    }
    let n = stages.len().min(max_stages.max(1));
    let links = &links[..n - 1];
    let mut start = n - 1;
    while start > 0 && links[start - 1].is_bijective() {
        start -= 1;
    }
    if n > 1 && start == n - 1 {
        return Ok(SeqColimit::Truncated { growth: stages[..n].iter().map(|s| (s.num_objects(), s.num_arrows())).collect() });
    }
    let cat = stages[start].clone();
    let mut cocone = Vec::with_capacity(n);
    for i in 0..n {
        let mut f = Functor::identity(stages[i].clone());
        if i <= start {
            for l in &links[i..start] {
                f = f.then(l);
            }
        } else {
            for l in links[start..i].iter().rev() {
                f = f.then(&l.inverse().expect("bijective link"));
            }
        }
        cocone.push(f);
    }
    Ok(SeqColimit::Stable { stage: start, cat, cocone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::search;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    fn one_gen(endo: bool) -> Presentation {
        let objs = if endo { vec!["*".to_string()] } else { vec!["0".to_string(), "1".to_string()] };
        let g = Arrow::new("e", 0, if endo { 0 } else { 1 });
        Presentation::new("P", objs, vec![g], vec![]).unwrap()
    }

    #[test]
    fn free_arrow_is_interval() {
        let s = saturate(&one_gen(false), 16).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.cat.as_ref().unwrap().num_arrows(), 3);
    }

    #[test]
    fn idempotent_relation() {
        let mut p = one_gen(true);
        p.relations.push((Path { src: 0, tgt: 0, word: vec![0, 0] }, Path { src: 0, tgt: 0, word: vec![0] }));
        let s = saturate(&p, 16).unwrap();
        assert!(s.is_exact());
        let c = s.cat.unwrap();
        assert_eq!(c.num_arrows(), 2);
        assert!(search::find_isomorphism(&c, &arc(walking_idempotent())).is_some());
    }

    #[test]
    fn free_monoid_truncates() {
        for bound in [1, 4, 16] {
            let s = saturate(&one_gen(true), bound).unwrap();
            assert_eq!(s.status, Status::Truncated);
            assert_eq!(s.words.len(), bound + 1);
            assert!(s.growth.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn non_parallel_relation_rejected() {
        let mut p = one_gen(false);
        p.relations.push((Path { src: 0, tgt: 1, word: vec![0] }, Path::id(0)));
        assert!(matches!(p.validate(), Err(PresentationError::NonParallel(0))));
    }

    #[test]
    fn pushout_glues_two_intervals() {
        let i = arc(interval());
        let one = arc(terminal());
        let at1 = Functor::new(one.clone(), i.clone(), vec![1], vec![1]).unwrap();
        let at0 = Functor::new(one.clone(), i.clone(), vec![0], vec![0]).unwrap();
        let po = pushout(&at1, &at0, 16).unwrap();
        let c = po.saturation.cat.clone().unwrap();
        assert_eq!(c.num_arrows(), 6);
        assert!(search::find_isomorphism(&c, &arc(poset(2))).is_some());
        po.inl.unwrap().check().unwrap();
    }

    #[test]
    fn pushout_over_empty_is_coproduct() {
        let e = arc(empty());
        let b = arc(walking_idempotent());
        let c = arc(interval());
        let f = Functor::new(e.clone(), b.clone(), vec![], vec![]).unwrap();
        let g = Functor::new(e, c.clone(), vec![], vec![]).unwrap();
        let po = pushout(&f, &g, 16).unwrap();
        let cp = crate::constructions::coproduct(&b, &c).unwrap();
        assert!(search::find_isomorphism(po.saturation.cat.as_ref().unwrap(), &cp.cat).is_some());
    }

    #[test]
    fn pushout_along_identity() {
        let a = arc(walking_section_retraction());
        let id = Functor::identity(a.clone());
        let po = pushout(&id, &id, 16).unwrap();
        assert!(search::find_isomorphism(po.saturation.cat.as_ref().unwrap(), &a).is_some());
    }

    #[test]
    fn cocomma_of_points_is_interval() {
        let one = arc(terminal());
        let id = Functor::identity(one.clone());
        let cc = cocomma(&id, &id, 16).unwrap();
        let c = cc.saturation.cat.clone().unwrap();
        assert!(search::find_isomorphism(&c, &arc(interval())).is_some());
        cc.alpha.unwrap().check().unwrap();
    }

    #[test]
    fn cocomma_of_identity_span_is_cylinder() {
        let a = arc(walking_idempotent());
        let id = Functor::identity(a.clone());
        let cc = cocomma(&id, &id, 16).unwrap();
        let c = cc.saturation.cat.clone().unwrap();
        let cyl = crate::constructions::product(&a, &arc(interval()), &Budget::default()).unwrap();
        assert!(search::find_isomorphism(&c, &cyl.cat).is_some());
        assert!(crate::constructions::is_fully_faithful(cc.k.as_ref().unwrap()));
        assert!(crate::constructions::is_fully_faithful(cc.l.as_ref().unwrap()));
    }

    #[test]
    fn localisation_examples() {
        let i = arc(interval());
        let l = localize(&i, &[2], 16).unwrap();
        let c = l.cat().unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(c.hom(x, y).len(), 1);
            }
        }
        let none = localize(&i, &[], 16).unwrap();
        assert!(search::find_isomorphism(none.cat().unwrap(), &i).is_some());
        let par = arc(parallel_pair());
        let lp = localize(&par, &[par.find_arrow("f").unwrap()], 8).unwrap();
        assert_eq!(lp.saturation.status, Status::Truncated);
        let counts: Vec<usize> = [2, 4, 6, 8]
            .into_iter()
            .map(|b| localize(&par, &[par.find_arrow("f").unwrap()], b).unwrap().saturation.hom_count(1, 1))
            .collect();
        assert!(counts.windows(2).all(|w| w[0] < w[1]), "{counts:?}");
    }

    #[test]
    fn idempotent_localisation_is_trivial() {
        let e = arc(walking_idempotent());
        let l = localize(&e, &[1], 16).unwrap();
        assert_eq!(l.cat().unwrap().num_arrows(), 1);
    }

    #[test]
    fn sequential_colimit_examples() {
        let c = arc(walking_iso());
        let id = Functor::identity(c.clone());
        match sequential_colimit(&[c.clone(), c.clone(), c.clone()], &[id.clone(), id.clone()], 12).unwrap() {
            SeqColimit::Stable { stage, .. } => assert_eq!(stage, 0),
            other => panic!("{other:?}"),
        }
        let d: Vec<Arc<FinCat>> = (1..=4).map(|n| arc(discrete(n))).collect();
        let links: Vec<Functor> = (0..3)
            .map(|i| Functor::new(d[i].clone(), d[i + 1].clone(), (0..=i).collect(), (0..=i).collect()).unwrap())
            .collect();
        assert!(matches!(sequential_colimit(&d, &links, 12).unwrap(), SeqColimit::Truncated { .. }));
        let s = vec![d[0].clone(), d[1].clone(), d[2].clone(), d[2].clone(), d[2].clone()];
        let l = vec![links[0].clone(), links[1].clone(), Functor::identity(d[2].clone()), Functor::identity(d[2].clone())];
        match sequential_colimit(&s, &l, 12).unwrap() {
            SeqColimit::Stable { stage, cocone, .. } => {
                assert_eq!(stage, 2);
                assert_eq!(cocone.len(), 5);
            }
            other => panic!("{other:?}"),
        }
    }
}
