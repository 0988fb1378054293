//! Finite limits, commas, functor categories, subcategories and the
//! fully-faithful / essentially-surjective tests.

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use crate::error::{CatError, Result};
use crate::fincat::{ArrId, Arrow, Budget, FinCat, ObjId};
use crate::functor::{Functor, NatTrans};
use crate::search;

/// A category together with two projections, as produced by products and
/// pullbacks.
#[derive(Clone, Debug)]
pub struct Span {
    pub cat: Arc<FinCat>,
    pub left: Functor,
    pub right: Functor,
}

/// Builds the category whose objects and arrows are given as pairs, with
/// componentwise composition looked up in `index`.
fn pair_category(
    name: String,
    objs: Vec<(ObjId, ObjId)>,
    arrs: Vec<(ArrId, ArrId)>,
    c: &FinCat,
    d: &FinCat,
    obj_label: impl Fn(ObjId, ObjId) -> String,
    arr_label: impl Fn(ArrId, ArrId) -> String,
) -> Result<FinCat> {
    let mut obj_ix = HashMap::with_capacity(objs.len());
    for (i, &p) in objs.iter().enumerate() {
        obj_ix.insert(p, i);
    }
    let mut arr_ix = HashMap::with_capacity(arrs.len());
    for (i, &p) in arrs.iter().enumerate() {
        arr_ix.insert(p, i);
    }
    let arrows: Vec<Arrow> = arrs
        .iter()
        .map(|&(f, g)| {
            Arrow::new(arr_label(f, g), obj_ix[&(c.src(f), d.src(g))], obj_ix[&(c.tgt(f), d.tgt(g))])
        })
        .collect();
    let ident = objs.iter().map(|&(x, y)| arr_ix[&(c.id(x), d.id(y))]).collect();
    let labels = objs.iter().map(|&(x, y)| obj_label(x, y)).collect();
    FinCat::build(name, labels, arrows, ident, |g, f| {
        let (g1, g2) = arrs[g];
        let (f1, f2) = arrs[f];
        arr_ix[&(c.compose(g1, f1), d.compose(g2, f2))]
    })
}

pub fn product(c: &Arc<FinCat>, d: &Arc<FinCat>, budget: &Budget) -> Result<Span> {
    budget.objects(c.num_objects() * d.num_objects(), "product")?;
    budget.arrows(c.num_arrows() * d.num_arrows(), "product")?;
    let objs: Vec<_> = (0..c.num_objects()).flat_map(|x| (0..d.num_objects()).map(move |y| (x, y))).collect();
    let arrs: Vec<_> = (0..c.num_arrows()).flat_map(|f| (0..d.num_arrows()).map(move |g| (f, g))).collect();
    let cat = Arc::new(pair_category(
        format!("{}x{}", c.name(), d.name()),
        objs.clone(),
        arrs.clone(),
        c,
        d,
        |x, y| format!("({},{})", c.obj_label(x), d.obj_label(y)),
        |f, g| format!("({},{})", c.arr_label(f), d.arr_label(g)),
    )?);
    Ok(Span {
        left: Functor::new_unchecked(cat.clone(), c.clone(), objs.iter().map(|p| p.0).collect(), arrs.iter().map(|p| p.0).collect()),
        right: Functor::new_unchecked(cat.clone(), d.clone(), objs.iter().map(|p| p.1).collect(), arrs.iter().map(|p| p.1).collect()),
        cat,
    })
}

/// Strict pullback of a cospan `C -> A <- D`.
pub fn pullback(f: &Functor, g: &Functor, budget: &Budget) -> Result<Span> {
    let (c, d) = (&f.dom, &g.dom);
    let objs: Vec<_> = (0..c.num_objects())
        .flat_map(|x| (0..d.num_objects()).filter(move |&y| f.obj[x] == g.obj[y]).map(move |y| (x, y)))
        .collect();
    budget.objects(objs.len(), "pullback")?;
    let mut arrs = Vec::new();
    for a in 0..c.num_arrows() {
        for b in 0..d.num_arrows() {
            if f.arr[a] == g.arr[b] {
                arrs.push((a, b));
            }
        }
        budget.arrows(arrs.len(), "pullback")?;
    }
    let cat = Arc::new(pair_category(
        format!("{}x{}", c.name(), d.name()),
        objs.clone(),
        arrs.clone(),
        c,
        d,
        |x, y| format!("({},{})", c.obj_label(x), d.obj_label(y)),
        |a, b| format!("({},{})", c.arr_label(a), d.arr_label(b)),
    )?);
    Ok(Span {
        left: Functor::new_unchecked(cat.clone(), c.clone(), objs.iter().map(|p| p.0).collect(), arrs.iter().map(|p| p.0).collect()),
        right: Functor::new_unchecked(cat.clone(), d.clone(), objs.iter().map(|p| p.1).collect(), arrs.iter().map(|p| p.1).collect()),
        cat,
    })
}

#[derive(Clone, Debug)]
pub struct Coproduct {
    pub cat: Arc<FinCat>,
    pub inl: Functor,
    pub inr: Functor,
}

pub fn coproduct(c: &Arc<FinCat>, d: &Arc<FinCat>) -> Result<Coproduct> {
    let clash = c.objects().iter().any(|o| d.find_object(o).is_some())
        || c.arrows().iter().any(|a| d.find_arrow(&a.label).is_some());
    let tag = |side: &str, l: &str| if clash { format!("{side}:{l}") } else { l.to_string() };
    let (n, m) = (c.num_objects(), c.num_arrows());
    let mut objects: Vec<String> = c.objects().iter().map(|o| tag("l", o)).collect();
    objects.extend(d.objects().iter().map(|o| tag("r", o)));
    let mut arrows: Vec<Arrow> = c.arrows().iter().map(|a| Arrow::new(tag("l", &a.label), a.src, a.tgt)).collect();
    arrows.extend(d.arrows().iter().map(|a| Arrow::new(tag("r", &a.label), a.src + n, a.tgt + n)));
    let mut ident: Vec<ArrId> = c.identities().to_vec();
    ident.extend(d.identities().iter().map(|&i| i + m));
    let cat = Arc::new(FinCat::build(format!("{}+{}", c.name(), d.name()), objects, arrows, ident, |g, f| {
        if f < m {
            c.compose(g, f)
        } else {
            d.compose(g - m, f - m) + m
        }
    })?);
    let inl = Functor::new_unchecked(c.clone(), cat.clone(), (0..n).collect(), (0..m).collect());
    let inr = Functor::new_unchecked(
        d.clone(),
        cat.clone(),
        (0..d.num_objects()).map(|x| x + n).collect(),
        (0..d.num_arrows()).map(|f| f + m).collect(),
    );
    Ok(Coproduct { cat, inl, inr })
}

pub fn opposite(c: &FinCat) -> FinCat {
    let arrows = c.arrows().iter().map(|a| Arrow::new(a.label.clone(), a.tgt, a.src)).collect();
    FinCat::build(format!("{}^op", c.name()), c.objects().to_vec(), arrows, c.identities().to_vec(), |g, f| c.compose(f, g))
        .expect("opposite of a valid category")
}

/// Comma category `F | G` with its projections and the generating 2-cell
/// `F . dom => G . cod`.
#[derive(Clone, Debug)]
pub struct Comma {
    pub cat: Arc<FinCat>,
    pub dom: Functor,
    pub cod: Functor,
    pub cell: NatTrans,
    /// Object `i` is `(b, c, alpha)`.
    pub triples: Vec<(ObjId, ObjId, ArrId)>,
}

pub fn comma(f: &Functor, g: &Functor, budget: &Budget) -> Result<Comma> {
    let (b, c, a) = (&f.dom, &g.dom, &f.cod);
    let mut triples = Vec::new();
    for x in 0..b.num_objects() {
        for y in 0..c.num_objects() {
            for &al in a.hom(f.obj[x], g.obj[y]) {
                triples.push((x, y, al));
            }
        }
        budget.objects(triples.len(), "comma")?;
    }
    let mut by_pair: HashMap<(ObjId, ObjId), Vec<usize>> = HashMap::new();
    for (i, &(x, y, _)) in triples.iter().enumerate() {
        by_pair.entry((x, y)).or_default().push(i);
    }
    // arrow: (src, tgt, u, v)
    let mut arrs: Vec<(usize, usize, ArrId, ArrId)> = Vec::new();
    let mut ident = vec![0; triples.len()];
    for (i, &(x, y, al)) in triples.iter().enumerate() {
        for &u in b.out(x) {
            for &v in c.out(y) {
                let (x2, y2) = (b.tgt(u), c.tgt(v));
                let lhs_base = g.arr[v];
                for &j in by_pair.get(&(x2, y2)).map(Vec::as_slice).unwrap_or(&[]) {
                    let al2 = triples[j].2;
                    if a.compose(al2, f.arr[u]) == a.compose(lhs_base, al) {
                        if j == i && u == b.id(x) && v == c.id(y) {
                            ident[i] = arrs.len();
                        }
                        arrs.push((i, j, u, v));
                    }
                }
            }
        }
        budget.arrows(arrs.len(), "comma")?;
    }
    let index: HashMap<(usize, usize, ArrId, ArrId), ArrId> = arrs.iter().enumerate().map(|(k, &t)| (t, k)).collect();
    let labels: Vec<String> = triples
        .iter()
        .map(|&(x, y, al)| format!("({}|{}|{})", b.obj_label(x), a.arr_label(al), c.obj_label(y)))
        .collect();
    let arrows: Vec<Arrow> = arrs
        .iter()
        .map(|&(i, j, u, v)| Arrow::new(format!("({},{}):{}->{}", b.arr_label(u), c.arr_label(v), i, j), i, j))
        .collect();
    let cat = Arc::new(FinCat::build(format!("{}|{}", b.name(), c.name()), labels, arrows, ident, |gg, ff| {
        let (i, _, u1, v1) = arrs[ff];
        let (_, k, u2, v2) = arrs[gg];
        index[&(i, k, b.compose(u2, u1), c.compose(v2, v1))]
    })?);
    let dom = Functor::new_unchecked(
        cat.clone(),
        b.clone(),
        triples.iter().map(|t| t.0).collect(),
        arrs.iter().map(|t| t.2).collect(),
    );
    let cod = Functor::new_unchecked(
        cat.clone(),
        c.clone(),
        triples.iter().map(|t| t.1).collect(),
        arrs.iter().map(|t| t.3).collect(),
    );
    let cell = NatTrans { src: dom.then(f), tgt: cod.then(g), comp: triples.iter().map(|t| t.2).collect() };
    Ok(Comma { cat, dom, cod, cell, triples })
}

/// `Fun(C, D)` with the functors and transformations it enumerates.
#[derive(Clone, Debug)]
pub struct FunctorCategory {
    pub cat: Arc<FinCat>,
    pub functors: Vec<Functor>,
    pub trans: Vec<NatTrans>,
}

impl FunctorCategory {
    pub fn object_of(&self, f: &Functor) -> Option<ObjId> {
        self.functors.iter().position(|g| g.obj == f.obj && g.arr == f.arr)
    }
}

pub fn functor_category(c: &Arc<FinCat>, d: &Arc<FinCat>, budget: &Budget) -> Result<FunctorCategory> {
    let functors = search::all_functors(c, d, &search::SearchOptions::default(), budget)?;
    let mut trans = Vec::new();
    let mut arrows = Vec::new();
    let mut ident = vec![0; functors.len()];
    let mut index: HashMap<(usize, usize, Vec<ArrId>), ArrId> = HashMap::new();
    let mut ends = Vec::new();
    for (i, fi) in functors.iter().enumerate() {
        for (j, fj) in functors.iter().enumerate() {
            let mut k = 0;
            let mut err = None;
            search::for_each_nat_trans(fi, fj, false, &mut |t| {
                if trans.len() >= budget.max_arrows {
                    err = Some(CatError::Size { what: "functor category (arrows)".into(), limit: budget.max_arrows });
                    return false;
                }
                if i == j && t.comp.iter().all(|&a| d.is_identity(a)) {
                    ident[i] = trans.len();
                }
                index.insert((i, j, t.comp.clone()), trans.len());
                ends.push((i, j));
                arrows.push(Arrow::new(format!("F{i}=>F{j}#{k}"), i, j));
                trans.push(t.clone());
                k += 1;
                true
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    let labels = (0..functors.len()).map(|i| format!("F{i}")).collect();
    let cat = Arc::new(FinCat::build(format!("Fun({},{})", c.name(), d.name()), labels, arrows, ident, |g, f| {
        let comp: Vec<ArrId> = trans[f].comp.iter().zip(&trans[g].comp).map(|(&a, &b)| d.compose(b, a)).collect();
        index[&(ends[f].0, ends[g].1, comp)]
    })?);
    Ok(FunctorCategory { cat, functors, trans })
}

/// A subcategory with its inclusion and partial inverse index maps.
#[derive(Clone, Debug)]
pub struct Subcat {
    pub cat: Arc<FinCat>,
    pub incl: Functor,
    pub obj_index: Vec<Option<ObjId>>,
    pub arr_index: Vec<Option<ArrId>>,
}

fn subcategory(c: &Arc<FinCat>, name: String, keep_obj: &[bool], keep_arr: &[bool]) -> Result<Subcat> {
    let mut obj_index = vec![None; c.num_objects()];
    let mut objects = Vec::new();
    let mut obj_back = Vec::new();
    for x in 0..c.num_objects() {
        if keep_obj[x] {
            obj_index[x] = Some(objects.len());
            objects.push(c.obj_label(x).to_string());
            obj_back.push(x);
        }
    }
    let mut arr_index = vec![None; c.num_arrows()];
    let mut arrows = Vec::new();
    let mut arr_back = Vec::new();
    for f in 0..c.num_arrows() {
        if keep_arr[f] {
            if let (Some(s), Some(t)) = (obj_index[c.src(f)], obj_index[c.tgt(f)]) {
                arr_index[f] = Some(arrows.len());
                arrows.push(Arrow::new(c.arr_label(f), s, t));
                arr_back.push(f);
            }
        }
    }
    let mut ident = Vec::with_capacity(objects.len());
    for &x in &obj_back {
        ident.push(arr_index[c.id(x)].ok_or_else(|| CatError::NotClosed(format!("identity of `{}` excluded", c.obj_label(x))))?);
    }
    let mut closed = Ok(());
    let cat = FinCat::build(name, objects, arrows, ident, |g, f| {
        let h = c.compose(arr_back[g], arr_back[f]);
        match arr_index[h] {
            Some(k) => k,
            None => {
                closed = Err(CatError::NotClosed(format!(
                    "{} . {} = {} is excluded",
                    c.arr_label(arr_back[g]),
                    c.arr_label(arr_back[f]),
                    c.arr_label(h)
                )));
                f
            }
        }
    });
    closed?;
    let cat = Arc::new(cat?);
    let incl = Functor::new_unchecked(cat.clone(), c.clone(), obj_back, arr_back);
    Ok(Subcat { cat, incl, obj_index, arr_index })
}

pub fn full_subcategory(c: &Arc<FinCat>, keep: impl Fn(ObjId) -> bool) -> Subcat {
    let keep_obj: Vec<bool> = (0..c.num_objects()).map(keep).collect();
    let keep_arr = vec![true; c.num_arrows()];
    subcategory(c, format!("{}|full", c.name()), &keep_obj, &keep_arr).expect("full subcategories are closed")
}

/// Wide subcategory on the arrows satisfying `keep`; identities and
/// isomorphisms must be kept and the set must be closed under composition.
pub fn wide_subcategory(c: &Arc<FinCat>, keep: impl Fn(ArrId) -> bool) -> Result<Subcat> {
    let keep_arr: Vec<bool> = (0..c.num_arrows()).map(keep).collect();
    if let Some(f) = (0..c.num_arrows()).find(|&f| c.is_iso(f) && !keep_arr[f]) {
        return Err(CatError::NotClosed(format!("isomorphism `{}` excluded", c.arr_label(f))));
    }
    subcategory(c, format!("{}|wide", c.name()), &vec![true; c.num_objects()], &keep_arr)
}

pub fn core(c: &Arc<FinCat>) -> Subcat {
    let keep_arr: Vec<bool> = (0..c.num_arrows()).map(|f| c.is_iso(f)).collect();
    subcategory(c, format!("core({})", c.name()), &vec![true; c.num_objects()], &keep_arr)
        .expect("isomorphisms are closed under composition")
}

/// Connected components: `comp[x]` numbers components by first object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pi0 {
    pub comp: Vec<usize>,
    pub count: usize,
}

pub fn pi0(c: &FinCat) -> Pi0 {
    pi0_of_graph(c.num_objects(), c.arrows().iter().map(|a| (a.src, a.tgt)))
}

pub fn pi0_of_graph(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Pi0 {
    let mut uf = UnionFind::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    let mut number = HashMap::new();
    let comp = (0..n)
        .map(|x| {
            let r = uf.find(x);
            let k = number.len();
            *number.entry(r).or_insert(k)
        })
        .collect();
    Pi0 { comp, count: number.len() }
}

pub fn is_fully_faithful(f: &Functor) -> bool {
    let (c, d) = (&f.dom, &f.cod);
    for x in 0..c.num_objects() {
        for y in 0..c.num_objects() {
            let src = c.hom(x, y);
            let tgt = d.hom(f.obj[x], f.obj[y]);
            if src.len() != tgt.len() {
                return false;
            }
            let mut seen = vec![false; tgt.len()];
            for &a in src {
                let k = d.hom_index(f.arr[a]);
                if std::mem::replace(&mut seen[k], true) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_surjective_on_isoclasses(f: &Functor) -> bool {
    let d = &f.cod;
    (0..d.num_objects()).all(|y| f.obj.iter().any(|&fx| fx == y || d.iso_between(fx, y).is_some()))
}

pub fn is_equivalence(f: &Functor) -> bool {
    is_fully_faithful(f) && is_surjective_on_isoclasses(f)
}

/// Quasi-inverse of an equivalence with unit `id => GF` and counit `FG => id`.
pub fn quasi_inverse(f: &Functor) -> Option<(Functor, NatTrans, NatTrans)> {
    if !is_equivalence(f) {
        return None;
    }
    let (c, d) = (&f.dom, &f.cod);
    // theta[y]: F(G y) -> y
    let mut g_obj = vec![0; d.num_objects()];
    let mut theta = vec![0; d.num_objects()];
    for y in 0..d.num_objects() {
        let (x, t) = (0..c.num_objects())
            .find_map(|x| {
                if f.obj[x] == y {
                    Some((x, d.id(y)))
                } else {
                    d.iso_between(f.obj[x], y).map(|t| (x, t))
                }
            })
            .expect("essentially surjective");
        g_obj[y] = x;
        theta[y] = t;
    }
    let preimage = |x: ObjId, x2: ObjId, b: ArrId| -> ArrId {
        c.hom(x, x2).iter().copied().find(|&a| f.arr[a] == b).expect("fully faithful")
    };
    let g_arr: Vec<ArrId> = (0..d.num_arrows())
        .map(|b| {
            let (y, y2) = (d.src(b), d.tgt(b));
            let inv = d.inverse(theta[y2]).expect("iso");
            let target = d.compose(inv, d.compose(b, theta[y]));
            preimage(g_obj[y], g_obj[y2], target)
        })
        .collect();
    let g = Functor::new_unchecked(d.clone(), c.clone(), g_obj.clone(), g_arr);
    let counit = NatTrans { src: g.then(f), tgt: Functor::identity(d.clone()), comp: theta.clone() };
    let unit_comp: Vec<ArrId> = (0..c.num_objects())
        .map(|x| {
            let y = f.obj[x];
            let inv = d.inverse(theta[y]).expect("iso");
            preimage(x, g_obj[y], inv)
        })
        .collect();
    let unit = NatTrans { src: Functor::identity(c.clone()), tgt: f.then(&g), comp: unit_comp };
    Some((g, unit, counit))
}

/// Is the gap map `D -> B x_A C` of a commuting square of finite sets a bijection?
pub fn is_pullback_of_sets(d_to_b: &[usize], d_to_c: &[usize], b_to_a: &[usize], c_to_a: &[usize]) -> bool {
    let mut seen = HashMap::with_capacity(d_to_b.len());
    for (&b, &c) in d_to_b.iter().zip(d_to_c) {
        if b_to_a[b] != c_to_a[c] || seen.insert((b, c), ()).is_some() {
            return false;
        }
    }
    let mut count = 0usize;
    let mut by_a: HashMap<usize, usize> = HashMap::new();
    for &a in c_to_a {
        *by_a.entry(a).or_default() += 1;
    }
    for &a in b_to_a {
        count += by_a.get(&a).copied().unwrap_or(0);
    }
    count == seen.len()
}

/// For a strict pullback square over a groupoid, does the square of
/// connected components remain a pullback?
pub fn localisation_preserves_pullback_check(p1: &Functor, p2: &Functor, f: &Functor, g: &Functor) -> Result<bool> {
    let a = &f.cod;
    if let Some(x) = a.non_invertible_arrow() {
        return Err(CatError::NotGroupoid(a.arr_label(x).to_string()));
    }
    if p1.then(f).obj != p2.then(g).obj || p1.then(f).arr != p2.then(g).arr {
        return Err(CatError::Precondition("square does not commute".into()));
    }
    let pb = pullback(f, g, &Budget::default())?;
    let mut gap_obj = HashMap::new();
    for (i, (&x, &y)) in pb.left.obj.iter().zip(&pb.right.obj).enumerate() {
        gap_obj.insert((x, y), i);
    }
    let mut gap_arr = HashMap::new();
    for (i, (&x, &y)) in pb.left.arr.iter().zip(&pb.right.arr).enumerate() {
        gap_arr.insert((x, y), i);
    }
    let d = &p1.dom;
    let mut hit_o = vec![false; pb.cat.num_objects()];
    let mut hit_a = vec![false; pb.cat.num_arrows()];
    let bijective = d.num_objects() == pb.cat.num_objects()
        && d.num_arrows() == pb.cat.num_arrows()
        && (0..d.num_objects()).all(|x| !std::mem::replace(&mut hit_o[gap_obj[&(p1.obj[x], p2.obj[x])]], true))
        && (0..d.num_arrows()).all(|e| !std::mem::replace(&mut hit_a[gap_arr[&(p1.arr[e], p2.arr[e])]], true));
    if !bijective {
        return Err(CatError::Precondition("square is not cartesian".into()));
    }
    let (pd, pb_, pc, pa) = (pi0(d), pi0(&f.dom), pi0(&g.dom), pi0(a));
    let d_to_b: Vec<usize> = (0..pd.count).map(|k| pb_.comp[p1.obj[rep(&pd, k)]]).collect();
    let d_to_c: Vec<usize> = (0..pd.count).map(|k| pc.comp[p2.obj[rep(&pd, k)]]).collect();
    let b_to_a: Vec<usize> = (0..pb_.count).map(|k| pa.comp[f.obj[rep(&pb_, k)]]).collect();
    let c_to_a: Vec<usize> = (0..pc.count).map(|k| pa.comp[g.obj[rep(&pc, k)]]).collect();
    Ok(is_pullback_of_sets(&d_to_b, &d_to_c, &b_to_a, &c_to_a))
}

fn rep(p: &Pi0, k: usize) -> usize {
    p.comp.iter().position(|&c| c == k).expect("component has an object")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    #[test]
    fn product_with_terminal_is_iso() {
        let c = arc(walking_section_retraction());
        let p = product(&c, &arc(terminal()), &Budget::default()).unwrap();
        assert!(search::find_isomorphism(&p.cat, &c).is_some());
    }

    #[test]
    fn pullback_of_endpoints_is_terminal() {
        let i = arc(interval());
        let one = arc(terminal());
        let end1 = Functor::new(one.clone(), i.clone(), vec![1], vec![1]).unwrap();
        let end0 = Functor::new(one.clone(), i.clone(), vec![0], vec![0]).unwrap();
        // I --cod--> I? use the functors 1 -> I: pullback of I <-end1- 1 and 1 -end0-> I is empty,
        // while the spec's example glues two copies of I along endpoint maps I -> I.
        let pb = pullback(&end1, &end0, &Budget::default()).unwrap();
        assert_eq!(pb.cat.num_objects(), 0);
        let c1 = Functor::constant(i.clone(), i.clone(), 1);
        let c0 = Functor::constant(i.clone(), i.clone(), 0);
        let pb = pullback(&c1, &c0, &Budget::default()).unwrap();
        assert_eq!(pb.cat.num_objects(), 0);
        let pb = pullback(&Functor::constant(i.clone(), i.clone(), 1), &end1, &Budget::default()).unwrap();
        assert_eq!(pb.cat.num_objects(), 2);
    }

    #[test]
    fn pullback_over_terminal_is_product() {
        let c = arc(interval());
        let d = arc(walking_idempotent());
        let one = arc(terminal());
        let pb = pullback(&Functor::constant(c.clone(), one.clone(), 0), &Functor::constant(d.clone(), one, 0), &Budget::default()).unwrap();
        let pr = product(&c, &d, &Budget::default()).unwrap();
        assert!(search::find_isomorphism(&pb.cat, &pr.cat).is_some());
    }

    #[test]
    fn comma_of_identities_is_arrow_category() {
        let i = arc(interval());
        let id = Functor::identity(i.clone());
        let cm = comma(&id, &id, &Budget::default()).unwrap();
        assert_eq!(cm.cat.num_objects(), 3);
        cm.cat.verify_laws().unwrap();
        cm.dom.check().unwrap();
        cm.cod.check().unwrap();
        cm.cell.check().unwrap();
        let fc = functor_category(&i, &i, &Budget::default()).unwrap();
        let ar = functor_category(&i, &i, &Budget::default()).unwrap();
        assert_eq!(fc.cat.num_objects(), ar.cat.num_objects());
    }

    #[test]
    fn coslice_at_zero_has_initial_object() {
        let i = arc(interval());
        let one = arc(terminal());
        let at0 = Functor::new(one, i.clone(), vec![0], vec![0]).unwrap();
        let cm = comma(&at0, &Functor::identity(i), &Budget::default()).unwrap();
        assert_eq!(cm.cat.num_objects(), 2);
        let init = (0..2).find(|&x| cm.cat.is_initial(x)).unwrap();
        assert_eq!(cm.triples[init].2, 0);
    }

    #[test]
    fn comma_from_empty_is_empty() {
        let e = arc(empty());
        let i = arc(interval());
        let f = Functor::new(e, i.clone(), vec![], vec![]).unwrap();
        let cm = comma(&f, &Functor::identity(i), &Budget::default()).unwrap();
        assert_eq!(cm.cat.num_objects(), 0);
    }

    #[test]
    fn functor_category_examples() {
        let i = arc(interval());
        let fc = functor_category(&i, &i, &Budget::default()).unwrap();
        assert_eq!(fc.cat.num_objects(), 3);
        assert_eq!(fc.cat.num_arrows(), 6);
        fc.cat.verify_laws().unwrap();
        let one = arc(terminal());
        let d = arc(walking_section_retraction());
        let f1 = functor_category(&one, &d, &Budget::default()).unwrap();
        assert!(search::find_isomorphism(&f1.cat, &d).is_some());
        let ar = functor_category(&i, &d, &Budget::default()).unwrap();
        assert_eq!(ar.cat.num_objects(), d.num_arrows());
    }

    #[test]
    fn functor_category_respects_budget() {
        let d = arc(poset(3));
        let tight = Budget { max_objects: 10_000, max_arrows: 5 };
        assert!(matches!(functor_category(&d, &d, &tight), Err(CatError::Size { .. })));
    }

    #[test]
    fn core_examples() {
        let j = arc(walking_iso());
        assert_eq!(core(&j).cat.num_arrows(), 4);
        let i = arc(interval());
        let ci = core(&i);
        assert!(ci.cat.is_discrete());
        assert_eq!(ci.cat.num_objects(), 2);
        let g = arc(cyclic_group(3));
        assert_eq!(core(&g).cat.num_arrows(), 3);
    }

    #[test]
    fn subcategories() {
        let c = arc(walking_section_retraction());
        let full = full_subcategory(&c, |_| true);
        assert_eq!(*full.cat, c.as_ref().clone().with_name(full.cat.name()));
        let wide = wide_subcategory(&c, |f| c.is_iso(f)).unwrap();
        assert_eq!(wide.cat.num_arrows(), core(&c).cat.num_arrows());
        // {s} alone is fine, {s, r} is not closed since s . r = e
        assert!(wide_subcategory(&c, |f| c.is_identity(f) || c.arr_label(f) == "s").is_ok());
        assert!(matches!(
            wide_subcategory(&c, |f| c.is_identity(f) || ["s", "r"].contains(&c.arr_label(f))),
            Err(CatError::NotClosed(_))
        ));
        let fc = functor_category(&arc(interval()), &arc(interval()), &Budget::default()).unwrap();
        let consts = full_subcategory(&fc.cat, |x| fc.functors[x].obj[0] == fc.functors[x].obj[1]);
        assert!(search::find_isomorphism(&consts.cat, &arc(interval())).is_some());
    }

    #[test]
    fn equivalence_tests() {
        let i = arc(interval());
        let one = arc(terminal());
        let j = arc(walking_iso());
        assert!(is_equivalence(&Functor::identity(i.clone())));
        let to1 = Functor::constant(i.clone(), one.clone(), 0);
        assert!(is_surjective_on_isoclasses(&to1));
        assert!(!is_fully_faithful(&to1));
        let j1 = Functor::constant(j.clone(), one.clone(), 0);
        assert!(is_equivalence(&j1));
        let (g, unit, counit) = quasi_inverse(&j1).unwrap();
        g.check().unwrap();
        unit.check().unwrap();
        counit.check().unwrap();
        assert!(unit.is_iso() && counit.is_iso());
    }

    #[test]
    fn pi0_examples() {
        assert_eq!(pi0(&interval()).count, 1);
        assert_eq!(pi0(&discrete(4)).count, 4);
        assert_eq!(pi0(&parallel_pair()).count, 1);
        assert_eq!(pi0(&empty()).count, 0);
    }

    #[test]
    fn localisation_pullback_examples() {
        let one = arc(terminal());
        let c = arc(interval());
        let d = arc(walking_idempotent());
        let tc = Functor::constant(c.clone(), one.clone(), 0);
        let td = Functor::constant(d.clone(), one.clone(), 0);
        let pr = product(&c, &d, &Budget::default()).unwrap();
        assert!(localisation_preserves_pullback_check(&pr.left, &pr.right, &tc, &td).unwrap());
        let i = c.clone();
        let f = Functor::identity(i.clone());
        assert!(matches!(
            localisation_preserves_pullback_check(&f, &f, &f, &f),
            Err(CatError::NotGroupoid(_))
        ));
    }
}
