//! Explicit finite categories.
//!
//! Objects and arrows are dense indices in insertion order. Hom-sets are
//! views into per-object out-lists sorted by target, and composition is a
//! jagged table `table[f][k] = out[tgt f][k] . f`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CatError, LawViolation, Result};

pub type ObjId = usize;
pub type ArrId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrow {
    pub label: String,
    pub src: ObjId,
    pub tgt: ObjId,
}

impl Arrow {
    pub fn new(label: impl Into<String>, src: ObjId, tgt: ObjId) -> Self {
        Arrow { label: label.into(), src, tgt }
    }
}

/// Size guardrail for constructions that can explode combinatorially.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_objects: usize,
    pub max_arrows: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_objects: 10_000, max_arrows: 10_000 }
    }
}

impl Budget {
    pub fn objects(&self, n: usize, what: &str) -> Result<()> {
        if n > self.max_objects {
            return Err(CatError::Size { what: format!("{what} (objects)"), limit: self.max_objects });
        }
        Ok(())
    }

    pub fn arrows(&self, n: usize, what: &str) -> Result<()> {
        if n > self.max_arrows {
            return Err(CatError::Size { what: format!("{what} (arrows)"), limit: self.max_arrows });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCat {
    name: String,
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    ident: Vec<ArrId>,
    out: Vec<Vec<ArrId>>,
    inc: Vec<Vec<ArrId>>,
    hom_off: Vec<usize>,
    pos: Vec<usize>,
    table: Vec<Vec<ArrId>>,
    inverse: Vec<Option<ArrId>>,
}

impl FinCat {
    /// Builds a category from its data and a composition function.
    ///
    /// `compose(g, f)` is only called for composable pairs of non-identity
    /// arrows; composites with identities are filled in. Endpoints and label
    /// uniqueness are checked here, associativity by [`FinCat::verify_laws`].
    pub fn build<F>(
        name: impl Into<String>,
        objects: Vec<String>,
        arrows: Vec<Arrow>,
        ident: Vec<ArrId>,
        mut compose: F,
    ) -> Result<FinCat>
    where
        F: FnMut(ArrId, ArrId) -> ArrId,
    {
        let n = objects.len();
        let m = arrows.len();
        let mut seen = HashSet::new();
        for o in &objects {
            if !seen.insert(o.as_str()) {
                return Err(LawViolation::DuplicateObject(o.clone()).into());
            }
        }
        let mut seen = HashSet::new();
        for a in &arrows {
            if !seen.insert(a.label.as_str()) {
                return Err(LawViolation::DuplicateArrow(a.label.clone()).into());
            }
            if a.src >= n || a.tgt >= n {
                return Err(LawViolation::DanglingEndpoint {
                    arrow: a.label.clone(),
                    object: format!("#{}", a.src.max(a.tgt)),
                }
                .into());
            }
        }
        if ident.len() != n {
            return Err(CatError::Precondition(format!("{} identities for {} objects", ident.len(), n)));
        }
        let mut is_id = vec![false; m];
        for (x, &i) in ident.iter().enumerate() {
            if i >= m || arrows[i].src != x || arrows[i].tgt != x {
                return Err(LawViolation::BadIdentity {
                    object: objects[x].clone(),
                    arrow: arrows.get(i).map(|a| a.label.clone()).unwrap_or_else(|| format!("#{i}")),
                }
                .into());
            }
            is_id[i] = true;
        }

        let mut out: Vec<Vec<ArrId>> = vec![Vec::new(); n];
        let mut inc: Vec<Vec<ArrId>> = vec![Vec::new(); n];
        for (i, a) in arrows.iter().enumerate() {
            out[a.src].push(i);
            inc[a.tgt].push(i);
        }
        for l in out.iter_mut() {
            l.sort_by_key(|&f| (arrows[f].tgt, f));
        }
        for l in inc.iter_mut() {
            l.sort_by_key(|&f| (arrows[f].src, f));
        }
        let mut hom_off = vec![0usize; n * (n + 1)];
        let mut pos = vec![0usize; m];
        for x in 0..n {
            let base = x * (n + 1);
            let mut k = 0;
            for y in 0..=n {
                while k < out[x].len() && arrows[out[x][k]].tgt < y {
                    k += 1;
                }
                hom_off[base + y] = k;
            }
            for (k, &f) in out[x].iter().enumerate() {
                pos[f] = k;
            }
        }

        let mut table = Vec::with_capacity(m);
        for f in 0..m {
            let y = arrows[f].tgt;
            let mut row = Vec::with_capacity(out[y].len());
            for &g in &out[y] {
                let h = if is_id[g] {
                    f
                } else if is_id[f] {
                    g
                } else {
                    let h = compose(g, f);
                    if h >= m || arrows[h].src != arrows[f].src || arrows[h].tgt != arrows[g].tgt {
                        return Err(LawViolation::WrongEndpoints {
                            g: arrows[g].label.clone(),
                            f: arrows[f].label.clone(),
                            h: arrows.get(h).map(|a| a.label.clone()).unwrap_or_else(|| format!("#{h}")),
                        }
                        .into());
                    }
                    h
                };
                row.push(h);
            }
            table.push(row);
        }

        let mut cat = FinCat {
            name: name.into(),
            objects,
            arrows,
            ident,
            out,
            inc,
            hom_off,
            pos,
            table,
            inverse: Vec::new(),
        };
        cat.inverse = (0..m)
            .map(|f| {
                let (x, y) = (cat.arrows[f].src, cat.arrows[f].tgt);
                cat.hom(y, x)
                    .iter()
                    .copied()
                    .find(|&g| cat.compose(g, f) == cat.ident[x] && cat.compose(f, g) == cat.ident[y])
            })
            .collect();
        Ok(cat)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn obj_label(&self, x: ObjId) -> &str {
        &self.objects[x]
    }

    pub fn arr_label(&self, f: ArrId) -> &str {
        &self.arrows[f].label
    }

    pub fn find_object(&self, label: &str) -> Option<ObjId> {
        self.objects.iter().position(|o| o == label)
    }

    pub fn find_arrow(&self, label: &str) -> Option<ArrId> {
        self.arrows.iter().position(|a| a.label == label)
    }

    pub fn src(&self, f: ArrId) -> ObjId {
        self.arrows[f].src
    }

    pub fn tgt(&self, f: ArrId) -> ObjId {
        self.arrows[f].tgt
    }

    pub fn id(&self, x: ObjId) -> ArrId {
        self.ident[x]
    }

    pub fn identities(&self) -> &[ArrId] {
        &self.ident
    }

    pub fn is_identity(&self, f: ArrId) -> bool {
        self.ident[self.arrows[f].src] == f
    }

    /// Arrows `x -> y`, in increasing index order.
    pub fn hom(&self, x: ObjId, y: ObjId) -> &[ArrId] {
        let b = x * (self.objects.len() + 1);
        &self.out[x][self.hom_off[b + y]..self.hom_off[b + y + 1]]
    }

    /// Position of `f` inside `hom(src f, tgt f)`.
    pub fn hom_index(&self, f: ArrId) -> usize {
        let (x, y) = (self.arrows[f].src, self.arrows[f].tgt);
        self.pos[f] - self.hom_off[x * (self.objects.len() + 1) + y]
    }

    pub fn out(&self, x: ObjId) -> &[ArrId] {
        &self.out[x]
    }

    pub fn incoming(&self, y: ObjId) -> &[ArrId] {
        &self.inc[y]
    }

    /// `g . f`; panics if the pair is not composable.
    pub fn compose(&self, g: ArrId, f: ArrId) -> ArrId {
        assert_eq!(
            self.arrows[f].tgt, self.arrows[g].src,
            "{}: cannot compose {} . {}",
            self.name, self.arrows[g].label, self.arrows[f].label
        );
        self.table[f][self.pos[g]]
    }

    pub fn try_compose(&self, g: ArrId, f: ArrId) -> Option<ArrId> {
        (self.arrows[f].tgt == self.arrows[g].src).then(|| self.table[f][self.pos[g]])
    }

    /// Composite of a path given in diagrammatic order (first arrow first).
    pub fn compose_path(&self, path: &[ArrId]) -> Option<ArrId> {
        let (&first, rest) = path.split_first()?;
        rest.iter().try_fold(first, |acc, &g| self.try_compose(g, acc))
    }

    pub fn inverse(&self, f: ArrId) -> Option<ArrId> {
        self.inverse[f]
    }

    pub fn is_iso(&self, f: ArrId) -> bool {
        self.inverse[f].is_some()
    }

    pub fn is_groupoid(&self) -> bool {
        self.inverse.iter().all(Option::is_some)
    }

    pub fn non_invertible_arrow(&self) -> Option<ArrId> {
        self.inverse.iter().position(Option::is_none)
    }

    pub fn is_discrete(&self) -> bool {
        self.arrows.len() == self.objects.len()
    }

    pub fn non_identity_arrows(&self) -> impl Iterator<Item = ArrId> + '_ {
        (0..self.arrows.len()).filter(move |&f| !self.is_identity(f))
    }

    /// Some isomorphism `x -> y`, least index first.
    pub fn iso_between(&self, x: ObjId, y: ObjId) -> Option<ArrId> {
        self.hom(x, y).iter().copied().find(|&f| self.is_iso(f))
    }

    pub fn is_initial(&self, x: ObjId) -> bool {
        (0..self.num_objects()).all(|y| self.hom(x, y).len() == 1)
    }

    pub fn is_terminal(&self, y: ObjId) -> bool {
        (0..self.num_objects()).all(|x| self.hom(x, y).len() == 1)
    }

    /// Exhaustive associativity check; identity laws hold by construction.
    pub fn verify_laws(&self) -> std::result::Result<(), LawViolation> {
        for f in 0..self.num_arrows() {
            if self.is_identity(f) {
                continue;
            }
            for &g in self.out(self.tgt(f)) {
                if self.is_identity(g) {
                    continue;
                }
                let gf = self.compose(g, f);
                for &h in self.out(self.tgt(g)) {
                    if self.is_identity(h) {
                        continue;
                    }
                    if self.compose(h, gf) != self.compose(self.compose(h, g), f) {
                        return Err(LawViolation::Associativity {
                            h: self.arr_label(h).to_string(),
                            g: self.arr_label(g).to_string(),
                            f: self.arr_label(f).to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Relabelled copy with identities first, named `id_<object>`, followed
    /// by the non-identity arrows in their original order.
    pub fn canonical(&self) -> Result<FinCat> {
        let mut order: Vec<ArrId> = self.ident.clone();
        order.extend(self.non_identity_arrows());
        let mut back = vec![0; self.num_arrows()];
        for (new, &old) in order.iter().enumerate() {
            back[old] = new;
        }
        let arrows = order
            .iter()
            .map(|&f| {
                let a = &self.arrows[f];
                let label = if self.is_identity(f) { format!("id_{}", self.objects[a.src]) } else { a.label.clone() };
                Arrow::new(label, a.src, a.tgt)
            })
            .collect();
        let ident = (0..self.num_objects()).collect();
        FinCat::build(self.name.clone(), self.objects.clone(), arrows, ident, |g, f| {
            back[self.compose(order[g], order[f])]
        })
    }

    pub fn to_raw(&self) -> RawCat {
        let arrows = self
            .arrows
            .iter()
            .map(|a| RawArrow { label: a.label.clone(), src: self.objects[a.src].clone(), tgt: self.objects[a.tgt].clone() })
            .collect();
        let mut compose = Vec::new();
        for f in self.non_identity_arrows() {
            for &g in self.out(self.tgt(f)) {
                if !self.is_identity(g) {
                    let h = self.compose(g, f);
                    compose.push([self.arr_label(g).to_string(), self.arr_label(f).to_string(), self.arr_label(h).to_string()]);
                }
            }
        }
        RawCat {
            name: self.name.clone(),
            objects: self.objects.clone(),
            arrows,
            identities: self.ident.iter().map(|&i| self.arrows[i].label.clone()).collect(),
            compose,
        }
    }
}

impl fmt::Display for FinCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} objects, {} arrows)", self.name, self.num_objects(), self.num_arrows())
    }
}

/// Unvalidated category data, as read from JSON or the DSL.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct RawCat {
    pub name: String,
    pub objects: Vec<String>,
    pub arrows: Vec<RawArrow>,
    /// Label of the identity arrow of each object, in object order.
    pub identities: Vec<String>,
    /// Entries `[g, f, h]` meaning `g . f = h`. Composites with identities
    /// may be omitted.
    pub compose: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct RawArrow {
    pub label: String,
    pub src: String,
    pub tgt: String,
}

/// Validates raw data, returning the first violated law.
pub fn check_fincat(raw: &RawCat) -> std::result::Result<FinCat, LawViolation> {
    let mut obj_ix = HashMap::new();
    for (i, o) in raw.objects.iter().enumerate() {
        if obj_ix.insert(o.as_str(), i).is_some() {
            return Err(LawViolation::DuplicateObject(o.clone()));
        }
    }
    let mut arr_ix = HashMap::new();
    let mut arrows = Vec::with_capacity(raw.arrows.len());
    for (i, a) in raw.arrows.iter().enumerate() {
        if arr_ix.insert(a.label.as_str(), i).is_some() {
            return Err(LawViolation::DuplicateArrow(a.label.clone()));
        }
        let end = |o: &str| {
            obj_ix
                .get(o)
                .copied()
                .ok_or_else(|| LawViolation::DanglingEndpoint { arrow: a.label.clone(), object: o.to_string() })
        };
        arrows.push(Arrow::new(a.label.clone(), end(&a.src)?, end(&a.tgt)?));
    }
    if raw.identities.len() != raw.objects.len() {
        return Err(LawViolation::BadIdentity {
            object: raw.objects.get(raw.identities.len()).cloned().unwrap_or_default(),
            arrow: String::from("<missing>"),
        });
    }
    let mut ident = Vec::with_capacity(raw.objects.len());
    for (x, l) in raw.identities.iter().enumerate() {
        let i = *arr_ix.get(l.as_str()).ok_or_else(|| LawViolation::UnknownArrow(l.clone()))?;
        if arrows[i].src != x || arrows[i].tgt != x {
            return Err(LawViolation::BadIdentity { object: raw.objects[x].clone(), arrow: l.clone() });
        }
        ident.push(i);
    }
    let is_id = |f: usize| ident[arrows[f].src] == f;
    let mut table: HashMap<(ArrId, ArrId), ArrId> = HashMap::new();
    for [g, f, h] in &raw.compose {
        let look = |l: &String| arr_ix.get(l.as_str()).copied().ok_or_else(|| LawViolation::UnknownArrow(l.clone()));
        let (gi, fi, hi) = (look(g)?, look(f)?, look(h)?);
        if arrows[fi].tgt != arrows[gi].src {
            return Err(LawViolation::NotComposable { g: g.clone(), f: f.clone() });
        }
        if arrows[hi].src != arrows[fi].src || arrows[hi].tgt != arrows[gi].tgt {
            return Err(LawViolation::WrongEndpoints { g: g.clone(), f: f.clone(), h: h.clone() });
        }
        if is_id(gi) && hi != fi {
            return Err(LawViolation::Identity(f.clone()));
        }
        if is_id(fi) && hi != gi {
            return Err(LawViolation::Identity(g.clone()));
        }
        if table.insert((gi, fi), hi).is_some() {
            return Err(LawViolation::DuplicateComposite { g: g.clone(), f: f.clone() });
        }
    }
    for f in 0..arrows.len() {
        if is_id(f) {
            continue;
        }
        for g in 0..arrows.len() {
            if !is_id(g) && arrows[g].src == arrows[f].tgt && !table.contains_key(&(g, f)) {
                return Err(LawViolation::MissingComposite { g: arrows[g].label.clone(), f: arrows[f].label.clone() });
            }
        }
    }
    let cat = FinCat::build(raw.name.clone(), raw.objects.clone(), arrows, ident, |g, f| table[&(g, f)]).map_err(
        |e| match e {
            CatError::Law(l) => l,
            other => LawViolation::UnknownArrow(other.to_string()),
        },
    )?;
    cat.verify_laws()?;
    Ok(cat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(objects: &[&str], arrows: &[(&str, &str, &str)], compose: &[[&str; 3]]) -> RawCat {
        let mut all: Vec<RawArrow> = objects
            .iter()
            .map(|o| RawArrow { label: format!("id_{o}"), src: o.to_string(), tgt: o.to_string() })
            .collect();
        all.extend(arrows.iter().map(|(l, s, t)| RawArrow { label: l.to_string(), src: s.to_string(), tgt: t.to_string() }));
        RawCat {
            name: "T".into(),
            objects: objects.iter().map(|s| s.to_string()).collect(),
            arrows: all,
            identities: objects.iter().map(|o| format!("id_{o}")).collect(),
            compose: compose.iter().map(|[a, b, c]| [a.to_string(), b.to_string(), c.to_string()]).collect(),
        }
    }

    #[test]
    fn interval_is_valid() {
        let c = check_fincat(&raw(&["0", "1"], &[("f", "0", "1")], &[])).unwrap();
        assert_eq!(c.num_arrows(), 3);
        assert_eq!(c.hom(0, 1), &[2]);
        assert!(c.hom(1, 0).is_empty());
        assert!(!c.is_iso(2));
    }

    #[test]
    fn walking_idempotent_is_valid() {
        let c = check_fincat(&raw(&["*"], &[("e", "*", "*")], &[["e", "e", "e"]])).unwrap();
        assert_eq!(c.num_arrows(), 2);
        assert_eq!(c.compose(1, 1), 1);
    }

    #[test]
    fn involution_is_the_group_of_order_two() {
        let c = check_fincat(&raw(&["*"], &[("e", "*", "*")], &[["e", "e", "id_*"]])).unwrap();
        assert!(c.is_groupoid());
        assert_eq!(c.inverse(1), Some(1));
    }

    #[test]
    fn missing_composite_reported() {
        let e = check_fincat(&raw(&["*"], &[("e", "*", "*")], &[])).unwrap_err();
        assert_eq!(e, LawViolation::MissingComposite { g: "e".into(), f: "e".into() });
    }

    #[test]
    fn dangling_endpoint_reported() {
        let e = check_fincat(&raw(&["a"], &[("f", "a", "b")], &[])).unwrap_err();
        assert!(matches!(e, LawViolation::DanglingEndpoint { .. }));
    }

    #[test]
    fn non_associative_table_rejected() {
        // a, b with a.a = b, a.b = a, b.a = b, b.b = b: (a.a).b = b.b = b but a.(a.b) = a.a = b,
        // and (a.b).a = a.a = b vs a.(b.a) = a.b = a.
        let e = check_fincat(&raw(
            &["*"],
            &[("a", "*", "*"), ("b", "*", "*")],
            &[["a", "a", "b"], ["a", "b", "a"], ["b", "a", "b"], ["b", "b", "b"]],
        ))
        .unwrap_err();
        assert!(matches!(e, LawViolation::Associativity { .. }));
    }

    #[test]
    fn identity_law_violation_reported() {
        let e = check_fincat(&raw(&["0", "1"], &[("f", "0", "1"), ("g", "0", "1")], &[["id_1", "f", "g"]])).unwrap_err();
        assert_eq!(e, LawViolation::Identity("f".into()));
    }

    #[test]
    fn raw_roundtrip() {
        let c = check_fincat(&raw(&["a", "b"], &[("f", "a", "b"), ("g", "b", "a")], &[["g", "f", "id_a"], ["f", "g", "id_b"]])).unwrap();
        let d = check_fincat(&c.to_raw()).unwrap();
        assert_eq!(c, d);
        assert!(c.is_groupoid());
    }
}
