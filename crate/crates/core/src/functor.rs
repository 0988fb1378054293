//! Functors and natural transformations between explicit finite categories.

use std::sync::Arc;

use crate::error::{CatError, Result};
use crate::fincat::{ArrId, FinCat, ObjId};

#[derive(Clone, Debug)]
pub struct Functor {
    pub dom: Arc<FinCat>,
    pub cod: Arc<FinCat>,
    pub obj: Vec<ObjId>,
    pub arr: Vec<ArrId>,
}

impl PartialEq for Functor {
    fn eq(&self, other: &Self) -> bool {
        same_cat(&self.dom, &other.dom) && same_cat(&self.cod, &other.cod) && self.obj == other.obj && self.arr == other.arr
    }
}

impl Eq for Functor {}

pub fn same_cat(a: &Arc<FinCat>, b: &Arc<FinCat>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Functor {
    /// Validated constructor: endpoints, identities and composition.
    pub fn new(dom: Arc<FinCat>, cod: Arc<FinCat>, obj: Vec<ObjId>, arr: Vec<ArrId>) -> Result<Functor> {
        let f = Functor { dom, cod, obj, arr };
        f.check()?;
        Ok(f)
    }

    pub fn new_unchecked(dom: Arc<FinCat>, cod: Arc<FinCat>, obj: Vec<ObjId>, arr: Vec<ArrId>) -> Functor {
        Functor { dom, cod, obj, arr }
    }

    /// The functor determined by an object map alone, for codomains whose
    /// hom-sets are at most singletons.
    pub fn from_objects_thin(dom: Arc<FinCat>, cod: Arc<FinCat>, obj: Vec<ObjId>) -> Result<Functor> {
        let mut arr = Vec::with_capacity(dom.num_arrows());
        for f in 0..dom.num_arrows() {
            let h = cod.hom(obj[dom.src(f)], obj[dom.tgt(f)]);
            match h {
                [a] => arr.push(*a),
                _ => {
                    return Err(CatError::Functor(format!(
                        "no unique image for `{}` in {}",
                        dom.arr_label(f),
                        cod.name()
                    )))
                }
            }
        }
        Functor::new(dom, cod, obj, arr)
    }

    pub fn check(&self) -> Result<()> {
        let (d, c) = (&*self.dom, &*self.cod);
        if self.obj.len() != d.num_objects() || self.arr.len() != d.num_arrows() {
            return Err(CatError::Functor("assignment sizes do not match the domain".into()));
        }
        if self.obj.iter().any(|&y| y >= c.num_objects()) || self.arr.iter().any(|&g| g >= c.num_arrows()) {
            return Err(CatError::Functor("assignment out of range".into()));
        }
        for f in 0..d.num_arrows() {
            let g = self.arr[f];
            if c.src(g) != self.obj[d.src(f)] || c.tgt(g) != self.obj[d.tgt(f)] {
                return Err(CatError::Functor(format!("`{}` sent to an arrow with wrong endpoints", d.arr_label(f))));
            }
        }
        for x in 0..d.num_objects() {
            if self.arr[d.id(x)] != c.id(self.obj[x]) {
                return Err(CatError::Functor(format!("identity of `{}` not preserved", d.obj_label(x))));
            }
        }
        for f in 0..d.num_arrows() {
            for &g in d.out(d.tgt(f)) {
                if self.arr[d.compose(g, f)] != c.compose(self.arr[g], self.arr[f]) {
                    return Err(CatError::Functor(format!(
                        "composite {} . {} not preserved",
                        d.arr_label(g),
                        d.arr_label(f)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn identity(c: Arc<FinCat>) -> Functor {
        let obj = (0..c.num_objects()).collect();
        let arr = (0..c.num_arrows()).collect();
        Functor { dom: c.clone(), cod: c, obj, arr }
    }

    /// Constant functor at an object.
    pub fn constant(dom: Arc<FinCat>, cod: Arc<FinCat>, y: ObjId) -> Functor {
        let obj = vec![y; dom.num_objects()];
        let arr = vec![cod.id(y); dom.num_arrows()];
        Functor { dom, cod, obj, arr }
    }

    /// `other . self`.
    pub fn then(&self, other: &Functor) -> Functor {
        debug_assert!(same_cat(&self.cod, &other.dom));
        Functor {
            dom: self.dom.clone(),
            cod: other.cod.clone(),
            obj: self.obj.iter().map(|&y| other.obj[y]).collect(),
            arr: self.arr.iter().map(|&g| other.arr[g]).collect(),
        }
    }

    pub fn fobj(&self, x: ObjId) -> ObjId {
        self.obj[x]
    }

    pub fn fmap(&self, f: ArrId) -> ArrId {
        self.arr[f]
    }

    pub fn is_identity(&self) -> bool {
        same_cat(&self.dom, &self.cod)
            && self.obj.iter().enumerate().all(|(i, &x)| i == x)
            && self.arr.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn is_injective_on_objects(&self) -> bool {
        let mut seen = vec![false; self.cod.num_objects()];
        self.obj.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn is_bijective(&self) -> bool {
        self.obj.len() == self.cod.num_objects()
            && self.arr.len() == self.cod.num_arrows()
            && self.is_injective_on_objects()
            && {
                let mut seen = vec![false; self.cod.num_arrows()];
                self.arr.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
            }
    }

    /// Inverse of a bijective functor.
    pub fn inverse(&self) -> Option<Functor> {
        if !self.is_bijective() {
            return None;
        }
        let mut obj = vec![0; self.cod.num_objects()];
        for (x, &y) in self.obj.iter().enumerate() {
            obj[y] = x;
        }
        let mut arr = vec![0; self.cod.num_arrows()];
        for (f, &g) in self.arr.iter().enumerate() {
            arr[g] = f;
        }
        Some(Functor { dom: self.cod.clone(), cod: self.dom.clone(), obj, arr })
    }

    /// Same assignment read against other (equal) copies of the categories.
    pub fn retarget(&self, dom: Arc<FinCat>, cod: Arc<FinCat>) -> Functor {
        Functor { dom, cod, obj: self.obj.clone(), arr: self.arr.clone() }
    }

    /// Human-readable assignment, e.g. `a->x, f->g`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = (0..self.dom.num_objects())
            .map(|x| format!("{}->{}", self.dom.obj_label(x), self.cod.obj_label(self.obj[x])))
            .collect();
        parts.extend(
            self.dom
                .non_identity_arrows()
                .map(|f| format!("{}->{}", self.dom.arr_label(f), self.cod.arr_label(self.arr[f]))),
        );
        parts.join(", ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatTrans {
    pub src: Functor,
    pub tgt: Functor,
    pub comp: Vec<ArrId>,
}

impl NatTrans {
    pub fn new(src: Functor, tgt: Functor, comp: Vec<ArrId>) -> Result<NatTrans> {
        let t = NatTrans { src, tgt, comp };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        let (d, c) = (&*self.src.dom, &*self.src.cod);
        if !same_cat(&self.src.dom, &self.tgt.dom) || !same_cat(&self.src.cod, &self.tgt.cod) {
            return Err(CatError::Naturality("functors are not parallel".into()));
        }
        if self.comp.len() != d.num_objects() {
            return Err(CatError::Naturality("wrong number of components".into()));
        }
        for x in 0..d.num_objects() {
            let a = self.comp[x];
            if a >= c.num_arrows() || c.src(a) != self.src.obj[x] || c.tgt(a) != self.tgt.obj[x] {
                return Err(CatError::Naturality(format!("component at `{}` has wrong endpoints", d.obj_label(x))));
            }
        }
        for f in 0..d.num_arrows() {
            let (x, y) = (d.src(f), d.tgt(f));
            if c.compose(self.comp[y], self.src.arr[f]) != c.compose(self.tgt.arr[f], self.comp[x]) {
                return Err(CatError::Naturality(format!("square at `{}` does not commute", d.arr_label(f))));
            }
        }
        Ok(())
    }

    pub fn identity(f: &Functor) -> NatTrans {
        let comp = f.obj.iter().map(|&y| f.cod.id(y)).collect();
        NatTrans { src: f.clone(), tgt: f.clone(), comp }
    }

    /// Vertical composite `other . self`.
    pub fn then(&self, other: &NatTrans) -> NatTrans {
        let c = &self.src.cod;
        let comp = self.comp.iter().zip(&other.comp).map(|(&a, &b)| c.compose(b, a)).collect();
        NatTrans { src: self.src.clone(), tgt: other.tgt.clone(), comp }
    }

    pub fn is_iso(&self) -> bool {
        self.comp.iter().all(|&a| self.src.cod.is_iso(a))
    }

    pub fn inverse(&self) -> Option<NatTrans> {
        let comp = self.comp.iter().map(|&a| self.src.cod.inverse(a)).collect::<Option<Vec<_>>>()?;
        Some(NatTrans { src: self.tgt.clone(), tgt: self.src.clone(), comp })
    }

    /// Whiskering `H . self` for `H` out of the codomain.
    pub fn whisker_right(&self, h: &Functor) -> NatTrans {
        NatTrans {
            src: self.src.then(h),
            tgt: self.tgt.then(h),
            comp: self.comp.iter().map(|&a| h.arr[a]).collect(),
        }
    }

    /// Whiskering `self . K` for `K` into the domain.
    pub fn whisker_left(&self, k: &Functor) -> NatTrans {
        NatTrans {
            src: k.then(&self.src),
            tgt: k.then(&self.tgt),
            comp: k.obj.iter().map(|&x| self.comp[x]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn identity_and_composition() {
        let i = Arc::new(fixtures::interval());
        let id = Functor::identity(i.clone());
        id.check().unwrap();
        assert!(id.then(&id).is_identity());
        let bad = Functor::new_unchecked(i.clone(), i.clone(), vec![1, 0], vec![1, 0, 2]);
        assert!(bad.check().is_err());
    }

    #[test]
    fn constant_functor_is_valid() {
        let i = Arc::new(fixtures::interval());
        let j = Arc::new(fixtures::walking_iso());
        Functor::constant(i, j, 1).check().unwrap();
    }

    #[test]
    fn naturality_checked() {
        let i = Arc::new(fixtures::interval());
        let one = Arc::new(fixtures::terminal());
        let at0 = Functor::new(one.clone(), i.clone(), vec![0], vec![0]).unwrap();
        let at1 = Functor::new(one.clone(), i.clone(), vec![1], vec![1]).unwrap();
        let f = i.find_arrow("f").unwrap();
        let t = NatTrans::new(at0.clone(), at1.clone(), vec![f]).unwrap();
        assert!(!t.is_iso());
        assert!(NatTrans::new(at1, at0, vec![f]).is_err());
    }
}
