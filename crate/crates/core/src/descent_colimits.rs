//! Gluing cocartesian fibrations over cocommas, sequential colimits and groupoids.

use std::sync::Arc;

use crate::descent::{find_equivalence_over, pullback_fibration};
use crate::fibration::{fibre, inverts_w, is_cocartesian_fibration, unstraighten, FibrationError, MarkedFibration, Pseudofunctor, Result};
use crate::fincat::{ArrId, FinCat, ObjId};
use crate::functor::Functor;
use crate::presentation::{cocomma, sequential_colimit, Cocomma, SeqColimit};
use crate::search::find_equivalence;

/// A glued fibration and, per piece, whether restriction recovers that piece.
#[derive(Clone, Debug)]
pub struct DescentGlue {
    pub fibration: MarkedFibration,
    pub recovered: Vec<bool>,
}

impl DescentGlue {
    pub fn verified(&self) -> bool {
        self.recovered.iter().all(|&r| r)
    }
}

/// Fibration over `B <-f- A -g-> C` glued along `phi: f^*Y -> g^*Z`.
#[derive(Clone, Debug)]
pub struct CocommaFibration {
    pub base: Cocomma,
    pub total: Cocomma,
    pub glue: DescentGlue,
}

fn exact_cocomma(c: &Cocomma, what: &str) -> Result<(Arc<FinCat>, Functor, Functor)> {
    match (c.saturation.exact(), &c.k, &c.l) {
        (Some(cat), Some(k), Some(l)) => Ok((cat.clone(), k.clone(), l.clone())),
        _ => Err(FibrationError::Truncated(format!("{what}: growth {:?}", c.saturation.growth))),
    }
}

fn lies_over(x: &Functor, y: &Functor, phi: &Functor) -> bool {
    (0..phi.dom.num_objects()).all(|o| y.obj[phi.obj[o]] == x.obj[o]) && (0..phi.dom.num_arrows()).all(|a| y.arr[phi.arr[a]] == x.arr[a])
}

/// The base changes `f^*Y` and `g^*Z` that `phi` must connect.
pub fn cocomma_pullbacks(mf_p: &MarkedFibration, mf_q: &MarkedFibration, f: &Functor, g: &Functor) -> Result<(MarkedFibration, MarkedFibration)> {
    Ok((pullback_fibration(mf_p, f)?.0, pullback_fibration(mf_q, g)?.0))
}

/// Glue `Y -> B` and `Z -> C` over the cocomma of `f` and `g`.
///
/// `phi` is a functor `f^*Y -> g^*Z` over `A` between the fibrations
/// returned by [`cocomma_pullbacks`], sending marked arrows to marked arrows.
pub fn cocomma_fibration(mf_p: &MarkedFibration, mf_q: &MarkedFibration, f: &Functor, g: &Functor, phi: &Functor, max_word_len: usize) -> Result<CocommaFibration> {
    let pre = |s: &str| Err(FibrationError::Precondition(s.into()));
    let (fy, span_p) = pullback_fibration(mf_p, f)?;
    let (gz, span_q) = pullback_fibration(mf_q, g)?;
    if !crate::functor::same_cat(&phi.dom, &fy.p.dom) || !crate::functor::same_cat(&phi.cod, &gz.p.dom) {
        return pre("phi must run between the base changes");
    }
    if !lies_over(&fy.p, &gz.p, phi) {
        return pre("phi does not lie over A");
    }
    if (0..phi.dom.num_arrows()).any(|a| fy.marked[a] && !gz.marked[phi.arr[a]]) {
        return pre("phi does not preserve cocartesian arrows");
    }
    let base = cocomma(f, g, max_word_len)?;
    let (wcat, k, l) = exact_cocomma(&base, "base cocomma")?;
    let alpha = base.alpha.clone().expect("exact cocomma has its cell");
    let v = phi.then(&span_q.left);
    let total = cocomma(&span_p.left, &v, max_word_len)?;
    exact_cocomma(&total, "total cocomma")?;
    let (p, q) = (&mf_p.p, &mf_q.p);
    let n_gen = total.saturation.presentation.generators.len();
    let n_obj = total.saturation.presentation.objects.len();
    let mut obj = vec![0; n_obj];
    for y in 0..p.dom.num_objects() {
        obj[total.b_obj[y]] = k.obj[p.obj[y]];
    }
    for z in 0..q.dom.num_objects() {
        obj[total.c_obj[z]] = l.obj[q.obj[z]];
    }
    let mut gen_map = vec![usize::MAX; n_gen];
    for h in 0..p.dom.num_arrows() {
        if let Some(gi) = total.b_gen[h] {
            gen_map[gi] = k.arr[p.arr[h]];
        }
    }
    for h in 0..q.dom.num_arrows() {
        if let Some(gi) = total.c_gen[h] {
            gen_map[gi] = l.arr[q.arr[h]];
        }
    }
    for (x, &gi) in total.alpha_gen.iter().enumerate() {
        gen_map[gi] = alpha.comp[span_p.right.obj[x]];
    }
    let proj = total.saturation.functor_to(&wcat, &obj, &gen_map)?;
    let fibration = is_cocartesian_fibration(&proj)?;
    let (back_p, _) = pullback_fibration(&fibration, &k)?;
    let (back_q, _) = pullback_fibration(&fibration, &l)?;
    let recovered = vec![find_equivalence_over(&back_p.p, p).is_some(), find_equivalence_over(&back_q.p, q).is_some()];
    Ok(CocommaFibration { base, total, glue: DescentGlue { fibration, recovered } })
}

/// Glue a compatible sequence of fibrations over a sequence of bases.
///
/// `total_links[i]` covers `base_links[i]`; both sequences must become
/// bijective within `max_stages`.
pub fn sequential_descent_glue(stages: &[MarkedFibration], base_links: &[Functor], total_links: &[Functor], max_stages: usize) -> Result<DescentGlue> {
    if stages.is_empty() || base_links.len() + 1 != stages.len() || total_links.len() != base_links.len() {
        return Err(FibrationError::Precondition("stage and link counts disagree".into()));
    }
    for (i, (bl, tl)) in base_links.iter().zip(total_links).enumerate() {
        let down = tl.then(&stages[i + 1].p);
        let across = stages[i].p.then(bl);
        if down.obj != across.obj || down.arr != across.arr {
            return Err(FibrationError::Precondition(format!("link {i} does not cover its base link")));
        }
    }
    let bases: Vec<Arc<FinCat>> = stages.iter().map(|s| s.p.cod.clone()).collect();
    let totals: Vec<Arc<FinCat>> = stages.iter().map(|s| s.p.dom.clone()).collect();
    let stable = |r: SeqColimit, what: &str| match r {
        SeqColimit::Stable { stage, cocone, .. } => Ok((stage, cocone)),
        SeqColimit::Truncated { growth } => Err(FibrationError::Truncated(format!("{what}: growth {growth:?}"))),
    };
    let (sb, base_cocone) = stable(sequential_colimit(&bases, base_links, max_stages)?, "base colimit")?;
    let (st, tot_cocone) = stable(sequential_colimit(&totals, total_links, max_stages)?, "total colimit")?;
    let s = sb.max(st);
    if s >= base_cocone.len() || s >= tot_cocone.len() {
        return Err(FibrationError::Truncated(format!("stabilised at stage {s}")));
    }
    let back = tot_cocone[s].inverse().expect("cocone is invertible past the stable stage");
    let proj = back.then(&stages[s].p).then(&base_cocone[s]);
    let fibration = is_cocartesian_fibration(&proj)?;
    let n = base_cocone.len().min(tot_cocone.len());
    let mut recovered = Vec::with_capacity(n);
    for i in 0..n {
        let (pulled, _) = pullback_fibration(&fibration, &base_cocone[i])?;
        recovered.push(find_equivalence_over(&pulled.p, &stages[i].p).is_some());
    }
    Ok(DescentGlue { fibration, recovered })
}

/// Glue a family of categories over a groupoid along its transports.
pub fn groupoid_descent(family: &Pseudofunctor) -> Result<DescentGlue> {
    let x = &family.base;
    if let Some(a) = (0..x.num_arrows()).find(|&a| !x.is_iso(a)) {
        return Err(FibrationError::Precondition(format!("`{}` is not invertible", x.arr_label(a))));
    }
    let fibration = unstraighten(family)?;
    let all: Vec<ArrId> = (0..x.num_arrows()).collect();
    if !inverts_w(&fibration, &all) {
        return Err(FibrationError::Precondition("transport is not an equivalence".into()));
    }
    let recovered = (0..x.num_objects() as ObjId).map(|o| find_equivalence(&fibre(&fibration.p, o).cat, &family.fibres[o]).is_some()).collect();
    Ok(DescentGlue { fibration, recovered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::unstraighten_with_key;
    use crate::fixtures::{discrete, empty, interval, poset, terminal, walking_idempotent, walking_section_retraction};
    use crate::fincat::Budget;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    fn over_point(d: FinCat) -> MarkedFibration {
        let d = arc(d);
        is_cocartesian_fibration(&Functor::constant(d, arc(terminal()), 0)).unwrap()
    }

    #[test]
    fn empty_apex_is_disjoint_union() {
        let (b, c) = (arc(interval()), arc(terminal()));
        let a = arc(empty());
        let f = Functor::new(a.clone(), b.clone(), vec![], vec![]).unwrap();
        let g = Functor::new(a, c.clone(), vec![], vec![]).unwrap();
        let mf_p = is_cocartesian_fibration(&Functor::identity(b)).unwrap();
        let mf_q = over_point(walking_idempotent());
        let (fy, gz) = cocomma_pullbacks(&mf_p, &mf_q, &f, &g).unwrap();
        let phi = Functor::new(fy.p.dom.clone(), gz.p.dom.clone(), vec![], vec![]).unwrap();
        let cf = cocomma_fibration(&mf_p, &mf_q, &f, &g, &phi, 8).unwrap();
        let total = &cf.glue.fibration.p.dom;
        assert_eq!(total.num_objects(), 3);
        assert_eq!(total.num_arrows(), 3 + 2);
        assert_eq!(cf.glue.fibration.p.cod.num_objects(), 3);
        assert!(cf.glue.verified());
    }

    #[test]
    fn arrow_over_point_matches_unstraightening() {
        let one = arc(terminal());
        let id = Functor::identity(one.clone());
        let (fa, ga) = (arc(walking_idempotent()), arc(walking_section_retraction()));
        let b_obj = ga.find_object("b").unwrap();
        let e = ga.find_arrow("e").unwrap();
        let phi0 = Functor::new(fa.clone(), ga.clone(), vec![b_obj], vec![ga.id(b_obj), e]).unwrap();
        let (mf_p, mf_q) = (over_point((*fa).clone()), over_point((*ga).clone()));
        let (fy, gz) = cocomma_pullbacks(&mf_p, &mf_q, &id, &id).unwrap();
        let (_, sp) = pullback_fibration(&mf_p, &id).unwrap();
        let (_, sq) = pullback_fibration(&mf_q, &id).unwrap();
        let phi = sp.left.then(&phi0).then(&sq.left.inverse().unwrap());
        assert!(crate::functor::same_cat(&phi.dom, &fy.p.dom) && crate::functor::same_cat(&phi.cod, &gz.p.dom));
        let cf = cocomma_fibration(&mf_p, &mf_q, &id, &id, &phi, 10).unwrap();
        assert!(cf.glue.verified());
        // the base cocomma of 1 <- 1 -> 1 is the interval
        let w = &cf.glue.fibration.p.cod;
        assert!(find_equivalence(w, &arc(interval())).is_some());
        let i = arc(interval());
        let pf = Pseudofunctor::strict(i.clone(), vec![fa.clone(), ga.clone()], vec![Functor::identity(fa.clone()), Functor::identity(ga.clone()), phi0.clone()]).unwrap();
        let (un, _) = unstraighten_with_key(&pf).unwrap();
        let iso_base = crate::search::find_isomorphism(w, &i).unwrap();
        let glued = cf.glue.fibration.p.then(&iso_base);
        assert!(find_equivalence_over(&glued, &un.p).is_some());
        // heteromorphisms y -> z are Z(phi y, z)
        let total = &cf.glue.fibration.p.dom;
        let y = cf.total.b_obj[0];
        for z in 0..ga.num_objects() {
            assert_eq!(total.hom(y, cf.total.c_obj[z]).len(), ga.hom(b_obj, z).len());
        }
    }

    #[test]
    fn phi_off_the_base_is_rejected() {
        let two = arc(discrete(2));
        let f = Functor::identity(two.clone());
        let g = Functor::identity(two.clone());
        let mf = is_cocartesian_fibration(&Functor::identity(two.clone())).unwrap();
        let (fy, gz) = cocomma_pullbacks(&mf, &mf, &f, &g).unwrap();
        let swap = Functor::new(fy.p.dom.clone(), gz.p.dom.clone(), vec![1, 0], vec![gz.p.dom.id(1), gz.p.dom.id(0)]).unwrap();
        assert!(matches!(cocomma_fibration(&mf, &mf, &f, &g, &swap, 8), Err(FibrationError::Precondition(_))));
    }

    #[test]
    fn constant_stages_give_stage_zero() {
        let mf = over_point(walking_idempotent());
        let stages = vec![mf.clone(), mf.clone(), mf.clone()];
        let bl = vec![Functor::identity(mf.p.cod.clone()); 2];
        let tl = vec![Functor::identity(mf.p.dom.clone()); 2];
        let g = sequential_descent_glue(&stages, &bl, &tl, 8).unwrap();
        assert!(g.verified());
        assert_eq!(g.recovered.len(), 3);
        assert!(find_equivalence_over(&g.fibration.p, &mf.p).is_some());
    }

    #[test]
    fn fibre_then_whole_glues_to_whole() {
        let i = arc(interval());
        let fs = arc(walking_section_retraction());
        let span = crate::constructions::product(&i, &fs, &Budget::default()).unwrap();
        let whole = is_cocartesian_fibration(&span.left).unwrap();
        let fib0 = fibre(&whole.p, 0);
        let stage0 = is_cocartesian_fibration(&Functor::constant(fib0.cat.clone(), arc(terminal()), 0)).unwrap();
        let pt = Functor::constant(stage0.p.cod.clone(), i.clone(), 0);
        let stages = vec![stage0.clone(), whole.clone(), whole.clone()];
        let bl = vec![pt, Functor::identity(i.clone())];
        let tl = vec![fib0.incl.clone(), Functor::identity(whole.p.dom.clone())];
        let g = sequential_descent_glue(&stages, &bl, &tl, 8).unwrap();
        assert_eq!(g.recovered, vec![true, true, true]);
        // links that do not cover the base are rejected
        let bad = vec![Functor::constant(stage0.p.cod.clone(), i.clone(), 1), Functor::identity(i)];
        assert!(sequential_descent_glue(&stages, &bad, &tl, 8).is_err());
    }

    #[test]
    fn discrete_groupoid_is_disjoint_union() {
        let x = arc(discrete(2));
        let fibres = vec![arc(walking_idempotent()), arc(poset(1))];
        let maps = vec![Functor::identity(fibres[0].clone()), Functor::identity(fibres[1].clone())];
        let pf = Pseudofunctor::strict(x, fibres, maps).unwrap();
        let g = groupoid_descent(&pf).unwrap();
        assert!(g.verified());
        assert_eq!(g.fibration.p.dom.num_objects(), 3);
        assert_eq!(g.fibration.p.dom.num_arrows(), 2 + 3);
    }

    #[test]
    fn order_two_action_on_two_points() {
        let z2 = arc(crate::fixtures::cyclic_group(2));
        let d = arc(discrete(2));
        let sigma = Functor::new(d.clone(), d.clone(), vec![1, 0], vec![d.id(1), d.id(0)]).unwrap();
        let gen = (0..z2.num_arrows()).find(|&a| !z2.is_identity(a)).unwrap();
        let maps = (0..z2.num_arrows()).map(|a| if a == gen { sigma.clone() } else { Functor::identity(d.clone()) }).collect();
        let pf = Pseudofunctor::strict(z2, vec![d], maps).unwrap();
        let g = groupoid_descent(&pf).unwrap();
        assert!(g.verified());
        assert_eq!(g.fibration.p.dom.num_objects(), 2);
        assert_eq!(g.fibration.p.dom.num_arrows(), 4);
        g.fibration.check().unwrap();
    }

    #[test]
    fn non_groupoid_is_rejected() {
        let pf = Pseudofunctor::constant(arc(interval()), arc(terminal()));
        assert!(matches!(groupoid_descent(&pf), Err(FibrationError::Precondition(_))));
    }

    #[test]
    fn seeded_spans_recover_both_sides() {
        let mut r = crate::generate::rng(9);
        let mut verified = 0;
        for _ in 0..60 {
            let Some(inst) = crate::generate::random_cocomma_instance(&mut r) else { continue };
            match cocomma_fibration(&inst.mf_p, &inst.mf_q, &inst.f, &inst.g, &inst.phi, 10) {
                Ok(cf) => {
                    assert!(cf.glue.verified(), "{:?}", cf.glue.recovered);
                    verified += 1;
                }
                Err(FibrationError::Truncated(_)) => {}
                Err(e) => panic!("{e}"),
            }
            if verified == 10 {
                break;
            }
        }
        assert_eq!(verified, 10);
    }
}
