use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{job, jobs, Bounds, Check, Job, Need, Suite};
use crate::big_list::big_list_property_suite;
use crate::descent::{delta3_conduche, descent_interval_census, descent_localisation_check, localize_fibration, mapping_squares_all, pullback_fibration};
use crate::descent_colimits::{cocomma_fibration, groupoid_descent, sequential_descent_glue};
use crate::emit::{counted, size};
use crate::fibration::{
    conduche_inverts_w, conduche_witness, fibre, invertible_transport_check, is_cocartesian_fibration, is_conduche, unstraighten, FibrationError, MarkedFibration, Pseudofunctor,
};
use crate::fincat::{check_fincat, ArrId, FinCat};
use crate::fixtures::{cyclic_group, discrete, interval, library, poset, terminal, walking_idempotent, walking_iso, walking_section_retraction};
use crate::functor::Functor;
use crate::generate::{random_cocomma_instance, random_fincat, random_localisation_instance, random_opfibration, BaseShape};
use crate::join::{core_inclusion, join_tower};
use crate::kelly::{kelly_s_infty, localisation_column_via_s, s_infty_ortho_check, s_ortho_check, HomCount, LocalisationCospan, SInfty};
use crate::presentation::localize;
use crate::presheaf::Presheaf;
use crate::search::{all_functors, find_equivalence, for_each_functor, naturally_isomorphic, SearchOptions};
use crate::universe::{over_point, point_and_interval_family, straighten_against, straightening_uniqueness_check, univalent_completion, UniverseTower};

/// Stream namespaces, so suites that share instances draw the same ones.
const ORACLE: usize = 0;
const LOCALISATION: usize = 1_000;
const OPFIBRATION: usize = 2_000;
const COCOMMA: usize = 4_000;
const CORE: usize = 5_000;
const STRAIGHTEN: usize = 6_000;

const ORACLE_ATTEMPTS: usize = 16;
const SQUARE_ATTEMPTS: usize = 32;

fn arc(c: FinCat) -> Arc<FinCat> {
    Arc::new(c)
}

fn seeded(i: usize) -> String {
    format!("seeded/{i:03}")
}

pub fn suites() -> Vec<Suite> {
    vec![
        Suite {
            name: "core-laws",
            criterion: Some(1),
            title: "category and functor laws on the fixtures and seeded categories",
            ops: &["check_fincat"],
            needs: &[("fixture", Need::All), ("seeded", Need::AtLeast(200))],
            build: core_laws,
        },
        Suite {
            name: "localisation-oracle",
            criterion: Some(2),
            title: "localisation hom-sets by rewriting and by S-infinity agree",
            ops: &["localize", "saturate", "localisation_homs_via_S", "kelly_S_infty"],
            needs: &[("fixture", Need::All), ("seeded", Need::AtLeast(10))],
            build: localisation_oracle,
        },
        Suite {
            name: "conduche-of-cocartesian",
            criterion: Some(3),
            title: "cocartesian fibrations are Conduche",
            ops: &["is_conduche", "is_cocartesian_fibration", "unstraighten"],
            needs: &[("seeded", Need::AtLeast(100))],
            build: conduche_of_cocartesian,
        },
        Suite {
            name: "invertible-transport",
            criterion: Some(4),
            title: "over arrows with invertible transport, cartesian and cocartesian lifts coincide",
            ops: &["invertible_transport_check", "transport", "cocartesian_arrows"],
            needs: &[("seeded", Need::AtLeast(50))],
            build: invertible_transport,
        },
        Suite {
            name: "mapping-squares",
            criterion: Some(5),
            title: "mapping squares (a) and (b) are pullbacks of finite sets",
            ops: &["mapping_square_a", "mapping_square_b", "localize_fibration", "kelly_S_infty", "localisation_homs_via_S"],
            needs: &[("seeded", Need::AtLeast(20))],
            build: mapping_squares,
        },
        Suite {
            name: "q-prime-cocartesian",
            criterion: Some(6),
            title: "localising a fibration gives a cocartesian fibration and a pullback square",
            ops: &["localize_fibration", "is_cocartesian_fibration", "inverts_W"],
            needs: &[("fixture", Need::All), ("seeded", Need::AtLeast(20))],
            build: q_prime_cocartesian,
        },
        Suite {
            name: "descent-localisation",
            criterion: Some(7),
            title: "fibrations over the interval inverting f are those over J",
            ops: &["descent_localisation_check", "is_equivalence", "is_fully_faithful"],
            needs: &[("census", Need::All), ("seeded", Need::AtLeast(8))],
            build: descent_localisation,
        },
        Suite {
            name: "conduche-counterexample",
            criterion: Some(8),
            title: "a Conduche fibration inverting W that is not a pullback",
            ops: &["is_conduche", "conduche_inverts_W", "is_cocartesian_fibration", "is_equivalence"],
            needs: &[("delta3", Need::All)],
            build: conduche_counterexample,
        },
        Suite {
            name: "descent-cocomma",
            criterion: Some(9),
            title: "fibrations glued over a cocomma restrict to both sides",
            ops: &["cocomma_fibration", "cocomma"],
            needs: &[("seeded", Need::AtLeast(10))],
            build: descent_cocomma,
        },
        Suite {
            name: "descent-glue",
            criterion: Some(10),
            title: "sequential and groupoid gluing round trips",
            ops: &["sequential_descent_glue", "groupoid_descent", "sequential_colimit"],
            needs: &[("fixture", Need::All)],
            build: descent_glue,
        },
        Suite {
            name: "join-correctness",
            criterion: Some(11),
            title: "join towers from the core reach the whole category",
            ops: &["join_tower", "directed_join"],
            needs: &[("tower", Need::All)],
            build: join_correctness,
        },
        Suite {
            name: "universe",
            criterion: Some(12),
            title: "univalent completion of the point and the interval",
            ops: &["univalent_completion", "is_directed_univalent", "virtual_join", "fun_cocart"],
            needs: &[("universe", Need::All)],
            build: universe,
        },
        Suite {
            name: "straightening",
            criterion: Some(13),
            title: "straightening against the universe recovers classifying functors",
            ops: &["straighten_against", "straightening_uniqueness_check"],
            needs: &[("seeded", Need::AtLeast(10))],
            build: straightening,
        },
        Suite {
            name: "s-ortho",
            criterion: Some(14),
            title: "precomposition with the unit of S-infinity is bijective onto local objects",
            ops: &["kelly_S", "kelly_S_infty"],
            needs: &[("oracle", Need::AtLeast(10)), ("squares", Need::AtLeast(20))],
            build: s_ortho,
        },
        Suite {
            name: "big-list",
            criterion: Some(15),
            title: "closure properties of good and nice glued presheaves",
            ops: &["big_list_property_suite", "check_good", "check_nice", "gl_is_cartesian", "arrow_left_adjoint", "lan", "presheaf_pushout", "presheaf_seq_colimit", "restrict"],
            needs: &[("property", Need::All)],
            build: big_list,
        },
    ]
}

/// Laws of `c` itself and functoriality of the functors `c -> d` met first.
fn laws(c: &Arc<FinCat>, d: &Arc<FinCat>) -> Result<(), String> {
    let back = check_fincat(&c.to_raw()).map_err(|e| e.to_string())?;
    if back.canonical().map_err(|e| e.to_string())? != c.canonical().map_err(|e| e.to_string())? {
        return Err("validated copy differs".into());
    }
    let mut fs = vec![Functor::identity(c.clone())];
    for_each_functor(c, d, &SearchOptions::default(), &mut |f| {
        fs.push(f.clone());
        fs.len() < 24
    });
    let mut err = None;
    for f in &fs[1..] {
        if let Err(e) = f.check() {
            err.get_or_insert(format!("{}: {e}", f.describe()));
        }
        if Functor::identity(c.clone()).then(f).arr != f.arr || f.then(&Functor::identity(d.clone())).arr != f.arr {
            err.get_or_insert(format!("{}: identity functor is not neutral", f.describe()));
        }
    }
    for f in fs.iter().filter(|f| Arc::ptr_eq(&f.cod, c)) {
        for g in &fs[1..] {
            if let Err(e) = f.then(g).check() {
                err.get_or_insert(format!("composite {} then {}: {e}", f.describe(), g.describe()));
            }
        }
    }
    err.map_or(Ok(()), Err)
}

fn core_laws(b: &Bounds) -> Vec<Job> {
    let lib: Vec<Arc<FinCat>> = library().into_iter().map(arc).collect();
    let mut out: Vec<Job> = Vec::new();
    for (i, c) in lib.iter().enumerate() {
        let (c, d) = (c.clone(), lib[(i + 1) % lib.len()].clone());
        out.push(job(move || match laws(&c, &d) {
            Ok(()) => Check::pass(format!("fixture/{:02}-{}", i, c.name())),
            Err(w) => Check::fail(format!("fixture/{:02}-{}", i, c.name()), w),
        }));
    }
    for i in 0..200 {
        let b = *b;
        out.push(job(move || {
            let c = arc(random_fincat(&mut b.stream(CORE + i), 5));
            let d = arc(random_fincat(&mut b.stream(CORE + i + 1), 5));
            match laws(&c, &d) {
                Ok(()) => Check::pass(seeded(i)),
                Err(w) => Check::fail(seeded(i), w),
            }
        }));
    }
    out
}

/// A category with up to four objects and one or two arrows to invert.
fn oracle_instance(r: &mut ChaCha8Rng) -> (Arc<FinCat>, Vec<ArrId>) {
    loop {
        let c = random_fincat(r, 4);
        let mut cands: Vec<ArrId> = c.non_identity_arrows().collect();
        if cands.is_empty() {
            continue;
        }
        cands.shuffle(r);
        cands.truncate(r.gen_range(1..=2));
        cands.sort_unstable();
        return (arc(c), cands);
    }
}

fn oracle_fixtures() -> Vec<(String, Arc<FinCat>, Vec<ArrId>)> {
    [(interval(), "f"), (poset(2), "0<1"), (walking_idempotent(), "e")]
        .into_iter()
        .map(|(c, a)| {
            let w = vec![c.find_arrow(a).expect("fixture arrow")];
            (format!("{}-at-{a}", c.name()), arc(c), w)
        })
        .collect()
}

fn oracle_check(id: String, c: &Arc<FinCat>, w: &[ArrId], b: &Bounds) -> Check {
    let loc = match localize(c, w, b.max_word_len) {
        Ok(l) => l,
        Err(e) => return Check::fail(id, e.to_string()),
    };
    let Some(lc) = loc.saturation.exact().cloned() else {
        return Check::truncated(id, format!("rewriting: growth {:?}", loc.saturation.growth));
    };
    for y in 0..c.num_objects() {
        let col = localisation_column_via_s(c, w, y, b.max_iterations);
        for (x, h) in col.iter().enumerate() {
            match h {
                HomCount::Truncated(g) => return Check::truncated(id, format!("S-infinity at {}: sizes {g:?}", c.obj_label(y))),
                HomCount::Exact(n) if *n != lc.hom(x, y).len() => {
                    return Check::fail(id, format!("{}: hom({}, {}) is {} by rewriting, {n} via S", c.name(), c.obj_label(x), c.obj_label(y), lc.hom(x, y).len()));
                }
                HomCount::Exact(_) => {}
            }
        }
    }
    Check::pass(id).note(format!("{} after localising", size(&lc)))
}

fn localisation_oracle(b: &Bounds) -> Vec<Job> {
    let mut out: Vec<Job> = Vec::new();
    for (name, c, w) in oracle_fixtures() {
        let b = *b;
        out.push(job(move || oracle_check(format!("fixture/{name}"), &c, &w, &b)));
    }
    for i in 0..ORACLE_ATTEMPTS {
        let b = *b;
        out.push(job(move || {
            let (c, w) = oracle_instance(&mut b.stream(ORACLE + i));
            oracle_check(seeded(i), &c, &w, &b)
        }));
    }
    out
}

fn random_shape(r: &mut ChaCha8Rng) -> BaseShape {
    *BaseShape::all().choose(r).expect("shapes")
}

fn conduche_of_cocartesian(b: &Bounds) -> Vec<Job> {
    (0..100)
        .map(|i| {
            let b = *b;
            job(move || {
                let mut r = b.stream(OPFIBRATION + i);
                let shape = random_shape(&mut r);
                let (_, mf, _) = random_opfibration(&mut r, shape, 0.5);
                if let Err(e) = is_cocartesian_fibration(&mf.p) {
                    return Check::fail(seeded(i), format!("generated functor is not a cocartesian fibration: {e}"));
                }
                Check::expect(seeded(i), is_conduche(&mf.p), || format!("{:?}", conduche_witness(&mf.p)))
            })
        })
        .collect()
}

fn invertible_transport(b: &Bounds) -> Vec<Job> {
    (0..50)
        .map(|i| {
            let b = *b;
            job(move || {
                let mut r = b.stream(OPFIBRATION + 500 + i);
                let (mf, isos) = loop {
                    let shape = random_shape(&mut r);
                    let (_, mf, isos) = random_opfibration(&mut r, shape, 0.7);
                    if !isos.is_empty() {
                        break (mf, isos);
                    }
                };
                for &f in &isos {
                    match invertible_transport_check(&mf, f) {
                        Ok(true) => {}
                        Ok(false) => return Check::fail(seeded(i), format!("lifts of `{}` differ", mf.base().arr_label(f))),
                        Err(e) => return Check::fail(seeded(i), e.to_string()),
                    }
                }
                Check::pass(seeded(i)).note(format!("{} arrows with invertible transport", isos.len()))
            })
        })
        .collect()
}

fn localisation_fibration_instance(b: &Bounds, i: usize) -> (MarkedFibration, Vec<ArrId>) {
    random_localisation_instance(&mut b.stream(LOCALISATION + i))
}

/// Hom-counts of `loc` against S-infinity over `c`; `None` when a run is truncated.
fn s_agrees(c: &Arc<FinCat>, w: &[ArrId], lc: &FinCat, max_iterations: usize) -> Option<Result<(), String>> {
    for y in 0..c.num_objects() {
        for (x, h) in localisation_column_via_s(c, w, y, max_iterations).iter().enumerate() {
            let n = h.exact()?;
            if n != lc.hom(x, y).len() {
                return Some(Err(format!("{}: hom({}, {}) is {} by rewriting, {n} via S", c.name(), c.obj_label(x), c.obj_label(y), lc.hom(x, y).len())));
            }
        }
    }
    Some(Ok(()))
}

fn mapping_squares(b: &Bounds) -> Vec<Job> {
    (0..SQUARE_ATTEMPTS)
        .map(|i| {
            let b = *b;
            job(move || {
                let (mf, w) = localisation_fibration_instance(&b, i);
                let lf = match localize_fibration(&mf, &w, b.max_word_len) {
                    Ok(lf) => lf,
                    Err(FibrationError::Truncated(d)) => return Check::truncated(seeded(i), d),
                    Err(e) => return Check::fail(seeded(i), e.to_string()),
                };
                let (sa, sb) = mapping_squares_all(&lf.loc);
                if !(sa && sb) {
                    return Check::fail(seeded(i), format!("square (a) {sa}, square (b) {sb}"));
                }
                let l = &lf.loc;
                for (c, w, lc) in [(&l.q.dom, &l.w_u, &l.i_u.cod), (&l.q.cod, &l.w, &l.i.cod)] {
                    match s_agrees(c, w, lc, b.max_iterations) {
                        Some(Err(e)) => return Check::fail(seeded(i), e),
                        None => return Check::truncated(seeded(i), format!("S-infinity over {} did not stabilise", c.name())),
                        Some(Ok(())) => {}
                    }
                }
                Check::pass(seeded(i)).note(format!("total {}, base {}", counted(l.q.dom.num_objects(), "object"), counted(l.q.cod.num_objects(), "object")))
            })
        })
        .collect()
}

/// Constant families over small bases, and the swap of `J` over the interval.
fn q_prime_fixtures() -> Vec<(String, MarkedFibration, Vec<ArrId>)> {
    let bases: Vec<(FinCat, Vec<&str>)> = vec![(interval(), vec!["f"]), (poset(2), vec!["0<1"]), (walking_iso(), vec!["f", "g"]), (walking_idempotent(), vec!["e"])];
    let mut out = Vec::new();
    for (base, ws) in bases {
        let base = arc(base);
        let w: Vec<ArrId> = ws.iter().map(|a| base.find_arrow(a).expect("fixture arrow")).collect();
        for fib in [terminal(), interval(), walking_iso()] {
            let name = format!("{}-over-{}", fib.name(), base.name());
            let mf = unstraighten(&Pseudofunctor::constant(base.clone(), arc(fib))).expect("constant family");
            out.push((name, mf, w.clone()));
        }
    }
    let i = arc(interval());
    let j = arc(walking_iso());
    let swap = Functor::new(j.clone(), j.clone(), vec![1, 0], (0..j.num_arrows()).map(|a| j.inverse(a).expect("groupoid")).collect::<Vec<_>>()).ok();
    if let Some(swap) = swap.filter(|s| s.check().is_ok()) {
        let maps = (0..i.num_arrows()).map(|a| if i.is_identity(a) { Functor::identity(j.clone()) } else { swap.clone() }).collect();
        let mf = unstraighten(&Pseudofunctor::strict(i.clone(), vec![j.clone(), j.clone()], maps).expect("strict")).expect("family");
        out.push(("swap-over-I".to_string(), mf, vec![i.find_arrow("f").expect("f")]));
    }
    out
}

fn q_prime_check(id: String, mf: &MarkedFibration, w: &[ArrId], b: &Bounds) -> Check {
    match localize_fibration(mf, w, b.max_word_len) {
        Ok(lf) if lf.verified() => Check::pass(id),
        Ok(lf) => Check::fail(id, format!("fibration {}, pullback square {}, marks preserved {}", lf.fibration.is_some(), lf.square_is_pullback, lf.marks_preserved)),
        Err(FibrationError::Truncated(d)) => Check::truncated(id, d),
        Err(e) => Check::fail(id, e.to_string()),
    }
}

fn q_prime_cocartesian(b: &Bounds) -> Vec<Job> {
    let mut out: Vec<Job> = Vec::new();
    for (name, mf, w) in q_prime_fixtures() {
        let b = *b;
        out.push(job(move || q_prime_check(format!("fixture/{name}"), &mf, &w, &b)));
    }
    for i in 0..SQUARE_ATTEMPTS {
        let b = *b;
        out.push(job(move || {
            let (mf, w) = localisation_fibration_instance(&b, i);
            q_prime_check(seeded(i), &mf, &w, &b)
        }));
    }
    out
}

fn descent_localisation(b: &Bounds) -> Vec<Job> {
    let mut out: Vec<Job> = Vec::new();
    let bb = *b;
    out.push(job(move || match descent_interval_census(2, 4, bb.max_word_len) {
        Ok(c) if c.passed() => Check::pass("census/interval").note(format!(
            "{} fibres, {} over J, {} over I, {} fully faithful pairs",
            c.fibres, c.over_iso, c.over_interval, c.fully_faithful_pairs
        )),
        Ok(c) => Check::fail("census/interval", format!("{c:?}")),
        Err(FibrationError::Truncated(d)) => Check::truncated("census/interval", d),
        Err(e) => Check::fail("census/interval", e.to_string()),
    }));
    for i in 0..10 {
        let b = *b;
        out.push(job(move || {
            let (mf, w) = localisation_fibration_instance(&b, i);
            match descent_localisation_check(&mf, &w, b.max_word_len) {
                Ok(r) => Check::expect(seeded(i), r.passed(), || format!("{r:?}")),
                Err(FibrationError::Truncated(d)) => Check::truncated(seeded(i), d),
                Err(e) => Check::fail(seeded(i), e.to_string()),
            }
        }));
    }
    out
}

fn conduche_counterexample(_: &Bounds) -> Vec<Job> {
    vec![jobs(|| {
        let q = delta3_conduche();
        let base = q.cod.clone();
        let w = [base.hom(0, 2)[0], base.hom(1, 3)[0]];
        let idem = arc(walking_idempotent());
        let sr = arc(walking_section_retraction());
        let (f0, f1) = (fibre(&q, 0), fibre(&q, 1));
        vec![
            Check::expect("delta3/conduche", is_conduche(&q), || format!("{:?}", conduche_witness(&q))),
            Check::expect("delta3/inverts-w", conduche_inverts_w(&q, &w), || "W = {0->2, 1->3} not inverted".into()),
            Check::expect("delta3/not-cocartesian", is_cocartesian_fibration(&q).is_err(), || "q is a cocartesian fibration".into()),
            Check::expect("delta3/fibres", find_equivalence(&f0.cat, &idem).is_some() && find_equivalence(&f1.cat, &sr).is_some(), || "fibres over 0 and 1 are not Idem and the section-retraction pair".into()),
            Check::expect("delta3/idem-not-sr", find_equivalence(&idem, &sr).is_none(), || "Idem is equivalent to the section-retraction pair".into()),
        ]
    })]
}

fn descent_cocomma(b: &Bounds) -> Vec<Job> {
    (0..14)
        .map(|i| {
            let b = *b;
            job(move || {
                let mut r = b.stream(COCOMMA + i);
                let inst = (0..64).find_map(|_| random_cocomma_instance(&mut r));
                let Some(inst) = inst else { return Check::truncated(seeded(i), "no span with a gluing map in 64 draws") };
                match cocomma_fibration(&inst.mf_p, &inst.mf_q, &inst.f, &inst.g, &inst.phi, b.max_word_len) {
                    Ok(cf) => Check::expect(seeded(i), cf.glue.verified(), || format!("recovered {:?}", cf.glue.recovered)),
                    Err(FibrationError::Truncated(d)) => Check::truncated(seeded(i), d),
                    Err(e) => Check::fail(seeded(i), e.to_string()),
                }
            })
        })
        .collect()
}

fn glue_verdict(id: &str, r: Result<crate::descent_colimits::DescentGlue, FibrationError>, expect: impl FnOnce(&MarkedFibration) -> bool) -> Check {
    match r {
        Ok(g) if g.verified() && expect(&g.fibration) => Check::pass(id),
        Ok(g) => Check::fail(id, format!("recovered {:?}, total {} objects {} arrows", g.recovered, g.fibration.total().num_objects(), g.fibration.total().num_arrows())),
        Err(FibrationError::Truncated(d)) => Check::truncated(id, d),
        Err(e) => Check::fail(id, e.to_string()),
    }
}

fn descent_glue(b: &Bounds) -> Vec<Job> {
    let max = b.max_stages;
    vec![
        job(move || {
            let mf = over_point(walking_idempotent());
            let stages = vec![mf.clone(), mf.clone(), mf.clone()];
            let bl = vec![Functor::identity(mf.p.cod.clone()); 2];
            let tl = vec![Functor::identity(mf.p.dom.clone()); 2];
            glue_verdict("fixture/constant-stages", sequential_descent_glue(&stages, &bl, &tl, max), |g| crate::descent::find_equivalence_over(&g.p, &mf.p).is_some())
        }),
        job(move || {
            let i = arc(interval());
            let fs = arc(walking_section_retraction());
            let whole = unstraighten(&Pseudofunctor::constant(i.clone(), fs)).expect("constant family");
            let fib0 = fibre(&whole.p, 0);
            let stage0 = is_cocartesian_fibration(&Functor::constant(fib0.cat.clone(), arc(terminal()), 0)).expect("over a point");
            let pt = Functor::constant(stage0.p.cod.clone(), i.clone(), 0);
            let stages = vec![stage0, whole.clone(), whole.clone()];
            let bl = vec![pt, Functor::identity(i)];
            let tl = vec![fib0.incl.clone(), Functor::identity(whole.p.dom.clone())];
            glue_verdict("fixture/fibre-then-whole", sequential_descent_glue(&stages, &bl, &tl, max), |g| crate::descent::find_equivalence_over(&g.p, &whole.p).is_some())
        }),
        job(|| {
            let z2 = arc(cyclic_group(2));
            let d = arc(discrete(2));
            let sigma = Functor::new(d.clone(), d.clone(), vec![1, 0], vec![d.id(1), d.id(0)]).expect("swap");
            let maps = (0..z2.num_arrows()).map(|a| if z2.is_identity(a) { Functor::identity(d.clone()) } else { sigma.clone() }).collect();
            let pf = Pseudofunctor::strict(z2, vec![d], maps).expect("action");
            glue_verdict("fixture/order-two-action", groupoid_descent(&pf), |g| g.total().num_objects() == 2 && g.total().num_arrows() == 4)
        }),
        job(|| {
            let x = arc(discrete(2));
            let fibres = vec![arc(walking_idempotent()), arc(poset(1))];
            let maps = vec![Functor::identity(fibres[0].clone()), Functor::identity(fibres[1].clone())];
            let pf = Pseudofunctor::strict(x, fibres, maps).expect("discrete family");
            glue_verdict("fixture/discrete-groupoid", groupoid_descent(&pf), |g| g.total().num_objects() == 3 && g.total().num_arrows() == 5)
        }),
        job(|| {
            let j = arc(walking_iso());
            let pf = Pseudofunctor::constant(j, arc(walking_section_retraction()));
            glue_verdict("fixture/constant-over-J", groupoid_descent(&pf), |g| g.total().num_objects() == 4)
        }),
    ]
}

fn join_correctness(b: &Bounds) -> Vec<Job> {
    [interval(), poset(2), walking_iso(), walking_idempotent()]
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let b = *b;
            job(move || {
                let c = arc(c);
                let id = format!("tower/{k}-{}", c.name());
                let f = core_inclusion(&c);
                match join_tower(&f, &f, b.max_stages, b.max_word_len) {
                    Ok(t) => {
                        let onto = t.limit.as_ref().is_some_and(|g| find_equivalence(&g.dom, &c).is_some());
                        let within = t.stable_stage.is_some_and(|s| s <= b.max_stages);
                        let statuses: Vec<String> = t.stages.iter().map(|s| format!("{:?}", s.status)).collect();
                        let chk = Check::expect(id, t.verified() && onto && within, || format!("stable {:?}, fully faithful {}, image {}, stages {statuses:?}", t.stable_stage, t.fully_faithful, t.image_matches));
                        match t.stable_stage {
                            Some(s) => chk.note(format!("stable at stage {s}")),
                            None => chk,
                        }
                    }
                    Err(e) => Check::fail(id, e.to_string()),
                }
            })
        })
        .collect()
}

fn completion(b: &Bounds) -> Result<UniverseTower, String> {
    let (p, q0) = point_and_interval_family();
    univalent_completion(&p, &q0, b.max_stages, b.max_word_len).map_err(|e| e.to_string())
}

fn universe(b: &Bounds) -> Vec<Job> {
    let b = *b;
    vec![jobs(move || {
        let t = match completion(&b) {
            Ok(t) => t,
            Err(e) => return vec![Check::fail("universe/completion", e)],
        };
        let stable = Check::expect("universe/stabilises", t.stable_stage.is_some(), || format!("{:?}", t.stages));
        let stable = match t.stable_stage {
            Some(s) => stable.note(format!("stable at stage {s}")),
            None => stable,
        };
        let Some(u) = t.universe.as_ref() else { return vec![stable] };
        let fibres: Vec<Arc<FinCat>> = u.fibres.iter().map(|f| f.cat.clone()).collect();
        let targets = [arc(terminal()), arc(interval())];
        let classes: Vec<Option<usize>> = fibres.iter().map(|f| targets.iter().position(|t| find_equivalence(f, t).is_some())).collect();
        let exactly = classes.len() == 2 && classes.contains(&Some(0)) && classes.contains(&Some(1));
        vec![
            stable,
            Check::expect("universe/directed-univalent", t.directed_univalent, || "defect in the completed universe".into()),
            Check::expect("universe/classifies", exactly && t.same_fibres, || format!("fibre classes {classes:?}")),
        ]
    })]
}

fn straightening(b: &Bounds) -> Vec<Job> {
    let b = *b;
    vec![jobs(move || {
        let u = match completion(&b).map(|t| t.universe) {
            Ok(Some(u)) => u,
            Ok(None) => return vec![Check::truncated("universe/completion", "completion did not stabilise")],
            Err(e) => return vec![Check::fail("universe/completion", e)],
        };
        use rayon::prelude::*;
        (0..5)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut r = b.stream(STRAIGHTEN + i);
                let d = arc(random_fincat(&mut r, 3));
                let fs = match all_functors(&d, u.base(), &SearchOptions::default(), &Default::default()) {
                    Ok(fs) => fs,
                    Err(e) => return vec![Check::truncated(format!("seeded/{i}-recover"), e.to_string())],
                };
                let f = fs.choose(&mut r).expect("a functor to a nonempty category").clone();
                let g = fs.choose(&mut r).expect("nonempty").clone();
                let rid = format!("seeded/{i}-recover");
                let recover = match pullback_fibration(&u, &f).map_err(|e| e.to_string()).and_then(|(q, _)| straighten_against(&u, &q).map_err(|e| e.to_string())) {
                    Ok(s) if s.verified() && naturally_isomorphic(&f, &s.functor) => Check::pass(rid).note(format!("{} -> {}", d.name(), f.describe())),
                    Ok(s) => Check::fail(rid, format!("{} straightened to {}", f.describe(), s.functor.describe())),
                    Err(e) => Check::fail(rid, e),
                };
                let uid = format!("seeded/{i}-unique");
                let unique = match (straightening_uniqueness_check(&u, &f, &f), straightening_uniqueness_check(&u, &f, &g)) {
                    (Ok(a), Ok(c)) if a.agrees() && c.agrees() => Check::pass(uid),
                    (Ok(a), Ok(c)) => Check::fail(uid, format!("{a:?} {c:?}")),
                    (Err(e), _) | (_, Err(e)) => Check::fail(uid, e.to_string()),
                };
                vec![recover, unique]
            })
            .collect()
    })]
}

/// Unit of every stabilised S-infinity run over `c` is orthogonal to the
/// local objects found; `None` when no run stabilises.
fn ortho(c: &Arc<FinCat>, w: &[ArrId], max_iterations: usize) -> Option<Result<usize, String>> {
    let cs = LocalisationCospan::at_arrows(c, w);
    let runs: Vec<(usize, SInfty)> = (0..c.num_objects()).map(|y| (y, kelly_s_infty(&cs, &Presheaf::representable(c.clone(), y), max_iterations))).collect();
    let mut locals: Vec<Presheaf> = runs.iter().filter_map(|(_, s)| s.value().cloned()).collect();
    locals.push(Presheaf::terminal(c.clone()));
    let mut checked = 0;
    for (y, s) in &runs {
        let SInfty::Stable { unit, .. } = s else { continue };
        let x = Presheaf::representable(c.clone(), *y);
        for l in &locals {
            if !s_infty_ortho_check(unit, l) {
                return Some(Err(format!("{}: S-infinity unit at {} is not orthogonal", c.name(), c.obj_label(*y))));
            }
            match s_ortho_check(&cs, &x, l) {
                Ok(true) => {}
                Ok(false) => return Some(Err(format!("{}: S unit at {} is not orthogonal", c.name(), c.obj_label(*y)))),
                Err(e) => return Some(Err(e.to_string())),
            }
        }
        checked += 1;
    }
    (checked > 0).then_some(Ok(checked))
}

fn ortho_check(id: String, c: &Arc<FinCat>, w: &[ArrId], b: &Bounds) -> Check {
    match ortho(c, w, b.max_iterations) {
        Some(Ok(n)) => Check::pass(id).note(format!("{n} stabilised runs")),
        Some(Err(e)) => Check::fail(id, e),
        None => Check::truncated(id, "no run stabilised"),
    }
}

fn s_ortho(b: &Bounds) -> Vec<Job> {
    let mut out: Vec<Job> = Vec::new();
    for (name, c, w) in oracle_fixtures() {
        let b = *b;
        out.push(job(move || ortho_check(format!("oracle/fixture-{name}"), &c, &w, &b)));
    }
    for i in 0..ORACLE_ATTEMPTS {
        let b = *b;
        out.push(job(move || {
            let (c, w) = oracle_instance(&mut b.stream(ORACLE + i));
            ortho_check(format!("oracle/seeded-{i:03}"), &c, &w, &b)
        }));
    }
    for i in 0..SQUARE_ATTEMPTS {
        let b = *b;
        out.push(jobs(move || {
            let (mf, w) = localisation_fibration_instance(&b, i);
            let w_u = crate::descent::cocartesian_lifts(&mf, &w);
            let total = ortho_check(format!("squares/seeded-{i:03}-total"), &mf.p.dom, &w_u, &b);
            let base = ortho_check(format!("squares/seeded-{i:03}-base"), &mf.p.cod, &w, &b);
            vec![total, base]
        }));
    }
    out
}

fn big_list(b: &Bounds) -> Vec<Job> {
    let seed = b.seed;
    vec![jobs(move || {
        let r = big_list_property_suite(seed, 100);
        r.results
            .iter()
            .map(|p| {
                let id = format!("property/{}", p.property);
                let c = Check::expect(id, p.passed == p.total, || p.first_failure.clone().unwrap_or_default());
                c.note(format!("{}: {}/{}", p.description, p.passed, p.total))
            })
            .collect()
    })]
}

