use std::sync::Arc;

use petgraph::graph::UnGraph;

use super::{generate, job, jobs, run_suite, Bounds, Check, Job, Kind, Need, Suite};
use crate::constructions::{
    comma, coproduct, core, full_subcategory, functor_category, is_equivalence, is_fully_faithful, is_surjective_on_isoclasses, localisation_preserves_pullback_check, pi0, product, pullback,
    wide_subcategory,
};
use crate::fibration::{
    cocartesian_arrows, cofinal_factorization, inverts_w, is_cocartesian_fibration, is_left_cofinal, is_left_fibration, is_right_fibration, straightening_roundtrip, unstraighten, Pseudofunctor,
};
use crate::fincat::{Budget, FinCat};
use crate::fixtures::{discrete, interval, poset, terminal, walking_idempotent, walking_iso, walking_section_retraction};
use crate::functor::Functor;
use crate::generate::{random_fincat, random_localisation_instance, random_opfibration, BaseShape};
use crate::gluing::LocalisationGluing;
use crate::kelly::LocalisationCospan;
use crate::presentation::{cocomma, localize, pushout, saturate, sequential_colimit, Path, Presentation, SeqColimit};
use crate::presheaf::{all_maps, lan, seq_colimit, Copresheaf, Presheaf, PresheafColimit, PresheafMap};
use crate::search::{find_equivalence, find_isomorphism};

fn arc(c: FinCat) -> Arc<FinCat> {
    Arc::new(c)
}

fn shape(c: &FinCat) -> (usize, usize) {
    (c.num_objects(), c.num_arrows())
}

fn sized(id: &str, got: (usize, usize), want: (usize, usize)) -> Check {
    Check::expect(id, got == want, || format!("(objects, arrows) = {got:?}, expected {want:?}"))
}

fn failed(id: &str, e: impl ToString) -> Check {
    Check::fail(id, e.to_string())
}

pub fn suites() -> Vec<Suite> {
    vec![
        Suite {
            name: "constructions",
            criterion: None,
            title: "limits, colimits, subcategories and equivalences of finite categories",
            ops: &[
                "product",
                "coproduct",
                "pullback",
                "comma",
                "functor_category",
                "core",
                "full_subcategory",
                "wide_subcategory",
                "is_fully_faithful",
                "is_surjective_on_isoclasses",
                "is_equivalence",
                "pi0",
                "localisation_preserves_pullback_check",
            ],
            needs: &[("fixture", Need::All), ("seeded", Need::All)],
            build: constructions,
        },
        Suite {
            name: "presentations",
            criterion: None,
            title: "saturation, pushouts, cocommas, localisations and sequential colimits",
            ops: &["saturate", "pushout", "cocomma", "localize", "sequential_colimit"],
            needs: &[("fixture", Need::All)],
            build: presentations,
        },
        Suite {
            name: "presheaves",
            criterion: None,
            title: "restriction, left Kan extension, colimits and glued presheaves",
            ops: &["restrict", "lan", "presheaf_pushout", "presheaf_seq_colimit", "arrow_left_adjoint", "gl_is_cartesian", "check_good", "check_nice"],
            needs: &[("fixture", Need::All), ("seeded", Need::All)],
            build: presheaves,
        },
        Suite {
            name: "fibrations",
            criterion: None,
            title: "left and right fibrations, cofinality and straightening",
            ops: &["is_left_fibration", "is_right_fibration", "is_left_cofinal", "cofinal_factorization", "cocartesian_arrows", "straighten_finite", "unstraighten", "inverts_W", "transport"],
            needs: &[("fixture", Need::All), ("seeded", Need::All)],
            build: fibrations,
        },
        Suite {
            name: "harness",
            criterion: None,
            title: "parsing, serialisation, generation and report determinism",
            ops: &["parse", "emit_json", "emit_dot", "generate", "run_suite"],
            needs: &[("fixture", Need::All)],
            build: harness,
        },
    ]
}

fn constructions(b: &Bounds) -> Vec<Job> {
    let budget = Budget::default();
    let mut out: Vec<Job> = vec![
        job(move || match product(&arc(interval()), &arc(walking_iso()), &budget) {
            Ok(s) => sized("fixture/product-I-J", shape(&s.cat), (4, 12)),
            Err(e) => failed("fixture/product-I-J", e),
        }),
        job(|| match coproduct(&arc(interval()), &arc(walking_iso())) {
            Ok(s) => sized("fixture/coproduct-I-J", shape(&s.cat), (4, 7)),
            Err(e) => failed("fixture/coproduct-I-J", e),
        }),
        job(move || {
            let (i, one) = (arc(interval()), arc(terminal()));
            let t = Functor::constant(i.clone(), one, 0);
            match pullback(&t, &t, &budget) {
                Ok(s) => sized("fixture/pullback-over-point", shape(&s.cat), (4, 9)),
                Err(e) => failed("fixture/pullback-over-point", e),
            }
        }),
        job(move || {
            let i = arc(interval());
            let id = Functor::identity(i.clone());
            match (comma(&id, &id, &budget), functor_category(&i, &i, &budget)) {
                (Ok(c), Ok(f)) => Check::expect("fixture/comma-is-arrow-category", shape(&c.cat) == (3, 6) && find_isomorphism(&c.cat, &f.cat).is_some(), || format!("comma {:?}, functors {:?}", shape(&c.cat), shape(&f.cat))),
                (Err(e), _) | (_, Err(e)) => failed("fixture/comma-is-arrow-category", e),
            }
        }),
        job(|| {
            let (i, j) = (arc(interval()), arc(walking_iso()));
            Check::expect("fixture/core", shape(&core(&i).cat) == (2, 2) && find_isomorphism(&core(&j).cat, &j).is_some(), || "core of I or J is wrong".into())
        }),
        job(|| {
            let c = arc(poset(2));
            let s = full_subcategory(&c, |x| x != 1);
            let ok = find_isomorphism(&s.cat, &arc(interval())).is_some() && is_fully_faithful(&s.incl);
            Check::expect("fixture/full-subcategory", ok, || format!("{:?}", shape(&s.cat)))
        }),
        job(|| {
            let j = arc(walking_iso());
            match wide_subcategory(&j, |a| j.is_identity(a)) {
                Ok(s) => Check::expect("fixture/wide-subcategory", shape(&s.cat) == (2, 2) && !is_fully_faithful(&s.incl), || format!("{:?}", shape(&s.cat))),
                Err(e) => failed("fixture/wide-subcategory", e),
            }
        }),
        job(|| {
            let one = arc(terminal());
            let to_one = |c: FinCat| Functor::constant(arc(c), one.clone(), 0);
            let pick = Functor::constant(one.clone(), arc(interval()), 0);
            let ok = is_equivalence(&to_one(walking_iso()))
                && !is_equivalence(&to_one(interval()))
                && is_surjective_on_isoclasses(&to_one(interval()))
                && !is_surjective_on_isoclasses(&pick)
                && is_fully_faithful(&pick);
            Check::expect("fixture/equivalences", ok, || "equivalence predicates disagree with J ~ 1, I !~ 1".into())
        }),
        job(move || {
            let one = arc(terminal());
            let mut bad = Vec::new();
            for (c, d) in [(interval(), walking_idempotent()), (walking_section_retraction(), interval()), (walking_iso(), poset(2))] {
                let (c, d) = (arc(c), arc(d));
                let pr = match product(&c, &d, &budget) {
                    Ok(pr) => pr,
                    Err(e) => return failed("fixture/localisation-preserves-product", e),
                };
                let tc = Functor::constant(c.clone(), one.clone(), 0);
                let td = Functor::constant(d.clone(), one.clone(), 0);
                match localisation_preserves_pullback_check(&pr.left, &pr.right, &tc, &td) {
                    Ok(true) => {}
                    Ok(false) => bad.push(format!("{} x {}", c.name(), d.name())),
                    Err(e) => return failed("fixture/localisation-preserves-product", e),
                }
            }
            Check::expect("fixture/localisation-preserves-product", bad.is_empty(), || bad.join(", "))
        }),
    ];
    for i in 0..20 {
        let b = *b;
        out.push(job(move || {
            let c = random_fincat(&mut b.stream(7_000 + i), 5);
            let mut g = UnGraph::<(), ()>::new_undirected();
            let nodes: Vec<_> = (0..c.num_objects()).map(|_| g.add_node(())).collect();
            for a in c.non_identity_arrows() {
                g.add_edge(nodes[c.src(a)], nodes[c.tgt(a)], ());
            }
            let want = petgraph::algo::connected_components(&g);
            let got = pi0(&c).count;
            Check::expect(format!("seeded/{i:02}-pi0"), got == want, || format!("pi0 {got}, graph components {want}"))
        }));
    }
    out
}

fn presentations(b: &Bounds) -> Vec<Job> {
    let max = b.max_word_len;
    let stages = b.max_stages;
    vec![
        job(move || {
            let gens = vec![crate::fincat::Arrow::new("e", 0, 0)];
            let rel = (Path { src: 0, tgt: 0, word: vec![0, 0] }, Path { src: 0, tgt: 0, word: vec![0] });
            let idem = Presentation::new("Idem", vec!["x".into()], gens.clone(), vec![rel]).and_then(|p| saturate(&p, max));
            let free = Presentation::new("N", vec!["x".into()], gens, vec![]).and_then(|p| saturate(&p, max));
            match (idem, free) {
                (Ok(i), Ok(f)) => Check::expect("fixture/saturate", i.exact().is_some_and(|c| c.num_arrows() == 2) && !f.is_exact(), || format!("idempotent {:?}, free loop exact {}", i.growth, f.is_exact())),
                (Err(e), _) | (_, Err(e)) => failed("fixture/saturate", e),
            }
        }),
        job(move || {
            let (one, i) = (arc(terminal()), arc(interval()));
            let end = Functor::constant(one.clone(), i.clone(), 1);
            let start = Functor::constant(one, i, 0);
            match pushout(&end, &start, max) {
                Ok(p) => match p.saturation.exact() {
                    Some(c) => Check::expect("fixture/pushout-of-intervals", find_isomorphism(c, &arc(poset(2))).is_some(), || format!("{:?}", shape(c))),
                    None => Check::truncated("fixture/pushout-of-intervals", format!("{:?}", p.saturation.growth)),
                },
                Err(e) => failed("fixture/pushout-of-intervals", e),
            }
        }),
        job(move || {
            let one = arc(terminal());
            let id = Functor::identity(one);
            match cocomma(&id, &id, max) {
                Ok(c) => match c.saturation.exact() {
                    Some(cat) => Check::expect("fixture/cocomma-of-points", find_isomorphism(cat, &arc(interval())).is_some(), || format!("{:?}", shape(cat))),
                    None => Check::truncated("fixture/cocomma-of-points", format!("{:?}", c.saturation.growth)),
                },
                Err(e) => failed("fixture/cocomma-of-points", e),
            }
        }),
        job(move || {
            let i = arc(interval());
            match localize(&i, &[i.find_arrow("f").expect("f")], max) {
                Ok(l) => match l.saturation.exact() {
                    Some(c) => Check::expect("fixture/localize-interval", find_isomorphism(c, &arc(walking_iso())).is_some(), || format!("{:?}", shape(c))),
                    None => Check::truncated("fixture/localize-interval", format!("{:?}", l.saturation.growth)),
                },
                Err(e) => failed("fixture/localize-interval", e),
            }
        }),
        job(move || {
            let (d, i) = (arc(discrete(2)), arc(interval()));
            let incl = Functor::new(d.clone(), i.clone(), vec![0, 1], vec![i.id(0), i.id(1)]).expect("inclusion");
            let links = vec![incl, Functor::identity(i.clone())];
            match sequential_colimit(&[d, i.clone(), i.clone()], &links, stages) {
                Ok(SeqColimit::Stable { stage, cat, .. }) => Check::expect("fixture/sequential-colimit", stage == 1 && find_isomorphism(&cat, &i).is_some(), || format!("stage {stage}, {:?}", shape(&cat))),
                Ok(SeqColimit::Truncated { growth }) => Check::truncated("fixture/sequential-colimit", format!("{growth:?}")),
                Err(e) => failed("fixture/sequential-colimit", e),
            }
        }),
    ]
}

fn presheaves(b: &Bounds) -> Vec<Job> {
    let mut out: Vec<Job> = vec![
        job(|| {
            let (one, i) = (arc(terminal()), arc(interval()));
            let at0 = Functor::constant(one.clone(), i.clone(), 0);
            let y1 = Presheaf::representable(i.clone(), 1);
            let y0 = Presheaf::representable(i.clone(), 0);
            let ok = y1.restrict(&at0).sets == vec![1] && y0.restrict(&Functor::constant(one, i.clone(), 1)).sets == vec![0] && y1.restrict(&Functor::identity(i)) == y1;
            Check::expect("fixture/restrict-representables", ok, || "restriction of representables along points is wrong".into())
        }),
        job(|| {
            let (one, i) = (arc(terminal()), arc(interval()));
            let at0 = Functor::constant(one.clone(), i.clone(), 0);
            let l = lan(&at0, &Presheaf::terminal(one));
            Check::expect("fixture/lan-of-point-is-representable", l.value.sets == Presheaf::representable(i, 0).sets, || format!("{:?}", l.value.sets))
        }),
        job(|| {
            let i = arc(interval());
            let y1 = Presheaf::representable(i.clone(), 1);
            let e = Presheaf::empty(i.clone());
            let to = |p: &Presheaf| PresheafMap::new(e.clone(), p.clone(), vec![vec![]; i.num_objects()]).expect("from empty");
            match crate::presheaf::pushout(&to(&y1), &to(&y1)) {
                Ok(po) => Check::expect("fixture/pushout-over-empty", po.value.sets == vec![2, 2], || format!("{:?}", po.value.sets)),
                Err(e) => failed("fixture/pushout-over-empty", e),
            }
        }),
        job(|| {
            let i = arc(interval());
            let y0 = Presheaf::representable(i.clone(), 0);
            let t = Presheaf::terminal(i);
            let m = all_maps(&y0, &t).pop().expect("a map to the terminal presheaf");
            let links = vec![m, PresheafMap::identity(&t), PresheafMap::identity(&t)];
            match seq_colimit(&links, 6) {
                PresheafColimit::Stable { stage, value, .. } => Check::expect("fixture/presheaf-seq-colimit", stage == 1 && value.sets == vec![1, 1], || format!("stage {stage}, {:?}", value.sets)),
                PresheafColimit::Truncated { growth } => Check::truncated("fixture/presheaf-seq-colimit", format!("{growth:?}")),
            }
        }),
        job(|| {
            let c = arc(interval());
            let cs = LocalisationCospan::at_arrows(&c, &[c.find_arrow("f").expect("f")]);
            let w = cs.w.clone();
            let u = Presheaf::terminal(w.clone());
            let v = Presheaf::new(w, vec![2], vec![vec![0, 1]]).expect("two points");
            let mut bad = Vec::new();
            for x in all_maps(&u, &v) {
                for y in [Presheaf::terminal(c.clone()), Presheaf::representable(c.clone(), 1), Presheaf::representable(c.clone(), 0)] {
                    let (l, r) = cs.adjunction_counts(&x, &y);
                    if l != r {
                        bad.push(format!("{l} != {r}"));
                    }
                }
            }
            Check::expect("fixture/arrow-left-adjoint", bad.is_empty(), || bad.join(", "))
        }),
    ];
    for i in 0..6 {
        let b = *b;
        out.push(job(move || {
            let id = format!("seeded/{i:02}-glued-representables");
            let (mf, w) = random_localisation_instance(&mut b.stream(8_000 + i));
            let lg = match LocalisationGluing::new(&mf.p, &w) {
                Ok(lg) => lg,
                Err(e) => return failed(&id, e),
            };
            for a in 0..mf.p.dom.num_objects() {
                let x = lg.gl.yo_gl(a);
                if !lg.check_good(&x) {
                    return Check::fail(id, format!("representable at {} is not good", mf.total().obj_label(a)));
                }
                for c in 0..mf.p.cod.num_objects() {
                    match lg.check_nice(&x, c) {
                        Ok(true) => {}
                        Ok(false) => return Check::fail(id, format!("representable at {} is not nice at {}", mf.total().obj_label(a), mf.base().obj_label(c))),
                        Err(e) => return failed(&id, e),
                    }
                }
                let lift = lg.gl.cartesian_lift(&x, &PresheafMap::identity(&x.down));
                if !lg.gl.is_cartesian(&lift) {
                    return Check::fail(id, "identity lift is not cartesian");
                }
            }
            Check::pass(id)
        }));
    }
    out
}

fn fibrations(b: &Bounds) -> Vec<Job> {
    let mut out: Vec<Job> = vec![
        job(|| {
            let c = arc(poset(2));
            let (_, cod) = Copresheaf::corepresentable(c.clone(), 0).elements();
            let (_, dom) = Presheaf::representable(c, 0).elements();
            let ok = is_left_fibration(&cod) && is_right_fibration(&dom) && !is_left_fibration(&dom) && !is_left_fibration(&Functor::constant(arc(interval()), arc(terminal()), 0));
            Check::expect("fixture/left-and-right-fibrations", ok, || "elements of (co)representables misclassified".into())
        }),
        job(|| {
            let one = arc(terminal());
            let end = Functor::constant(one.clone(), arc(interval()), 1);
            let (cof, fib) = cofinal_factorization(&end);
            let ok = is_left_cofinal(&Functor::constant(one, arc(poset(2)), 0)) && !is_left_cofinal(&end) && is_left_cofinal(&cof) && is_left_fibration(&fib) && cof.then(&fib).obj == end.obj;
            Check::expect("fixture/cofinality", ok, || "cofinal factorisation of 1 -> I at the target".into())
        }),
        job(|| {
            let mf = unstraighten(&Pseudofunctor::constant(arc(interval()), arc(walking_idempotent()))).expect("constant family");
            let marked: Vec<usize> = (0..mf.total().num_arrows()).filter(|&a| mf.marked[a]).collect();
            let ok = cocartesian_arrows(&mf.p) == marked && mf.transport(mf.base().find_arrow("f").expect("f")).is_identity();
            Check::expect("fixture/marked-are-cocartesian", ok, || format!("{} marked", marked.len()))
        }),
    ];
    for i in 0..12 {
        let b = *b;
        out.push(job(move || {
            let id = format!("seeded/{i:02}-straighten");
            let mut r = b.stream(9_000 + i);
            let shapes = BaseShape::all();
            let shape = shapes[i % shapes.len()];
            let (_, mf, isos) = random_opfibration(&mut r, shape, 0.5);
            if !inverts_w(&mf, &isos) {
                return Check::fail(id, "generated iso transports are not equivalences");
            }
            if is_cocartesian_fibration(&mf.p).is_err() {
                return Check::fail(id, "not a cocartesian fibration");
            }
            match straightening_roundtrip(&mf) {
                Ok(true) => Check::pass(id),
                Ok(false) => Check::fail(id, "unstraightening the straightening is not equivalent over the base"),
                Err(e) => failed(&id, e),
            }
        }));
    }
    out
}

fn harness(_: &Bounds) -> Vec<Job> {
    vec![
        job(|| match crate::dsl::parse_str("category I { objects a b; arrows f: a -> b }").and_then(|f| crate::dsl::resolve(f, &[])) {
            Ok(ws) => Check::expect("fixture/parse-interval", find_isomorphism(&ws.categories[0], &arc(interval())).is_some(), || "not the interval".into()),
            Err(e) => failed("fixture/parse-interval", e),
        }),
        job(|| {
            let ws = generate(Kind::Opfibration, 3, 2).file;
            let back = crate::dsl::parse_json(&crate::dsl::emit_json(&ws)).and_then(|f| crate::dsl::resolve(f, &[]));
            match back {
                Ok(r) => Check::expect("fixture/json-round-trip", r.file == ws, || "JSON round trip changed the workspace".into()),
                Err(e) => failed("fixture/json-round-trip", e),
            }
        }),
        job(|| {
            let s = crate::emit::dot_fincat(&poset(2));
            Check::expect("fixture/emit-dot", s.starts_with("digraph") && s.matches("->").count() == 3, || s.clone())
        }),
        job(|| {
            let same = (0..3).all(|seed| generate(Kind::Fincat, seed, 3) == generate(Kind::Fincat, seed, 3));
            Check::expect("fixture/generate-deterministic", same, || "two draws from one seed differ".into())
        }),
        jobs(|| {
            let b = Bounds::default();
            let runs = (run_suite("conduche-counterexample", &b), run_suite("conduche-counterexample", &b));
            vec![match runs {
                (Ok(x), Ok(y)) => Check::expect("fixture/reports-byte-identical", x.to_json() == y.to_json(), || "reports differ between runs".into()),
                (Err(e), _) | (_, Err(e)) => failed("fixture/reports-byte-identical", e),
            }]
        }),
        job(|| {
            let c = arc(walking_section_retraction());
            let eq = find_equivalence(&c, &c);
            Check::expect("fixture/self-equivalence", eq.is_some(), || "no equivalence of a category with itself".into())
        }),
    ]
}
