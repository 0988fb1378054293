use std::path::Path;
use std::sync::Arc;

use cocart::constructions::comma;
use cocart::descent::localize_fibration;
use cocart::dsl::{category_decl, emit_dsl, emit_json, fibration_file, functor_decl, parse, resolve, Workspace, WorkspaceFile};
use cocart::emit::{counted, dot_fibration, dot_fincat, size};
use cocart::fibration::{cocartesian_arrows, conduche_witness, is_cocartesian_fibration, straighten_finite, unstraighten, MarkedFibration, Pseudofunctor};
use cocart::fincat::{ArrId, Budget, FinCat};
use cocart::functor::Functor;
use cocart::join::join_tower;
use cocart::presentation::{cocomma, localize, pushout, Saturation};
use cocart::suites::{self, generate, Bounds, Kind, SuiteReport};
use cocart::universe::univalent_completion;
use serde_json::json;

use crate::config::{locate, Config};
use crate::{CliError, Command, Construct, Fib, KindArg};

/// Exit codes besides 0 (success) and 2 (error).
const NEGATIVE: u8 = 1;
const TRUNCATED: u8 = 3;

/// What a command produced, before formatting.
#[derive(Default)]
struct Outcome {
    notes: Vec<String>,
    file: WorkspaceFile,
    dot: Vec<String>,
    json: Option<serde_json::Value>,
    code: u8,
}

impl Outcome {
    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn category(&mut self, name: &str, c: &FinCat) -> Arc<FinCat> {
        let c = Arc::new(c.clone().with_name(name));
        if !self.file.categories.iter().any(|d| d.raw.name == name) {
            self.file.categories.push(category_decl(&c));
            self.dot.push(dot_fincat(&c));
        }
        c
    }

    fn functor(&mut self, name: &str, f: &Functor, dom: &str, cod: &str) {
        let mut d = functor_decl(name, f);
        d.dom = dom.to_string();
        d.cod = cod.to_string();
        self.file.functors.push(d);
    }

    fn fibration(&mut self, name: &str, mf: &MarkedFibration) {
        let f = fibration_file(name, mf);
        for c in f.categories {
            if !self.file.categories.iter().any(|d| d.raw.name == c.raw.name) {
                self.file.categories.push(c);
            }
        }
        self.file.functors.extend(f.functors);
        self.file.fibrations.extend(f.fibrations);
        self.dot.push(dot_fibration(mf));
    }

    fn render(self, cfg: &Config) -> Result<(String, u8), CliError> {
        let text = if cfg.json == Some(true) {
            match self.json {
                Some(v) => serde_json::to_string_pretty(&v).expect("values serialise") + "\n",
                None => String::from_utf8(emit_json(&self.file)).expect("JSON is UTF-8"),
            }
        } else if cfg.dot == Some(true) {
            if self.dot.is_empty() {
                return Err(CliError::Usage("nothing to draw".into()));
            }
            self.dot.concat()
        } else {
            let mut s: String = self.notes.iter().map(|n| format!("# {n}\n")).collect();
            if self.file != WorkspaceFile::default() {
                s.push_str(&emit_dsl(&self.file));
            }
            s
        };
        Ok((text, self.code))
    }
}

fn bounds(cfg: &Config) -> Bounds {
    let d = Bounds::default();
    Bounds {
        seed: cfg.seed.unwrap_or(d.seed),
        max_word_len: cfg.max_word_len.unwrap_or(d.max_word_len),
        max_stages: cfg.max_stages.unwrap_or(d.max_stages),
        max_iterations: cfg.max_iterations.unwrap_or(d.max_iterations),
    }
}

fn load(cfg: &Config, file: &Path) -> Result<Workspace, CliError> {
    Ok(resolve(parse(locate(cfg, file))?, &suites::suite_names())?)
}

fn missing(what: &'static str, name: &str) -> CliError {
    CliError::Missing { what, name: name.to_string() }
}

fn functor<'a>(ws: &'a Workspace, name: &str) -> Result<&'a Functor, CliError> {
    ws.functor(name).ok_or_else(|| missing("functor", name))
}

fn fibration<'a>(ws: &'a Workspace, name: &str) -> Result<&'a MarkedFibration, CliError> {
    ws.fibration(name).ok_or_else(|| missing("fibration", name))
}

fn arrows(c: &FinCat, labels: &[String]) -> Result<Vec<ArrId>, CliError> {
    labels.iter().map(|l| c.find_arrow(l).ok_or_else(|| missing("arrow", l))).collect()
}

fn failed(e: impl ToString) -> CliError {
    CliError::Failed(e.to_string())
}

/// The category of an exact saturation, or a truncation note.
fn exact<'a>(out: &mut Outcome, what: &str, sat: &'a Saturation) -> Option<&'a Arc<FinCat>> {
    let c = sat.exact();
    if c.is_none() {
        out.note(format!("{what}: truncated at the word-length bound, sizes {:?}", sat.growth));
        out.code = TRUNCATED;
    }
    c
}

/// Endpoints of `f` and `g` under their declared names.
fn declare_ends(out: &mut Outcome, f: &Functor, g: &Functor) {
    for c in [&f.dom, &f.cod, &g.dom, &g.cod] {
        out.category(c.name(), c);
    }
}

pub fn run(cmd: &Command, cfg: &Config) -> Result<(String, u8), CliError> {
    let b = bounds(cfg);
    let mut out = Outcome::default();
    match cmd {
        Command::Check { file } => check(cfg, file, &mut out)?,
        Command::Construct(c) => construct(cfg, &b, c, &mut out)?,
        Command::Fib(f) => fib(cfg, &b, f, &mut out)?,
        Command::Verify { suite, file } => return verify(cfg, &b, suite, file.as_deref()),
        Command::Suites => {
            for s in suites::registry() {
                let n = s.criterion.map(|c| c.to_string()).unwrap_or_default();
                out.note(format!("{n:>2} {:<24} {}", s.name, s.title));
            }
            out.json = Some(json!(suites::registry().iter().map(|s| json!({"name": s.name, "criterion": s.criterion, "title": s.title, "operations": s.ops})).collect::<Vec<_>>()));
        }
        Command::Generate { kind, size } => {
            let kind = match kind {
                KindArg::Fincat => Kind::Fincat,
                KindArg::Opfibration => Kind::Opfibration,
                KindArg::LocalisationInstance => Kind::LocalisationInstance,
            };
            let g = generate(kind, b.seed, *size);
            if let Some(w) = &g.w {
                out.note(format!("invert: {}", w.join(" ")));
            }
            let ws = resolve(g.file.clone(), &[])?;
            out.dot = ws.categories.iter().map(|c| dot_fincat(c)).chain(ws.fibrations.iter().map(dot_fibration)).collect();
            if g.w.is_some() {
                out.json = Some(serde_json::to_value(&g).expect("serialisable"));
            }
            out.file = g.file;
        }
    }
    out.render(cfg)
}

fn check(cfg: &Config, file: &Path, out: &mut Outcome) -> Result<(), CliError> {
    let ws = load(cfg, file)?;
    for c in &ws.categories {
        out.note(format!("category {}: {}", c.name(), size(c)));
        out.dot.push(dot_fincat(c));
    }
    for (p, d) in ws.presentations.iter().zip(&ws.file.presentations) {
        out.note(format!("presentation {}: {}, {}", d.name, counted(p.generators.len(), "generator"), counted(p.relations.len(), "relation")));
    }
    for (f, d) in ws.functors.iter().zip(&ws.file.functors) {
        out.note(format!("functor {}: {} -> {}", d.name, f.dom.name(), f.cod.name()));
    }
    for (mf, d) in ws.fibrations.iter().zip(&ws.file.fibrations) {
        let marked = mf.total().non_identity_arrows().filter(|&a| mf.marked[a]).count();
        out.note(format!("fibration {}: {}, {}", d.name, counted(mf.fibres.len(), "fibre"), counted(marked, "marked arrow")));
        out.dot.push(dot_fibration(mf));
    }
    for s in &ws.file.suites {
        out.note(format!("suite {}: {}", s.name, s.runs.join(", ")));
    }
    out.note("ok");
    out.json = Some(serde_json::from_slice(&emit_json(&ws.file)).expect("valid JSON"));
    Ok(())
}

fn construct(cfg: &Config, b: &Bounds, c: &Construct, out: &mut Outcome) -> Result<(), CliError> {
    match c {
        Construct::Comma { file, f, g } => {
            let ws = load(cfg, file)?;
            let (ff, gg) = (functor(&ws, f)?, functor(&ws, g)?);
            let cm = comma(ff, gg, &Budget::default()).map_err(failed)?;
            declare_ends(out, ff, gg);
            let name = format!("{f}/{g}");
            out.category(&name, &cm.cat);
            out.functor(&format!("{name}.dom"), &cm.dom, &name, ff.dom.name());
            out.functor(&format!("{name}.cod"), &cm.cod, &name, gg.dom.name());
            out.note(format!("{name}: {}", size(&cm.cat)));
        }
        Construct::Cocomma { file, f, g } | Construct::Pushout { file, f, g } => {
            let ws = load(cfg, file)?;
            let (ff, gg) = (functor(&ws, f)?, functor(&ws, g)?);
            let is_pushout = matches!(c, Construct::Pushout { .. });
            let (sat, legs) = if is_pushout {
                let p = pushout(ff, gg, b.max_word_len).map_err(failed)?;
                (p.saturation, [p.inl, p.inr])
            } else {
                let p = cocomma(ff, gg, b.max_word_len).map_err(failed)?;
                (p.saturation, [p.k, p.l])
            };
            let name = if is_pushout { format!("{f}+{g}") } else { format!("{f}*{g}") };
            declare_ends(out, ff, gg);
            if let Some(cat) = exact(out, &name, &sat) {
                out.category(&name, cat);
                out.note(format!("{name}: {}", size(cat)));
                for (leg, (suffix, from)) in legs.iter().zip([("in0", ff.cod.name()), ("in1", gg.cod.name())]) {
                    if let Some(leg) = leg {
                        out.functor(&format!("{name}.{suffix}"), leg, from, &name);
                    }
                }
            }
        }
        Construct::Localize { file, category, arrows: labels } => {
            let ws = load(cfg, file)?;
            let cat = ws.category(category).ok_or_else(|| missing("category", category))?;
            let w = arrows(cat, labels)?;
            let loc = localize(cat, &w, b.max_word_len).map_err(failed)?;
            let name = format!("{category}[W^-1]");
            out.category(category, cat);
            if let Some(lc) = exact(out, &name, &loc.saturation) {
                out.category(&name, lc);
                if let Some(i) = &loc.i {
                    out.functor(&format!("{name}.i"), i, category, &name);
                }
                out.note(format!("{name}: {}", size(lc)));
            }
        }
        Construct::Join { file, f, g0 } => {
            let ws = load(cfg, file)?;
            let (ff, gg) = (functor(&ws, f)?, functor(&ws, g0)?);
            let t = join_tower(ff, gg, b.max_stages, b.max_word_len).map_err(failed)?;
            for s in &t.stages {
                out.note(format!("stage {}: {:?}, {:?} objects, {:?} arrows", s.index, s.status, s.objects, s.arrows));
            }
            match (&t.limit, t.stable_stage) {
                (Some(g), Some(n)) => {
                    out.note(format!("stable at stage {n}; fully faithful {}; image matches {}", t.fully_faithful, t.image_matches));
                    let x = format!("{f}.X");
                    out.category(&x, &g.dom);
                    out.category(g.cod.name(), &g.cod);
                    out.functor(&format!("{f}.g"), g, &x, g.cod.name());
                    if !t.verified() {
                        out.code = NEGATIVE;
                    }
                }
                _ => {
                    out.note(format!("no stable stage within {} stages", b.max_stages));
                    out.code = TRUNCATED;
                }
            }
            out.json = Some(json!({"stages": t.stages, "stable_stage": t.stable_stage, "fully_faithful": t.fully_faithful, "image_matches": t.image_matches}));
        }
        Construct::Complete { file, p, q0 } => {
            let ws = load(cfg, file)?;
            let t = univalent_completion(fibration(&ws, p)?, fibration(&ws, q0)?, b.max_stages, b.max_word_len).map_err(failed)?;
            for s in &t.stages {
                out.note(format!("stage {}: {:?}, {:?} objects, {:?} arrows", s.index, s.status, s.objects, s.arrows));
            }
            match &t.universe {
                Some(u) => {
                    out.note(format!("stable at stage {:?}; directed univalent {}; same fibres {}", t.stable_stage, t.directed_univalent, t.same_fibres));
                    out.fibration(&format!("{p}.universe"), u);
                    if !t.verified() {
                        out.code = NEGATIVE;
                    }
                }
                None => {
                    out.note(format!("no stable stage within {} stages", b.max_stages));
                    out.code = TRUNCATED;
                }
            }
            out.json = Some(json!({"stages": t.stages, "stable_stage": t.stable_stage, "directed_univalent": t.directed_univalent, "same_fibres": t.same_fibres, "universe": t.universe.as_ref().map(|u| fibration_file(&format!("{p}.universe"), u))}));
        }
    }
    Ok(())
}

fn fib(cfg: &Config, b: &Bounds, f: &Fib, out: &mut Outcome) -> Result<(), CliError> {
    match f {
        Fib::Mark { file, functor: name } => {
            let ws = load(cfg, file)?;
            let p = functor(&ws, name)?;
            match is_cocartesian_fibration(p) {
                Ok(mf) => {
                    out.note(format!("{name} is a cocartesian fibration"));
                    out.fibration(name, &mf);
                }
                Err(e) => {
                    let e_cat = &p.dom;
                    let cocart: Vec<&str> = cocartesian_arrows(p).into_iter().filter(|&a| !e_cat.is_identity(a)).map(|a| e_cat.arr_label(a)).collect();
                    out.note(format!("{name} is not a cocartesian fibration: {e}"));
                    out.note(format!("cocartesian arrows: {}", cocart.join(" ")));
                    out.json = Some(json!({"fibration": false, "reason": e.to_string(), "cocartesian": cocart}));
                    out.code = NEGATIVE;
                }
            }
        }
        Fib::Straighten { file, fibration: name } => {
            let ws = load(cfg, file)?;
            let mf = fibration(&ws, name)?;
            let pf = straighten_finite(mf);
            let base = pf.base.clone();
            out.category(base.name(), &base);
            let fibre_names: Vec<String> = (0..base.num_objects()).map(|x| format!("{}@{}", base.name(), base.obj_label(x))).collect();
            for (x, fc) in pf.fibres.iter().enumerate() {
                out.category(&fibre_names[x], fc);
            }
            for a in base.non_identity_arrows() {
                let (s, t) = (base.src(a), base.tgt(a));
                out.functor(&format!("{}@{}", base.name(), base.arr_label(a)), &pf.maps[a], &fibre_names[s], &fibre_names[t]);
            }
            if !pf.comparison.is_empty() {
                out.note(format!("{} comparison cells are not identities; the diagram is pseudo", pf.comparison.len()));
            }
        }
        Fib::Unstraighten { file, base } => {
            let ws = load(cfg, file)?;
            let bc = ws.category(base).ok_or_else(|| missing("category", base))?.clone();
            let fibres = (0..bc.num_objects())
                .map(|x| {
                    let n = format!("{base}@{}", bc.obj_label(x));
                    ws.category(&n).cloned().ok_or_else(|| missing("category", &n))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let maps = (0..bc.num_arrows())
                .map(|a| {
                    if bc.is_identity(a) {
                        return Ok(Functor::identity(fibres[bc.src(a)].clone()));
                    }
                    let n = format!("{base}@{}", bc.arr_label(a));
                    functor(&ws, &n).cloned()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let pf = Pseudofunctor::strict(bc, fibres, maps).map_err(failed)?;
            let mf = unstraighten(&pf).map_err(failed)?;
            out.fibration(&format!("{base}.el"), &mf);
        }
        Fib::Localize { file, fibration: name, arrows: labels } => {
            let ws = load(cfg, file)?;
            let mf = fibration(&ws, name)?;
            let w = arrows(mf.base(), labels)?;
            let lf = match localize_fibration(mf, &w, b.max_word_len) {
                Ok(lf) => lf,
                Err(cocart::fibration::FibrationError::Truncated(d)) => {
                    out.note(format!("truncated: {d}"));
                    out.code = TRUNCATED;
                    return Ok(());
                }
                Err(e) => return Err(failed(e)),
            };
            out.note(format!("cocartesian {}; pullback square {}; marks preserved {}", lf.fibration.is_some(), lf.square_is_pullback, lf.marks_preserved));
            match &lf.fibration {
                Some(q) => out.fibration(&format!("{name}[W^-1]"), q),
                None => out.code = NEGATIVE,
            }
            if !lf.verified() {
                out.code = NEGATIVE;
            }
        }
        Fib::Conduche { file, functor: name } => {
            let ws = load(cfg, file)?;
            let p = functor(&ws, name)?;
            let w = conduche_witness(p);
            let (e, base) = (&p.dom, &p.cod);
            match w {
                None => out.note(format!("{name} is a Conduche fibration")),
                Some((x, c, z)) => {
                    out.note(format!("{name} is not a Conduche fibration: factorisations from {} to {} through the fibre over {} are not connected", e.obj_label(x), e.obj_label(z), base.obj_label(c)));
                    out.code = NEGATIVE;
                }
            }
            out.json = Some(json!({"conduche": w.is_none(), "witness": w.map(|(x, c, z)| [e.obj_label(x), base.obj_label(c), e.obj_label(z)])}));
        }
    }
    Ok(())
}

fn verify(cfg: &Config, b: &Bounds, name: &str, file: Option<&Path>) -> Result<(String, u8), CliError> {
    let runs: Vec<(String, Bounds)> = if name == "all" {
        suites::suite_names().into_iter().map(|n| (n.to_string(), *b)).collect()
    } else if suites::find_suite(name).is_some() {
        vec![(name.to_string(), *b)]
    } else if let Some(file) = file {
        let ws = load(cfg, file)?;
        let decl = ws.file.suites.iter().find(|s| s.name == name).ok_or_else(|| missing("suite", name))?;
        let d = Bounds::default();
        let sb = Bounds {
            seed: cfg.seed.or(decl.seed).unwrap_or(d.seed),
            max_word_len: cfg.max_word_len.or(decl.max_word_len).unwrap_or(d.max_word_len),
            max_stages: cfg.max_stages.or(decl.max_stages).unwrap_or(d.max_stages),
            max_iterations: b.max_iterations,
        };
        decl.runs.iter().map(|r| (r.clone(), sb)).collect()
    } else {
        return Err(suites::SuiteError::Unknown(name.to_string()).into());
    };
    let reports = runs.iter().map(|(n, sb)| suites::run_suite(n, sb)).collect::<Result<Vec<SuiteReport>, _>>()?;
    let code = if reports.iter().all(|r| r.passed) { 0 } else { NEGATIVE };
    if cfg.dot == Some(true) {
        return Err(CliError::Usage("reports have no DOT form".into()));
    }
    let text = if cfg.json == Some(true) {
        if reports.len() == 1 {
            String::from_utf8(reports[0].to_json()).expect("UTF-8")
        } else {
            serde_json::to_string_pretty(&reports).expect("reports serialise") + "\n"
        }
    } else {
        let mut s = String::new();
        for r in &reports {
            let n = r.criterion.map(|c| format!("{c:>2} ")).unwrap_or_else(|| "   ".into());
            s.push_str(&format!(
                "{n}{:<24} {}  pass {} fail {} truncated {}  seed {}  {:.2?}\n",
                r.suite,
                if r.passed { "PASS" } else { "FAIL" },
                r.tally.pass,
                r.tally.fail,
                r.tally.truncated,
                r.bounds.seed,
                r.wall_time
            ));
            for q in r.requirements.iter().filter(|q| !q.met) {
                s.push_str(&format!("     requirement {}: {} of {} passed\n", q.group, q.passed, q.min_pass));
            }
            for c in r.failures() {
                if let suites::Verdict::Fail { witness } = &c.verdict {
                    s.push_str(&format!("     {}: {witness}\n", c.id));
                }
            }
        }
        s
    };
    Ok((text, code))
}
