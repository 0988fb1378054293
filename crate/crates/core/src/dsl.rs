//! The `.fincat` workspace language.
//!
//! ```text
//! # the interval
//! category I { objects a b; arrows f: a -> b }
//! presentation Idem { objects x; generators e: x -> x; relations e . e = e }
//! functor F: I -> I { a -> a; b -> b; f -> f }
//! fibration P { functor F; marked f }
//! suite quick { run core-laws, join-correctness; seed 0; max-word-len 10 }
//! ```
//!
//! Composites are written `g . f` (apply `f` first). Identities are implicit
//! and named `id_<object>` unless an `identities` statement names them.
//! Names that are not bare words are written as quoted strings.

use std::collections::{BTreeSet, HashMap};
use std::path::Path as FsPath;
use std::sync::Arc;

use pest::iterators::Pair;
use pest::Parser;
use pest_derive::Parser;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fibration::{is_cocartesian_fibration, MarkedFibration};
use crate::fincat::{check_fincat, Arrow, FinCat, RawArrow, RawCat};
use crate::functor::Functor;
use crate::presentation::{Path, Presentation};

#[derive(Parser)]
#[grammar = "fincat.pest"]
struct FincatParser;

/// A source position. Positions never affect equality of declarations.
#[derive(Clone, Copy, Debug, Default)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl Eq for Loc {}

#[derive(Debug, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unresolved {what} `{name}`")]
    Unresolved { line: usize, col: usize, what: &'static str, name: String },
    #[error("{line}:{col}: invalid {what} `{name}`: {message}")]
    Invalid { line: usize, col: usize, what: &'static str, name: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl DslError {
    pub fn location(&self) -> Option<(usize, usize)> {
        match self {
            DslError::Syntax { line, col, .. } | DslError::Unresolved { line, col, .. } | DslError::Invalid { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, DslError>;

fn unresolved(at: Loc, what: &'static str, name: &str) -> DslError {
    DslError::Unresolved { line: at.line, col: at.col, what, name: name.to_string() }
}

fn invalid(at: Loc, what: &'static str, name: &str, message: impl ToString) -> DslError {
    DslError::Invalid { line: at.line, col: at.col, what, name: name.to_string(), message: message.to_string() }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CategoryDecl {
    #[serde(flatten)]
    pub raw: RawCat,
    #[serde(skip)]
    pub at: Loc,
}

/// A path: `identity` names an object for the empty path, otherwise `arrows`
/// lists generators outermost first, as in `g . f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct PathDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<String>,
    #[serde(default)]
    pub arrows: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct PresentationDecl {
    pub name: String,
    pub objects: Vec<String>,
    pub generators: Vec<RawArrow>,
    pub relations: Vec<[PathDecl; 2]>,
    #[serde(skip)]
    pub at: Loc,
}

/// Images of objects and non-identity arrows, by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct FunctorDecl {
    pub name: String,
    pub dom: String,
    pub cod: String,
    pub maps: Vec<[String; 2]>,
    #[serde(skip)]
    pub at: Loc,
    #[serde(skip)]
    pub map_at: Vec<Loc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct FibrationDecl {
    pub name: String,
    pub functor: String,
    /// Non-identity cocartesian arrows; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked: Option<Vec<String>>,
    #[serde(skip)]
    pub at: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SuiteDecl {
    pub name: String,
    pub runs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_word_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_stages: Option<usize>,
    #[serde(skip)]
    pub at: Loc,
}

/// A parsed workspace, before references are resolved.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct WorkspaceFile {
    #[serde(default)]
    pub categories: Vec<CategoryDecl>,
    #[serde(default)]
    pub presentations: Vec<PresentationDecl>,
    #[serde(default)]
    pub functors: Vec<FunctorDecl>,
    #[serde(default)]
    pub fibrations: Vec<FibrationDecl>,
    #[serde(default)]
    pub suites: Vec<SuiteDecl>,
}

fn loc(p: &Pair<Rule>) -> Loc {
    let (line, col) = p.line_col();
    Loc { line, col }
}

fn unquote(s: &str) -> String {
    let mut out = String::new();
    let mut chars = s[1..s.len() - 1].chars();
    while let Some(c) = chars.next() {
        out.push(if c == '\\' { chars.next().unwrap_or('\\') } else { c });
    }
    out
}

fn text(p: Pair<Rule>) -> String {
    let inner = p.into_inner().next().expect("name has one child");
    match inner.as_rule() {
        Rule::quoted => unquote(inner.as_str()),
        _ => inner.as_str().to_string(),
    }
}

fn names(p: Pair<Rule>) -> Vec<String> {
    p.into_inner().map(text).collect()
}

fn arrow_decl(p: Pair<Rule>) -> RawArrow {
    let mut v = names(p).into_iter();
    let (label, src, tgt) = (v.next().unwrap_or_default(), v.next().unwrap_or_default(), v.next().unwrap_or_default());
    RawArrow { label, src, tgt }
}

fn path_decl(p: Pair<Rule>) -> PathDecl {
    let mut inner = p.into_inner().peekable();
    match inner.peek().map(|q| q.as_rule()) {
        Some(Rule::identity) => PathDecl { identity: Some(text(inner.next().expect("peeked").into_inner().next().expect("object"))), arrows: vec![] },
        _ => PathDecl { identity: None, arrows: inner.map(text).collect() },
    }
}

fn number<T: std::str::FromStr>(p: Pair<Rule>) -> Result<T> {
    let at = loc(&p);
    let s = p.into_inner().next().expect("number").as_str();
    s.parse().map_err(|_| invalid(at, "number", s, "out of range"))
}

/// Parses `.fincat` source text.
pub fn parse_str(src: &str) -> Result<WorkspaceFile> {
    let mut pairs = FincatParser::parse(Rule::file, src).map_err(|e| {
        let (line, col) = match e.line_col {
            pest::error::LineColLocation::Pos(p) | pest::error::LineColLocation::Span(p, _) => p,
        };
        DslError::Syntax { line, col, message: e.variant.message().into_owned() }
    })?;
    let mut ws = WorkspaceFile::default();
    for block in pairs.next().expect("file").into_inner() {
        let at = loc(&block);
        match block.as_rule() {
            Rule::category => {
                let mut it = block.into_inner();
                let name = text(it.next().expect("name"));
                let (mut objects, mut arrows, mut identities, mut compose) = (Vec::new(), Vec::new(), None, Vec::new());
                for item in it {
                    match item.as_rule() {
                        Rule::objects => objects.extend(names(item)),
                        Rule::arrows => arrows.extend(item.into_inner().map(arrow_decl)),
                        Rule::identities => identities = Some((loc(&item), names(item))),
                        Rule::compose => compose.extend(item.into_inner().map(|e| {
                            let v = names(e);
                            [v[0].clone(), v[1].clone(), v[2].clone()]
                        })),
                        _ => unreachable!("grammar"),
                    }
                }
                let identities = match identities {
                    Some((iat, ids)) if ids.len() != objects.len() => {
                        return Err(invalid(iat, "category", &name, format!("{} identities for {} objects", ids.len(), objects.len())))
                    }
                    Some((_, ids)) => ids,
                    None => objects.iter().map(|o| format!("id_{o}")).collect(),
                };
                let mut all: Vec<RawArrow> = identities.iter().zip(&objects).map(|(l, o)| RawArrow { label: l.clone(), src: o.clone(), tgt: o.clone() }).collect();
                all.extend(arrows);
                ws.categories.push(CategoryDecl { raw: RawCat { name, objects, arrows: all, identities, compose }, at });
            }
            Rule::presentation => {
                let mut it = block.into_inner();
                let name = text(it.next().expect("name"));
                let mut decl = PresentationDecl { name, objects: vec![], generators: vec![], relations: vec![], at };
                for item in it {
                    match item.as_rule() {
                        Rule::objects => decl.objects.extend(names(item)),
                        Rule::generators => decl.generators.extend(item.into_inner().map(arrow_decl)),
                        Rule::relations => decl.relations.extend(item.into_inner().map(|r| {
                            let mut sides = r.into_inner().map(path_decl);
                            [sides.next().expect("lhs"), sides.next().expect("rhs")]
                        })),
                        _ => unreachable!("grammar"),
                    }
                }
                ws.presentations.push(decl);
            }
            Rule::functor => {
                let mut it = block.into_inner();
                let (name, dom, cod) = (text(it.next().expect("name")), text(it.next().expect("dom")), text(it.next().expect("cod")));
                let mut decl = FunctorDecl { name, dom, cod, maps: vec![], at, map_at: vec![] };
                for m in it {
                    decl.map_at.push(loc(&m));
                    let v = names(m);
                    decl.maps.push([v[0].clone(), v[1].clone()]);
                }
                ws.functors.push(decl);
            }
            Rule::fibration => {
                let mut it = block.into_inner();
                let name = text(it.next().expect("name"));
                let mut decl = FibrationDecl { name, functor: String::new(), marked: None, at };
                for item in it {
                    match item.as_rule() {
                        Rule::over => decl.functor = text(item.into_inner().next().expect("functor")),
                        Rule::marked => decl.marked.get_or_insert_with(Vec::new).extend(names(item)),
                        _ => unreachable!("grammar"),
                    }
                }
                if decl.functor.is_empty() {
                    return Err(invalid(at, "fibration", &decl.name, "missing `functor` statement"));
                }
                ws.fibrations.push(decl);
            }
            Rule::suite => {
                let mut it = block.into_inner();
                let mut decl = SuiteDecl { name: text(it.next().expect("name")), at, ..SuiteDecl::default() };
                for item in it {
                    match item.as_rule() {
                        Rule::run => decl.runs.extend(names(item)),
                        Rule::seed => decl.seed = Some(number(item)?),
                        Rule::max_word_len => decl.max_word_len = Some(number(item)?),
                        Rule::max_stages => decl.max_stages = Some(number(item)?),
                        _ => unreachable!("grammar"),
                    }
                }
                ws.suites.push(decl);
            }
            Rule::EOI => {}
            _ => unreachable!("grammar"),
        }
    }
    Ok(ws)
}

/// Reads a workspace from a `.fincat` file, or from JSON when the extension is `.json`.
pub fn parse(path: impl AsRef<FsPath>) -> Result<WorkspaceFile> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|source| DslError::Io { path: path.display().to_string(), source })?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&src)?)
    } else {
        parse_str(&src)
    }
}

/// A workspace with every reference resolved.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub file: WorkspaceFile,
    pub categories: Vec<Arc<FinCat>>,
    pub presentations: Vec<Presentation>,
    pub functors: Vec<Functor>,
    pub fibrations: Vec<MarkedFibration>,
}

impl Workspace {
    pub fn category(&self, name: &str) -> Option<&Arc<FinCat>> {
        self.file.categories.iter().position(|c| c.raw.name == name).map(|i| &self.categories[i])
    }

    pub fn presentation(&self, name: &str) -> Option<&Presentation> {
        self.file.presentations.iter().position(|p| p.name == name).map(|i| &self.presentations[i])
    }

    pub fn functor(&self, name: &str) -> Option<&Functor> {
        self.file.functors.iter().position(|f| f.name == name).map(|i| &self.functors[i])
    }

    pub fn fibration(&self, name: &str) -> Option<&MarkedFibration> {
        self.file.fibrations.iter().position(|f| f.name == name).map(|i| &self.fibrations[i])
    }
}

fn no_duplicates<'a>(names: impl Iterator<Item = (&'a str, Loc)>, what: &'static str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (n, at) in names {
        if !seen.insert(n) {
            return Err(invalid(at, what, n, "declared twice"));
        }
    }
    Ok(())
}

fn resolve_presentation(d: &PresentationDecl) -> Result<Presentation> {
    let obj: HashMap<&str, usize> = d.objects.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect();
    let find_obj = |o: &str| obj.get(o).copied().ok_or_else(|| unresolved(d.at, "object", o));
    let generators = d.generators.iter().map(|g| Ok(Arrow::new(g.label.clone(), find_obj(&g.src)?, find_obj(&g.tgt)?))).collect::<Result<Vec<_>>>()?;
    let gen: HashMap<&str, usize> = d.generators.iter().enumerate().map(|(i, g)| (g.label.as_str(), i)).collect();
    let path = |p: &PathDecl| -> Result<Path> {
        if let Some(o) = &p.identity {
            return Ok(Path::id(find_obj(o)?));
        }
        let word = p.arrows.iter().rev().map(|a| gen.get(a.as_str()).copied().ok_or_else(|| unresolved(d.at, "generator", a))).collect::<Result<Vec<_>>>()?;
        let (first, last) = match (word.first(), word.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return Err(invalid(d.at, "presentation", &d.name, "empty path; write id(x)")),
        };
        Ok(Path { src: generators[first].src, tgt: generators[last].tgt, word })
    };
    let relations = d.relations.iter().map(|[l, r]| Ok((path(l)?, path(r)?))).collect::<Result<Vec<_>>>()?;
    Presentation::new(d.name.clone(), d.objects.clone(), generators, relations).map_err(|e| invalid(d.at, "presentation", &d.name, e))
}

fn resolve_functor(d: &FunctorDecl, dom: &Arc<FinCat>, cod: &Arc<FinCat>) -> Result<Functor> {
    let mut obj = vec![None; dom.num_objects()];
    let mut arr: Vec<Option<usize>> = vec![None; dom.num_arrows()];
    for (i, [a, b]) in d.maps.iter().enumerate() {
        let at = d.map_at.get(i).copied().unwrap_or(d.at);
        if let Some(x) = dom.find_object(a) {
            obj[x] = Some(cod.find_object(b).ok_or_else(|| unresolved(at, "object", b))?);
        } else if let Some(f) = dom.find_arrow(a) {
            arr[f] = Some(cod.find_arrow(b).ok_or_else(|| unresolved(at, "arrow", b))?);
        } else {
            return Err(unresolved(at, "object or arrow", a));
        }
    }
    let obj = obj
        .iter()
        .enumerate()
        .map(|(x, o)| o.ok_or_else(|| invalid(d.at, "functor", &d.name, format!("no image for object `{}`", dom.obj_label(x)))))
        .collect::<Result<Vec<_>>>()?;
    let arr = (0..dom.num_arrows())
        .map(|f| match arr[f] {
            Some(g) => Ok(g),
            None if dom.is_identity(f) => Ok(cod.id(obj[dom.src(f)])),
            None => Err(invalid(d.at, "functor", &d.name, format!("no image for arrow `{}`", dom.arr_label(f)))),
        })
        .collect::<Result<Vec<_>>>()?;
    Functor::new(dom.clone(), cod.clone(), obj, arr).map_err(|e| invalid(d.at, "functor", &d.name, e))
}

/// Resolves every reference; suite runs must name one of `suites`.
pub fn resolve(file: WorkspaceFile, suites: &[&str]) -> Result<Workspace> {
    no_duplicates(file.categories.iter().map(|c| (c.raw.name.as_str(), c.at)), "category")?;
    no_duplicates(file.presentations.iter().map(|c| (c.name.as_str(), c.at)), "presentation")?;
    no_duplicates(file.functors.iter().map(|c| (c.name.as_str(), c.at)), "functor")?;
    no_duplicates(file.fibrations.iter().map(|c| (c.name.as_str(), c.at)), "fibration")?;
    let categories = file
        .categories
        .iter()
        .map(|c| check_fincat(&c.raw).map(Arc::new).map_err(|e| invalid(c.at, "category", &c.raw.name, e)))
        .collect::<Result<Vec<_>>>()?;
    let cat = |name: &str, at: Loc| -> Result<Arc<FinCat>> {
        file.categories.iter().position(|c| c.raw.name == name).map(|i| categories[i].clone()).ok_or_else(|| unresolved(at, "category", name))
    };
    let presentations = file.presentations.iter().map(resolve_presentation).collect::<Result<Vec<_>>>()?;
    let functors = file.functors.iter().map(|d| resolve_functor(d, &cat(&d.dom, d.at)?, &cat(&d.cod, d.at)?)).collect::<Result<Vec<_>>>()?;
    let mut fibrations = Vec::new();
    for d in &file.fibrations {
        let i = file.functors.iter().position(|f| f.name == d.functor).ok_or_else(|| unresolved(d.at, "functor", &d.functor))?;
        let mf = is_cocartesian_fibration(&functors[i]).map_err(|e| invalid(d.at, "fibration", &d.name, e))?;
        if let Some(marked) = &d.marked {
            let e = mf.total();
            let expected: BTreeSet<&str> = e.non_identity_arrows().filter(|&a| mf.marked[a]).map(|a| e.arr_label(a)).collect();
            let given: BTreeSet<&str> = marked.iter().map(String::as_str).collect();
            if let Some(a) = given.iter().find(|a| e.find_arrow(a).is_none()) {
                return Err(unresolved(d.at, "arrow", a));
            }
            if expected != given {
                return Err(invalid(d.at, "fibration", &d.name, format!("cocartesian arrows are {expected:?}")));
            }
        }
        fibrations.push(mf);
    }
    for s in &file.suites {
        if let Some(r) = s.runs.iter().find(|r| !suites.contains(&r.as_str())) {
            return Err(unresolved(s.at, "suite", r));
        }
    }
    Ok(Workspace { file, categories, presentations, functors, fibrations })
}

/// Canonical declaration of a category.
pub fn category_decl(c: &FinCat) -> CategoryDecl {
    CategoryDecl { raw: c.canonical().expect("a valid category has a canonical form").to_raw(), at: Loc::default() }
}

/// Declaration of a functor between canonical forms of its endpoints.
pub fn functor_decl(name: &str, f: &Functor) -> FunctorDecl {
    let (dom, cod) = (&f.dom, &f.cod);
    let label = |g: usize| if cod.is_identity(g) { format!("id_{}", cod.obj_label(cod.src(g))) } else { cod.arr_label(g).to_string() };
    let mut maps: Vec<[String; 2]> = (0..dom.num_objects()).map(|x| [dom.obj_label(x).to_string(), cod.obj_label(f.obj[x]).to_string()]).collect();
    maps.extend(dom.non_identity_arrows().map(|a| [dom.arr_label(a).to_string(), label(f.arr[a])]));
    FunctorDecl { name: name.to_string(), dom: dom.name().to_string(), cod: cod.name().to_string(), maps, at: Loc::default(), map_at: vec![] }
}

pub fn presentation_decl(p: &Presentation) -> PresentationDecl {
    let generators = p.generators.iter().map(|g| RawArrow { label: g.label.clone(), src: p.objects[g.src].clone(), tgt: p.objects[g.tgt].clone() }).collect();
    let path = |w: &Path| {
        if w.word.is_empty() {
            PathDecl { identity: Some(p.objects[w.src].clone()), arrows: vec![] }
        } else {
            PathDecl { identity: None, arrows: w.word.iter().rev().map(|&g| p.generators[g].label.clone()).collect() }
        }
    };
    PresentationDecl { name: p.name.clone(), objects: p.objects.clone(), generators, relations: p.relations.iter().map(|(l, r)| [path(l), path(r)]).collect(), at: Loc::default() }
}

/// A fibration as its total category, base, projection `<name>.p` and marking.
pub fn fibration_file(name: &str, mf: &MarkedFibration) -> WorkspaceFile {
    let (e, b) = (mf.total(), mf.base());
    let mut total = category_decl(e);
    if total.raw.name == b.name() {
        total.raw.name = format!("{name}.total");
    }
    let mut p = functor_decl(&format!("{name}.p"), &mf.p);
    p.dom = total.raw.name.clone();
    let marked = Some(e.non_identity_arrows().filter(|&a| mf.marked[a]).map(|a| e.arr_label(a).to_string()).collect());
    WorkspaceFile {
        categories: vec![total, category_decl(b)],
        functors: vec![p.clone()],
        fibrations: vec![FibrationDecl { name: name.to_string(), functor: p.name, marked, at: Loc::default() }],
        ..WorkspaceFile::default()
    }
}

fn is_bare(s: &str) -> bool {
    let b = s.as_bytes();
    !s.is_empty()
        && b.iter().enumerate().all(|(i, &c)| {
            c.is_ascii_alphanumeric() || b"_'*@^+".contains(&c) || (c == b'-' && b.get(i + 1) != Some(&b'>'))
        })
}

fn q(s: &str) -> String {
    if is_bare(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn join<I: IntoIterator<Item = String>>(items: I, sep: &str) -> String {
    items.into_iter().collect::<Vec<_>>().join(sep)
}

/// Canonical `.fincat` text for a workspace; `parse_str` inverts it.
pub fn emit_dsl(ws: &WorkspaceFile) -> String {
    let mut out = String::new();
    for c in &ws.categories {
        let r = &c.raw;
        let mut items = vec![format!("objects {}", join(r.objects.iter().map(|o| q(o)), " "))];
        let ids: BTreeSet<&str> = r.identities.iter().map(String::as_str).collect();
        let arrows: Vec<String> = r.arrows.iter().filter(|a| !ids.contains(a.label.as_str())).map(|a| format!("{}: {} -> {}", q(&a.label), q(&a.src), q(&a.tgt))).collect();
        if !arrows.is_empty() {
            items.push(format!("arrows {}", arrows.join(", ")));
        }
        let default: Vec<String> = r.objects.iter().map(|o| format!("id_{o}")).collect();
        if r.identities != default {
            items.push(format!("identities {}", join(r.identities.iter().map(|i| q(i)), ", ")));
        }
        if !r.compose.is_empty() {
            items.push(format!("compose {}", join(r.compose.iter().map(|[g, f, h]| format!("{} . {} = {}", q(g), q(f), q(h))), ", ")));
        }
        out.push_str(&format!("category {} {{\n  {}\n}}\n", q(&r.name), items.join(";\n  ")));
    }
    for p in &ws.presentations {
        let path = |w: &PathDecl| match &w.identity {
            Some(o) => format!("id({})", q(o)),
            None => join(w.arrows.iter().map(|a| q(a)), " . "),
        };
        let mut items = vec![format!("objects {}", join(p.objects.iter().map(|o| q(o)), " "))];
        if !p.generators.is_empty() {
            items.push(format!("generators {}", join(p.generators.iter().map(|a| format!("{}: {} -> {}", q(&a.label), q(&a.src), q(&a.tgt))), ", ")));
        }
        if !p.relations.is_empty() {
            items.push(format!("relations {}", join(p.relations.iter().map(|[l, r]| format!("{} = {}", path(l), path(r))), ", ")));
        }
        out.push_str(&format!("presentation {} {{\n  {}\n}}\n", q(&p.name), items.join(";\n  ")));
    }
    for f in &ws.functors {
        let maps = join(f.maps.iter().map(|[a, b]| format!("{} -> {}", q(a), q(b))), ";\n  ");
        out.push_str(&format!("functor {}: {} -> {} {{\n  {}\n}}\n", q(&f.name), q(&f.dom), q(&f.cod), maps));
    }
    for f in &ws.fibrations {
        let mut items = vec![format!("functor {}", q(&f.functor))];
        if let Some(m) = &f.marked {
            items.push(format!("marked {}", join(m.iter().map(|a| q(a)), ", ")).trim_end().to_string());
        }
        out.push_str(&format!("fibration {} {{\n  {}\n}}\n", q(&f.name), items.join(";\n  ")));
    }
    for s in &ws.suites {
        let mut items = Vec::new();
        if !s.runs.is_empty() {
            items.push(format!("run {}", join(s.runs.iter().map(|r| q(r)), ", ")));
        }
        if let Some(x) = s.seed {
            items.push(format!("seed {x}"));
        }
        if let Some(x) = s.max_word_len {
            items.push(format!("max-word-len {x}"));
        }
        if let Some(x) = s.max_stages {
            items.push(format!("max-stages {x}"));
        }
        out.push_str(&format!("suite {} {{\n  {}\n}}\n", q(&s.name), items.join(";\n  ")));
    }
    out
}

/// Pretty JSON for a workspace, with a trailing newline.
pub fn emit_json(ws: &WorkspaceFile) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(ws).expect("declarations serialise");
    v.push(b'\n');
    v
}

pub fn parse_json(bytes: &[u8]) -> Result<WorkspaceFile> {
    Ok(serde_json::from_slice(bytes)?)
}

/// JSON schema of the workspace format.
pub fn json_schema() -> String {
    let schema = schemars::schema_for!(WorkspaceFile);
    format!("{}\n", serde_json::to_string_pretty(&schema).expect("schema serialises"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{interval, library, walking_idempotent};
    use crate::generate::{random_fincat, rng};
    use proptest::prelude::*;

    fn one_category(src: &str) -> FinCat {
        let ws = resolve(parse_str(src).unwrap(), &[]).unwrap();
        (*ws.categories[0]).clone()
    }

    #[test]
    fn interval_example() {
        let c = one_category("category I { objects a b; arrows f: a -> b }");
        assert_eq!((c.num_objects(), c.num_arrows()), (2, 3));
        assert!(crate::search::find_isomorphism(&Arc::new(c), &Arc::new(interval())).is_some());
    }

    #[test]
    fn comments_and_trailing_separators() {
        let c = one_category("# idempotent\ncategory E {\n  objects \"*\"; # one object\n  arrows e: \"*\" -> \"*\";\n  compose e . e = e;\n}\n");
        assert_eq!(c, walking_idempotent().with_name("E").canonical().unwrap());
    }

    #[test]
    fn bad_endpoint_is_located() {
        let err = resolve(parse_str("\n\ncategory I { objects a b; arrows f: a -> c }").unwrap(), &[]).unwrap_err();
        assert_eq!(err.location(), Some((3, 1)));
        assert!(matches!(err, DslError::Invalid { what: "category", .. }));
    }

    #[test]
    fn syntax_error_is_located() {
        let err = parse_str("category I {\n  objects a b;\n  arrows f a -> b\n}").unwrap_err();
        assert!(matches!(err, DslError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_composite_is_rejected() {
        let err = resolve(parse_str("category C { objects a b c; arrows f: a -> b, g: b -> c }").unwrap(), &[]).unwrap_err();
        assert!(matches!(err, DslError::Invalid { .. }), "{err}");
    }

    #[test]
    fn presentation_of_the_idempotent() {
        let ws = resolve(parse_str("presentation Idem { objects x; generators e: x -> x; relations e . e = e }").unwrap(), &[]).unwrap();
        let sat = crate::presentation::saturate(&ws.presentations[0], 6).unwrap();
        assert_eq!(sat.exact().unwrap().num_arrows(), 2);
    }

    #[test]
    fn identity_paths() {
        let ws = resolve(parse_str("presentation J { objects a b; generators f: a -> b, g: b -> a; relations g . f = id(a), f . g = id(b) }").unwrap(), &[]).unwrap();
        let sat = crate::presentation::saturate(&ws.presentations[0], 6).unwrap();
        assert_eq!(sat.exact().unwrap().num_arrows(), 4);
    }

    const TWO: &str = "category I { objects a b; arrows f: a -> b }\ncategory T { objects t }\n";

    #[test]
    fn functor_and_fibration() {
        let src = format!("{TWO}functor P: I -> T {{ a -> t; b -> t; f -> id_t }}\nfibration F {{ functor P; marked }}\n");
        let ws = resolve(parse_str(&src).unwrap(), &[]).unwrap();
        assert_eq!(ws.functor("P").unwrap().obj, vec![0, 0]);
        assert_eq!(ws.fibration("F").unwrap().fibres[0].cat.num_objects(), 2);
    }

    #[test]
    fn wrong_marking_is_rejected() {
        let src = format!("{TWO}functor P: I -> T {{ a -> t; b -> t; f -> id_t }}\nfibration F {{ functor P; marked f }}\n");
        assert!(matches!(resolve(parse_str(&src).unwrap(), &[]), Err(DslError::Invalid { what: "fibration", .. })));
    }

    #[test]
    fn unresolved_image_points_at_the_mapping() {
        let src = format!("{TWO}functor P: I -> T {{\n  a -> t;\n  b -> u\n}}\n");
        let err = resolve(parse_str(&src).unwrap(), &[]).unwrap_err();
        assert!(matches!(err, DslError::Unresolved { what: "object", line: 5, col: 3, .. }), "{err}");
    }

    #[test]
    fn unknown_suite() {
        let ws = parse_str("suite s { run core-laws, nope; seed 3 }").unwrap();
        assert_eq!(ws.suites[0].seed, Some(3));
        assert!(matches!(resolve(ws, &["core-laws"]), Err(DslError::Unresolved { what: "suite", .. })));
    }

    #[test]
    fn awkward_labels_round_trip() {
        let raw = RawCat {
            name: "𝕀 \"x\"".into(),
            objects: vec!["a b".into(), "c->d".into()],
            arrows: vec![
                RawArrow { label: "id_a b".into(), src: "a b".into(), tgt: "a b".into() },
                RawArrow { label: "id_c->d".into(), src: "c->d".into(), tgt: "c->d".into() },
                RawArrow { label: "f\\g".into(), src: "a b".into(), tgt: "c->d".into() },
            ],
            identities: vec!["id_a b".into(), "id_c->d".into()],
            compose: vec![],
        };
        let ws = WorkspaceFile { categories: vec![CategoryDecl { raw, at: Loc::default() }], ..WorkspaceFile::default() };
        assert_eq!(parse_str(&emit_dsl(&ws)).unwrap(), ws);
    }

    #[test]
    fn named_identities_round_trip() {
        let src = "category M { objects x; arrows e: x -> x; identities one; compose e . e = one }";
        let ws = parse_str(src).unwrap();
        assert_eq!(ws.categories[0].raw.identities, vec!["one".to_string()]);
        assert_eq!(parse_str(&emit_dsl(&ws)).unwrap(), ws);
        assert_eq!(one_category(src).num_arrows(), 2);
    }

    #[test]
    fn fixtures_round_trip_through_text_and_json() {
        for c in library() {
            let ws = WorkspaceFile { categories: vec![category_decl(&c)], ..WorkspaceFile::default() };
            let back = parse_str(&emit_dsl(&ws)).unwrap();
            assert_eq!(back, ws);
            assert_eq!(parse_json(&emit_json(&ws)).unwrap(), ws);
            assert_eq!(*resolve(back, &[]).unwrap().categories[0], c.canonical().unwrap());
        }
    }

    #[test]
    fn fibration_file_round_trips() {
        let j = Arc::new(crate::fixtures::walking_iso());
        let mf = crate::fibration::unstraighten(&crate::fibration::Pseudofunctor::constant(j, Arc::new(interval()))).unwrap();
        let ws = fibration_file("E", &mf);
        let back = resolve(parse_str(&emit_dsl(&ws)).unwrap(), &[]).unwrap();
        let mf2 = back.fibration("E").unwrap();
        assert_eq!(mf2.marked.iter().filter(|&&m| m).count(), mf.marked.iter().filter(|&&m| m).count());
        assert_eq!(mf2.total().num_arrows(), mf.total().num_arrows());
        assert!(crate::descent::find_equivalence_over(&mf.p, &mf2.p).is_some());
    }

    #[test]
    fn presentation_round_trip() {
        let (p, _) = Presentation::from_fincat(&crate::fixtures::walking_section_retraction());
        let ws = WorkspaceFile { presentations: vec![presentation_decl(&p)], ..WorkspaceFile::default() };
        let back = resolve(parse_str(&emit_dsl(&ws)).unwrap(), &[]).unwrap();
        assert_eq!(back.presentations[0], p);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn seeded_categories_round_trip(seed in 0u64..10_000) {
            let c = random_fincat(&mut rng(seed), 4);
            let ws = WorkspaceFile { categories: vec![category_decl(&c)], ..WorkspaceFile::default() };
            let text = emit_dsl(&ws);
            prop_assert_eq!(&parse_str(&text).unwrap(), &ws);
            prop_assert_eq!(emit_dsl(&parse_str(&text).unwrap()), text);
            prop_assert_eq!(&*resolve(ws, &[]).unwrap().categories[0], &c.canonical().unwrap());
        }
    }
}
