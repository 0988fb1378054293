//! Conformance suites.
//!
//! A suite is a list of independent jobs. Jobs run on the rayon pool and
//! their checks are sorted by id, so a report depends only on the suite,
//! the bounds and the crate version. Seeded jobs draw from their own ChaCha
//! stream, so adding or reordering jobs never changes another job's instance.

mod criteria;
mod extra;

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{category_decl, fibration_file, WorkspaceFile};
use crate::generate::{random_fincat, random_localisation_instance, random_opfibration, BaseShape};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    Unknown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Bounds {
    pub seed: u64,
    pub max_word_len: usize,
    pub max_stages: usize,
    /// Cap on iterations of `S`.
    pub max_iterations: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { seed: 0, max_word_len: 12, max_stages: 6, max_iterations: 16 }
    }
}

impl Bounds {
    /// The ChaCha stream for seeded job `index`.
    pub fn stream(&self, index: usize) -> ChaCha8Rng {
        let mut r = crate::generate::rng(self.seed);
        r.set_stream(index as u64);
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { witness: String },
    Truncated { diagnostics: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Check {
    pub id: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn pass(id: impl Into<String>) -> Check {
        Check { id: id.into(), verdict: Verdict::Pass, note: None }
    }

    pub fn fail(id: impl Into<String>, witness: impl Into<String>) -> Check {
        Check { id: id.into(), verdict: Verdict::Fail { witness: witness.into() }, note: None }
    }

    pub fn truncated(id: impl Into<String>, diagnostics: impl Into<String>) -> Check {
        Check { id: id.into(), verdict: Verdict::Truncated { diagnostics: diagnostics.into() }, note: None }
    }

    /// Pass when `ok`, otherwise fail with `witness`.
    pub fn expect(id: impl Into<String>, ok: bool, witness: impl FnOnce() -> String) -> Check {
        if ok {
            Check::pass(id)
        } else {
            Check::fail(id, witness())
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// How many checks of a group (the id up to the first `/`) must pass.
#[derive(Clone, Copy, Debug)]
pub enum Need {
    All,
    AtLeast(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Requirement {
    pub group: String,
    pub min_pass: usize,
    pub passed: usize,
    pub met: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub truncated: usize,
}

/// Outcome of one suite run. `wall_time` is not serialised, so reports are
/// byte-identical across runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SuiteReport {
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub title: String,
    pub version: String,
    pub operations: Vec<String>,
    pub bounds: Bounds,
    pub passed: bool,
    pub tally: Tally,
    pub requirements: Vec<Requirement>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    #[schemars(skip)]
    pub wall_time: Duration,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| matches!(c.verdict, Verdict::Fail { .. }))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("reports serialise");
        v.push(b'\n');
        v
    }
}

pub type Job = Box<dyn FnOnce() -> Vec<Check> + Send>;

pub fn job(f: impl FnOnce() -> Check + Send + 'static) -> Job {
    Box::new(move || vec![f()])
}

pub fn jobs(f: impl FnOnce() -> Vec<Check> + Send + 'static) -> Job {
    Box::new(f)
}

pub struct Suite {
    pub name: &'static str,
    pub criterion: Option<u8>,
    pub title: &'static str,
    /// Operation ids exercised by the suite.
    pub ops: &'static [&'static str],
    pub needs: &'static [(&'static str, Need)],
    pub build: fn(&Bounds) -> Vec<Job>,
}

/// All suites: the fifteen acceptance suites in order, then the rest.
pub fn registry() -> Vec<Suite> {
    let mut v = criteria::suites();
    v.extend(extra::suites());
    v
}

pub fn suite_names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name).collect()
}

pub fn find_suite(name: &str) -> Option<Suite> {
    registry().into_iter().find(|s| s.name == name || s.criterion.is_some_and(|c| c.to_string() == name))
}

fn group(id: &str) -> &str {
    id.split('/').next().unwrap_or(id)
}

pub fn run(suite: &Suite, bounds: &Bounds) -> SuiteReport {
    let start = Instant::now();
    let mut checks: Vec<Check> = (suite.build)(bounds).into_par_iter().flat_map_iter(|j| j()).collect();
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    let count = |f: fn(&Verdict) -> bool| checks.iter().filter(|c| f(&c.verdict)).count();
    let tally = Tally {
        pass: count(|v| matches!(v, Verdict::Pass)),
        fail: count(|v| matches!(v, Verdict::Fail { .. })),
        truncated: count(|v| matches!(v, Verdict::Truncated { .. })),
    };
    let requirements: Vec<Requirement> = suite
        .needs
        .iter()
        .map(|&(g, need)| {
            let members: Vec<&Check> = checks.iter().filter(|c| group(&c.id) == g).collect();
            let passed = members.iter().filter(|c| c.passed()).count();
            let min_pass = match need {
                Need::All => members.len(),
                Need::AtLeast(n) => n,
            };
            Requirement { group: g.to_string(), min_pass, passed, met: passed >= min_pass && (min_pass > 0 || !members.is_empty()) }
        })
        .collect();
    let passed = tally.fail == 0 && !checks.is_empty() && requirements.iter().all(|r| r.met);
    SuiteReport {
        suite: suite.name.to_string(),
        criterion: suite.criterion,
        title: suite.title.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        operations: suite.ops.iter().map(|s| s.to_string()).collect(),
        bounds: *bounds,
        passed,
        tally,
        requirements,
        checks,
        wall_time: start.elapsed(),
    }
}

pub fn run_suite(name: &str, bounds: &Bounds) -> Result<SuiteReport, SuiteError> {
    find_suite(name).map(|s| run(&s, bounds)).ok_or_else(|| SuiteError::Unknown(name.to_string()))
}

pub fn report_schema() -> String {
    let mut s = serde_json::to_string_pretty(&schemars::schema_for!(SuiteReport)).expect("schema serialises");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Fincat,
    Opfibration,
    LocalisationInstance,
}

/// A generated entity as workspace declarations. For localisation instances
/// `w` lists the labels of the base arrows to invert.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generated {
    pub file: WorkspaceFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<String>>,
}

/// Seeded instance of the given kind. `size` bounds the number of objects
/// of a category, or the length of the base chain of an opfibration.
pub fn generate(kind: Kind, seed: u64, size: usize) -> Generated {
    let mut r = crate::generate::rng(seed);
    match kind {
        Kind::Fincat => {
            let c = random_fincat(&mut r, size.max(1)).with_name(format!("C{seed}"));
            Generated { file: WorkspaceFile { categories: vec![category_decl(&c)], ..WorkspaceFile::default() }, w: None }
        }
        Kind::Opfibration => {
            let shapes = [BaseShape::Chain(size.min(3)), BaseShape::Vee, BaseShape::Wedge, BaseShape::Iso, BaseShape::Idempotent];
            let shape = shapes[r.gen_range(0..shapes.len())];
            let (_, mf, _) = random_opfibration(&mut r, shape, 0.5);
            Generated { file: fibration_file(&format!("P{seed}"), &mf), w: None }
        }
        Kind::LocalisationInstance => {
            let (mf, w) = random_localisation_instance(&mut r);
            let b = mf.base();
            let labels = w.iter().map(|&f| b.arr_label(f).to_string()).collect();
            Generated { file: fibration_file(&format!("L{seed}"), &mf), w: Some(labels) }
        }
    }
}

/// Every operation of the workbench, by module.
pub const OPERATIONS: &[(&str, &[&str])] = &[
    (
        "cat_core",
        &[
            "check_fincat",
            "functor_category",
            "comma",
            "product",
            "coproduct",
            "pullback",
            "core",
            "full_subcategory",
            "wide_subcategory",
            "is_fully_faithful",
            "is_surjective_on_isoclasses",
            "is_equivalence",
            "pi0",
            "localisation_preserves_pullback_check",
        ],
    ),
    ("presentation_engine", &["saturate", "pushout", "cocomma", "localize", "sequential_colimit"]),
    (
        "presheaf_engine",
        &[
            "restrict",
            "lan",
            "presheaf_pushout",
            "presheaf_seq_colimit",
            "arrow_left_adjoint",
            "kelly_S",
            "kelly_S_infty",
            "localisation_homs_via_S",
            "gl_is_cartesian",
            "check_good",
            "check_nice",
            "big_list_property_suite",
        ],
    ),
    (
        "fibration_engine",
        &[
            "is_left_fibration",
            "is_right_fibration",
            "is_left_cofinal",
            "cofinal_factorization",
            "cocartesian_arrows",
            "is_cocartesian_fibration",
            "transport",
            "unstraighten",
            "straighten_finite",
            "is_conduche",
            "inverts_W",
            "conduche_inverts_W",
            "invertible_transport_check",
            "localize_fibration",
            "mapping_square_a",
            "mapping_square_b",
            "descent_localisation_check",
            "cocomma_fibration",
            "sequential_descent_glue",
            "groupoid_descent",
        ],
    ),
    (
        "join_universe",
        &[
            "directed_join",
            "join_tower",
            "fun_cocart",
            "virtual_join",
            "is_directed_univalent",
            "univalent_completion",
            "straighten_against",
            "straightening_uniqueness_check",
        ],
    ),
    ("cli_harness", &["parse", "emit_json", "emit_dot", "generate", "run_suite"]),
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn every_operation_is_cited() {
        let cited: BTreeSet<&str> = registry().iter().flat_map(|s| s.ops.iter().copied()).collect();
        let known: BTreeSet<&str> = OPERATIONS.iter().flat_map(|(_, ops)| ops.iter().copied()).collect();
        let missing: Vec<_> = known.difference(&cited).collect();
        let unknown: Vec<_> = cited.difference(&known).collect();
        assert!(missing.is_empty(), "not cited by any suite: {missing:?}");
        assert!(unknown.is_empty(), "cited but not an operation: {unknown:?}");
    }

    #[test]
    fn acceptance_suites_are_numbered_in_order() {
        let nums: Vec<u8> = registry().iter().filter_map(|s| s.criterion).collect();
        assert_eq!(nums, (1..=15).collect::<Vec<u8>>());
        let names = suite_names();
        assert_eq!(names.len(), names.iter().collect::<BTreeSet<_>>().len());
        assert_eq!(find_suite("2").unwrap().name, "localisation-oracle");
        assert_eq!(find_suite("5").unwrap().name, "mapping-squares");
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(matches!(run_suite("nope", &Bounds::default()), Err(SuiteError::Unknown(_))));
    }

    #[test]
    fn streams_are_independent_and_deterministic() {
        let b = Bounds { seed: 7, ..Bounds::default() };
        let draw = |i| b.stream(i).gen::<u64>();
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [Kind::Fincat, Kind::Opfibration, Kind::LocalisationInstance] {
            assert_eq!(generate(kind, 0, 3), generate(kind, 0, 3));
        }
        let c = &generate(Kind::Fincat, 0, 3).file.categories[0].raw;
        assert!(c.objects.len() <= 3);
    }

    #[test]
    fn generated_entities_resolve() {
        for seed in 0..8 {
            let g = generate(Kind::Opfibration, seed, 2);
            let ws = crate::dsl::resolve(g.file, &[]).unwrap();
            assert!(crate::fibration::is_cocartesian_fibration(&ws.fibrations[0].p).is_ok());
            let g = generate(Kind::LocalisationInstance, seed, 0);
            let ws = crate::dsl::resolve(g.file, &[]).unwrap();
            let mf = &ws.fibrations[0];
            let w: Vec<_> = g.w.unwrap().iter().map(|l| mf.base().find_arrow(l).unwrap()).collect();
            assert!(crate::fibration::inverts_w(mf, &w));
        }
    }

    #[test]
    fn failing_requirement_fails_the_suite() {
        let suite = Suite {
            name: "t",
            criterion: None,
            title: "t",
            ops: &[],
            needs: &[("seeded", Need::AtLeast(2))],
            build: |_| vec![job(|| Check::pass("seeded/1")), job(|| Check::truncated("seeded/0", "bound"))],
        };
        let r = run(&suite, &Bounds::default());
        assert!(!r.passed);
        assert_eq!(r.checks[0].id, "seeded/0");
        assert_eq!(r.tally, Tally { pass: 1, fail: 0, truncated: 1 });
    }
}
