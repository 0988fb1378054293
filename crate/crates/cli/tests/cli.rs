use std::path::Path;
use std::process::{Command, Output};

use cocart::dsl::{parse_str, resolve};

const INTERVAL: &str = "category I { objects a b; arrows f: a -> b }\n";

fn cocart(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cocart")).args(args).current_dir(dir).env_remove("COCART_WORKSPACE").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn workspace(files: &[(&str, &str)]) -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    for (name, text) in files {
        std::fs::write(d.path().join(name), text).unwrap();
    }
    d
}

#[test]
fn check_accepts_the_interval() {
    let d = workspace(&[("i.fincat", INTERVAL)]);
    let o = cocart(d.path(), &["check", "i.fincat"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("category I: 2 objects, 3 arrows"));
}

#[test]
fn syntax_errors_carry_a_location() {
    let d = workspace(&[("bad.fincat", "category I {\n  objects a b;\n  arrows f a -> b\n}\n")]);
    let o = cocart(d.path(), &["check", "bad.fincat"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("3:"), "{}", stderr(&o));
}

#[test]
fn unresolved_reference_is_reported() {
    let d = workspace(&[("f.fincat", "category T { objects t }\nfunctor F: I -> T { a -> t }\n")]);
    let o = cocart(d.path(), &["check", "f.fincat"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unresolved category `I`"), "{}", stderr(&o));
}

#[test]
fn localisation_output_parses_back() {
    let d = workspace(&[("i.fincat", INTERVAL)]);
    let o = cocart(d.path(), &["construct", "localize", "i.fincat", "I", "f"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ws = resolve(parse_str(&stdout(&o)).unwrap(), &[]).unwrap();
    let j = ws.category("I[W^-1]").unwrap();
    assert_eq!((j.num_objects(), j.num_arrows()), (2, 4));
    assert!(j.is_groupoid());
}

#[test]
fn straighten_then_unstraighten() {
    let src = format!("{INTERVAL}category T {{ objects t }}\nfunctor P: I -> T {{ a -> t; b -> t; f -> id_t }}\nfibration F {{ functor P }}\n");
    let d = workspace(&[("p.fincat", &src)]);
    let st = cocart(d.path(), &["fib", "straighten", "p.fincat", "F"]);
    assert!(st.status.success(), "{}", stderr(&st));
    std::fs::write(d.path().join("st.fincat"), stdout(&st)).unwrap();
    let un = cocart(d.path(), &["fib", "unstraighten", "st.fincat", "T"]);
    assert!(un.status.success(), "{}", stderr(&un));
    let ws = resolve(parse_str(&stdout(&un)).unwrap(), &[]).unwrap();
    let e = ws.fibrations[0].total();
    assert_eq!((e.num_objects(), e.num_arrows()), (2, 3));
}

#[test]
fn conduche_verdicts() {
    let src = "category V { objects 0 1 2; arrows a: 0 -> 1, b: 1 -> 2, c: 0 -> 2; compose b . a = c }\n\
               category I { objects x y; arrows f: x -> y }\n\
               functor Q: V -> I { 0 -> x; 1 -> y; 2 -> y; a -> f; b -> id_y; c -> f }\n";
    let d = workspace(&[("q.fincat", src)]);
    let o = cocart(d.path(), &["fib", "conduche", "q.fincat", "Q", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["conduche"], true);
    assert_eq!(o.status.code(), Some(0));

    let skip = "category E { objects p q; arrows a: p -> q }\n\
                category B { objects 0 1 2; arrows s: 0 -> 1, t: 1 -> 2, u: 0 -> 2; compose t . s = u }\n\
                functor N: E -> B { p -> 0; q -> 2; a -> u }\n";
    let d = workspace(&[("n.fincat", skip)]);
    let o = cocart(d.path(), &["fib", "conduche", "n.fincat", "N", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["conduche"], false);
    assert_eq!(v["witness"], serde_json::json!(["p", "1", "q"]));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical() {
    let d = workspace(&[]);
    let a = cocart(d.path(), &["verify", "conduche-counterexample", "--json"]);
    let b = cocart(d.path(), &["verify", "8", "--json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v.get("wall_time").is_none());
}

#[test]
fn config_and_flags() {
    let d = workspace(&[("cocart.toml", "seed = 5\nmax-stages = 4\n")]);
    let report = |args: &[&str]| -> serde_json::Value {
        let o = Command::new(env!("CARGO_BIN_EXE_cocart")).args(args).env("COCART_WORKSPACE", d.path()).output().unwrap();
        serde_json::from_slice(&o.stdout).unwrap()
    };
    let from_file = report(&["verify", "8", "--json"]);
    assert_eq!(from_file["bounds"]["seed"], 5);
    assert_eq!(from_file["bounds"]["max_stages"], 4);
    let flagged = report(&["verify", "8", "--json", "--seed", "9"]);
    assert_eq!(flagged["bounds"]["seed"], 9);
    assert_eq!(flagged["bounds"]["max_stages"], 4);
}

#[test]
fn suite_blocks_run_with_their_bounds() {
    let d = workspace(&[("s.fincat", "suite quick { run conduche-counterexample, descent-glue; seed 11 }\n")]);
    let o = cocart(d.path(), &["verify", "quick", "--file", "s.fincat", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["suite"], "descent-glue");
    assert_eq!(v[0]["bounds"]["seed"], 11);
}

#[test]
fn unknown_suite_and_conflicting_formats() {
    let d = workspace(&[("i.fincat", INTERVAL)]);
    assert_eq!(cocart(d.path(), &["verify", "nope"]).status.code(), Some(2));
    assert_eq!(cocart(d.path(), &["check", "i.fincat", "--json", "--dot"]).status.code(), Some(2));
}

#[test]
fn dot_output() {
    let d = workspace(&[("i.fincat", INTERVAL)]);
    let o = cocart(d.path(), &["check", "i.fincat", "--dot"]);
    assert!(stdout(&o).starts_with("digraph \"I\" {"));
    assert_eq!(stdout(&o).matches("->").count(), 1);
}

#[test]
fn generation_is_deterministic() {
    let d = workspace(&[]);
    let a = cocart(d.path(), &["generate", "opfibration", "--seed", "4"]);
    let b = cocart(d.path(), &["generate", "opfibration", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    resolve(parse_str(&stdout(&a)).unwrap(), &[]).unwrap();
}

#[test]
fn join_of_the_interval_core() {
    let src = format!("{INTERVAL}category K {{ objects a b }}\nfunctor C: K -> I {{ a -> a; b -> b }}\n");
    let d = workspace(&[("j.fincat", &src)]);
    let o = cocart(d.path(), &["construct", "join", "j.fincat", "C", "C"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("# stable at stage 1"), "{}", stdout(&o));
}
