use std::path::PathBuf;

use pcst::cli::{run_with, EXIT_BETA, EXIT_INPUT, EXIT_OK, EXIT_VIOLATIONS};
use pcst::instance::{gen_star, serialize_instance};
use pcst::rational::frac;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with(std::iter::once("pcst").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn star_file(tag: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("pcst-cli-{tag}-{}.stp", std::process::id()));
    std::fs::write(&path, serialize_instance(&gen_star(3, &frac(3, 5)).unwrap())).unwrap();
    path
}

#[test]
fn solve_reports_json() {
    let path = star_file("solve");
    let (code, out, _) = run(&["solve", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "solve");
    assert_eq!(v["solution"]["total_cost"], "3");
    assert_eq!(v["solution"]["edges"], serde_json::json!([[1, 2], [2, 3], [2, 4]]));
    assert_eq!(v["parameters"]["beta"], "313/250");
    assert_eq!(v["depth"], 0);
    assert!(v["wall_time_ms"].is_u64());
    std::fs::remove_file(path).unwrap();
}

#[test]
fn solve_guards_beta() {
    let path = star_file("beta");
    let file = path.to_str().unwrap();
    assert_eq!(run(&["solve", file, "--beta", "3.2"]).0, EXIT_BETA);
    let (code, out, _) = run(&["solve", file, "--beta", "3.2", "--allow-beta-gt-2", "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["solution"]["total_cost"], "6");
    assert_eq!(run(&["solve", file, "--beta", "0"]).0, EXIT_BETA);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn human_output_shows_decimals() {
    let path = star_file("human");
    let (code, out, _) = run(&["solve", path.to_str().unwrap(), "--steiner", "mst2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("total cost"), "{out}");
    assert!(out.contains("1.252"), "{out}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn all_roots_never_worse_than_the_given_root() {
    let path = star_file("roots");
    let (_, rooted, _) = run(&["solve", path.to_str().unwrap(), "--json"]);
    let (code, any, _) = run(&["solve", path.to_str().unwrap(), "--all-roots", "--json"]);
    assert_eq!(code, EXIT_OK);
    let cost = |s: &str| {
        let v: Value = serde_json::from_str(s).unwrap();
        pcst::rational::parse_rational(v["solution"]["total_cost"].as_str().unwrap()).unwrap()
    };
    assert!(cost(&any) <= cost(&rooted));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn parse_errors_exit_two() {
    let path = std::env::temp_dir().join(format!("pcst-cli-bad-{}.stp", std::process::id()));
    std::fs::write(&path, "33D32945 STP File, STP Format Version 1.0\nSECTION Graph\nNodes x\n").unwrap();
    let (code, _, err) = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line"), "{err}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn verify_corpus_is_clean_and_corruption_is_caught() {
    let (code, out, _) = run(&["verify", "--seed-corpus", "6,25,3", "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["violation_count"], 0);
    assert_eq!(v["instances"].as_array().unwrap().len(), 25);

    let path = star_file("corrupt");
    let (code, _, err) = run(&["verify", path.to_str().unwrap(), "--inject-corruption"]);
    assert_eq!(code, EXIT_VIOLATIONS);
    assert!(err.contains("optimum lower bound"), "{err}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn oracle_and_generate() {
    let (code, text, _) = run(&["generate", "random", "--n", "7", "--seed", "11"]);
    assert_eq!(code, EXIT_OK);
    let path = std::env::temp_dir().join(format!("pcst-cli-gen-{}.stp", std::process::id()));
    std::fs::write(&path, &text).unwrap();
    let (code, out, _) = run(&["oracle", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, EXIT_OK);
    let opt: Value = serde_json::from_str(&out).unwrap();
    let (_, out, _) = run(&["solve", path.to_str().unwrap(), "--json"]);
    let sol: Value = serde_json::from_str(&out).unwrap();
    let parse = |v: &Value| pcst::rational::parse_rational(v.as_str().unwrap()).unwrap();
    assert!(parse(&opt["solution"]["total_cost"]) <= parse(&sol["solution"]["total_cost"]));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn minalpha_human_output() {
    let (code, out, _) = run(&["minalpha", "--p", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("alpha  "), "{out}");
    assert!(out.contains("1.675"), "{out}");
}
