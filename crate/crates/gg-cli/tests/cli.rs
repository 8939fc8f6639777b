use std::path::PathBuf;
use std::process::{Command, Output};

use gg_cli::{parse_complex, parse_triangulation, RunConfig};
use gkz::C64;
use proptest::prelude::*;

const EX313_PAIR: [&str; 4] = ["--from", "234,235,245", "--to", "124,125,234,235"];

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

fn gg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gg")).args(args).output().unwrap()
}

fn verify_args<'a>(matrix: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["verify", "--matrix", matrix];
    v.extend(EX313_PAIR);
    v.extend(extra);
    v
}

#[test]
fn exit_codes() {
    let m = data("five_point.json");
    assert_eq!(gg(&["rank", "--matrix", &m]).status.code(), Some(0));
    assert_eq!(gg(&["rank"]).status.code(), Some(2));
    assert_eq!(gg(&["rank", "--matrix", "/nonexistent/a.json"]).status.code(), Some(2));
    assert_eq!(gg(&["rank", "--matrix", &m, "--no-such-flag"]).status.code(), Some(2));
    // not a pair of adjacent triangulations
    assert_eq!(gg(&["connect", "--matrix", &m, "--from", "134,135", "--to", "234,235,245"]).status.code(), Some(2));
    // the connection needs a homogeneous configuration
    let f = data("two_facet.json");
    let fan: serde_json::Value = serde_json::from_slice(&gg(&["fan", "--matrix", &f]).stdout).unwrap();
    let tri = |k: usize| serde_json::to_string(&fan["result"]["nodes"][k]["triangulation"]).unwrap();
    let e = &fan["result"]["edges"][0];
    let (x, y) = (tri(e["from"].as_u64().unwrap() as usize), tri(e["to"].as_u64().unwrap() as usize));
    let out = gg(&["connect", "--matrix", &f, "--from", &x, "--to", &y]);
    assert_eq!(out.status.code(), Some(2));
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["error"]["kind"], "NormalizationImpossible");
    // defects near 1e-15 cannot meet an absurd tolerance
    let out = gg(&verify_args(&m, &["--c", "0.31,0.27+0.1i,-0.43", "--tol", "1e-30"]));
    assert_eq!(out.status.code(), Some(3));
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["result"]["passed"], false);
    // path outside the convergence sector
    assert_eq!(
        gg(&["path", "--matrix", &m, "--from", "234,235,245", "--to", "124,125,234,235", "--args=-0.1,0,0,0,0"]).status.code(),
        Some(2)
    );
}

#[test]
fn output_is_deterministic() {
    let m = data("five_point.json");
    let args = verify_args(&m, &["--order", "20"]);
    let a = gg(&args);
    let b = gg(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let fan = ["fan", "--matrix", &m];
    assert_eq!(gg(&fan).stdout, gg(&fan).stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let m = data("five_point.json");
    let args = verify_args(&m, &["--order", "20"]);
    let one = Command::new(env!("CARGO_BIN_EXE_gg")).args(&args).env("GG_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_gg")).args(&args).env("GG_THREADS", "4").output().unwrap();
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn run_config_replays_flags() {
    let m = data("five_point.json");
    let cfg = RunConfig {
        matrix: Some(PathBuf::from(&m)),
        order: 20,
        c: Some(vec![C64::new(0.31, 0.0), C64::new(0.27, 0.1), C64::new(-0.43, 0.0)]),
        ..RunConfig::default()
    };
    let path = scratch("replay.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let mut from_cfg = vec!["verify", "--config", path.to_str().unwrap()];
    from_cfg.extend(EX313_PAIR);
    let by_flags = gg(&verify_args(&m, &["--order", "20", "--c", "0.31,0.27+0.1i,-0.43"]));
    assert_eq!(gg(&from_cfg).stdout, by_flags.stdout);
}

#[test]
fn out_flag_writes_file() {
    let m = data("appell.json");
    let path = scratch("rank.json");
    let _ = std::fs::remove_file(&path);
    let out = gg(&["rank", "--matrix", &m, "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let body: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(body["result"]["rank"], "3");
    assert_eq!(body["command"], "rank");
}

#[test]
fn argument_parsers() {
    let c = |s| parse_complex(s).unwrap();
    assert_eq!(c("0.27+0.1i"), C64::new(0.27, 0.1));
    assert_eq!(c("-0.43"), C64::new(-0.43, 0.0));
    assert_eq!(c("-i"), C64::new(0.0, -1.0));
    assert_eq!(c("2i"), C64::new(0.0, 2.0));
    assert_eq!(c("1e-3-2e-2i"), C64::new(1e-3, -2e-2));
    assert!(parse_complex("1+2j").is_err());
    assert_eq!(parse_triangulation("135,134").unwrap(), vec![vec![1, 3, 4], vec![1, 3, 5]]);
    assert_eq!(parse_triangulation("[[5,3,1],[1,3,4]]").unwrap(), vec![vec![1, 3, 4], vec![1, 3, 5]]);
    assert!(parse_triangulation("1x3").is_err());
}

proptest! {
    #[test]
    fn run_config_round_trip(order in 1u32..200, tol in 1e-15f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0, seed: u64, args in proptest::collection::vec(-10.0f64..10.0, 0..6)) {
        let cfg = RunConfig {
            order,
            tol,
            c: Some(vec![C64::new(re, im); 3]),
            args: if args.is_empty() { None } else { Some(args) },
            r: Some("1/2".into()),
            seed,
            ..RunConfig::default()
        };
        let s = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
