use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gboost::{read_fst, read_pairs, read_symbols, write_diff, write_fst, write_symbols, Weights};
use gboost_core::{enhance_in_place, oracle_score, parse_arpa};
use gboost_testkit::{ool_fixture, random_sentences, toy_trigram, toy_vocab};

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn new() -> Self {
        Work {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn put(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_gboost"))
            .current_dir(self.dir.path())
            .env_remove("GBOOST_WEIGHTS")
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn build(&self, arpa: &str) {
        self.put("m.arpa", arpa);
        self.ok(&[
            "build-g",
            "--arpa",
            "m.arpa",
            "--out-fst",
            "g.fst",
            "--out-syms",
            "g.syms",
        ]);
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const PAIRS: &str = r#"{"theta": -1, "max_predictors": 2, "groups": [
  {"predictors": ["dog", "cat"], "targets": ["mat", "zebra"],
   "frequencies": {"dog": 50, "cat": 40, "mat": 5}, "new_words": ["zebra"]}]}"#;

#[test]
fn build_g_writes_graph_and_symbols() {
    let w = Work::new();
    let (_, lm) = toy_trigram(1);
    w.build(&lm.to_arpa());
    let syms = w.read("g.syms");
    assert!(syms.starts_with("<eps>\t0\n"));
    let table = read_symbols(&syms).unwrap();
    let g = read_fst(&w.read("g.fst"), table, Weights::LogProb).unwrap();
    assert!(g.num_arcs() > 100);
}

#[test]
fn score_matches_the_oracle() {
    let w = Work::new();
    let (_, lm) = toy_trigram(2);
    let arpa = lm.to_arpa();
    w.build(&arpa);
    let sentences = random_sentences(3, &toy_vocab(), 30, 0..=7);
    let text: String = sentences.iter().map(|s| s.join(" ") + "\n").collect();
    w.put("s.txt", &text);
    let out = w.ok(&[
        "score", "--fst", "g.fst", "--syms", "g.syms", "--text", "s.txt",
    ]);
    let model = parse_arpa(&arpa).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), sentences.len());
    for (line, s) in lines.iter().zip(&sentences) {
        let (score, sentence) = line.split_once('\t').unwrap();
        assert_eq!(sentence, s.join(" "));
        let words: Vec<&str> = s.iter().map(String::as_str).collect();
        let want = oracle_score(&model, &words).unwrap();
        // file weights carry 9 significant digits per arc
        let got: f64 = score.parse().unwrap();
        assert!(
            (got - want).abs() < 1e-7 * want.abs().max(1.0),
            "{line}: {want}"
        );
    }
}

#[test]
fn weights_convention_from_flag_or_environment() {
    let w = Work::new();
    let (_, lm) = toy_trigram(4);
    w.build(&lm.to_arpa());
    let logprob = w.read("g.fst");
    w.ok(&[
        "build-g",
        "--arpa",
        "m.arpa",
        "--out-fst",
        "c.fst",
        "--out-syms",
        "c.syms",
        "--weights",
        "cost",
    ]);
    let cost = w.read("c.fst");
    let out = Command::new(env!("CARGO_BIN_EXE_gboost"))
        .current_dir(w.dir.path())
        .env("GBOOST_WEIGHTS", "cost")
        .args([
            "build-g",
            "--arpa",
            "m.arpa",
            "--out-fst",
            "e.fst",
            "--out-syms",
            "e.syms",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(w.read("e.fst"), cost);
    let table = read_symbols(&w.read("g.syms")).unwrap();
    let a = read_fst(&logprob, table.clone(), Weights::LogProb).unwrap();
    let b = read_fst(&cost, table, Weights::Cost).unwrap();
    assert_eq!(a, b);
}

#[test]
fn enhance_pipeline_equals_in_memory_run_on_the_same_input() {
    let w = Work::new();
    let (_, lm) = toy_trigram(5);
    w.build(&lm.to_arpa());
    w.put("pairs.json", PAIRS);
    w.ok(&[
        "enhance",
        "--in-fst",
        "g.fst",
        "--in-syms",
        "g.syms",
        "--pairs",
        "pairs.json",
        "--out-fst",
        "e.fst",
        "--out-syms",
        "e.syms",
        "--diff",
        "e.diff",
    ]);
    // same steps in memory, starting from the serialized graph
    let mut g = read_fst(
        &w.read("g.fst"),
        read_symbols(&w.read("g.syms")).unwrap(),
        Weights::LogProb,
    )
    .unwrap();
    let out = enhance_in_place(&mut g, &read_pairs(PAIRS).unwrap()).unwrap();
    assert_eq!(w.read("e.fst"), write_fst(&g, Weights::LogProb).unwrap());
    assert_eq!(w.read("e.syms"), write_symbols(g.symbols()));
    assert_eq!(
        w.read("e.diff"),
        write_diff(&out.diff, &g, Weights::LogProb)
    );
    assert!(w
        .read("e.diff")
        .lines()
        .all(|l| l.starts_with('+') || l.starts_with('~')));
    assert!(w
        .read("e.syms")
        .lines()
        .last()
        .unwrap()
        .starts_with("zebra\t"));
    // diff-fst recovers the same listing from the two files
    let listed = w.ok(&[
        "diff-fst",
        "--before-fst",
        "g.fst",
        "--before-syms",
        "g.syms",
        "--after-fst",
        "e.fst",
        "--after-syms",
        "e.syms",
    ]);
    let mut a: Vec<&str> = listed.lines().collect();
    let d = w.read("e.diff");
    let mut b: Vec<&str> = d.lines().collect();
    a.sort_unstable();
    b.sort_unstable();
    assert_eq!(a, b);
    // the enhanced graph scores the new word
    w.put("s.txt", "the zebra\n");
    let scored = w.ok(&[
        "score", "--fst", "e.fst", "--syms", "e.syms", "--text", "s.txt",
    ]);
    assert!(scored.ends_with("\tthe zebra\n"));
}

#[test]
fn unknown_predictor_is_an_invariant_violation() {
    let w = Work::new();
    let (_, lm) = toy_trigram(6);
    w.build(&lm.to_arpa());
    w.put(
        "pairs.json",
        &PAIRS.replace(r#"["dog", "cat"]"#, r#"["dog", "walrus"]"#),
    );
    let out = w.run(&[
        "enhance",
        "--in-fst",
        "g.fst",
        "--in-syms",
        "g.syms",
        "--pairs",
        "pairs.json",
        "--out-fst",
        "e.fst",
        "--out-syms",
        "e.syms",
        "--diff",
        "e.diff",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("\"walrus\""), "{}", stderr(&out));
    assert!(!w.path("e.fst").exists());
}

#[test]
fn previously_appended_word_cannot_be_declared_new_again_from_disk() {
    let w = Work::new();
    let (_, lm) = toy_trigram(7);
    w.build(&lm.to_arpa());
    w.put("pairs.json", PAIRS);
    let args = |i: &str, o: &str| {
        vec![
            "enhance".to_string(),
            "--in-fst".into(),
            format!("{i}.fst"),
            "--in-syms".into(),
            format!("{i}.syms"),
            "--pairs".into(),
            "pairs.json".into(),
            "--out-fst".into(),
            format!("{o}.fst"),
            "--out-syms".into(),
            format!("{o}.syms"),
            "--diff".into(),
            format!("{o}.diff"),
        ]
    };
    let first: Vec<String> = args("g", "e");
    w.ok(&first.iter().map(String::as_str).collect::<Vec<_>>());
    let second: Vec<String> = args("e", "f");
    let out = w.run(&second.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("zebra"));
}

#[test]
fn exit_codes() {
    let w = Work::new();
    // usage: unknown flag, missing subcommand, missing input file
    assert_eq!(code(&w.run(&["build-g", "--bogus"])), 1);
    assert_eq!(code(&w.run(&[])), 1);
    let out = w.run(&[
        "build-g",
        "--arpa",
        "nope.arpa",
        "--out-fst",
        "g.fst",
        "--out-syms",
        "g.syms",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nope.arpa"));
    assert_eq!(code(&w.run(&["--weights", "upside-down", "build-g"])), 1);
    // format: broken ARPA names the line
    w.put(
        "bad.arpa",
        "\\data\\\nngram 1=1\n\n\\1-grams:\n-0.5\n\\end\\\n",
    );
    let out = w.run(&[
        "build-g",
        "--arpa",
        "bad.arpa",
        "--out-fst",
        "g.fst",
        "--out-syms",
        "g.syms",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));
    // format: malformed pairs JSON
    let (_, lm) = toy_trigram(8);
    w.build(&lm.to_arpa());
    w.put("pairs.json", "{\"theta\": 0");
    let out = w.run(&[
        "enhance",
        "--in-fst",
        "g.fst",
        "--in-syms",
        "g.syms",
        "--pairs",
        "pairs.json",
        "--out-fst",
        "e.fst",
        "--out-syms",
        "e.syms",
        "--diff",
        "e.diff",
    ]);
    assert_eq!(code(&out), 2);
    // invariant: sentence with a boundary token
    w.put("s.txt", "the </s> cat\n");
    assert_eq!(
        code(&w.run(&["score", "--fst", "g.fst", "--syms", "g.syms", "--text", "s.txt"])),
        3
    );
    assert_eq!(code(&w.run(&["--help"])), 0);
}

#[test]
fn positive_theta_warns_about_candidates_above_their_source() {
    let w = Work::new();
    let (_, lm) = toy_trigram(9);
    w.build(&lm.to_arpa());
    w.put(
        "pairs.json",
        &PAIRS.replace("\"theta\": -1", "\"theta\": 3"),
    );
    let out = w.run(&[
        "enhance",
        "--in-fst",
        "g.fst",
        "--in-syms",
        "g.syms",
        "--pairs",
        "pairs.json",
        "--out-fst",
        "e.fst",
        "--out-syms",
        "e.syms",
        "--diff",
        "e.diff",
    ]);
    assert_eq!(code(&out), 0);
    assert!(
        stderr(&out).contains("more probable than the predictor arc"),
        "{}",
        stderr(&out)
    );
    let quiet = w.run(&[
        "-q",
        "enhance",
        "--in-fst",
        "g.fst",
        "--in-syms",
        "g.syms",
        "--pairs",
        "pairs.json",
        "--out-fst",
        "e.fst",
        "--out-syms",
        "e.syms",
        "--diff",
        "e.diff",
    ]);
    assert!(stderr(&quiet).is_empty());
}

fn ool_files(w: &Work) {
    let f = ool_fixture(3);
    w.build(&f.arpa);
    let groups: Vec<serde_json::Value> = f
        .groups
        .iter()
        .map(|(preds, targets)| {
            let freqs: serde_json::Map<String, serde_json::Value> =
                preds.iter().map(|p| (p.clone(), f.frequencies[p].into())).collect();
            serde_json::json!({"predictors": preds, "targets": targets, "frequencies": freqs, "new_words": targets})
        })
        .collect();
    let pairs = serde_json::json!({"theta": 0, "max_predictors": 5, "groups": groups});
    w.put("pairs.json", &pairs.to_string());
    let cases: Vec<serde_json::Value> = f
        .cases
        .iter()
        .map(|c| serde_json::json!({"reference": c.reference, "focus": c.focus, "competitors": c.competitors}))
        .collect();
    w.put("cases.json", &serde_json::Value::from(cases).to_string());
}

#[test]
fn eval_grid_shape_and_determinism() {
    let w = Work::new();
    ool_files(&w);
    let args = |out: &'static str| {
        [
            "eval",
            "--fst",
            "g.fst",
            "--syms",
            "g.syms",
            "--cases",
            "cases.json",
            "--pairs",
            "pairs.json",
            "--theta-list",
            "-4,-2,0,2,4",
            "--chnum-list",
            "1,2,3,4,5",
            "--out",
            out,
        ]
    };
    w.ok(&args("r1"));
    w.ok(&args("r2"));
    let tsv = w.read("r1/report.tsv");
    assert_eq!(tsv, w.read("r2/report.tsv"));
    assert_eq!(w.read("r1/cases.json"), w.read("r2/cases.json"));
    assert!(tsv.starts_with("# focus-token error rate (%), an LM-only proxy"));
    let rows: Vec<&str> = tsv.lines().skip(1).collect();
    assert_eq!(
        rows[0],
        "theta\tChNum=1\tChNum=2\tChNum=3\tChNum=4\tChNum=5"
    );
    assert_eq!(rows.len(), 6);
    let cells: usize = rows[1..].iter().map(|r| r.split('\t').count() - 1).sum();
    assert_eq!(cells, 25);
    let json: serde_json::Value = serde_json::from_str(&w.read("r1/cases.json")).unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 25);
    assert!(json["measure"].as_str().unwrap().contains("LM-only proxy"));
}

#[test]
fn eval_without_pairs_reports_the_baseline() {
    let w = Work::new();
    ool_files(&w);
    let out = w.ok(&[
        "eval",
        "--fst",
        "g.fst",
        "--syms",
        "g.syms",
        "--cases",
        "cases.json",
        "--out",
        "base",
    ]);
    assert!(out.ends_with("baseline\t100.00\n"), "{out}");
    assert!(Path::new(&w.path("base/cases.json")).exists());
    let bad = w.run(&[
        "eval",
        "--fst",
        "g.fst",
        "--syms",
        "g.syms",
        "--cases",
        "cases.json",
        "--theta-list",
        "1",
        "--out",
        "x",
    ]);
    assert_eq!(code(&bad), 1);
}
