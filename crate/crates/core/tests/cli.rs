use std::fs;
use std::path::{Path, PathBuf};

use gfx::cli::run;
use gfx::logic::F_INF;
use tempfile::TempDir;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn gfx(args: &[&str]) -> Run {
    let mut argv = vec!["gfx".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_reports_width_and_violations() {
    let d = TempDir::new().unwrap();
    let ok = file(&d, "inf.gf", F_INF);
    let r = gfx(&["check", s(&ok)]);
    assert_eq!((r.code, r.out.trim()), (0, "ok, width 2"));
    let bad = file(&d, "bad.gf", "exists x y . (P(x) & E(x,y))");
    let r = gfx(&["check", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(!r.out.trim().is_empty());
    let r = gfx(&["--json", "check", s(&ok)]);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["width"], 2);
}

#[test]
fn model_checking_with_assignment() {
    let d = TempDir::new().unwrap();
    let st = file(&d, "a.st", "sig E 2\nsig P 1\nelem a b\natom E a b\natom P b\n");
    let f = file(&d, "f.gf", "exists y . (E(x,y) & P(y))");
    assert_eq!(gfx(&["mc", "-f", s(&f), "-s", s(&st), "--assign", "x=a"]).code, 0);
    let r = gfx(&["mc", "-f", s(&f), "-s", s(&st), "--assign", "x=b"]);
    assert_eq!((r.code, r.out.trim()), (1, "false"));
    let r = gfx(&["mc", "-f", s(&f), "-s", s(&st), "--assign", "x=zz"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("zz"));
}

#[test]
fn bisim_on_tuples() {
    let d = TempDir::new().unwrap();
    let one = file(&d, "one.st", "sig E 2\nelem a b\natom E a b\n");
    let two = file(&d, "two.st", "sig E 2\nelem a b c d\natom E a b\natom E c d\n");
    assert_eq!(gfx(&["bisim", "-a", s(&one), "-b", s(&two), "--tuple", "a,b:c,d"]).code, 0);
    assert_eq!(gfx(&["bisim", "-a", s(&one), "-b", s(&two), "--tuple", "a,b:d,c"]).code, 1);
    let r = gfx(&["bisim", "-a", s(&one), "-b", s(&two)]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("a->c,b->d"), "{}", r.out);
}

#[test]
fn tabloid_compile_and_accept() {
    let d = TempDir::new().unwrap();
    let st = file(&d, "a.st", "sig E 2\nelem a b\natom E a b\n");
    let f = file(&d, "f.gf", "exists x y . (E(x,y) & true)");
    let g = d.path().join("g.lg");
    let r = gfx(&["tabloid", "-s", s(&st), "-f", s(&f), "-o", s(&g)]);
    assert_eq!((r.code, r.out.trim()), (0, "20 nodes, 36 edges"));
    let aut = d.path().join("a.aut");
    let r = gfx(&["compile", "-f", s(&f), "-o", s(&aut)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("states"));
    let r = gfx(&["accept", "-a", s(&aut), "-g", s(&g)]);
    assert_eq!((r.code, r.out.trim()), (0, "accepted"));
    let r = gfx(&["--json", "accept", "-a", s(&aut), "-g", s(&g), "--radius"]);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    assert_eq!(v["accepted"], true);
}

#[test]
fn accept_hand_automaton_and_unravel() {
    let d = TempDir::new().unwrap();
    let aut = file(
        &d,
        "loop.aut",
        "alphabet explicit a b\nstate q exists rank 0 initial\ntrans q letter:a stay q\n",
    );
    let g = file(&d, "g.lg", "node u a\nnode w b\nedge u w\nstart u\n");
    assert_eq!(gfx(&["accept", "-a", s(&aut), "-g", s(&g)]).code, 0);
    let r = gfx(&["accept", "-a", s(&aut), "-g", s(&g), "--from", "w", "--radius"]);
    assert_eq!((r.code, r.out.trim()), (1, "rejected, strategy radius 0"));
    let foreign = file(&d, "h.lg", "node u c\n");
    let r = gfx(&["accept", "-a", s(&aut), "-g", s(&foreign), "--from", "u"]);
    assert_eq!(r.code, 2);
    assert!(r.err.starts_with("gfx: "));
    let r = gfx(&["unravel", "-g", s(&g), "--from", "u", "--depth", "2"]);
    assert_eq!(r.code, 0);
    // u, w, u again
    assert_eq!(r.out.lines().filter(|l| l.starts_with("node")).count(), 3);
}

#[test]
fn finsat_both_modes() {
    let d = TempDir::new().unwrap();
    let inf = file(&d, "inf.gf", F_INF);
    let r = gfx(&["finsat", "-f", s(&inf), "--max-size", "2"]);
    assert_eq!(r.code, 1);
    assert!(r.out.starts_with("no model with at most 2 elements"));
    let edge = file(&d, "e.gf", "exists x y . (E(x,y) & true)");
    let r = gfx(&["--json", "finsat", "-f", s(&edge), "--mode", "automaton"]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    assert_eq!(v["outcome"], "model-found");
    // the atomless one-element structure comes first
    assert_eq!(v["candidates"], 2);
}

#[test]
fn games_solve_and_check() {
    let d = TempDir::new().unwrap();
    let g = file(&d, "g.pg", "pos a exists 1\npos b forall 2\nedge a b\nedge b a\nedge a a\ninit a\n");
    let r = gfx(&["games", "solve", s(&g), "--check"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("a exists -> b"), "{}", r.out);
    assert!(r.out.trim_end().ends_with("initial a won by exists"));
    let bad = file(&d, "bad.pg", "pos a sideways 1\n");
    let r = gfx(&["games", "solve", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("bad.pg"));
}

#[test]
fn corpus_is_seeded() {
    let a = gfx(&["corpus", "--seed", "3", "--count", "5"]);
    let b = gfx(&["corpus", "--seed", "3", "--count", "5"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.out, b.out);
    assert_eq!(a.out.lines().count(), 5);
    let st = gfx(&["corpus", "--structures", "--count", "3"]);
    assert!(st.out.lines().all(|l| l.starts_with("sig")));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(gfx(&["nonsense"]).code, 2);
    assert_eq!(gfx(&["check", "/no/such/file.gf"]).code, 2);
    assert_eq!(gfx(&["--help"]).code, 0);
}
