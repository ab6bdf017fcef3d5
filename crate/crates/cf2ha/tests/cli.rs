mod common;

use std::path::Path;

use cf2ha::automata::{classify_fragment, parse_automaton, Fragment};
use cf2ha::cli::run;
use common::fixture_path;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn cf2ha(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args.iter().copied(), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn fx(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn predicates_use_exit_codes() {
    let r = cf2ha(&["member", "-a", &fx("example2.aut"), "-h", "a a b(b) c c"]);
    assert_eq!((r.code, r.out.trim()), (0, "true"));
    let r = cf2ha(&["member", "-a", &fx("example2.aut"), "-h", "a b(b) c c"]);
    assert_eq!((r.code, r.out.trim()), (1, "false"));
    let r = cf2ha(&["empty", "-a", &fx("empty.aut")]);
    assert_eq!((r.code, r.out.trim()), (0, "true"));
    let r = cf2ha(&["empty", "-a", &fx("example2.aut")]);
    assert_eq!((r.code, r.out.trim()), (1, "false"));
    let r = cf2ha(&["classify", "-a", &fx("example2.aut")]);
    assert_eq!((r.code, r.out.trim()), (0, "CF2HA"));
    let r = cf2ha(&["classify", "-a", &fx("param_item.aut")]);
    assert_eq!(r.out.trim(), "HA");
}

#[test]
fn trace_prints_a_reduction() {
    let r = cf2ha(&["trace", "-a", &fx("example2.aut"), "-h", "a b c"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("→ q2"), "{}", r.out);
    let r = cf2ha(&["trace", "-a", &fx("example2.aut"), "-h", "a b"]);
    assert_eq!((r.code, r.out.trim()), (1, "rejected"));
}

#[test]
fn compare_reports_no_differences() {
    let r = cf2ha(&["compare", "--mode", "monadic", "-a", &fx("p0.aut"), "-r", &fx("ex1.hrs"), "--max-size", "9"]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    assert!(r.out.contains("0 differences"));
    let r = cf2ha(&[
        "compare", "--mode", "update", "-a", &fx("doc.aut"), "-p", &fx("doc_update.phrs"), "--max-size", "5", "--slack", "2",
    ]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    assert!(r.out.contains("0 differences"));
}

#[test]
fn literal_catch_all_shows_up_as_differences() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("g.aut");
    let rules = dir.path().join("r.hrs");
    std::fs::write(&a, "alphabet: g d e p\nstates: f\nfinal: f\ntrans: g -> f\n").unwrap();
    std::fs::write(&rules, "rule p($x) -> d($x) e\n").unwrap();
    let args = |mode: &'static str| -> Vec<String> {
        ["compare", "--mode", "monadic", "-a", path_str(&a), "-r", path_str(&rules), "--max-size", "3", "--catch-all", mode]
            .map(String::from)
            .to_vec()
    };
    let omit = cf2ha(&args("omit").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(omit.code, 0, "{}", omit.out);
    let literal = cf2ha(&args("literal").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(literal.code, 1);
    assert!(literal.out.contains("+ g(e)"), "{}", literal.out);
}

#[test]
fn closure_outputs_reparse_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("t1.aut");
    let out2 = dir.path().join("t2.aut");
    for out in [&out1, &out2] {
        let r = cf2ha(&["closure-monadic", "-a", &fx("p0.aut"), "-r", &fx("ex1.hrs"), "-o", path_str(out)]);
        assert_eq!(r.code, 0, "{}", r.err);
    }
    let (t1, t2) = (std::fs::read_to_string(&out1).unwrap(), std::fs::read_to_string(&out2).unwrap());
    assert!(t1.starts_with("# generated by cf2ha"));
    // Only the output path in the command line differs.
    assert_eq!(t1.replace("t1.aut", "OUT"), t2.replace("t2.aut", "OUT"));
    let a = parse_automaton(&t1).unwrap();
    a.validate().unwrap();
    let r = cf2ha(&["member", "-a", path_str(&out1), "-h", "a a b(b) c c"]);
    assert_eq!(r.code, 0);

    let out = dir.path().join("doc_post.aut");
    let r = cf2ha(&["closure-update", "-a", &fx("doc.aut"), "-p", &fx("doc_update.phrs"), "-o", path_str(&out)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let a = parse_automaton(&std::fs::read_to_string(&out).unwrap()).unwrap();
    a.validate().unwrap();
    assert_ne!(classify_fragment(&a), Fragment::CF2HA);
    assert!(dir.path().join("doc_post.hat-map").exists());
    let r = cf2ha(&["member", "-a", path_str(&out), "-h", "doc(item log item)"]);
    assert_eq!(r.code, 0);
}

#[test]
fn hat_map_sidecar_lists_representatives() {
    let dir = tempfile::tempdir().unwrap();
    let phrs = dir.path().join("loop.phrs");
    std::fs::write(&phrs, "rule: ren a -> b\nrule: ren b -> a\nrule: ren b -> c\n").unwrap();
    let aut = dir.path().join("a.aut");
    std::fs::write(&aut, "alphabet: a b c\nstates: e v f\nfinal: f\ntrans: -> e\ntrans: b(e) -> v\ntrans: e v -> f\n").unwrap();
    let out = dir.path().join("post.aut");
    let r = cf2ha(&["closure-update", "-a", path_str(&aut), "-p", path_str(&phrs), "-o", path_str(&out)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let map = std::fs::read_to_string(dir.path().join("post.hat-map")).unwrap();
    assert!(map.contains("map: b -> a"), "{map}");
    // Queries go through the map: `b` is represented by `a`.
    let r = cf2ha(&["member", "-a", path_str(&out), "-h", "a"]);
    assert_eq!(r.code, 0);
    let r = cf2ha(&["member", "-a", path_str(&out), "-h", "c"]);
    assert_eq!(r.code, 0);
    let r = cf2ha(&["hat", "-p", path_str(&phrs)]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("# map: b -> a") && r.out.contains("rule: ren a -> c"), "{}", r.out);
}

#[test]
fn malformed_input_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.aut");
    std::fs::write(&bad, "alphabet: a\nstates: q\ntrans: a( -> q\n").unwrap();
    let r = cf2ha(&["empty", "-a", path_str(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("bad.aut:3:"), "{}", r.err);
    let r = cf2ha(&["member", "-a", &fx("example2.aut"), "-h", "a(("]);
    assert_eq!(r.code, 2);
    let r = cf2ha(&["member", "-a", &fx("example2.aut"), "-h", "zz"]);
    assert_eq!(r.code, 2);
    let r = cf2ha(&["empty", "-a", "/nonexistent/x.aut"]);
    assert_eq!(r.code, 2);
    let r = cf2ha(&["no-such-command"]);
    assert_eq!(r.code, 2);
}

#[test]
fn rule_class_rejections_exit_3() {
    let r = cf2ha(&["closure-monadic", "-a", &fx("p0.aut"), "-r", &fx("ex5.hrs")]);
    assert_eq!(r.code, 3);
    assert!(r.err.contains("ex5.hrs:2:") && r.err.contains("1-childvar"), "{}", r.err);
    let r = cf2ha(&["closure-update", "-a", &fx("doc.aut"), "-p", &fx("ex5_split.phrs")]);
    assert_eq!(r.code, 3);
    assert!(r.err.contains("ex5_split.phrs:2:") && r.err.contains("combines"), "{}", r.err);
}

#[test]
fn transformations_write_parsable_automata() {
    for cmd in ["clean", "normalize"] {
        let r = cf2ha(&[cmd, "-a", &fx("doc.aut")]);
        assert_eq!(r.code, 0, "{cmd}: {}", r.err);
        parse_automaton(&r.out).unwrap().validate().unwrap();
    }
    let r = cf2ha(&["union", "-a", &fx("doc.aut"), "-b", &fx("doc.aut")]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(parse_automaton(&r.out).unwrap().states.len(), 6);
    let r = cf2ha(&["normalize", "-a", &fx("example2.aut")]);
    assert_eq!(r.code, 2, "CF2HA input cannot be normalized");
}

#[test]
fn oracle_post_lists_hedges() {
    let r = cf2ha(&["oracle-post", "--mode", "monadic", "-r", &fx("ex1.hrs"), "--seed", "p0", "--max-size", "5"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert!(lines[0].contains("exact"));
    assert!(lines.contains(&"a b c") && lines.contains(&"a p0(b) c"));
}
