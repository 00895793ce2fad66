use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abandon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abandon"))
        .args(args)
        .output()
        .expect("spawn abandon")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_scene(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("test.scene");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn empty_scene_gives_no_detections() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = write_scene(tmp.path(), "scene width=64 height=48 duration=40 noise=2 seed=1\n");
    let frames = tmp.path().join("frames");
    let out = abandon(&["synth", "--scene", s(&scene), "--out", s(&frames)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dets = tmp.path().join("dets.txt");
    let out = abandon(&["run", "--reference-classifiers", "--input", s(&frames), "--output", s(&dets)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&dets).unwrap(), "");
}

#[test]
fn missing_model_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = write_scene(tmp.path(), "scene width=32 height=32 duration=3\n");
    let frames = tmp.path().join("frames");
    assert!(abandon(&["synth", "--scene", s(&scene), "--out", s(&frames)]).status.success());
    let missing = tmp.path().join("nope.json");
    let out = abandon(&["run", "--input", s(&frames), "--stage1", s(&missing), "--stage2", s(&missing)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn garbage_model_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = write_scene(tmp.path(), "scene width=32 height=32 duration=3\n");
    let frames = tmp.path().join("frames");
    assert!(abandon(&["synth", "--scene", s(&scene), "--out", s(&frames)]).status.success());
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\"weights\": [1.0]}").unwrap();
    let out = abandon(&["run", "--input", s(&frames), "--stage1", s(&bad), "--stage2", s(&bad)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bad_config_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = abandon(&["run", "--reference-classifiers", "--input", s(tmp.path()), "--set", "bg.alpha=7"]);
    assert_eq!(out.status.code(), Some(3));
    let out = abandon(&["run", "--reference-classifiers", "--input", s(tmp.path()), "--set", "no.such_key=1"]);
    assert_eq!(out.status.code(), Some(3));
    let cfg = tmp.path().join("bad.conf");
    fs::write(&cfg, "track.miss_limit = lots\n").unwrap();
    let out = abandon(&["run", "--reference-classifiers", "--input", s(tmp.path()), "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unreadable_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent");
    let out = abandon(&["run", "--reference-classifiers", "--input", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));

    let corrupt = tmp.path().join("corrupt");
    fs::create_dir(&corrupt).unwrap();
    fs::write(corrupt.join("000000.ppm"), b"P6\n4 4\n255\nshort").unwrap();
    let out = abandon(&["run", "--reference-classifiers", "--input", s(&corrupt)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn print_config_round_trips() {
    let out = abandon(&["run", "--print-config", "--set", "sod.min_area=123"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.replace(' ', "") == "sod.min_area=123"), "{text}");
}

#[test]
fn synth_run_eval_finds_the_dropped_bag() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = write_scene(
        tmp.path(),
        "scene width=160 height=120 duration=200 noise=3 seed=9 background=builtin:tiles\n\
         object walker kind=person shape=builtin:walker\n\
         waypoint walker frame=0 x=10 y=60\n\
         waypoint walker frame=60 x=70 y=60\n\
         waypoint walker frame=120 x=140 y=60\n\
         object bag kind=luggage shape=builtin:bag\n\
         waypoint bag frame=0 x=5 y=90\n\
         waypoint bag frame=60 x=65 y=90\n\
         waypoint bag frame=199 x=65 y=90\n\
         abandon bag frame=60\n",
    );
    let frames = tmp.path().join("frames");
    let truth = tmp.path().join("truth.txt");
    let out = abandon(&["synth", "--scene", s(&scene), "--out", s(&frames), "--truth", s(&truth)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(&frames).unwrap().count(), 200);

    let dets = tmp.path().join("dets.txt");
    let out = abandon(&["run", "--reference-classifiers", "--input", s(&frames), "--output", s(&dets)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read_to_string(&dets).unwrap();
    assert!(!first.is_empty());

    let again = tmp.path().join("dets2.txt");
    assert!(abandon(&["run", "--reference-classifiers", "--input", s(&frames), "--output", s(&again)]).status.success());
    assert_eq!(first, fs::read_to_string(&again).unwrap());

    let out = abandon(&["eval", "--detections", s(&dets), "--truth", s(&truth), "--frames", "200", "--grace", "60"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("frame"), "{report}");
}

#[test]
fn stdin_stream_matches_directory_input() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = write_scene(
        tmp.path(),
        "scene width=64 height=48 duration=30 noise=2 seed=3\n\
         object box kind=luggage shape=rect:10x8:220,30,30\n\
         waypoint box frame=5 x=20 y=20\n\
         waypoint box frame=29 x=20 y=20\n",
    );
    let frames = tmp.path().join("frames");
    assert!(abandon(&["synth", "--scene", s(&scene), "--out", s(&frames)]).status.success());
    let stream = abandon(&["synth", "--scene", s(&scene), "--out", "-"]);
    assert!(stream.status.success());

    let from_dir = abandon(&["run", "--reference-classifiers", "--input", s(&frames)]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_abandon"))
        .args(["run", "--reference-classifiers", "--input", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(&stream.stdout).unwrap();
    let from_stdin = child.wait_with_output().unwrap();
    assert!(from_dir.status.success() && from_stdin.status.success());
    assert_eq!(from_dir.stdout, from_stdin.stdout);
}

#[test]
fn gen_samples_then_train() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = write_scene(tmp.path(), "scene width=120 height=90 duration=5 seed=4 background=builtin:tiles\n");
    let frames = tmp.path().join("frames");
    assert!(abandon(&["synth", "--scene", s(&scene), "--out", s(&frames)]).status.success());
    let samples = tmp.path().join("s1");
    let out = abandon(&[
        "gen-samples", "--video", s(&frames), "--stage", "1", "--n-pos", "40", "--n-neg", "40", "--seed", "5",
        "--out", s(&samples),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(&samples).unwrap().count(), 81);

    let model = tmp.path().join("s1.json");
    let out = abandon(&["train", "--samples", s(&samples), "--out", s(&model), "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("accuracy"));
    assert!(model.exists());
}
