use std::fs;
use std::path::Path;
use std::process::Command;

fn ttdensity(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ttdensity"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

/// Artifact body without the timestamp line.
fn stable(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# generated"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn quadratic_writes_rank_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = ttdensity(&["quadratic"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let ranks = fs::read_to_string(dir.path().join("quadratic/ranks.csv")).unwrap();
    assert!(ranks.starts_with("# ttdensity "));
    assert!(ranks.lines().any(|l| l == "full,1,3,4,3,1"));
    assert!(ranks.lines().any(|l| l == "∅,1,2,2,2,1"));

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("quadratic/residuals.csv"))
        .unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert!(rec[2].parse::<f64>().unwrap() <= 1e-10);
        assert!(rec[3].parse::<f64>().unwrap() <= 1e-10);
        rows += 1;
    }
    assert_eq!(rows, 9);
}

#[test]
fn reruns_are_identical_apart_from_timestamp() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = ttdensity(
            &["svd-cross", "--pivot", "stochastic", "--seed", "11"],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path().join("svd-cross"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 20);
    for name in names {
        let pa = a.path().join("svd-cross").join(&name);
        let pb = b.path().join("svd-cross").join(&name);
        assert_eq!(stable(&pa), stable(&pb), "{name:?}");
    }
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["no-such-experiment"][..],
        &["quadratic", "--set", "bogus=1"],
        &["quadratic", "--root", "eigen"],
        &["grid-transform", "--root", "qr"],
        &["svd-cross", "--grid-step", "0.3"],
        &["svd-cross", "--unknown-flag"],
        &["grid-transform", "--set", "map=sideways"],
    ] {
        let out = ttdensity(args, dir.path());
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert!(
        fs::read_dir(dir.path()).unwrap().next().is_none(),
        "nothing written on config errors"
    );
}

#[test]
fn memory_guard_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = ttdensity(&["gauss-ranks", "--grid-step", "0.01"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identity_map_resample_matches_interpolation() {
    let dir = tempfile::tempdir().unwrap();
    let out = ttdensity(&["grid-transform", "--set", "map=identity"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("grid-transform/identity_spectra.csv"))
        .unwrap();
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[2], &rec[3]);
        assert_eq!(&rec[1], &rec[3]);
    }
}
