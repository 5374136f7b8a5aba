use std::path::Path;
use std::process::{Command, Output};

use qmoves::store::Archive;

fn qmoves(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmoves")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn seed_writes_unoptimized_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmoves(&["seed", "--level", "bhw", "--kind", "rs", "--count", "10"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join(stdout(&o));
    assert!(path.starts_with(dir.path().join("data/bhw/seed")));
    let a = Archive::load(&path).unwrap();
    assert_eq!(a.len(), 10);
    assert!(a.records().iter().all(|r| r.method == "seed" && r.iterations == 0));
    assert_eq!(a.manifest.rng_seeds, (0..10).collect::<Vec<u64>>());
    assert_eq!(a.manifest.settings["kind"], "rs");
    assert_eq!(a.manifest.settings["count"], "10");
    assert!(a.manifest.settings["argv"].ends_with("seed --level bhw --kind rs --count 10"));
}

#[test]
fn optimize_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = qmoves(&["seed", "--level", "bhw", "--T", "0.0973", "--kind", "binned", "--n-b", "8", "--count", "3", "--out", "s.qmarchive"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(d.join("cfg.json"), r#"{"grape": {"f_stop": 0.9999}}"#).unwrap();
    let o = qmoves(
        &["optimize", "--level", "bhw", "--seeds", "s.qmarchive", "--config", "cfg.json", "--max-iterations", "4", "--out", "o.qmarchive"],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = Archive::load(&d.join("o.qmarchive")).unwrap();
    let seeds = Archive::load(&d.join("s.qmarchive")).unwrap();
    assert_eq!(a.len(), 3);
    assert_eq!(a.manifest.method, "grape");
    assert_eq!(a.manifest.config["grape"]["f_stop"], 0.9999);
    assert_eq!(a.manifest.settings["max_iterations"], "4");
    assert_eq!(a.manifest.settings["config_file"], "cfg.json");
    for (r, s) in a.records().iter().zip(seeds.records()) {
        assert!(r.fidelity >= s.fidelity);
        assert_eq!(r.provenance.metadata["seed_id"], s.id);
    }

    let o = qmoves(&["analyze", "qsl", "--archive", "o.qmarchive", "--Tref", "0.0973", "--samples", "2,3", "--trials", "20"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("n_samples,mean_t_fit"));

    let o = qmoves(&["analyze", "density", "--archive", "o.qmarchive", "--archive", "s.qmarchive", "--out", "d.csv"], d);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(d.join("d.csv")).unwrap().starts_with("t_lo,t_hi,y_lo,y_hi,count,density"));

    let o = qmoves(&["analyze", "quantiles", "--archive", "o.qmarchive", "--step", "0.01"], d);
    assert!(o.status.success());
    assert!(stdout(&o).lines().count() >= 2);

    let o = qmoves(&["analyze", "cluster", "--archive", "o.qmarchive", "--preset", "bhw_paper"], d);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "id,T,F,label");
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.qmarchive"), "").unwrap();
    let o = qmoves(&["optimize", "--level", "bhw", "--seeds", "empty.qmarchive"], d);
    assert_eq!(o.status.code(), Some(2));

    let empty = Archive::new(qmoves::store::Manifest::new(qmoves::problems::Level::BringHomeWater, "seed"));
    empty.save(&d.join("none.qmarchive")).unwrap();
    let o = qmoves(&["optimize", "--level", "bhw", "--seeds", "none.qmarchive"], d);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(qmoves(&["seed", "--level", "moon"], d).status.code(), Some(2));
    assert_eq!(qmoves(&["optimize", "--level", "bhw"], d).status.code(), Some(2));
    assert_eq!(qmoves(&["analyze", "qsl", "--archive", "x", "--Tref", "1"], d).status.code(), Some(2));
    let o = qmoves(&["seed", "--level", "bhw", "--count", "1", "--out", "s.qmarchive"], d);
    assert!(o.status.success());
    assert_eq!(qmoves(&["optimize", "--level", "bhw", "--seeds", "s.qmarchive", "--method", "sa0"], d).status.code(), Some(2));
    assert_eq!(qmoves(&["optimize", "--level", "shakeup", "--seeds", "s.qmarchive"], d).status.code(), Some(2));
    assert_eq!(qmoves(&["analyze", "cluster", "--archive", "s.qmarchive", "--preset", "nope"], d).status.code(), Some(2));
    // Runtime failures are reported with exit status 1.
    assert_eq!(qmoves(&["analyze", "density", "--archive", "missing.qmarchive"], d).status.code(), Some(1));
}
