use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use boxrevive::cli::manifest::{config_entries, parse_keys};
use boxrevive::cli::{RunConfig, Subcommand};

fn boxrevive(args: &[&str], out: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_boxrevive"));
    cmd.args(args).arg("--out").arg(out);
    cmd.env_remove("BOXREVIVE_THREADS");
    if let Some(t) = threads {
        cmd.env("BOXREVIVE_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small runs of every subcommand.
const RUNS: [(Subcommand, &[&str]); 6] = [
    (Subcommand::Spectrum, &["spectrum", "--q2", "1e-5"]),
    (Subcommand::Carpet, &["carpet", "--q2", "5e-4", "--nt", "33", "--nx", "257"]),
    (Subcommand::Wigner, &["wigner", "--t", "0.25", "--nx", "64", "--np", "64"]),
    (Subcommand::Subplanck, &["subplanck", "--q2-list", "0,1e-5"]),
    (Subcommand::Revivals, &["revivals", "--q2", "5e-4"]),
    (Subcommand::Fidelity, &["fidelity", "--q2", "1e-5", "--nt", "201"]),
];

#[test]
fn manifest_lists_every_resolved_parameter() {
    for (cmd, args) in RUNS {
        let dir = tempfile::tempdir().unwrap();
        let o = boxrevive(args, dir.path(), Some("2"));
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let text = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        let found: BTreeSet<String> = parse_keys(&text).into_iter().collect();
        let schema: BTreeSet<String> = config_entries(&RunConfig::default(), cmd)
            .into_iter()
            .map(|(k, _)| k)
            .collect();
        let missing: Vec<_> = schema.difference(&found).collect();
        assert!(missing.is_empty(), "{args:?}: manifest lacks {missing:?}");
        for key in ["tool", "subcommand", "threads", "result.captured_norm", "result.n_min", "result.n_max", "outputs"] {
            assert!(found.contains(key), "{args:?}: manifest lacks {key}");
        }
        assert!(text.contains(&format!("output.name = {}\n", cmd.name())));
        assert!(text.contains("threads = 2\n"));
        assert!(!text.contains("wigner.p_max = none"));
        assert!(!text.contains("spectrum.n_levels = none"));
    }
}

#[test]
fn outputs_are_identical_across_runs_and_thread_counts() {
    for (_, args) in RUNS {
        let mut seen: Option<Vec<(String, Vec<u8>)>> = None;
        for threads in ["1", "4", "4"] {
            let dir = tempfile::tempdir().unwrap();
            let o = boxrevive(args, dir.path(), Some(threads));
            assert!(o.status.success(), "{args:?}: {}", stderr(&o));
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.file_name().unwrap() != "manifest.txt")
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            files.sort();
            assert!(!files.is_empty());
            match &seen {
                None => seen = Some(files),
                Some(first) => assert!(first == &files, "{args:?} differs with {threads} threads"),
            }
        }
    }
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 5] = [
        (&["carpet", "--dx", "0"], "delta_x > 0"),
        (&["carpet", "--t0", "0.5", "--t1", "0.1"], "t1 > t0"),
        (&["wigner", "--p-max", "80"], "does not cover"),
        (&["revivals", "--q2", "0"], "q^2 = 0"),
        (&["spectrum", "--q2", "-1"], "q_squared >= 0"),
    ];
    for (args, needle) in cases {
        let o = boxrevive(args, dir.path(), None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "nothing written");
    let o = boxrevive(&["spectrum"], dir.path(), Some("zero"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("BOXREVIVE_THREADS"));
}

#[test]
fn contract_failure_exits_1_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    let o = boxrevive(&["wigner", "--q2", "5e-4", "--t", "0.25", "--nx", "64", "--np", "64"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("marginals"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("result.contract_failure = "));
    assert!(dir.path().join("wigner.csv").exists());
    assert!(dir.path().join("wigner.pgm").exists());
}

#[test]
fn spectrum_reports_super_revival_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = boxrevive(&["spectrum", "--q2", "1e-5", "--pbar", "50"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let scales = std::fs::read_to_string(dir.path().join("spectrum_timescales.csv")).unwrap();
    let t_sr4: f64 = scales
        .lines()
        .find_map(|l| l.strip_prefix("t_sr4,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((t_sr4 / 1e5 - 1.0).abs() < 1e-12);
    let table = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("n,energy,phase_rate,population"));
}

#[test]
fn carpet_files_have_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = boxrevive(&["carpet", "--nt", "17", "--nx", "129", "--name", "bounce"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let pgm = std::fs::read(dir.path().join("bounce.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n# "));
    let header_end = pgm.windows(4).position(|w| w == b"255\n").unwrap() + 4;
    let header = String::from_utf8_lossy(&pgm[..header_end]);
    assert!(header.contains("gamma=0.5"));
    assert!(header.contains("\n129 17\n"));
    assert_eq!(pgm.len() - header_end, 129 * 17);
    let csv = std::fs::read_to_string(dir.path().join("bounce.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2 + 17);
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[1].split(',').count(), 130);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[system]\nq_squared = 5e-4\n[fidelity]\nt0 = 1990.0\nt1 = 2010.0\nnt = 2001\n").unwrap();
    let out = dir.path().join("out");
    let o = boxrevive(&["fidelity", "--config", cfg.to_str().unwrap(), "--nt", "401"], &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("system.q_squared = 0.0005\n"));
    assert!(manifest.contains("fidelity.t0 = 1990.0\n"));
    assert!(manifest.contains("fidelity.nt = 401\n"));
    let peak: f64 = manifest
        .lines()
        .find_map(|l| l.strip_prefix("result.top_peak_time = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((peak - 2000.0).abs() < 0.5);
}
