//! End-to-end tests of the command-line pipeline, driving the real binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use fairsample::files::{
    self, CountMethod, GenManifest, InstanceMeta, RecordsHeader, RECORDS_VERSION,
};
use fairsample::graph::{ChimeraGraph, Defects};
use fairsample::instance::Instance;
use fairsample::ising::SpinConfig;
use fairsample::oracle::GroundStateSet;
use fairsample::samplers::SampleRecord;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairsample"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn run_err(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        !out.status.success(),
        "command {args:?} unexpectedly passed"
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
}

fn ferromagnet_fixture(dir: &Path) -> PathBuf {
    let graph = Arc::new(ChimeraGraph::build(1, &Defects::none()).unwrap());
    let instance = Instance::from_parts(graph, vec![5i8; 16], 0).unwrap();
    let meta = InstanceMeta {
        k: 0,
        n_gs: 2,
        count: CountMethod::Exact,
    };
    let path = dir.join("ferro.inst");
    files::write_instance(&path, &instance, &meta).unwrap();
    path
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let stdout = run_ok(&[
            "gen",
            "--c",
            "2",
            "--count",
            "2",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(stdout.contains("accepted 2/2"), "stdout: {stdout}");
    }
    let files_a = read_dir_sorted(&a);
    let files_b = read_dir_sorted(&b);
    assert_eq!(files_a.len(), files_b.len());
    assert!(files_a.len() >= 3); // two instances plus the manifest
    for (fa, fb) in files_a.iter().zip(&files_b) {
        assert_eq!(fa.file_name(), fb.file_name());
        assert_eq!(
            fs::read(fa).unwrap(),
            fs::read(fb).unwrap(),
            "bytes differ for {fa:?}"
        );
    }
    let manifest = GenManifest::load(&a.join("gen-manifest.json")).unwrap();
    assert_eq!(manifest.instances.len(), 2);
    assert!(manifest.instances.iter().all(|i| i.k >= 1));
}

#[test]
fn gen_exits_nonzero_when_the_budget_runs_out() {
    let dir = tempfile::tempdir().unwrap();
    let stderr = run_err(&[
        "gen",
        "--c",
        "2",
        "--count",
        "1000000",
        "--max-attempts",
        "40",
        "--seed",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(stderr.contains("within 40 attempts"), "stderr: {stderr}");
}

#[test]
fn count_finds_both_ferromagnetic_ground_states() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ferromagnet_fixture(dir.path());
    let stdout = run_ok(&[
        "count",
        inst.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(stdout.contains("N_GS = 2"), "stdout: {stdout}");
    let gs = files::read_ground_states(&dir.path().join("ferro.gs")).unwrap();
    assert_eq!(gs.set.min_energy(), -80);
    assert_eq!(gs.set.n_gs(), 2);
    assert!(gs.set.exact());
    assert!(gs.set.closed_under_global_flip());
}

#[test]
fn count_rejects_a_corrupted_file_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ferromagnet_fixture(dir.path());
    let text = fs::read_to_string(&inst).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[9] = "0 4 nonsense";
    fs::write(&inst, lines.join("\n") + "\n").unwrap();
    let stderr = run_err(&[
        "count",
        inst.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(stderr.contains("ferro.inst:10:"), "stderr: {stderr}");
    assert!(stderr.contains("nonsense"), "stderr: {stderr}");
}

#[test]
fn sample_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&[
        "gen", "--c", "2", "--count", "1", "--seed", "3", "--out", out,
    ]);
    let inst = dir.path().join("inst-c2-0000.inst");
    let mut bytes = Vec::new();
    for _ in 0..2 {
        run_ok(&[
            "sample",
            inst.to_str().unwrap(),
            "--sampler",
            "sa",
            "--gauges",
            "2",
            "--reads",
            "10",
            "--seed",
            "21",
            "--out",
            out,
        ]);
        bytes.push(fs::read(dir.path().join("inst-c2-0000-sa.records")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let (header, records) =
        files::read_records(&dir.path().join("inst-c2-0000-sa.records")).unwrap();
    assert_eq!(header.sampler_id, "sa");
    assert_eq!(records.len(), 20);
}

#[test]
fn sample_rejects_an_unknown_sampler() {
    let stderr = run_err(&["sample", "whatever.inst", "--sampler", "bogus"]);
    assert!(stderr.contains("possible values"), "stderr: {stderr}");
}

#[test]
fn sample_ica_reports_convergence_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&[
        "gen", "--c", "2", "--count", "1", "--seed", "5", "--out", out,
    ]);
    let inst = dir.path().join("inst-c2-0000.inst");
    run_ok(&["count", inst.to_str().unwrap(), "--out", out]);
    let stdout = run_ok(&[
        "sample",
        inst.to_str().unwrap(),
        "--sampler",
        "ica",
        "--seed",
        "9",
        "--sweep-budget",
        "4096",
        "--ground-states",
        dir.path().join("inst-c2-0000.gs").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert!(stdout.contains("ica status:"), "stdout: {stdout}");
    assert!(stdout.contains("ground-state hits:"), "stdout: {stdout}");
    let (header, records) =
        files::read_records(&dir.path().join("inst-c2-0000-ica.records")).unwrap();
    assert!(header.ica_status.is_some());
    assert_eq!(header.gauges, 0);
    assert!(records.iter().all(|r| r.sampler_id == "ica"));
}

#[test]
fn noise_with_zero_sigma_is_noiseless() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ferromagnet_fixture(dir.path());
    run_ok(&[
        "noise",
        inst.to_str().unwrap(),
        "--sigma-j",
        "0",
        "--sigma-h",
        "0",
        "--seed",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let (instance, _) = files::read_instance(&inst).unwrap();
    let noisy =
        files::read_noisy_instance(&dir.path().join("ferro-sj0-sh0.noise"), &instance).unwrap();
    assert!(noisy.coupler_noise().iter().all(|&x| x == 0.0));
    assert!(noisy.field_noise().iter().all(|&x| x == 0.0));
}

#[test]
fn noise_rejects_negative_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ferromagnet_fixture(dir.path());
    let stderr = run_err(&[
        "noise",
        inst.to_str().unwrap(),
        "--sigma-j=-0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(stderr.contains("non-negative"), "stderr: {stderr}");
}

/// Six arbitrary distinct 8-spin configurations standing in for a manifold.
fn fake_manifold() -> GroundStateSet {
    let configs = (0..6u8)
        .map(|i| {
            let spins: Vec<i8> = (0..8)
                .map(|b| if i >> (b % 3) & 1 == 1 { 1 } else { -1 })
                .collect();
            let mut cfg = SpinConfig::from_spins(&spins);
            if i >= 3 {
                cfg.flip(7 - (i as usize - 3));
            }
            cfg
        })
        .collect();
    GroundStateSet::new(-80, configs, true)
}

fn fake_records(dir: &Path, name: &str, hash: &str, hits: &[u64], set: &GroundStateSet) -> PathBuf {
    let header = RecordsHeader {
        version: RECORDS_VERSION,
        instance_hash: hash.to_string(),
        base_hash: hash.to_string(),
        sampler_id: "sa".into(),
        params_hash: "test".into(),
        gauges: 1,
        reads_per_gauge: hits.iter().sum::<u64>() as u32,
        seed: 0,
        ica_status: None,
    };
    let mut records = Vec::new();
    for (config, &n) in set.configs().iter().zip(hits) {
        for _ in 0..n {
            records.push(SampleRecord {
                sampler_id: "sa".into(),
                params_hash: "test".into(),
                gauge_id: 0,
                config: config.clone(),
                energy: -80.0,
                sweep_budget: 1,
                seed: 0,
            });
        }
    }
    let path = dir.join(name);
    files::write_records(&path, &header, &records).unwrap();
    path
}

#[test]
fn analyze_point_mass_deviation_is_five_sixths() {
    let dir = tempfile::tempdir().unwrap();
    let set = fake_manifold();
    assert_eq!(set.n_gs(), 6);
    let hash = "a".repeat(64);
    let gs_path = dir.path().join("fixture.gs");
    files::write_ground_states(&gs_path, &hash, 8, &set).unwrap();
    let records = fake_records(
        dir.path(),
        "point.records",
        &hash,
        &[120, 0, 0, 0, 0, 0],
        &set,
    );

    run_ok(&[
        "analyze",
        "--records",
        records.to_str().unwrap(),
        "--ground-states",
        gs_path.to_str().unwrap(),
        "--bootstrap",
        "1000",
        "--baseline-trials",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let report = fs::read_to_string(dir.path().join("report.tsv")).unwrap();
    let row = report.lines().nth(1).expect("one data row");
    let fields: Vec<&str> = row.split('\t').collect();
    assert_eq!(fields[2], "6"); // n_gs
    assert_eq!(fields[3], "120"); // total
    assert_eq!(fields[5], "0.833333"); // theta_max = 1 - 1/6
    assert_eq!(fields[12], "false"); // nowhere near the uniform baseline
    assert!(dir.path().join("hist-00-aaaaaaaaaaaa-sa.csv").exists());
}

#[test]
fn analyze_compare_of_a_run_with_itself_is_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let set = fake_manifold();
    let hash = "b".repeat(64);
    let gs_path = dir.path().join("fixture.gs");
    files::write_ground_states(&gs_path, &hash, 8, &set).unwrap();
    let records = fake_records(
        dir.path(),
        "run.records",
        &hash,
        &[10, 15, 20, 25, 25, 25],
        &set,
    );

    run_ok(&[
        "analyze",
        "--compare",
        records.to_str().unwrap(),
        records.to_str().unwrap(),
        "--ground-states",
        gs_path.to_str().unwrap(),
        "--bootstrap",
        "1000",
        "--baseline-trials",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let compare = fs::read_to_string(dir.path().join("compare.tsv")).unwrap();
    let row = compare.lines().nth(1).expect("one data row");
    let fields: Vec<&str> = row.split('\t').collect();
    assert_eq!(fields[1], fields[4], "theta_a != theta_b in {row}");
}

#[test]
fn analyze_refuses_records_without_a_matching_ground_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let set = fake_manifold();
    files::write_ground_states(&dir.path().join("fixture.gs"), &"c".repeat(64), 8, &set).unwrap();
    let records = fake_records(
        dir.path(),
        "orphan.records",
        &"d".repeat(64),
        &[50, 10, 0, 0, 0, 0],
        &set,
    );
    let stderr = run_err(&[
        "analyze",
        "--records",
        records.to_str().unwrap(),
        "--ground-states",
        dir.path().join("fixture.gs").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(stderr.contains("hash mismatch"), "stderr: {stderr}");
}
