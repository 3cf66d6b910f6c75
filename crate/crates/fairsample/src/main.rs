//! Command-line pipeline: generate instances, enumerate ground states,
//! sample, freeze control noise, and analyze fairness.
//!
//! Every command derives its randomness from the global `--seed`, so a
//! pipeline rerun with the same seeds reproduces every output file byte for
//! byte, independent of `--workers`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use fairsample::fairness::{
    build_report, min_solutions_filter, rank_coordinates, FairnessReport, HitHistogram,
    ReportParams,
};
use fairsample::files::{
    self, CountMethod, GenArtifact, GenManifest, GroundStateFile, InstanceMeta, RecordsHeader,
};
use fairsample::graph::ChimeraGraph;
use fairsample::instance::{apply_noise, filter_degeneracy, generate_instance, Instance};
use fairsample::oracle::{brute_force_enumerate, frontier_count, frontier_enumerate, Enumeration};
use fairsample::samplers::{
    ica_enumerate, params_hash, run_with_gauges, IcaStatus, Model, PtParams, SaParams,
    SampleRecord, SamplerSpec, SqaParams,
};
use fairsample::seeds::{child_seed, domain};
use fairsample::{exec, Error};

#[derive(Parser)]
#[command(
    version,
    about = "Degeneracy-controlled spin-glass benchmarks and fairness analysis"
)]
struct Cli {
    /// Master seed; every stage derives its own streams from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory output files are written to.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instances whose degeneracy passes the 3 * 2^k filter.
    Gen(GenArgs),
    /// Enumerate the ground states of an instance file.
    Count(CountArgs),
    /// Run a sampler on an instance and write a records file.
    Sample(SampleArgs),
    /// Freeze Gaussian control noise onto an instance.
    Noise(NoiseArgs),
    /// Build fairness reports from records files.
    Analyze(AnalyzeArgs),
}

#[derive(Parser)]
struct GenArgs {
    /// Grid dimension; the lattice has N = 8 c^2 qubits.
    #[arg(long)]
    c: u32,
    /// Accepted instances to produce.
    #[arg(long)]
    count: u32,
    /// Seeds to try before giving up.
    #[arg(long, default_value_t = 100_000)]
    max_attempts: u64,
}

#[derive(Parser)]
struct CountArgs {
    /// Instance file to enumerate.
    instance: PathBuf,
    /// Most ground states the enumeration will materialize.
    #[arg(long, default_value_t = 1 << 20)]
    cap: u64,
}

#[derive(Parser)]
struct SampleArgs {
    /// Instance file to sample.
    instance: PathBuf,
    /// Frozen-noise file; sampling then runs on the noisy Hamiltonian.
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, value_enum)]
    sampler: SamplerKind,
    /// Gauges to average over (gauge 0 is the identity).
    #[arg(long, default_value_t = 1)]
    gauges: u32,
    /// Reads per gauge.
    #[arg(long, default_value_t = 100)]
    reads: u32,
    /// Sweeps per read: a number, or the presets t20 / t200 (1:10).
    #[arg(long, default_value = "t20")]
    sweep_budget: Budget,
    /// Ground-state file; when given, the ground-state hit fraction is
    /// printed after sampling.
    #[arg(long)]
    ground_states: Option<PathBuf>,
}

#[derive(Parser)]
struct NoiseArgs {
    /// Instance file to perturb.
    instance: PathBuf,
    /// Gaussian width added to every coupling.
    #[arg(long, default_value_t = 0.0)]
    sigma_j: f64,
    /// Gaussian width of the random local fields.
    #[arg(long, default_value_t = 0.0)]
    sigma_h: f64,
}

#[derive(Parser)]
struct AnalyzeArgs {
    /// Records files or directories of them (repeatable).
    #[arg(long = "records", required_unless_present = "compare")]
    records: Vec<PathBuf>,
    /// Ground-state files or directories of them, matched to records by
    /// instance hash (repeatable).
    #[arg(long = "ground-states", required = true)]
    ground_states: Vec<PathBuf>,
    /// Drop instances with fewer ground-state samples than this.
    #[arg(long, default_value_t = 50)]
    floor: u64,
    /// Bootstrap resamples behind each confidence interval.
    #[arg(long, default_value_t = 10_000)]
    bootstrap: u32,
    /// Trials of the matched uniform sampler behind the baseline band.
    #[arg(long, default_value_t = 1_000)]
    baseline_trials: u32,
    /// Two records sets (files or directories) to join instance by
    /// instance; writes compare.tsv instead of report.tsv.
    #[arg(long, num_args = 2)]
    compare: Option<Vec<PathBuf>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerKind {
    Sa,
    Ica,
    Sqa,
}

/// Sweep budget per read: the short and long presets stand in for the two
/// annealing times of the hardware protocol at their published 1:10 ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Budget {
    Short,
    Long,
    Sweeps(u64),
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "t20" => Ok(Budget::Short),
            "t200" => Ok(Budget::Long),
            n => n
                .parse()
                .map(Budget::Sweeps)
                .map_err(|_| format!("expected t20, t200, or a sweep count, got {s:?}")),
        }
    }
}

const SA_STEPS: u32 = 24;

fn sa_params(budget: Budget) -> SaParams {
    let sweeps_per_temp = match budget {
        Budget::Short => 16,
        Budget::Long => 160,
        Budget::Sweeps(n) => (n / u64::from(SA_STEPS)).max(1) as u32,
    };
    SaParams::geometric(3.0, 0.06, SA_STEPS, sweeps_per_temp)
}

fn sqa_params(budget: Budget) -> SqaParams {
    let sweeps = match budget {
        Budget::Short => 512,
        Budget::Long => 5120,
        Budget::Sweeps(n) => n.max(1),
    };
    SqaParams {
        sweeps,
        ..SqaParams::desk()
    }
}

/// The enumeration budget is 2^b, so a raw sweep count rounds to the
/// nearest power of two; the long preset is 8x the short one.
fn pt_params(budget: Budget) -> PtParams {
    let b = match budget {
        Budget::Short => 14,
        Budget::Long => 17,
        Budget::Sweeps(n) => (n.max(2) as f64).log2().round().clamp(1.0, 39.0) as u32,
    };
    PtParams {
        b,
        ..PtParams::desk()
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    exec::configure_workers(cli.workers);
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create output directory {}", cli.out.display()))?;
    match cli.command {
        Command::Gen(args) => cmd_gen(&cli.out, cli.seed, &args),
        Command::Count(args) => cmd_count(&cli.out, cli.seed, &args),
        Command::Sample(args) => cmd_sample(&cli.out, cli.seed, &args),
        Command::Noise(args) => cmd_noise(&cli.out, cli.seed, &args),
        Command::Analyze(args) => cmd_analyze(&cli.out, cli.seed, &args),
    }
}

enum GenOutcome {
    Accepted(Box<Instance>, InstanceMeta),
    RepairFailed,
    FilterRejected,
    CountFailed,
}

fn evaluate_seed(graph: &Arc<ChimeraGraph>, instance_seed: u64, exact: bool) -> GenOutcome {
    let instance = match generate_instance(graph, instance_seed) {
        Ok(inst) => inst,
        Err(_) => return GenOutcome::RepairFailed,
    };
    let (n_gs, method) = if exact {
        match frontier_count(&instance) {
            Ok(count) => (count.count, CountMethod::Exact),
            Err(_) => return GenOutcome::CountFailed,
        }
    } else {
        match ica_enumerate(&instance, &PtParams::desk(), instance_seed) {
            Ok(outcome) if outcome.status == IcaStatus::Converged => {
                (outcome.set.n_gs(), CountMethod::Heuristic)
            }
            _ => return GenOutcome::CountFailed,
        }
    };
    match filter_degeneracy(n_gs) {
        Some(k) => GenOutcome::Accepted(
            Box::new(instance),
            InstanceMeta {
                k,
                n_gs,
                count: method,
            },
        ),
        None => GenOutcome::FilterRejected,
    }
}

fn cmd_gen(out: &Path, seed: u64, args: &GenArgs) -> anyhow::Result<()> {
    let graph = Arc::new(ChimeraGraph::build(args.c, &Default::default())?);
    let exact = args.c <= 4;
    let mut manifest = GenManifest {
        version: 1,
        c: args.c,
        requested: args.count,
        master_seed: seed,
        seeds_tried: 0,
        repair_failures: 0,
        filter_rejections: 0,
        count_failures: 0,
        count_method: CountMethod::from_exact(exact),
        instances: vec![],
    };

    // Seeds are evaluated in fixed-size batches so the accepted set is the
    // same regardless of worker count.
    const BATCH: u64 = 32;
    let mut next = 0u64;
    while manifest.instances.len() < args.count as usize && next < args.max_attempts {
        let batch = BATCH.min(args.max_attempts - next);
        let outcomes = exec::map_indexed(batch as usize, |i| {
            evaluate_seed(
                &graph,
                child_seed(seed, domain::GEN, next + i as u64),
                exact,
            )
        });
        next += batch;
        for outcome in outcomes {
            manifest.seeds_tried += 1;
            match outcome {
                GenOutcome::RepairFailed => manifest.repair_failures += 1,
                GenOutcome::FilterRejected => manifest.filter_rejections += 1,
                GenOutcome::CountFailed => manifest.count_failures += 1,
                GenOutcome::Accepted(instance, meta) => {
                    if manifest.instances.len() == args.count as usize {
                        continue;
                    }
                    let name = format!("inst-c{}-{:04}.inst", args.c, manifest.instances.len());
                    let path = out.join(&name);
                    files::write_instance(&path, &instance, &meta)?;
                    manifest.instances.push(GenArtifact {
                        path: name,
                        sha256: files::file_sha256(&path)?,
                        seed: instance.seed(),
                        k: meta.k,
                        n_gs: meta.n_gs,
                    });
                }
            }
        }
    }

    let accepted = manifest.instances.len();
    manifest.save(&out.join("gen-manifest.json"))?;
    println!(
        "c={} accepted {}/{} after {} seeds ({} repair failures, {} filter rejections, {} count failures, {} counting)",
        args.c,
        accepted,
        args.count,
        manifest.seeds_tried,
        manifest.repair_failures,
        manifest.filter_rejections,
        manifest.count_failures,
        manifest.count_method,
    );
    if accepted < args.count as usize {
        bail!(
            "only {accepted} of {} instances accepted within {} attempts",
            args.count,
            args.max_attempts
        );
    }
    Ok(())
}

fn cmd_count(out: &Path, seed: u64, args: &CountArgs) -> anyhow::Result<()> {
    let (instance, _) = files::read_instance(&args.instance)?;
    let n = instance.num_spins();
    let c = instance.graph().c();

    let set = if c <= 4 {
        match frontier_enumerate(&instance, args.cap)? {
            Enumeration::Complete(set) => set,
            Enumeration::Overflow { count, .. } => {
                bail!("instance has {count} ground states, more than --cap allows")
            }
        }
    } else if n <= 28 {
        brute_force_enumerate(&instance)?
    } else {
        let outcome = ica_enumerate(&instance, &PtParams::desk(), seed)?;
        if outcome.status != IcaStatus::Converged {
            bail!(
                "heuristic enumeration ended {:?}; rerun with a larger budget",
                outcome.status
            );
        }
        outcome.set
    };

    let path = out.join(stem(&args.instance) + ".gs");
    files::write_ground_states(&path, &files::instance_hash(&instance), n, &set)?;
    println!(
        "{}: N = {n}, E_0 = {}, N_GS = {} ({}), wrote {}",
        args.instance.display(),
        set.min_energy(),
        set.n_gs(),
        CountMethod::from_exact(set.exact()),
        path.display()
    );
    Ok(())
}

fn cmd_sample(out: &Path, seed: u64, args: &SampleArgs) -> anyhow::Result<()> {
    let (instance, _) = files::read_instance(&args.instance)?;
    let base_hash = files::instance_hash(&instance);
    let noisy = args
        .noise
        .as_ref()
        .map(|p| files::read_noisy_instance(p, &instance))
        .transpose()?;
    let (instance_hash, model, source) = match &noisy {
        Some(noisy) => (
            files::noisy_instance_hash(noisy),
            Model::Noisy(noisy),
            args.noise.clone().unwrap(),
        ),
        None => (
            base_hash.clone(),
            Model::Base(&instance),
            args.instance.clone(),
        ),
    };

    let mut header = RecordsHeader {
        version: files::RECORDS_VERSION,
        instance_hash,
        base_hash: base_hash.clone(),
        sampler_id: String::new(),
        params_hash: String::new(),
        gauges: args.gauges,
        reads_per_gauge: args.reads,
        seed,
        ica_status: None,
    };

    let records = match args.sampler {
        SamplerKind::Sa => {
            let params = sa_params(args.sweep_budget);
            header.sampler_id = "sa".into();
            header.params_hash = params_hash(&params);
            run_with_gauges(
                model,
                &SamplerSpec::Sa(params),
                args.gauges,
                args.reads,
                seed,
            )?
        }
        SamplerKind::Sqa => {
            let params = sqa_params(args.sweep_budget);
            header.sampler_id = "sqa".into();
            header.params_hash = params_hash(&params);
            run_with_gauges(
                model,
                &SamplerSpec::Sqa(params),
                args.gauges,
                args.reads,
                seed,
            )?
        }
        SamplerKind::Ica => {
            if noisy.is_some() {
                bail!(
                    "the enumerating sampler needs integer couplings; run it on the base instance"
                );
            }
            if args.gauges > 1 {
                println!("note: ica enumerates the manifold; gauge and read counts are ignored");
            }
            let params = pt_params(args.sweep_budget);
            header.sampler_id = "ica".into();
            header.params_hash = params_hash(&params);
            header.gauges = 0;
            header.reads_per_gauge = 0;
            let outcome = ica_enumerate(&instance, &params, seed)?;
            header.ica_status = Some(outcome.status);
            println!(
                "ica status: {}, {} sweeps, {} distinct configs, {} visits",
                status_name(outcome.status),
                outcome.sweeps_run,
                outcome.set.n_gs(),
                outcome.total_hits()
            );
            let mut records = Vec::with_capacity(outcome.total_hits() as usize);
            for (config, &hits) in outcome.set.configs().iter().zip(&outcome.hits) {
                for _ in 0..hits {
                    records.push(SampleRecord {
                        sampler_id: "ica".into(),
                        params_hash: header.params_hash.clone(),
                        gauge_id: 0,
                        config: config.clone(),
                        energy: outcome.set.min_energy() as f64,
                        sweep_budget: outcome.sweeps_run,
                        seed,
                    });
                }
            }
            records
        }
    };

    let path = out.join(format!("{}-{}.records", stem(&source), header.sampler_id));
    files::write_records(&path, &header, &records)?;
    println!("wrote {} with {} records", path.display(), records.len());

    if let Some(gs_path) = &args.ground_states {
        let gs = files::read_ground_states(gs_path)?;
        if gs.instance_hash != base_hash {
            return Err(Error::HashMismatch {
                context: format!("{} belongs to a different instance", gs_path.display()),
                expected: base_hash,
                found: gs.instance_hash,
            }
            .into());
        }
        let hits = records
            .iter()
            .filter(|r| gs.set.index_of(&r.config).is_some())
            .count();
        let fraction = if records.is_empty() {
            0.0
        } else {
            hits as f64 / records.len() as f64
        };
        println!(
            "ground-state hits: {hits}/{} ({fraction:.3})",
            records.len()
        );
    }
    Ok(())
}

fn cmd_noise(out: &Path, seed: u64, args: &NoiseArgs) -> anyhow::Result<()> {
    let (instance, _) = files::read_instance(&args.instance)?;
    let noisy = apply_noise(&instance, args.sigma_j, args.sigma_h, seed)?;
    let path = out.join(format!(
        "{}-sj{}-sh{}.noise",
        stem(&args.instance),
        args.sigma_j,
        args.sigma_h
    ));
    files::write_noisy_instance(&path, &noisy)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_analyze(out: &Path, seed: u64, args: &AnalyzeArgs) -> anyhow::Result<()> {
    let params = ReportParams {
        bootstrap_resamples: args.bootstrap,
        baseline_trials: args.baseline_trials,
    };
    let sets = load_ground_states(&args.ground_states)?;

    if let Some(sides) = &args.compare {
        let a_files = expand(&sides[0], "records")?;
        let b_files = expand(&sides[1], "records")?;
        let a = build_reports(&a_files, &sets, &params, seed, 0, args.floor)?;
        let b = build_reports(
            &b_files,
            &sets,
            &params,
            seed,
            a_files.len() as u64,
            args.floor,
        )?;
        let (rows, empty) = fairsample::fairness::compare_runs(&a, &b);
        if empty {
            eprintln!("warning: the two record sets share no analyzable instance");
        }
        let mut tsv =
            String::from("instance\ttheta_a\tci_a_lo\tci_a_hi\ttheta_b\tci_b_lo\tci_b_hi\n");
        for row in &rows {
            writeln!(
                tsv,
                "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                row.instance_id,
                row.theta_a,
                row.ci_a.0,
                row.ci_a.1,
                row.theta_b,
                row.ci_b.0,
                row.ci_b.1
            )
            .unwrap();
        }
        let path = out.join("compare.tsv");
        files::atomic_write(&path, tsv.as_bytes())?;
        println!("wrote {} with {} instances", path.display(), rows.len());
        return Ok(());
    }

    let mut record_files = Vec::new();
    for path in &args.records {
        record_files.extend(expand(path, "records")?);
    }
    let reports = build_reports(&record_files, &sets, &params, seed, 0, args.floor)?;

    let mut tsv = String::from(
        "instance\tsampler\tn_gs\ttotal\texcited\ttheta_max\tci_lo\tci_hi\t\
         baseline_theta\tbaseline_lo\tbaseline_hi\tchi_square_p\tin_baseline\n",
    );
    for (i, report) in reports.iter().enumerate() {
        writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            report.instance_id,
            report.sampler_id,
            report.n_gs,
            report.total,
            report.excited,
            report.theta_max,
            report.bootstrap_ci.0,
            report.bootstrap_ci.1,
            report.baseline_theta,
            report.baseline_ci.0,
            report.baseline_ci.1,
            report.chi_square_p,
            report.baseline_ci.0 <= report.theta_max && report.theta_max <= report.baseline_ci.1,
        )
        .unwrap();
        write_histogram_csv(out, i, report)?;
    }
    let path = out.join("report.tsv");
    files::atomic_write(&path, tsv.as_bytes())?;
    println!("wrote {} with {} instances", path.display(), reports.len());
    Ok(())
}

/// Rank histogram of one report as a CSV of rank coordinate, count, and the
/// empirical and uniform cumulative fractions.
fn write_histogram_csv(out: &Path, index: usize, report: &FairnessReport) -> anyhow::Result<()> {
    let coords = rank_coordinates(report.n_gs);
    let mut csv = String::from("rank_coordinate,count,empirical_cumulative,uniform_cumulative\n");
    let mut cum = 0u64;
    for (x, &count) in coords.iter().zip(&report.ranked_counts) {
        cum += count;
        writeln!(
            csv,
            "{x:.6},{count},{:.6},{x:.6}",
            cum as f64 / report.total as f64
        )
        .unwrap();
    }
    let path = out.join(format!(
        "hist-{index:02}-{}-{}.csv",
        &report.instance_id[..12.min(report.instance_id.len())],
        report.sampler_id
    ));
    files::atomic_write(&path, csv.as_bytes())?;
    Ok(())
}

/// Lists `*.{ext}` inside a directory in name order, or returns the path
/// itself when it is a file.
fn expand(path: &Path, ext: &str) -> anyhow::Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut found = Vec::new();
    for entry in
        fs::read_dir(path).with_context(|| format!("cannot list directory {}", path.display()))?
    {
        let p = entry?.path();
        if p.extension().is_some_and(|e| e == ext) {
            found.push(p);
        }
    }
    found.sort();
    if found.is_empty() {
        bail!("directory {} contains no .{ext} files", path.display());
    }
    Ok(found)
}

fn load_ground_states(paths: &[PathBuf]) -> anyhow::Result<HashMap<String, GroundStateFile>> {
    let mut sets = HashMap::new();
    for path in paths {
        for file in expand(path, "gs")? {
            let gs = files::read_ground_states(&file)?;
            sets.insert(gs.instance_hash.clone(), gs);
        }
    }
    Ok(sets)
}

/// Tallies each records file against its ground-state set and builds the
/// fairness report, dropping files below the sample floor.
fn build_reports(
    record_files: &[PathBuf],
    sets: &HashMap<String, GroundStateFile>,
    params: &ReportParams,
    seed: u64,
    seed_offset: u64,
    floor: u64,
) -> anyhow::Result<Vec<FairnessReport>> {
    let mut reports = Vec::new();
    for (i, file) in record_files.iter().enumerate() {
        let (header, records) = files::read_records(file)?;
        let Some(gs) = sets.get(&header.base_hash) else {
            return Err(Error::HashMismatch {
                context: format!(
                    "no ground-state file matches the records in {}",
                    file.display()
                ),
                expected: header.base_hash,
                found: "none of the provided hashes".into(),
            }
            .into());
        };
        let histogram = HitHistogram::tally(
            &header.base_hash,
            &header.sampler_id,
            &gs.set,
            records.iter().map(|r| &r.config),
        );
        if histogram.total == 0 {
            eprintln!(
                "warning: {} has no ground-state hits, skipping",
                file.display()
            );
            continue;
        }
        reports.push(build_report(
            &histogram,
            params,
            child_seed(seed, domain::BOOTSTRAP, seed_offset + i as u64),
        )?);
    }
    let before = reports.len();
    let reports = min_solutions_filter(reports, floor);
    if reports.len() < before {
        eprintln!(
            "note: {} of {before} instances fell below the {}-sample floor",
            before - reports.len(),
            floor
        );
    }
    Ok(reports)
}

fn status_name(status: IcaStatus) -> &'static str {
    match status {
        IcaStatus::Converged => "converged",
        IcaStatus::Unconverged => "unconverged",
        IcaStatus::HitFloorUnmet => "hit-floor-unmet",
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}
