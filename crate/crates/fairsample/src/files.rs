//! Artifact files, content hashes, and experiment manifests.
//!
//! Instances, ground-state sets, and noisy instances are line-oriented text
//! files with a versioned first line, so they diff cleanly and survive
//! casual inspection; sample records are JSON lines behind a JSON header.
//! Every derived file embeds a content hash of its inputs, and readers
//! refuse to proceed on a mismatch.  All writes go through a temporary file
//! in the target directory followed by a rename, so a crash never leaves a
//! half-written artifact behind.
//!
//! An instance is identified by the hash of its topology and couplings
//! alone; metadata such as the generation seed or the recorded degeneracy
//! does not change what problem downstream stages sampled.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::graph::{ChimeraGraph, Defects};
use crate::instance::{Instance, NoisyInstance, SIDON_MAGNITUDES};
use crate::ising::SpinConfig;
use crate::oracle::GroundStateSet;
use crate::samplers::{IcaStatus, PtParams, SaParams, SampleRecord, SqaParams};
use crate::{Error, Result};

/// Hex SHA-256 digest of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Hex SHA-256 digest of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String> {
    Ok(sha256_hex(&read_bytes(path)?))
}

/// Writes `bytes` to `path` via a temporary file plus rename, so readers
/// never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::MissingArtifact {
        path: path.display().to_string(),
        why: e.to_string(),
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::MissingArtifact {
        path: path.display().to_string(),
        why: e.to_string(),
    })
}

/// Line-by-line parser that reports errors as `file:line: message`.
struct Reader<'a> {
    file: String,
    lines: std::str::Lines<'a>,
    line: usize,
}

impl<'a> Reader<'a> {
    fn new(path: &Path, text: &'a str) -> Self {
        Reader {
            file: path.display().to_string(),
            lines: text.lines(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            file: self.file.clone(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.line += 1;
        self.lines
            .next()
            .ok_or_else(|| self.err("unexpected end of file"))
    }

    /// Consumes a line that must match `literal` exactly.
    fn expect(&mut self, literal: &str) -> Result<()> {
        let line = self.next()?;
        if line != literal {
            return Err(self.err(format!("expected {literal:?}, got {line:?}")));
        }
        Ok(())
    }

    /// Consumes a `key value...` line and returns the part after the key.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.strip_prefix(key) {
            Some("") => Ok(""),
            Some(rest) if rest.starts_with(' ') => Ok(rest.trim()),
            _ => Err(self.err(format!("expected a {key:?} line, got {line:?}"))),
        }
    }

    /// Consumes a `key value` line and parses the single value.
    fn keyed_parse<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let value = self.keyed(key)?;
        value
            .parse()
            .map_err(|_| self.err(format!("cannot parse {value:?} after {key:?}")))
    }

    fn parse<T: FromStr>(&self, token: &str, what: &str) -> Result<T> {
        token
            .parse()
            .map_err(|_| self.err(format!("cannot parse {token:?} as {what}")))
    }

    /// Asserts that the input is exhausted.
    fn done(&mut self) -> Result<()> {
        self.line += 1;
        match self.lines.next() {
            None => Ok(()),
            Some(line) => Err(self.err(format!("trailing content {line:?}"))),
        }
    }
}

/// Whether a degeneracy was counted by an exact oracle or estimated by the
/// heuristic enumerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Exact,
    Heuristic,
}

impl CountMethod {
    pub fn from_exact(exact: bool) -> Self {
        if exact {
            CountMethod::Exact
        } else {
            CountMethod::Heuristic
        }
    }

    pub fn is_exact(self) -> bool {
        self == CountMethod::Exact
    }
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMethod::Exact => "exact",
            CountMethod::Heuristic => "heuristic",
        })
    }
}

impl FromStr for CountMethod {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "exact" => Ok(CountMethod::Exact),
            "heuristic" => Ok(CountMethod::Heuristic),
            _ => Err(()),
        }
    }
}

/// Degeneracy metadata recorded alongside an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceMeta {
    /// Exponent of the accepted degeneracy `N_GS = 3 * 2^k`.
    pub k: u32,
    /// Ground-state count the generation filter saw.
    pub n_gs: u64,
    /// How that count was obtained.
    pub count: CountMethod,
}

const INSTANCE_MAGIC: &str = "fairsample instance v1";
const GROUND_STATES_MAGIC: &str = "fairsample ground-states v1";
const NOISY_MAGIC: &str = "fairsample noisy-instance v1";

fn topology_lines(graph: &ChimeraGraph) -> String {
    let mut s = String::new();
    writeln!(s, "c {}", graph.c()).unwrap();
    s.push_str("defect-qubits");
    for &q in &graph.defects().qubits {
        write!(s, " {q}").unwrap();
    }
    s.push('\n');
    s.push_str("defect-couplers");
    for &(i, j) in &graph.defects().couplers {
        write!(s, " {i}-{j}").unwrap();
    }
    s.push('\n');
    s
}

fn coupler_lines(instance: &Instance) -> String {
    let graph = instance.graph();
    let mut s = String::new();
    writeln!(s, "couplers {}", graph.num_couplers()).unwrap();
    for (k, &(i, j)) in graph.couplers().iter().enumerate() {
        writeln!(s, "{i} {j} {}", instance.coupling(k)).unwrap();
    }
    s
}

/// Content hash identifying the problem: topology plus couplings, metadata
/// excluded.
pub fn instance_hash(instance: &Instance) -> String {
    let mut s = topology_lines(instance.graph());
    s.push_str(&coupler_lines(instance));
    sha256_hex(s.as_bytes())
}

/// Renders an instance file.
pub fn instance_to_string(instance: &Instance, meta: &InstanceMeta) -> String {
    let mut s = String::new();
    writeln!(s, "{INSTANCE_MAGIC}").unwrap();
    s.push_str(&topology_lines(instance.graph()));
    writeln!(s, "seed {}", instance.seed()).unwrap();
    writeln!(s, "k {}", meta.k).unwrap();
    writeln!(s, "ngs {}", meta.n_gs).unwrap();
    writeln!(s, "count {}", meta.count).unwrap();
    s.push_str(&coupler_lines(instance));
    s
}

pub fn write_instance(path: &Path, instance: &Instance, meta: &InstanceMeta) -> Result<()> {
    atomic_write(path, instance_to_string(instance, meta).as_bytes())
}

pub fn read_instance(path: &Path) -> Result<(Instance, InstanceMeta)> {
    let text = read_text(path)?;
    let mut r = Reader::new(path, &text);
    r.expect(INSTANCE_MAGIC)?;
    let c: u32 = r.keyed_parse("c")?;

    let mut defects = Defects::none();
    for token in r.keyed("defect-qubits")?.split_whitespace() {
        defects.qubits.push(r.parse(token, "a qubit index")?);
    }
    for token in r.keyed("defect-couplers")?.split_whitespace() {
        let (i, j) = token
            .split_once('-')
            .ok_or_else(|| r.err(format!("defect coupler {token:?} is not i-j")))?;
        defects
            .couplers
            .push((r.parse(i, "a qubit index")?, r.parse(j, "a qubit index")?));
    }

    let seed: u64 = r.keyed_parse("seed")?;
    let meta = InstanceMeta {
        k: r.keyed_parse("k")?,
        n_gs: r.keyed_parse("ngs")?,
        count: r.keyed_parse("count")?,
    };

    let graph = ChimeraGraph::build(c, &defects).map_err(|e| r.err(e.to_string()))?;
    let declared: usize = r.keyed_parse("couplers")?;
    if declared != graph.num_couplers() {
        return Err(r.err(format!(
            "{declared} couplers declared but the graph has {}",
            graph.num_couplers()
        )));
    }
    let mut couplings = Vec::with_capacity(declared);
    for k in 0..declared {
        let line = r.next()?;
        let mut it = line.split_whitespace();
        let mut field = |what| {
            it.next()
                .ok_or_else(|| r.err(format!("coupler line is missing {what}")))
        };
        let i: u32 = r.parse(field("its first endpoint")?, "a qubit index")?;
        let j: u32 = r.parse(field("its second endpoint")?, "a qubit index")?;
        let value: i8 = r.parse(field("a coupling value")?, "a coupling")?;
        if (i, j) != graph.couplers()[k] {
            return Err(r.err(format!(
                "coupler ({i}, {j}) out of canonical order, expected {:?}",
                graph.couplers()[k]
            )));
        }
        if !SIDON_MAGNITUDES.contains(&value.unsigned_abs().try_into().unwrap_or(0)) {
            return Err(r.err(format!("coupling {value} is outside the Sidon set")));
        }
        couplings.push(value);
    }
    r.done()?;

    let instance = Instance::from_parts(Arc::new(graph), couplings, seed)?;
    Ok((instance, meta))
}

/// A ground-state file: the manifold plus the hash of the instance it
/// belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundStateFile {
    pub instance_hash: String,
    /// Spin count, kept explicit so configurations parse without the
    /// instance at hand.
    pub n: usize,
    pub set: GroundStateSet,
}

/// Renders a ground-state file.
pub fn ground_states_to_string(instance_hash: &str, n: usize, set: &GroundStateSet) -> String {
    let mut s = String::new();
    writeln!(s, "{GROUND_STATES_MAGIC}").unwrap();
    writeln!(s, "instance {instance_hash}").unwrap();
    writeln!(s, "n {n}").unwrap();
    writeln!(s, "min-energy {}", set.min_energy()).unwrap();
    writeln!(s, "ngs {}", set.n_gs()).unwrap();
    writeln!(s, "count {}", CountMethod::from_exact(set.exact())).unwrap();
    for config in set.configs() {
        writeln!(s, "{}", config.to_hex()).unwrap();
    }
    s
}

pub fn write_ground_states(
    path: &Path,
    instance_hash: &str,
    n: usize,
    set: &GroundStateSet,
) -> Result<()> {
    atomic_write(
        path,
        ground_states_to_string(instance_hash, n, set).as_bytes(),
    )
}

pub fn read_ground_states(path: &Path) -> Result<GroundStateFile> {
    let text = read_text(path)?;
    let mut r = Reader::new(path, &text);
    r.expect(GROUND_STATES_MAGIC)?;
    let instance_hash = r.keyed("instance")?.to_string();
    let n: usize = r.keyed_parse("n")?;
    let min_energy: i64 = r.keyed_parse("min-energy")?;
    let n_gs: u64 = r.keyed_parse("ngs")?;
    let count: CountMethod = r.keyed_parse("count")?;
    let mut configs = Vec::with_capacity(n_gs as usize);
    for _ in 0..n_gs {
        let line = r.next()?;
        configs.push(SpinConfig::from_hex(line, n).map_err(|e| match e {
            Error::Parse { msg, .. } => r.err(msg),
            other => other,
        })?);
    }
    r.done()?;
    let set = GroundStateSet::new(min_energy, configs, count.is_exact());
    if set.n_gs() != n_gs {
        return Err(r.err(format!(
            "{n_gs} configurations declared but only {} are distinct",
            set.n_gs()
        )));
    }
    Ok(GroundStateFile {
        instance_hash,
        n,
        set,
    })
}

/// First line of a records file: everything shared by the records below it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RecordsHeader {
    pub version: u32,
    /// Hash of the problem the sampler actually ran on (the noisy instance
    /// hash for noisy runs).
    pub instance_hash: String,
    /// Hash of the base problem whose ground states the records are judged
    /// against.  Equal to `instance_hash` for noiseless runs.
    pub base_hash: String,
    pub sampler_id: String,
    pub params_hash: String,
    /// Gauge and read counts of the run; both zero for the enumerating
    /// sampler, whose records are per-visit rather than per-read.
    pub gauges: u32,
    pub reads_per_gauge: u32,
    pub seed: u64,
    /// Convergence status of an enumeration run, absent for one-shot
    /// samplers.
    pub ica_status: Option<IcaStatus>,
}

pub const RECORDS_VERSION: u32 = 1;

/// Renders a records file: a JSON header line, then one JSON record per
/// line.
pub fn records_to_string(header: &RecordsHeader, records: &[SampleRecord]) -> String {
    let mut s = serde_json::to_string(header).expect("headers serialize infallibly");
    s.push('\n');
    for record in records {
        s.push_str(&serde_json::to_string(record).expect("records serialize infallibly"));
        s.push('\n');
    }
    s
}

pub fn write_records(path: &Path, header: &RecordsHeader, records: &[SampleRecord]) -> Result<()> {
    atomic_write(path, records_to_string(header, records).as_bytes())
}

pub fn read_records(path: &Path) -> Result<(RecordsHeader, Vec<SampleRecord>)> {
    let text = read_text(path)?;
    let file = path.display().to_string();
    let json_err = |line: usize, e: serde_json::Error| Error::Parse {
        file: file.clone(),
        line,
        msg: e.to_string(),
    };
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Parse {
        file: file.clone(),
        line: 1,
        msg: "empty records file".into(),
    })?;
    let header: RecordsHeader = serde_json::from_str(first).map_err(|e| json_err(1, e))?;
    if header.version != RECORDS_VERSION {
        return Err(Error::Parse {
            file,
            line: 1,
            msg: format!("unsupported records version {}", header.version),
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        records.push(serde_json::from_str(line).map_err(|e| json_err(i + 2, e))?);
    }
    Ok((header, records))
}

/// Renders a noisy-instance file.  Floats use Rust's shortest round-trip
/// decimal form, so reading the file back reproduces them bit for bit.
pub fn noisy_to_string(noisy: &NoisyInstance) -> String {
    let mut s = String::new();
    writeln!(s, "{NOISY_MAGIC}").unwrap();
    writeln!(s, "base {}", instance_hash(noisy.base())).unwrap();
    writeln!(s, "sigma-j {}", noisy.sigma_j()).unwrap();
    writeln!(s, "sigma-h {}", noisy.sigma_h()).unwrap();
    writeln!(s, "seed {}", noisy.seed()).unwrap();
    writeln!(s, "fields {}", noisy.field_noise().len()).unwrap();
    for h in noisy.field_noise() {
        writeln!(s, "{h}").unwrap();
    }
    writeln!(s, "coupler-noise {}", noisy.coupler_noise().len()).unwrap();
    for dj in noisy.coupler_noise() {
        writeln!(s, "{dj}").unwrap();
    }
    s
}

/// Content hash of a noisy instance: the hash of its canonical file form,
/// which already embeds the base problem hash.
pub fn noisy_instance_hash(noisy: &NoisyInstance) -> String {
    sha256_hex(noisy_to_string(noisy).as_bytes())
}

pub fn write_noisy_instance(path: &Path, noisy: &NoisyInstance) -> Result<()> {
    atomic_write(path, noisy_to_string(noisy).as_bytes())
}

/// Reads a noisy instance and binds it to `base`, refusing a base whose
/// hash differs from the one recorded in the file.
pub fn read_noisy_instance(path: &Path, base: &Instance) -> Result<NoisyInstance> {
    let text = read_text(path)?;
    let mut r = Reader::new(path, &text);
    r.expect(NOISY_MAGIC)?;
    let recorded = r.keyed("base")?.to_string();
    let actual = instance_hash(base);
    if recorded != actual {
        return Err(Error::HashMismatch {
            context: format!("{} was built on a different base instance", r.file),
            expected: recorded,
            found: actual,
        });
    }
    let sigma_j: f64 = r.keyed_parse("sigma-j")?;
    let sigma_h: f64 = r.keyed_parse("sigma-h")?;
    let seed: u64 = r.keyed_parse("seed")?;
    let n_fields: usize = r.keyed_parse("fields")?;
    let mut field_noise = Vec::with_capacity(n_fields);
    for _ in 0..n_fields {
        let line = r.next()?;
        field_noise.push(r.parse(line, "a field value")?);
    }
    let n_couplers: usize = r.keyed_parse("coupler-noise")?;
    let mut coupler_noise = Vec::with_capacity(n_couplers);
    for _ in 0..n_couplers {
        let line = r.next()?;
        coupler_noise.push(r.parse(line, "a coupler noise value")?);
    }
    r.done()?;
    NoisyInstance::from_parts(
        base.clone(),
        coupler_noise,
        field_noise,
        sigma_j,
        sigma_h,
        seed,
    )
}

/// One generated instance recorded in a generation manifest.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenArtifact {
    pub path: String,
    pub sha256: String,
    pub seed: u64,
    pub k: u32,
    pub n_gs: u64,
}

/// What a generation run produced and what it cost.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenManifest {
    pub version: u32,
    pub c: u32,
    pub requested: u32,
    pub master_seed: u64,
    /// Seeds consumed, accepted or not.
    pub seeds_tried: u64,
    /// Seeds whose repair pass ran out of budget.
    pub repair_failures: u64,
    /// Seeds rejected by the degeneracy filter.
    pub filter_rejections: u64,
    /// Seeds whose degeneracy count failed (heuristic runs only).
    pub count_failures: u64,
    pub count_method: CountMethod,
    pub instances: Vec<GenArtifact>,
}

/// Path plus content hash of a file a manifest depends on.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ArtifactRef {
    pub path: String,
    pub sha256: String,
}

/// Instance count requested at one lattice size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SizePlan {
    pub c: u32,
    pub instances: u64,
}

/// A complete experiment: sizes, per-sampler parameter blocks, the gauge
/// protocol, the noise grid, and the artifacts produced so far.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentManifest {
    pub version: u32,
    pub master_seed: u64,
    pub sizes: Vec<SizePlan>,
    pub sa: SaParams,
    pub pt: PtParams,
    pub sqa: SqaParams,
    pub gauges: u32,
    pub reads_per_gauge: u32,
    pub noise_grid: Vec<NoisePoint>,
    pub artifacts: Vec<ArtifactRef>,
}

/// One point of the control-noise grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoisePoint {
    pub sigma_j: f64,
    pub sigma_h: f64,
}

impl ExperimentManifest {
    /// The hardware-era campaign: instance counts per lattice size as
    /// published, 100 gauges at 1000 reads each.
    pub fn hardware(master_seed: u64) -> Self {
        ExperimentManifest {
            version: 1,
            master_seed,
            sizes: vec![
                SizePlan {
                    c: 8,
                    instances: 4164,
                },
                SizePlan {
                    c: 9,
                    instances: 6970,
                },
                SizePlan {
                    c: 10,
                    instances: 11199,
                },
                SizePlan {
                    c: 11,
                    instances: 16739,
                },
            ],
            sa: SaParams::geometric(3.05, 0.06, 33, 16),
            pt: PtParams::hardware(),
            sqa: SqaParams::desk(),
            gauges: 100,
            reads_per_gauge: 1000,
            noise_grid: vec![
                NoisePoint {
                    sigma_j: 0.0,
                    sigma_h: 0.0,
                },
                NoisePoint {
                    sigma_j: 0.25,
                    sigma_h: 0.0,
                },
                NoisePoint {
                    sigma_j: 0.5,
                    sigma_h: 0.0,
                },
            ],
            artifacts: vec![],
        }
    }

    /// A campaign sized for a workstation: small lattices, the desk-scale
    /// parameter blocks, and a light gauge protocol.
    pub fn desk(master_seed: u64) -> Self {
        ExperimentManifest {
            sizes: vec![
                SizePlan {
                    c: 2,
                    instances: 20,
                },
                SizePlan {
                    c: 3,
                    instances: 10,
                },
            ],
            sa: SaParams::geometric(3.0, 0.06, 24, 16),
            pt: PtParams::desk(),
            gauges: 4,
            reads_per_gauge: 25,
            ..ExperimentManifest::hardware(master_seed)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("manifests serialize infallibly");
        json.push('\n');
        atomic_write(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        parse_json(path)
    }

    /// Checks that every referenced artifact exists under `root` and still
    /// has the recorded content hash.
    pub fn verify(&self, root: &Path) -> Result<()> {
        for artifact in &self.artifacts {
            let found = file_sha256(&root.join(&artifact.path))?;
            if found != artifact.sha256 {
                return Err(Error::HashMismatch {
                    context: format!("artifact {}", artifact.path),
                    expected: artifact.sha256.clone(),
                    found,
                });
            }
        }
        Ok(())
    }
}

impl GenManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("manifests serialize infallibly");
        json.push('\n');
        atomic_write(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        parse_json(path)
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{apply_noise, generate_instance};
    use crate::oracle::frontier_enumerate;
    use crate::samplers::{run_with_gauges, Model, SamplerSpec};

    fn small_instance() -> Instance {
        let defects = Defects {
            qubits: vec![3, 12],
            couplers: vec![(0, 4)],
        };
        let graph = Arc::new(ChimeraGraph::build(2, &defects).unwrap());
        (0..)
            .find_map(|seed| generate_instance(&graph, seed).ok())
            .unwrap()
    }

    #[test]
    fn instance_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.inst");
        let inst = small_instance();
        let meta = InstanceMeta {
            k: 2,
            n_gs: 12,
            count: CountMethod::Exact,
        };
        write_instance(&path, &inst, &meta).unwrap();
        let (back, back_meta) = read_instance(&path).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back_meta, meta);
        assert_eq!(instance_hash(&back), instance_hash(&inst));
    }

    #[test]
    fn instance_writes_are_byte_deterministic() {
        let inst = small_instance();
        let meta = InstanceMeta {
            k: 1,
            n_gs: 6,
            count: CountMethod::Heuristic,
        };
        assert_eq!(
            instance_to_string(&inst, &meta),
            instance_to_string(&inst, &meta)
        );
    }

    #[test]
    fn instance_hash_ignores_metadata_but_not_couplings() {
        let inst = small_instance();
        let remade =
            Instance::from_parts(inst.graph_arc(), inst.couplings().to_vec(), inst.seed() + 1)
                .unwrap();
        assert_eq!(instance_hash(&inst), instance_hash(&remade));

        let mut couplings = inst.couplings().to_vec();
        couplings[0] = if couplings[0] == 5 { 6 } else { 5 };
        let changed = Instance::from_parts(inst.graph_arc(), couplings, inst.seed()).unwrap();
        assert_ne!(instance_hash(&inst), instance_hash(&changed));
    }

    #[test]
    fn corrupted_instance_file_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.inst");
        let inst = small_instance();
        let meta = InstanceMeta {
            k: 1,
            n_gs: 6,
            count: CountMethod::Exact,
        };
        // Break the first coupler line (line 10: magic, topology 3, meta 4,
        // couplers header, then the couplers).
        let text = instance_to_string(&inst, &meta);
        let mut lines: Vec<&str> = text.lines().collect();
        lines[9] = "0 junk 5";
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        match read_instance(&path).unwrap_err() {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 10);
                assert!(msg.contains("junk"), "unhelpful message: {msg}");
            }
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn truncated_instance_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.inst");
        let inst = small_instance();
        let meta = InstanceMeta {
            k: 1,
            n_gs: 6,
            count: CountMethod::Exact,
        };
        let text = instance_to_string(&inst, &meta);
        let cut = text.len() - 20;
        fs::write(&path, &text[..cut]).unwrap();
        assert!(matches!(
            read_instance(&path).unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn missing_file_is_reported_with_its_path() {
        let err = read_instance(Path::new("no/such/file.inst")).unwrap_err();
        match err {
            Error::MissingArtifact { path, .. } => assert!(path.contains("file.inst")),
            other => panic!("expected a missing-artifact error, got {other}"),
        }
    }

    #[test]
    fn ground_state_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.gs");
        let inst = small_instance();
        let set = frontier_enumerate(&inst, 1 << 16)
            .unwrap()
            .into_complete()
            .unwrap();
        let hash = instance_hash(&inst);
        write_ground_states(&path, &hash, inst.num_spins(), &set).unwrap();
        let back = read_ground_states(&path).unwrap();
        assert_eq!(back.instance_hash, hash);
        assert_eq!(back.n, inst.num_spins());
        assert_eq!(back.set, set);
    }

    #[test]
    fn ground_state_file_rejects_duplicate_configs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.gs");
        let text = format!(
            "{GROUND_STATES_MAGIC}\ninstance abc\nn 8\nmin-energy -5\nngs 2\ncount exact\n0f\n0f\n"
        );
        fs::write(&path, text).unwrap();
        match read_ground_states(&path).unwrap_err() {
            Error::Parse { msg, .. } => assert!(msg.contains("distinct")),
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn records_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.records");
        let inst = small_instance();
        let spec = SamplerSpec::Sa(SaParams::geometric(3.0, 0.1, 6, 2));
        let records = run_with_gauges(Model::Base(&inst), &spec, 2, 3, 7).unwrap();
        let header = RecordsHeader {
            version: RECORDS_VERSION,
            instance_hash: instance_hash(&inst),
            base_hash: instance_hash(&inst),
            sampler_id: spec.id().to_string(),
            params_hash: records[0].params_hash.clone(),
            gauges: 2,
            reads_per_gauge: 3,
            seed: 7,
            ica_status: None,
        };
        write_records(&path, &header, &records).unwrap();
        let (back_header, back_records) = read_records(&path).unwrap();
        assert_eq!(back_header, header);
        assert_eq!(back_records, records);
    }

    #[test]
    fn records_file_rejects_garbage_with_a_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.records");
        let header = RecordsHeader {
            version: RECORDS_VERSION,
            instance_hash: "x".into(),
            base_hash: "x".into(),
            sampler_id: "sa".into(),
            params_hash: "p".into(),
            gauges: 0,
            reads_per_gauge: 0,
            seed: 0,
            ica_status: Some(IcaStatus::Converged),
        };
        let text = records_to_string(&header, &[]) + "not json\n";
        fs::write(&path, text).unwrap();
        match read_records(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn noisy_file_round_trips_floats_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.noise");
        let inst = small_instance();
        let noisy = apply_noise(&inst, 0.25, 0.1, 99).unwrap();
        write_noisy_instance(&path, &noisy).unwrap();
        let back = read_noisy_instance(&path, &inst).unwrap();
        assert_eq!(back, noisy);
        let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.coupler_noise()), bits(noisy.coupler_noise()));
        assert_eq!(bits(back.field_noise()), bits(noisy.field_noise()));
    }

    #[test]
    fn noisy_file_refuses_the_wrong_base() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.noise");
        let inst = small_instance();
        let noisy = apply_noise(&inst, 0.25, 0.1, 99).unwrap();
        write_noisy_instance(&path, &noisy).unwrap();
        let mut couplings = inst.couplings().to_vec();
        couplings[3] = -couplings[3];
        let other = Instance::from_parts(inst.graph_arc(), couplings, 0).unwrap();
        assert!(matches!(
            read_noisy_instance(&path, &other).unwrap_err(),
            Error::HashMismatch { .. }
        ));
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_droppings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        atomic_write(&path, b"first").unwrap();
        atomic_write(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn gen_manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gen.json");
        let manifest = GenManifest {
            version: 1,
            c: 2,
            requested: 5,
            master_seed: 11,
            seeds_tried: 80,
            repair_failures: 3,
            filter_rejections: 72,
            count_failures: 0,
            count_method: CountMethod::Exact,
            instances: vec![GenArtifact {
                path: "inst-c2-00000.inst".into(),
                sha256: "ab".into(),
                seed: 4,
                k: 1,
                n_gs: 6,
            }],
        };
        manifest.save(&path).unwrap();
        assert_eq!(GenManifest::load(&path).unwrap(), manifest);
    }

    #[test]
    fn experiment_manifest_presets_and_verification() {
        let hw = ExperimentManifest::hardware(1);
        let sizes: Vec<(u32, u64)> = hw.sizes.iter().map(|s| (s.c, s.instances)).collect();
        assert_eq!(sizes, vec![(8, 4164), (9, 6970), (10, 11199), (11, 16739)]);
        assert_eq!(hw.gauges, 100);
        assert_eq!(hw.reads_per_gauge, 1000);
        assert_eq!(hw.pt, PtParams::hardware());

        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.inst"), b"payload").unwrap();
        let mut manifest = ExperimentManifest::desk(1);
        manifest.artifacts.push(ArtifactRef {
            path: "a.inst".into(),
            sha256: sha256_hex(b"payload"),
        });
        let path = dir.path().join("experiment.json");
        manifest.save(&path).unwrap();
        let loaded = ExperimentManifest::load(&path).unwrap();
        assert_eq!(loaded, manifest);
        loaded.verify(dir.path()).unwrap();

        fs::write(dir.path().join("a.inst"), b"tampered").unwrap();
        assert!(matches!(
            loaded.verify(dir.path()).unwrap_err(),
            Error::HashMismatch { .. }
        ));
        fs::remove_file(dir.path().join("a.inst")).unwrap();
        assert!(matches!(
            loaded.verify(dir.path()).unwrap_err(),
            Error::MissingArtifact { .. }
        ));
    }
}
