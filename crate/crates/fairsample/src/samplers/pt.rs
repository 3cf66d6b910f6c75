//! Parallel tempering with isoenergetic cluster moves, and the four-replica
//! ground-state enumeration protocol built on top of it.
//!
//! Runs on base instances only: the enumeration logic compares energies for
//! exact equality, which integer couplings make safe.

use crate::instance::Instance;
use crate::ising::SpinConfig;
use crate::oracle::GroundStateSet;
use crate::seeds::{domain, stream};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Largest single-flip energy change on a degree-6 lattice with |J| <= 7.
const MAX_DELTA: usize = 84;

/// Knobs for a parallel-tempering enumeration run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PtParams {
    /// log2 of the base sweep budget: N_sw = 2^b.
    pub b: u32,
    /// Number of ladder rungs.
    pub n_t: u32,
    /// Coldest temperature, in units of the largest coupling magnitude.
    pub t_min: f64,
    /// Hottest temperature, same units.
    pub t_max: f64,
    /// How many of the coldest rungs receive cluster moves; also the rungs
    /// the convergence checkpoint looks at.
    pub n_ica: u32,
    /// Independent chains run side by side (paired off for cluster moves).
    pub replica_sets: u32,
    /// Minimum hits every recorded config must reach.
    pub min_hits: u64,
    /// Record the cold replica only every this many sweeps, thinning the
    /// autocorrelated visit stream.
    pub record_stride: u32,
}

impl PtParams {
    /// The published operating point for hardware-sized lattices.
    pub fn hardware() -> Self {
        PtParams {
            b: 19,
            n_t: 33,
            t_min: 0.06,
            t_max: 3.05,
            n_ica: 18,
            replica_sets: 4,
            min_hits: 50,
            record_stride: 1,
        }
    }

    /// Same ladder at a sweep budget sized for small lattices.  The wide
    /// record stride thins the visit stream enough that recorded hits behave
    /// like independent draws under a chi-square uniformity test; the hit
    /// floor then extends the budget to keep per-config counts useful.
    pub fn desk() -> Self {
        PtParams {
            b: 14,
            record_stride: 128,
            ..PtParams::hardware()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_min <= 0.0 || self.t_min >= self.t_max {
            return Err(Error::BadParams(
                "temperatures must satisfy 0 < t_min < t_max".into(),
            ));
        }
        if self.n_t < 2 {
            return Err(Error::BadParams("need at least two ladder rungs".into()));
        }
        if self.n_ica == 0 || self.n_ica > self.n_t {
            return Err(Error::BadParams("n_ica must be in 1..=n_t".into()));
        }
        if self.replica_sets < 2 {
            return Err(Error::BadParams("need at least two replica sets".into()));
        }
        if self.b == 0 || self.b >= 40 {
            return Err(Error::BadParams("b must be in 1..40".into()));
        }
        Ok(())
    }
}

/// Geometric temperature ladder from `t_min` up to `t_max`, `n_t` rungs.
pub fn temperature_ladder(t_min: f64, t_max: f64, n_t: u32) -> Vec<f64> {
    assert!(n_t >= 2 && t_min > 0.0 && t_min < t_max);
    let ratio = (t_max / t_min).powf(1.0 / f64::from(n_t - 1));
    (0..n_t).map(|i| t_min * ratio.powi(i as i32)).collect()
}

/// One parallel-tempering chain: a replica per ladder rung plus cached
/// acceptance tables.
#[derive(Debug, Clone)]
pub struct PtState {
    ladder: Vec<f64>,
    betas: Vec<f64>,
    /// accept[r][delta] = exp(-delta / (T_r * scale)) for positive deltas.
    accept: Vec<Vec<f64>>,
    scale: f64,
    replicas: Vec<SpinConfig>,
    energies: Vec<i64>,
    exchange_log: Option<Vec<(f64, bool)>>,
}

impl PtState {
    /// Random replicas at every rung of `ladder` (ascending temperatures).
    pub fn new(instance: &Instance, ladder: &[f64], rng: &mut ChaCha8Rng) -> Result<Self> {
        if ladder.is_empty() || ladder.iter().any(|&t| t <= 0.0) {
            return Err(Error::BadSchedule);
        }
        if ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadSchedule);
        }
        let scale = instance.coupling_scale();
        let accept = ladder
            .iter()
            .map(|&t| {
                (0..=MAX_DELTA)
                    .map(|delta| (-(delta as f64) / (t * scale)).exp())
                    .collect()
            })
            .collect();
        let n = instance.num_spins();
        let mut replicas = Vec::with_capacity(ladder.len());
        let mut energies = Vec::with_capacity(ladder.len());
        for _ in 0..ladder.len() {
            let config = super::sa::random_config(n, rng);
            energies.push(crate::ising::energy(instance, &config)?);
            replicas.push(config);
        }
        Ok(PtState {
            ladder: ladder.to_vec(),
            betas: ladder.iter().map(|&t| 1.0 / t).collect(),
            accept,
            scale,
            replicas,
            energies,
            exchange_log: None,
        })
    }

    /// Starts recording every exchange attempt as (acceptance probability,
    /// accepted).
    pub fn enable_exchange_log(&mut self) {
        self.exchange_log = Some(Vec::new());
    }

    /// Logged exchange decisions, empty unless enabled.
    pub fn exchange_log(&self) -> &[(f64, bool)] {
        self.exchange_log.as_deref().unwrap_or(&[])
    }

    /// Replica at ladder rung `r` (0 is the coldest).
    pub fn replica(&self, r: usize) -> &SpinConfig {
        &self.replicas[r]
    }

    /// Energy of the replica at rung `r`.
    pub fn energy(&self, r: usize) -> i64 {
        self.energies[r]
    }

    /// Lowest energy currently held by the `k` coldest rungs.
    pub fn min_over_coldest(&self, k: usize) -> i64 {
        *self.energies[..k].iter().min().expect("k >= 1")
    }

    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }
}

/// One full chain update: a Metropolis sweep of every replica, then exchange
/// attempts between all neighboring rungs.
pub fn pt_sweep(state: &mut PtState, instance: &Instance, rng: &mut ChaCha8Rng) {
    let n = instance.num_spins();
    let graph = instance.graph();
    for r in 0..state.ladder.len() {
        let config = &mut state.replicas[r];
        let mut energy = state.energies[r];
        let accept = &state.accept[r];
        for q in 0..n {
            let mut local = 0i32;
            for &(j, k) in graph.adj_dense(q as u32) {
                local +=
                    i32::from(instance.coupling(k as usize)) * i32::from(config.spin(j as usize));
            }
            let delta = 2 * i32::from(config.spin(q)) * local;
            // Ties flip with probability 1/2 (the heat-bath rate at zero
            // cost); always accepting them cycles uniform-coupling fixtures
            // through a closed set of zero-field configurations forever.
            // Generated instances never produce a zero delta.
            let flip = if delta < 0 {
                true
            } else if delta == 0 {
                rng.gen::<bool>()
            } else {
                rng.gen::<f64>() < accept[delta as usize]
            };
            if flip {
                config.flip(q);
                energy += i64::from(delta);
            }
        }
        state.energies[r] = energy;
    }
    for r in 0..state.ladder.len().saturating_sub(1) {
        let exponent = (state.betas[r] - state.betas[r + 1])
            * ((state.energies[r] - state.energies[r + 1]) as f64)
            / state.scale;
        let p = exponent.min(0.0).exp();
        let accepted = exponent >= 0.0 || rng.gen::<f64>() < p;
        if let Some(log) = state.exchange_log.as_mut() {
            log.push((p, accepted));
        }
        if accepted {
            state.replicas.swap(r, r + 1);
            state.energies.swap(r, r + 1);
        }
    }
}

/// Connected cluster of disagreeing sites containing `start`, grown over the
/// active couplers.
fn overlap_cluster(a: &SpinConfig, b: &SpinConfig, instance: &Instance, start: u32) -> Vec<u32> {
    let graph = instance.graph();
    let mut in_cluster = vec![false; instance.num_spins()];
    let mut members = vec![start];
    in_cluster[start as usize] = true;
    let mut cursor = 0;
    while cursor < members.len() {
        let v = members[cursor];
        cursor += 1;
        for &(w, _) in graph.adj_dense(v) {
            if !in_cluster[w as usize] && a.spin(w as usize) != b.spin(w as usize) {
                in_cluster[w as usize] = true;
                members.push(w);
            }
        }
    }
    members
}

/// Energy change in replica `a` from flipping `cluster`, computed over the
/// cluster's boundary couplers.
fn cluster_flip_delta(a: &SpinConfig, instance: &Instance, cluster: &[u32]) -> i64 {
    let graph = instance.graph();
    let mut in_cluster = vec![false; instance.num_spins()];
    for &v in cluster {
        in_cluster[v as usize] = true;
    }
    let mut boundary = 0i64;
    for &v in cluster {
        for &(w, k) in graph.adj_dense(v) {
            if !in_cluster[w as usize] {
                boundary += i64::from(instance.coupling(k as usize))
                    * i64::from(a.spin(v as usize))
                    * i64::from(a.spin(w as usize));
            }
        }
    }
    2 * boundary
}

/// Houdayer cluster move between two same-temperature replicas: pick a random
/// site where the replicas disagree, flood-fill its connected disagreement
/// cluster, and flip that cluster in both.  Because every coupler leaving the
/// cluster connects to a site where the replicas agree, the energy changes
/// cancel exactly: E(A') + E(B') = E(A) + E(B).
pub fn isoenergetic_cluster_move(
    config_a: &SpinConfig,
    config_b: &SpinConfig,
    instance: &Instance,
    rng: &mut ChaCha8Rng,
) -> (SpinConfig, SpinConfig) {
    let mut a = config_a.clone();
    let mut b = config_b.clone();
    cluster_move_in_place(&mut a, &mut 0, &mut b, &mut 0, instance, rng);
    (a, b)
}

/// Cluster move with incremental energy bookkeeping; returns whether a
/// cluster was flipped.
fn cluster_move_in_place(
    a: &mut SpinConfig,
    ea: &mut i64,
    b: &mut SpinConfig,
    eb: &mut i64,
    instance: &Instance,
    rng: &mut ChaCha8Rng,
) -> bool {
    let n = instance.num_spins();
    let disagree: Vec<u32> = (0..n as u32)
        .filter(|&i| a.spin(i as usize) != b.spin(i as usize))
        .collect();
    if disagree.is_empty() {
        return false;
    }
    let start = disagree[rng.gen_range(0..disagree.len())];
    let cluster = overlap_cluster(a, b, instance, start);
    let delta_a = cluster_flip_delta(a, instance, &cluster);
    for &v in &cluster {
        a.flip(v as usize);
        b.flip(v as usize);
    }
    *ea += delta_a;
    *eb -= delta_a;
    true
}

/// How an enumeration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IcaStatus {
    /// Chains agreed at the checkpoint and every config reached the hit
    /// floor.
    Converged,
    /// Chains disagreed on the minimum energy at the half-way checkpoint.
    Unconverged,
    /// Chains agreed but some config was still short of the hit floor when
    /// the extension cap was reached.
    HitFloorUnmet,
}

/// Result of [`ica_enumerate`]: the recovered manifold with per-config hit
/// counts and convergence diagnostics.
#[derive(Debug, Clone)]
pub struct IcaOutcome {
    /// Recovered ground-state set, flagged `exact = false`.
    pub set: GroundStateSet,
    /// Hits per config, aligned with `set.configs()`.
    pub hits: Vec<u64>,
    pub status: IcaStatus,
    /// Each chain's minimum over the coldest rungs at the checkpoint.
    pub checkpoint_minima: Vec<i64>,
    /// Total sweeps actually executed, extensions included.
    pub sweeps_run: u64,
}

impl IcaOutcome {
    /// Hits summed over all recorded configs.
    pub fn total_hits(&self) -> u64 {
        self.hits.iter().sum()
    }
}

/// Runs independent PT+ICA chains and enumerates the ground-state manifold
/// by recording cold-rung visits.
///
/// The chains equilibrate for half the sweep budget; a checkpoint then
/// requires every chain to have seen the same minimum energy over its
/// coldest rungs, else the run stops as `Unconverged`.  The second half
/// records the coldest replica of every chain each `record_stride` sweeps,
/// restarting the tally whenever a lower energy appears.  If any recorded
/// config is short of `min_hits` when the budget runs out, the run extends
/// in doublings up to four times the base budget before giving up as
/// `HitFloorUnmet`.  Chains are paired off for cluster moves but never
/// exchange information otherwise.
pub fn ica_enumerate(instance: &Instance, params: &PtParams, seed: u64) -> Result<IcaOutcome> {
    params.validate()?;
    let ladder = temperature_ladder(params.t_min, params.t_max, params.n_t);
    let n_sw = 1u64 << params.b;
    let n_chains = params.replica_sets as usize;
    let n_ica = params.n_ica as usize;

    let mut chain_rngs: Vec<ChaCha8Rng> = (0..n_chains)
        .map(|i| stream(seed, domain::CHAIN, i as u64))
        .collect();
    let mut pair_rngs: Vec<ChaCha8Rng> = (0..n_chains / 2)
        .map(|i| stream(seed, domain::CLUSTER, i as u64))
        .collect();
    let mut chains: Vec<PtState> = chain_rngs
        .iter_mut()
        .map(|rng| PtState::new(instance, &ladder, rng))
        .collect::<Result<_>>()?;

    let step_all = move |chains: &mut Vec<PtState>,
                         chain_rngs: &mut Vec<ChaCha8Rng>,
                         pair_rngs: &mut Vec<ChaCha8Rng>| {
        for (chain, rng) in chains.iter_mut().zip(chain_rngs.iter_mut()) {
            pt_sweep(chain, instance, rng);
        }
        for (pair, rng) in pair_rngs.iter_mut().enumerate() {
            let (left, right) = chains.split_at_mut(2 * pair + 1);
            let a = &mut left[2 * pair];
            let b = &mut right[0];
            for r in 0..n_ica {
                let mut ea = a.energies[r];
                let mut eb = b.energies[r];
                cluster_move_in_place(
                    &mut a.replicas[r],
                    &mut ea,
                    &mut b.replicas[r],
                    &mut eb,
                    instance,
                    rng,
                );
                a.energies[r] = ea;
                b.energies[r] = eb;
            }
        }
    };

    let mut chain_min = vec![i64::MAX; n_chains];
    for _ in 0..n_sw / 2 {
        step_all(&mut chains, &mut chain_rngs, &mut pair_rngs);
        for (m, chain) in chain_min.iter_mut().zip(&chains) {
            *m = (*m).min(chain.min_over_coldest(n_ica));
        }
    }
    let checkpoint = chain_min.clone();
    if checkpoint.iter().any(|&m| m != checkpoint[0]) {
        return Ok(IcaOutcome {
            set: GroundStateSet::new(checkpoint.iter().copied().min().unwrap(), vec![], false),
            hits: vec![],
            status: IcaStatus::Unconverged,
            checkpoint_minima: checkpoint,
            sweeps_run: n_sw / 2,
        });
    }

    let mut record_min = checkpoint[0];
    let mut hit_map: BTreeMap<SpinConfig, u64> = BTreeMap::new();
    let stride = u64::from(params.record_stride.max(1));
    let mut recorded_sweeps = 0u64;
    let mut target_total = n_sw;
    let status = loop {
        while n_sw / 2 + recorded_sweeps < target_total {
            step_all(&mut chains, &mut chain_rngs, &mut pair_rngs);
            recorded_sweeps += 1;
            if !recorded_sweeps.is_multiple_of(stride) {
                continue;
            }
            for chain in &chains {
                let e = chain.energy(0);
                if e < record_min {
                    record_min = e;
                    hit_map.clear();
                }
                if e == record_min {
                    *hit_map.entry(chain.replica(0).clone()).or_default() += 1;
                }
            }
        }
        let floor_met = !hit_map.is_empty() && hit_map.values().all(|&h| h >= params.min_hits);
        if floor_met {
            break IcaStatus::Converged;
        }
        if target_total >= 4 * n_sw {
            break IcaStatus::HitFloorUnmet;
        }
        target_total *= 2;
    };

    let configs: Vec<SpinConfig> = hit_map.keys().cloned().collect();
    let set = GroundStateSet::new(record_min, configs, false);
    let hits = set.configs().iter().map(|config| hit_map[config]).collect();
    Ok(IcaOutcome {
        set,
        hits,
        status,
        checkpoint_minima: checkpoint,
        sweeps_run: n_sw / 2 + recorded_sweeps,
    })
}
