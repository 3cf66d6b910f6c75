//! Brute-force ground-state enumeration.

use super::GroundStateSet;
use crate::instance::{Instance, NoisyInstance};
use crate::ising::SpinConfig;
use crate::{Error, Result};

/// Largest spin count the exact scan will attempt.
pub const BRUTE_FORCE_LIMIT: usize = 28;

/// Largest spin count the noisy scan will attempt (full re-evaluation per
/// configuration, no incremental drift).
pub const NOISY_BRUTE_FORCE_LIMIT: usize = 20;

/// Scans all `2^N` configurations along a Gray code, collecting every
/// minimizer.  Exact integer energies throughout.
pub fn brute_force_enumerate(instance: &Instance) -> Result<GroundStateSet> {
    let n = instance.num_spins();
    if n == 0 || n > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleInfeasible {
            what: "brute-force oracle",
            why: format!("N = {n} outside 1..={BRUTE_FORCE_LIMIT}"),
        });
    }

    let graph = instance.graph();
    let adj: Vec<Vec<(u32, i64)>> = (0..n as u32)
        .map(|d| {
            graph
                .adj_dense(d)
                .iter()
                .map(|&(dn, k)| (dn, instance.coupling(k as usize) as i64))
                .collect()
        })
        .collect();

    let mut spins = vec![-1i8; n];
    let mut energy: i64 = {
        let cfg = SpinConfig::from_spins(&spins);
        crate::ising::energy(instance, &cfg)?
    };
    let mut min_energy = energy;
    let mut minima = vec![SpinConfig::from_spins(&spins)];

    for step in 1u64..1u64 << n {
        // Gray code: from step-1 to step exactly bit `trailing_zeros(step)`
        // flips.
        let q = step.trailing_zeros() as usize;
        let mut field = 0i64;
        for &(dn, j) in &adj[q] {
            field += j * spins[dn as usize] as i64;
        }
        energy += 2 * spins[q] as i64 * field;
        spins[q] = -spins[q];

        if energy < min_energy {
            min_energy = energy;
            minima.clear();
            minima.push(SpinConfig::from_spins(&spins));
        } else if energy == min_energy {
            minima.push(SpinConfig::from_spins(&spins));
        }
    }

    Ok(GroundStateSet::new(min_energy, minima, true))
}

/// Ground states of a noisy instance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyGroundStates {
    pub min_energy: f64,
    /// Configurations within `tol` of the minimum, canonical order.
    pub configs: Vec<SpinConfig>,
}

/// Scans all `2^N` configurations of a noisy instance, grouping energies
/// within `tol` of the running minimum.
pub fn brute_force_enumerate_noisy(noisy: &NoisyInstance, tol: f64) -> Result<NoisyGroundStates> {
    let n = noisy.base().num_spins();
    if n == 0 || n > NOISY_BRUTE_FORCE_LIMIT {
        return Err(Error::OracleInfeasible {
            what: "noisy brute-force oracle",
            why: format!("N = {n} outside 1..={NOISY_BRUTE_FORCE_LIMIT}"),
        });
    }
    let mut min_energy = f64::INFINITY;
    let mut minima: Vec<(f64, SpinConfig)> = Vec::new();
    for bits in 0u64..1u64 << n {
        let spins: Vec<i8> = (0..n)
            .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        let cfg = SpinConfig::from_spins(&spins);
        let e = crate::ising::energy_noisy(noisy, &cfg)?;
        if e < min_energy - tol {
            min_energy = e;
            minima.retain(|(prev, _)| *prev <= min_energy + tol);
            minima.push((e, cfg));
        } else if e <= min_energy + tol {
            min_energy = min_energy.min(e);
            minima.push((e, cfg));
        }
    }
    minima.retain(|(e, _)| *e <= min_energy + tol);
    let mut configs: Vec<SpinConfig> = minima.into_iter().map(|(_, c)| c).collect();
    configs.sort();
    Ok(NoisyGroundStates {
        min_energy,
        configs,
    })
}
