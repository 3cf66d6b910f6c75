//! Spin configurations and Ising energies.
//!
//! The Hamiltonian is `H = -sum_{<ij>} J_ij S_i S_j - sum_i h_i S_i` with
//! `S_i = +/-1`.  Base instances have integer couplings and no fields, so
//! their energies are exact `i64` values; noisy instances evaluate in `f64`.
//!
//! A [`SpinConfig`] packs one bit per active qubit in dense order (bit set
//! means `S = +1`).  Its text form is the big-endian hex string of the packed
//! bits; the qubit count travels alongside in file headers.

use crate::instance::{Instance, NoisyInstance};
use crate::{Error, Result};

/// Bit-packed spin configuration over the active qubits of a graph.
///
/// Dense index `i` lives at bit `i` of the packed words; comparison order is
/// the numeric order of the packed value, which matches lexicographic order
/// of the fixed-width hex form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    n: usize,
    words: Vec<u64>,
}

impl SpinConfig {
    /// All spins down (`S = -1`).
    pub fn all_down(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    /// Builds a configuration from `+1` / `-1` spin values.
    pub fn from_spins(spins: &[i8]) -> Self {
        let mut cfg = Self::all_down(spins.len());
        for (i, &s) in spins.iter().enumerate() {
            debug_assert!(s == 1 || s == -1);
            if s == 1 {
                cfg.words[i / 64] |= 1 << (i % 64);
            }
        }
        cfg
    }

    /// Unpacks into `+1` / `-1` spin values.
    pub fn to_spins(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.spin(i)).collect()
    }

    /// Number of spins.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Spin at dense index `i` as `+1` / `-1`.
    #[inline]
    pub fn spin(&self, i: usize) -> i8 {
        debug_assert!(i < self.n);
        if self.words[i / 64] >> (i % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// Flips the spin at dense index `i`.
    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    /// The configuration with every spin reversed.
    pub fn global_flip(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            let used = self.n % 64;
            if used != 0 {
                *last &= (1u64 << used) - 1;
            }
        }
        Self { n: self.n, words }
    }

    /// Big-endian hex form of the packed bits, `ceil(n / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.n.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (self.words[bit / 64] >> (bit % 64)) & 0xf;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// Parses the hex form back into a configuration of `n` spins.
    pub fn from_hex(hex: &str, n: usize) -> Result<Self> {
        let digits = n.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::Parse {
                file: String::new(),
                line: 0,
                msg: format!(
                    "config hex has {} digits, expected {} for {} spins",
                    hex.len(),
                    digits,
                    n
                ),
            });
        }
        let mut cfg = Self::all_down(n);
        for (k, ch) in hex.chars().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| Error::Parse {
                file: String::new(),
                line: 0,
                msg: format!("invalid hex digit {ch:?} in config"),
            })? as u64;
            let bit = (digits - 1 - k) * 4;
            cfg.words[bit / 64] |= nibble << (bit % 64);
        }
        if !n.is_multiple_of(4) {
            let top = cfg.words[(digits * 4 - 1) / 64] >> (((digits - 1) * 4) % 64) & 0xf;
            if top >> (n % 4) != 0 {
                return Err(Error::Parse {
                    file: String::new(),
                    line: 0,
                    msg: format!("config hex sets bits beyond {n} spins"),
                });
            }
        }
        Ok(cfg)
    }

    /// Raw packed words, low bits first.
    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl PartialOrd for SpinConfig {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SpinConfig {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl std::fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Serde view of a configuration: spin count plus the hex text form.
#[derive(serde::Serialize, serde::Deserialize)]
struct SpinConfigRepr {
    n: usize,
    hex: String,
}

impl serde::Serialize for SpinConfig {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        SpinConfigRepr {
            n: self.n,
            hex: self.to_hex(),
        }
        .serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for SpinConfig {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = SpinConfigRepr::deserialize(deserializer)?;
        SpinConfig::from_hex(&repr.hex, repr.n).map_err(serde::de::Error::custom)
    }
}

fn check_len(config: &SpinConfig, instance_len: usize) -> Result<()> {
    if config.len() != instance_len {
        return Err(Error::ConfigSizeMismatch {
            config: config.len(),
            instance: instance_len,
        });
    }
    Ok(())
}

/// Exact energy of a base instance, `-sum J_ij S_i S_j`.
pub fn energy(instance: &Instance, config: &SpinConfig) -> Result<i64> {
    check_len(config, instance.num_spins())?;
    let graph = instance.graph();
    let mut e = 0i64;
    for (k, &(qi, qj)) in graph.couplers().iter().enumerate() {
        let di = graph.dense_of(qi).unwrap() as usize;
        let dj = graph.dense_of(qj).unwrap() as usize;
        let prod = (config.spin(di) as i64) * (config.spin(dj) as i64);
        e -= instance.coupling(k) as i64 * prod;
    }
    Ok(e)
}

/// Energy of a noisy instance, `-sum (J+dJ) S_i S_j - sum h_i S_i`.
pub fn energy_noisy(noisy: &NoisyInstance, config: &SpinConfig) -> Result<f64> {
    check_len(config, noisy.base().num_spins())?;
    let graph = noisy.base().graph();
    let mut e = 0.0f64;
    for (k, &(qi, qj)) in graph.couplers().iter().enumerate() {
        let di = graph.dense_of(qi).unwrap() as usize;
        let dj = graph.dense_of(qj).unwrap() as usize;
        let prod = (config.spin(di) * config.spin(dj)) as f64;
        e -= noisy.coupling(k) * prod;
    }
    for d in 0..noisy.base().num_spins() {
        e -= noisy.field(d) * config.spin(d) as f64;
    }
    Ok(e)
}

/// Exact energy change of flipping the spin at dense index `q`:
/// `delta = 2 S_q sum_j J_qj S_j`.
pub fn delta_energy(instance: &Instance, config: &SpinConfig, q: usize) -> Result<i64> {
    check_len(config, instance.num_spins())?;
    if q >= instance.num_spins() {
        return Err(Error::ConfigSizeMismatch {
            config: q,
            instance: instance.num_spins(),
        });
    }
    let graph = instance.graph();
    let mut field = 0i64;
    for &(dn, k) in graph.adj_dense(q as u32) {
        field += instance.coupling(k as usize) as i64 * config.spin(dn as usize) as i64;
    }
    Ok(2 * config.spin(q) as i64 * field)
}

/// Energy change of flipping dense index `q` on a noisy instance:
/// `delta = 2 S_q (sum_j J_qj S_j + h_q)`.
pub fn delta_energy_noisy(noisy: &NoisyInstance, config: &SpinConfig, q: usize) -> Result<f64> {
    check_len(config, noisy.base().num_spins())?;
    let graph = noisy.base().graph();
    let mut field = noisy.field(q);
    for &(dn, k) in graph.adj_dense(q as u32) {
        field += noisy.coupling(k as usize) * config.spin(dn as usize) as f64;
    }
    Ok(2.0 * config.spin(q) as f64 * field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ChimeraGraph, Defects};
    use crate::instance::Instance;
    use rand::Rng;
    use std::sync::Arc;

    // Reference evaluator kept deliberately separate from the production
    // path: walks raw +/-1 vectors and the coupler list only.
    fn naive_energy(instance: &Instance, spins: &[i8]) -> i64 {
        let g = instance.graph();
        let mut e = 0i64;
        for (k, &(qi, qj)) in g.couplers().iter().enumerate() {
            let si = spins[g.dense_of(qi).unwrap() as usize] as i64;
            let sj = spins[g.dense_of(qj).unwrap() as usize] as i64;
            e -= instance.coupling(k) as i64 * si * sj;
        }
        e
    }

    fn ferromagnet(c: u32, j: i8) -> Instance {
        let graph = Arc::new(ChimeraGraph::build(c, &Defects::none()).unwrap());
        let n = graph.num_couplers();
        Instance::from_parts(graph, vec![j; n], 0).unwrap()
    }

    fn random_spins(n: usize, rng: &mut impl Rng) -> Vec<i8> {
        (0..n)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect()
    }

    #[test]
    fn ferromagnetic_cell_ground_energy() {
        let inst = ferromagnet(1, 5);
        let up = SpinConfig::from_spins(&[1; 8]);
        assert_eq!(energy(&inst, &up).unwrap(), -80);
    }

    #[test]
    fn ferromagnetic_c2_ground_energy() {
        let inst = ferromagnet(2, 5);
        let up = SpinConfig::from_spins(&[1; 32]);
        assert_eq!(energy(&inst, &up).unwrap(), -400);
    }

    #[test]
    fn antiferromagnetic_cell_ground_energy() {
        let graph = Arc::new(ChimeraGraph::build(1, &Defects::none()).unwrap());
        let inst = Instance::from_parts(graph, vec![-5; 16], 0).unwrap();
        // Shores anti-aligned: every coupler satisfied.
        let cfg = SpinConfig::from_spins(&[1, 1, 1, 1, -1, -1, -1, -1]);
        assert_eq!(energy(&inst, &cfg).unwrap(), -80);
    }

    #[test]
    fn two_spin_energies() {
        // A single cell with six dead qubits leaves one J = +5 coupler.
        let graph = Arc::new(
            ChimeraGraph::build(
                1,
                &Defects {
                    qubits: vec![1, 2, 3, 5, 6, 7],
                    couplers: vec![],
                },
            )
            .unwrap(),
        );
        let inst = Instance::from_parts(graph, vec![5], 0).unwrap();
        assert_eq!(energy(&inst, &SpinConfig::from_spins(&[1, 1])).unwrap(), -5);
        assert_eq!(energy(&inst, &SpinConfig::from_spins(&[1, -1])).unwrap(), 5);
        assert_eq!(
            energy(&inst, &SpinConfig::from_spins(&[-1, -1])).unwrap(),
            -5
        );
    }

    #[test]
    fn energy_matches_naive_on_random_instances() {
        let mut rng = crate::seeds::rng_from(11);
        for c in [1u32, 2] {
            let inst = crate::instance::random_instance(c, &Defects::none(), &mut rng).unwrap();
            for _ in 0..50 {
                let spins = random_spins(inst.num_spins(), &mut rng);
                let cfg = SpinConfig::from_spins(&spins);
                assert_eq!(energy(&inst, &cfg).unwrap(), naive_energy(&inst, &spins));
            }
        }
    }

    #[test]
    fn delta_matches_energy_difference() {
        let mut rng = crate::seeds::rng_from(12);
        let inst = crate::instance::random_instance(2, &Defects::none(), &mut rng).unwrap();
        for _ in 0..50 {
            let spins = random_spins(inst.num_spins(), &mut rng);
            let mut cfg = SpinConfig::from_spins(&spins);
            let q = rng.gen_range(0..inst.num_spins());
            let before = energy(&inst, &cfg).unwrap();
            let delta = delta_energy(&inst, &cfg, q).unwrap();
            cfg.flip(q);
            assert_eq!(energy(&inst, &cfg).unwrap(), before + delta);
        }
    }

    #[test]
    fn global_flip_preserves_energy() {
        let mut rng = crate::seeds::rng_from(13);
        let inst = crate::instance::random_instance(2, &Defects::none(), &mut rng).unwrap();
        for _ in 0..20 {
            let cfg = SpinConfig::from_spins(&random_spins(inst.num_spins(), &mut rng));
            assert_eq!(
                energy(&inst, &cfg).unwrap(),
                energy(&inst, &cfg.global_flip()).unwrap()
            );
        }
    }

    #[test]
    fn hex_round_trip() {
        let mut rng = crate::seeds::rng_from(14);
        for n in [1usize, 3, 4, 7, 8, 32, 63, 64, 65, 100, 968] {
            for _ in 0..10 {
                let cfg = SpinConfig::from_spins(&random_spins(n, &mut rng));
                let hex = cfg.to_hex();
                assert_eq!(hex.len(), n.div_ceil(4));
                assert_eq!(SpinConfig::from_hex(&hex, n).unwrap(), cfg);
            }
        }
    }

    #[test]
    fn hex_is_big_endian() {
        // Dense bits 0 and 5 set out of 8 spins: value 0b0010_0001 = 0x21.
        let cfg = SpinConfig::from_spins(&[1, -1, -1, -1, -1, 1, -1, -1]);
        assert_eq!(cfg.to_hex(), "21");
    }

    #[test]
    fn hex_rejects_garbage() {
        assert!(SpinConfig::from_hex("zz", 8).is_err());
        assert!(SpinConfig::from_hex("123", 8).is_err());
        // 5 spins fit in 2 digits but the top 3 bits must stay clear.
        assert!(SpinConfig::from_hex("ff", 5).is_err());
        assert!(SpinConfig::from_hex("1f", 5).is_ok());
    }

    #[test]
    fn ordering_matches_hex_ordering() {
        let mut rng = crate::seeds::rng_from(15);
        let mut configs: Vec<SpinConfig> = (0..32)
            .map(|_| SpinConfig::from_spins(&random_spins(70, &mut rng)))
            .collect();
        let mut by_hex = configs.clone();
        configs.sort();
        by_hex.sort_by_key(|c| c.to_hex());
        assert_eq!(configs, by_hex);
    }

    #[test]
    fn global_flip_is_involutive() {
        let mut rng = crate::seeds::rng_from(16);
        let cfg = SpinConfig::from_spins(&random_spins(37, &mut rng));
        assert_eq!(cfg.global_flip().global_flip(), cfg);
        assert_ne!(cfg.global_flip(), cfg);
    }
}
