//! Two-stage search over `(nb, Q̄, Ȳ)` driven by the cost model.
//!
//! The coarse stage fixes `Ȳ = 1` and picks `(nb, Q̄)` by predicted
//! throughput at the largest sizes of the grid. The fine stage sweeps `Ȳ` for
//! that pair. Predicted time is the cost-model time plus a charge for atomic
//! accumulation: every atomic add of an `nb`-element segment costs
//! `atomic_coefficient * Ȳ * nb * b` bytes of bandwidth, `Ȳ` being the number
//! of TBs contending for each output segment.
//!
//! `Q̄` changes neither the traffic nor the TB count, so the model cannot tell
//! `Q̄` values apart and the tie-break picks the smallest.

use std::fmt::Write as _;

use crate::cost::{dominant_round_model, predict_time, RoundModel};
use crate::device::DeviceProfile;
use crate::error::{Error, Result};
use crate::kernel::{trace_op, Coefficients, Counters, Op};
use crate::matrix::{padded_ld, Layout};
use crate::partition::KernelConfig;
use crate::precision::Precision;

/// Default `atomic_coefficient`: element-bytes of bandwidth one atomically
/// added element costs per contending TB. With it, on the built-in profile,
/// `Ȳ = 2` beats `Ȳ = 16` for double SYMV at small sizes and is the overall
/// pick of the fine stage.
pub const DEFAULT_ATOMIC_COEFFICIENT: f64 = 1.0;

pub const NB_CANDIDATES: [usize; 3] = [32, 64, 128];
pub const Y_CANDIDATES: [usize; 5] = [1, 2, 4, 8, 16];

/// Optional hardware limits on the search space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    pub max_threads_per_tb: Option<usize>,
    /// Limit on both reduction spaces together, in bytes.
    pub max_shared_bytes: Option<usize>,
    /// Restricts `nb` to these values when set.
    pub nb: Option<Vec<usize>>,
    /// Restricts `Ȳ` to these values when set.
    pub y_bar: Option<Vec<usize>>,
}

/// Every valid `(nb, Q̄, Ȳ)` with power-of-two `nb` and `Q̄`, sorted by
/// `(nb, Q̄, Ȳ)`.
pub fn enumerate_configs(precision: Precision, constraints: &Constraints) -> Vec<KernelConfig> {
    let nbs = constraints.nb.clone().unwrap_or_else(|| NB_CANDIDATES.to_vec());
    let ys = constraints.y_bar.clone().unwrap_or_else(|| Y_CANDIDATES.to_vec());
    let b = precision.element_bytes();
    let mut out = Vec::new();
    for &nb in &nbs {
        let mut q = 1;
        while q <= nb / 2 {
            for &y in &ys {
                let Ok(cfg) = KernelConfig::new(nb, q, y) else { continue };
                let threads_ok = constraints.max_threads_per_tb.is_none_or(|t| cfg.threads_per_tb() <= t);
                let shared = (cfg.reduction_space_rows() + cfg.reduction_space_cols()) * b;
                let shared_ok = constraints.max_shared_bytes.is_none_or(|s| shared <= s);
                if threads_ok && shared_ok {
                    out.push(cfg);
                }
            }
            q *= 2;
        }
    }
    out
}

/// Model evaluation of one configuration at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub config: KernelConfig,
    pub size: usize,
    pub predicted_gflops: f64,
    pub predicted_seconds: f64,
    pub transactions: u64,
    pub atomic_adds: u64,
    pub flops: u64,
    pub rounds: RoundModel,
}

impl Evaluation {
    pub fn tb_r(&self) -> usize {
        self.rounds.tb_r
    }
}

#[derive(Debug, Clone)]
pub struct CoarseResult {
    pub best: KernelConfig,
    pub evaluations: Vec<Evaluation>,
}

#[derive(Debug, Clone)]
pub struct FineResult {
    /// Best configuration for each size, in grid order.
    pub per_size: Vec<(usize, KernelConfig, f64)>,
    /// Configuration with the highest mean predicted throughput.
    pub recommendation: KernelConfig,
    pub evaluations: Vec<Evaluation>,
}

/// Cost-model objective for one operation on one device.
#[derive(Debug, Clone)]
pub struct Tuner {
    pub op: Op,
    pub precision: Precision,
    pub profile: DeviceProfile,
    pub atomic_coefficient: f64,
    pub constraints: Constraints,
}

impl Tuner {
    pub fn new(op: Op, precision: Precision, profile: DeviceProfile) -> Self {
        Self {
            op,
            precision,
            profile,
            atomic_coefficient: DEFAULT_ATOMIC_COEFFICIENT,
            constraints: Constraints::default(),
        }
    }

    pub fn with_atomic_coefficient(mut self, c: f64) -> Self {
        self.atomic_coefficient = c;
        self
    }

    pub fn with_constraints(mut self, c: Constraints) -> Self {
        self.constraints = c;
        self
    }

    /// Counters of a square `size` problem on a segment-padded matrix.
    pub fn trace(&self, config: &KernelConfig, size: usize) -> Result<Counters> {
        let seg = self.profile.segment_bytes;
        let ld = padded_ld(size.max(1), self.precision.elements_per_segment(seg).max(1));
        let layout = Layout {
            m: size,
            n: size,
            ld,
            row_offset: 0,
            col_offset: 0,
        };
        trace_op(self.op, self.precision, layout, Coefficients::GENERAL, config, seg)
    }

    /// Predicted seconds: bandwidth time over utilization plus atomic charge.
    pub fn objective_seconds(&self, counters: &Counters, config: &KernelConfig) -> f64 {
        let rounds = dominant_round_model(counters, &self.profile);
        predict_time(counters, &rounds, &self.profile) + self.atomic_seconds(counters.atomic_adds, config)
    }

    pub fn atomic_seconds(&self, atomic_adds: u64, config: &KernelConfig) -> f64 {
        // Ȳ TBs contend for every output segment.
        let contention = config.y_bar as f64;
        let bytes = contention * atomic_adds as f64 * config.nb as f64 * self.atomic_coefficient * self.precision.element_bytes() as f64;
        bytes / (self.profile.sustained_bandwidth() * 1e9)
    }

    pub fn evaluate(&self, config: &KernelConfig, size: usize) -> Result<Evaluation> {
        let counters = self.trace(config, size)?;
        let seconds = self.objective_seconds(&counters, config);
        Ok(Evaluation {
            config: *config,
            size,
            predicted_gflops: if seconds > 0.0 { counters.flops as f64 / seconds / 1e9 } else { 0.0 },
            predicted_seconds: seconds,
            transactions: counters.transactions,
            atomic_adds: counters.atomic_adds,
            flops: counters.flops,
            rounds: dominant_round_model(&counters, &self.profile),
        })
    }

    fn evaluate_all(&self, configs: &[KernelConfig], sizes: &[usize]) -> Result<Vec<Evaluation>> {
        // Independent evaluations; results come back in (config, size) order.
        std::thread::scope(|s| {
            let handles: Vec<_> = configs
                .iter()
                .map(|cfg| s.spawn(move || sizes.iter().map(|&d| self.evaluate(cfg, d)).collect::<Result<Vec<_>>>()))
                .collect();
            let mut out = Vec::with_capacity(configs.len() * sizes.len());
            for h in handles {
                out.extend(h.join().expect("evaluation thread")?);
            }
            Ok(out)
        })
    }

    /// Best `(nb, Q̄)` with `Ȳ = 1`, scored at the largest quarter of `sizes`.
    pub fn coarse_tune(&self, sizes: &[usize]) -> Result<CoarseResult> {
        let sizes = sorted_sizes(sizes)?;
        let mut constraints = self.constraints.clone();
        constraints.y_bar = Some(vec![1]);
        let configs = enumerate_configs(self.precision, &constraints);
        let large = &sizes[sizes.len() - sizes.len().div_ceil(4)..];
        let evaluations = self.evaluate_all(&configs, &sizes)?;
        let best = best_by_mean(&configs, &evaluations, large).ok_or_else(|| {
            Error::InvalidConfig {
                nb: 0,
                q_bar: 0,
                y_bar: 1,
                reason: "no configuration satisfies the constraints".into(),
            }
        })?;
        Ok(CoarseResult { best, evaluations })
    }

    /// Sweeps `Ȳ` at fixed `(nb, Q̄)`.
    pub fn fine_tune(&self, base: KernelConfig, sizes: &[usize]) -> Result<FineResult> {
        let sizes = sorted_sizes(sizes)?;
        let ys = self.constraints.y_bar.clone().unwrap_or_else(|| Y_CANDIDATES.to_vec());
        let configs = ys
            .iter()
            .map(|&y| KernelConfig::new(base.nb, base.q_bar, y))
            .collect::<Result<Vec<_>>>()?;
        let evaluations = self.evaluate_all(&configs, &sizes)?;
        let per_size = sizes
            .iter()
            .map(|&d| {
                let (cfg, g) = configs
                    .iter()
                    .map(|c| (*c, mean_gflops(&evaluations, c, &[d])))
                    .fold(None, |best: Option<(KernelConfig, f64)>, (c, g)| match best {
                        Some((_, bg)) if bg >= g => best,
                        _ => Some((c, g)),
                    })
                    .expect("at least one Ȳ");
                (d, cfg, g)
            })
            .collect();
        let recommendation = best_by_mean(&configs, &evaluations, &sizes).expect("at least one Ȳ");
        Ok(FineResult {
            per_size,
            recommendation,
            evaluations,
        })
    }

    /// Every enumerated configuration at every size.
    pub fn sweep(&self, sizes: &[usize]) -> Result<Vec<Evaluation>> {
        let sizes = sorted_sizes(sizes)?;
        self.evaluate_all(&enumerate_configs(self.precision, &self.constraints), &sizes)
    }
}

fn sorted_sizes(sizes: &[usize]) -> Result<Vec<usize>> {
    let mut s: Vec<usize> = sizes.iter().copied().filter(|&d| d > 0).collect();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Err(Error::InvalidDimension("size grid must contain a positive size".into()));
    }
    Ok(s)
}

fn mean_gflops(evals: &[Evaluation], cfg: &KernelConfig, sizes: &[usize]) -> f64 {
    let picked: Vec<f64> = evals
        .iter()
        .filter(|e| e.config == *cfg && sizes.contains(&e.size))
        .map(|e| e.predicted_gflops)
        .collect();
    picked.iter().sum::<f64>() / picked.len().max(1) as f64
}

/// Highest mean; ties keep the earlier config (smaller nb, Q̄, Ȳ).
fn best_by_mean(configs: &[KernelConfig], evals: &[Evaluation], sizes: &[usize]) -> Option<KernelConfig> {
    let mut best: Option<(KernelConfig, f64)> = None;
    for c in configs {
        let g = mean_gflops(evals, c, sizes);
        if best.is_none_or(|(_, bg)| g > bg) {
            best = Some((*c, g));
        }
    }
    best.map(|(c, _)| c)
}

pub const SWEEP_CSV_VERSION: u32 = 1;
pub const SWEEP_CSV_HEADER: &str = "kernel,precision,nb,q,y,size,predicted_gflops,transactions,tb_r";

/// Short kernel name used in CSV output.
pub fn kernel_label(op: Op) -> &'static str {
    match op {
        Op::GemvN => "gemv",
        Op::GemvT | Op::GemvC => "gemv-t",
        Op::SymvLower | Op::SymvUpper => "symv",
        Op::HemvLower | Op::HemvUpper => "hemv",
    }
}

pub fn sweep_csv(op: Op, precision: Precision, evals: &[Evaluation]) -> String {
    let mut out = String::new();
    writeln!(out, "{SWEEP_CSV_HEADER}").unwrap();
    for e in evals {
        let c = e.config;
        writeln!(
            out,
            "{},{precision},{},{},{},{},{},{},{}",
            kernel_label(op),
            c.nb,
            c.q_bar,
            c.y_bar,
            e.size,
            e.predicted_gflops,
            e.transactions,
            e.tb_r()
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::builtin_k20c_profile;

    #[test]
    fn nb32_q_values() {
        let all = enumerate_configs(Precision::D, &Constraints::default());
        let mut qs: Vec<usize> = all.iter().filter(|c| c.nb == 32 && c.y_bar == 1).map(|c| c.q_bar).collect();
        qs.dedup();
        assert_eq!(qs, vec![1, 2, 4, 8, 16]);
        assert!(all.contains(&KernelConfig::new(32, 2, 1).unwrap()));
        assert!(all.contains(&KernelConfig::new(32, 2, 2).unwrap()));
        assert!(!all.iter().any(|c| c.nb == 32 && c.q_bar == 32));
        assert_eq!(all.len(), (5 + 6 + 7) * 5);
    }

    #[test]
    fn constraints_prune() {
        let c = Constraints {
            max_threads_per_tb: Some(1024),
            ..Default::default()
        };
        let all = enumerate_configs(Precision::S, &c);
        assert!(all.iter().all(|k| k.threads_per_tb() <= 1024));
        assert!(!all.iter().any(|k| k.nb == 128 && k.q_bar == 16));
    }

    #[test]
    fn single_config_space() {
        let t = Tuner::new(Op::GemvN, Precision::D, builtin_k20c_profile()).with_constraints(Constraints {
            nb: Some(vec![64]),
            ..Default::default()
        });
        let only = KernelConfig::new(64, 1, 1).unwrap();
        let t = Tuner {
            constraints: Constraints {
                nb: Some(vec![64]),
                max_threads_per_tb: Some(64),
                ..t.constraints.clone()
            },
            ..t
        };
        assert_eq!(t.coarse_tune(&[512, 1024]).unwrap().best, only);
    }
}
