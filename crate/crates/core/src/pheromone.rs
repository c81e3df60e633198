//! The pheromone matrix, MAX-MIN trail limits and the deposit schedule.

use thiserror::Error;

use crate::landscape::Tour;

#[derive(Debug, Error, PartialEq)]
pub enum PheromoneError {
    #[error("best-so-far length must be positive, got {0}")]
    NonPositiveLength(i64),
    #[error("rho must lie in [0, 1), got {0}")]
    InvalidRho(f64),
    #[error("p_best must lie in (0, 1], got {0}")]
    InvalidPBest(f64),
    #[error("trail limits need more than 2 cities, got {0}")]
    TooFewCities(usize),
    #[error("no tour to deposit")]
    NoDeposit,
    #[error("tour has {got} cities but the matrix has {n}")]
    SizeMismatch { got: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PheromoneParams {
    /// Trail persistence: the fraction of pheromone that survives a cycle.
    pub rho: f64,
    pub p_best: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for PheromoneParams {
    fn default() -> Self {
        Self {
            rho: 0.5,
            p_best: 0.05,
            alpha: 1.0,
            beta: 2.0,
        }
    }
}

impl PheromoneParams {
    pub fn validate(&self) -> Result<(), PheromoneError> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(PheromoneError::InvalidRho(self.rho));
        }
        if !(self.p_best > 0.0 && self.p_best <= 1.0) {
            return Err(PheromoneError::InvalidPBest(self.p_best));
        }
        Ok(())
    }
}

pub fn compute_tau_max(f_gb: i64, rho: f64) -> Result<f64, PheromoneError> {
    if f_gb <= 0 {
        return Err(PheromoneError::NonPositiveLength(f_gb));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(PheromoneError::InvalidRho(rho));
    }
    Ok(1.0 / ((1.0 - rho) * f_gb as f64))
}

/// Lower trail limit. `n` is the instance dimension, so the denominator is
/// the average number of choices `n/2 - 1`.
pub fn compute_tau_min(tau_max: f64, p_best: f64, n: usize) -> Result<f64, PheromoneError> {
    if n <= 2 {
        return Err(PheromoneError::TooFewCities(n));
    }
    if !(p_best > 0.0 && p_best <= 1.0) {
        return Err(PheromoneError::InvalidPBest(p_best));
    }
    let nf = n as f64;
    let raw = tau_max * (p_best.powf(-1.0 / nf) - 1.0) / (nf / 2.0 - 1.0);
    Ok(raw.clamp(0.0, tau_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepositMode {
    /// One schedule-selected tour deposits and trails are clamped.
    #[default]
    MaxMin,
    /// Every collected tour deposits; no limits.
    AntSystem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
    tau_min: f64,
    tau_max: f64,
}

impl PheromoneMatrix {
    pub fn uniform(n: usize, value: f64) -> Self {
        let mut tau = vec![value; n * n];
        for i in 0..n {
            tau[i * n + i] = 0.0;
        }
        Self {
            n,
            tau,
            tau_min: 0.0,
            tau_max: value,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.tau[i * self.n + j] = v;
        self.tau[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.tau[i * self.n..(i + 1) * self.n]
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn set_bounds(&mut self, tau_min: f64, tau_max: f64) {
        self.tau_min = tau_min;
        self.tau_max = tau_max;
    }

    pub fn evaporate(&mut self, rho: f64) {
        for v in &mut self.tau {
            *v *= rho;
        }
    }

    pub fn deposit(&mut self, tour: &Tour) -> Result<(), PheromoneError> {
        if tour.n() != self.n {
            return Err(PheromoneError::SizeMismatch {
                got: tour.n(),
                n: self.n,
            });
        }
        let amount = 1.0 / tour.length() as f64;
        let n = self.n;
        let p = tour.perm();
        for k in 0..n {
            let (a, b) = (p[k], p[(k + 1) % n]);
            self.tau[a * n + b] += amount;
            self.tau[b * n + a] += amount;
        }
        Ok(())
    }

    /// Clamps every off-diagonal entry into the current limits.
    pub fn clamp(&mut self) {
        let (lo, hi) = (self.tau_min, self.tau_max);
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = &mut self.tau[i * n + j];
                    *v = v.clamp(lo, hi);
                }
            }
        }
    }
}

/// Every off-diagonal trail set to the upper limit derived from `f_seed`.
pub fn init_pheromone(
    n: usize,
    params: &PheromoneParams,
    f_seed: i64,
) -> Result<PheromoneMatrix, PheromoneError> {
    let tau_max = compute_tau_max(f_seed, params.rho)?;
    let tau_min = compute_tau_min(tau_max, params.p_best, n)?;
    let mut psi = PheromoneMatrix::uniform(n, tau_max);
    psi.set_bounds(tau_min, tau_max);
    Ok(psi)
}

/// Evaporates, deposits `1/f` on each deposit tour's edges, then (MAX-MIN
/// mode) refreshes the limits from `f_gb` and clamps.
pub fn update_pheromone(
    psi: &mut PheromoneMatrix,
    deposits: &[&Tour],
    params: &PheromoneParams,
    f_gb: i64,
    mode: DepositMode,
) -> Result<(), PheromoneError> {
    if deposits.is_empty() && mode == DepositMode::MaxMin {
        return Err(PheromoneError::NoDeposit);
    }
    psi.evaporate(params.rho);
    for t in deposits {
        psi.deposit(t)?;
    }
    if mode == DepositMode::MaxMin {
        let tau_max = compute_tau_max(f_gb, params.rho)?;
        let tau_min = compute_tau_min(tau_max, params.p_best, psi.n())?;
        psi.set_bounds(tau_min, tau_max);
        psi.clamp();
    }
    Ok(())
}

/// Alternation between iteration-best and best-so-far deposits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepositSchedule {
    /// `(last cycle of phase, interval)`; the final phase is open ended.
    phases: Vec<(usize, usize)>,
    tail_interval: usize,
}

impl Default for DepositSchedule {
    fn default() -> Self {
        Self {
            phases: vec![(25, 25), (75, 5), (125, 3), (250, 2)],
            tail_interval: 1,
        }
    }
}

impl DepositSchedule {
    pub fn new(phases: Vec<(usize, usize)>, tail_interval: usize) -> Self {
        assert!(tail_interval > 0 && phases.iter().all(|&(_, k)| k > 0));
        Self {
            phases,
            tail_interval,
        }
    }

    /// Best-so-far on every cycle.
    pub fn always_global() -> Self {
        Self::new(Vec::new(), 1)
    }

    pub fn interval(&self, t: usize) -> usize {
        self.phases
            .iter()
            .find(|&&(end, _)| t <= end)
            .map_or(self.tail_interval, |&(_, k)| k)
    }

    pub fn uses_global_best(&self, t: usize) -> bool {
        t % self.interval(t) == 0
    }
}

pub fn select_deposit_tour<'a>(
    schedule: &DepositSchedule,
    t: usize,
    ib: &'a Tour,
    gb: &'a Tour,
) -> &'a Tour {
    if schedule.uses_global_best(t) {
        gb
    } else {
        ib
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::tests::random_matrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn tau_max_values() {
        assert!(close(compute_tau_max(100, 0.5).unwrap(), 0.02));
        assert!(close(compute_tau_max(100, 0.0).unwrap(), 0.01));
        assert!(close(compute_tau_max(50, 0.5).unwrap(), 0.04));
        assert!(compute_tau_max(0, 0.5).is_err());
        assert!(compute_tau_max(10, 1.0).is_err());
    }

    #[test]
    fn tau_min_values() {
        for n in [3, 4, 10, 100, 1000] {
            assert_eq!(compute_tau_min(0.02, 1.0, n).unwrap(), 0.0);
        }
        // 0.05^(-0.01) - 1 evaluated separately
        let expect = 0.02 * 0.030_410_557_911_252_578 / 49.0;
        assert!(close(compute_tau_min(0.02, 0.05, 100).unwrap(), expect));
        let a = compute_tau_min(0.02, 0.5, 100).unwrap();
        let b = compute_tau_min(0.02, 0.05, 100).unwrap();
        assert!(b > a);
        assert!(compute_tau_min(0.02, 0.05, 2).is_err());
        // tiny instances cap at tau_max
        assert_eq!(compute_tau_min(0.02, 1e-6, 3).unwrap(), 0.02);
    }

    #[test]
    fn init_is_uniform_at_tau_max() {
        let psi = init_pheromone(5, &PheromoneParams::default(), 100).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 0.0 } else { 0.02 };
                assert!(close(psi.get(i, j), want));
            }
        }
        assert!(psi.tau_min() < psi.tau_max());
    }

    #[test]
    fn evaporation_and_deposit_amounts() {
        let d = random_matrix(6, 3);
        let mut psi = PheromoneMatrix::uniform(6, 0.02);
        psi.evaporate(0.5);
        assert!(close(psi.get(0, 1), 0.01));
        let tour = Tour::from_raw((0..6).collect(), 100);
        psi.deposit(&tour).unwrap();
        assert!(close(psi.get(0, 1), 0.02));
        assert!(close(psi.get(5, 0), 0.02));
        assert!(close(psi.get(0, 2), 0.01));
        let _ = d;
    }

    #[test]
    fn max_min_update_clamps() {
        let params = PheromoneParams::default();
        let mut psi = init_pheromone(6, &params, 100).unwrap();
        let tour = Tour::from_raw((0..6).collect(), 100);
        update_pheromone(&mut psi, &[&tour], &params, 100, DepositMode::MaxMin).unwrap();
        // 0.01 + 0.01 = 0.02 = tau_max on tour edges
        assert!(close(psi.get(0, 1), 0.02));
        assert!(psi.get(0, 2) >= psi.tau_min());
        assert_eq!(
            update_pheromone(&mut psi, &[], &params, 100, DepositMode::MaxMin),
            Err(PheromoneError::NoDeposit)
        );
    }

    #[test]
    fn zero_persistence_single_deposit() {
        let params = PheromoneParams {
            rho: 0.0,
            ..Default::default()
        };
        let mut psi = init_pheromone(8, &params, 200).unwrap();
        let tour = Tour::from_raw((0..8).rev().collect(), 150);
        update_pheromone(&mut psi, &[&tour], &params, 150, DepositMode::MaxMin).unwrap();
        let on: Vec<_> = tour.edges().collect();
        for i in 0..8 {
            for j in (i + 1)..8 {
                let want = if on.contains(&(i, j)) {
                    1.0 / 150.0
                } else {
                    psi.tau_min()
                };
                assert!(close(psi.get(i, j), want), "({i},{j})");
            }
        }
    }

    #[test]
    fn ant_system_sums_all_deposits() {
        let params = PheromoneParams::default();
        let mut psi = PheromoneMatrix::uniform(4, 0.0);
        let a = Tour::from_raw(vec![0, 1, 2, 3], 10);
        let b = Tour::from_raw(vec![0, 1, 3, 2], 20);
        update_pheromone(&mut psi, &[&a, &b], &params, 10, DepositMode::AntSystem).unwrap();
        assert!(close(psi.get(0, 1), 0.1 + 0.05));
        assert!(close(psi.get(1, 2), 0.1));
        assert!(close(psi.get(1, 3), 0.05));
        assert!(close(psi.get(0, 2), 0.05));
        assert!(close(psi.get(2, 3), 0.1 + 0.05));
    }

    #[test]
    fn schedule_matches_phase_intervals() {
        let s = DepositSchedule::default();
        let ib = Tour::from_raw(vec![0, 1, 2], 20);
        let gb = Tour::from_raw(vec![2, 1, 0], 10);
        let picks = |t| select_deposit_tour(&s, t, &ib, &gb).length() == 10;
        assert!(!picks(1));
        assert!(picks(25));
        assert!(!picks(26));
        assert!(picks(75));
        assert!(!picks(124));
        assert!(picks(300));
        assert_eq!(
            [1, 25, 26, 75, 76, 125, 126, 250, 251].map(|t| s.interval(t)),
            [25, 25, 5, 5, 3, 3, 2, 2, 1]
        );
    }

    proptest! {
        #[test]
        fn bounds_and_symmetry_hold(seed in any::<u64>(), n in 3usize..20, rho in 0.0..0.99f64, p_best in 0.001..1.0f64) {
            let d = random_matrix(n, seed);
            let params = PheromoneParams { rho, p_best, ..Default::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let first = Tour::random(&d, &mut rng);
            let mut f_gb = first.length();
            let mut psi = init_pheromone(n, &params, f_gb).unwrap();
            for _ in 0..10 {
                let t = Tour::random(&d, &mut rng);
                f_gb = f_gb.min(t.length());
                update_pheromone(&mut psi, &[&t], &params, f_gb, DepositMode::MaxMin).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        prop_assert_eq!(psi.get(i, j), psi.get(j, i));
                        if i != j {
                            prop_assert!(psi.get(i, j) >= psi.tau_min() && psi.get(i, j) <= psi.tau_max());
                        }
                    }
                }
            }
        }
    }
}
