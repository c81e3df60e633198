//! Tour construction: the pheromone-guided selection rule, social-only
//! construction, and mixed construction that inherits part of a parent tour.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::landscape::Tour;
use crate::local_search::ThreeOpt;
use crate::pheromone::{PheromoneMatrix, PheromoneParams};
use crate::tsplib::{CostMatrix, NeighborLists};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("every city has already been visited")]
    NoUnvisitedCity,
    #[error("parent tour has {got} cities, instance has {n}")]
    ParentSize { got: usize, n: usize },
}

/// Keeps `1/d` finite for coincident cities.
const MIN_DISTANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedRuleParams {
    pub p_ind: f64,
    pub sigma_c: f64,
    pub w: f64,
}

impl Default for MixedRuleParams {
    fn default() -> Self {
        Self {
            p_ind: 0.8,
            sigma_c: 0.1,
            w: 0.1,
        }
    }
}

impl MixedRuleParams {
    pub fn with_p_ind(p_ind: f64) -> Self {
        Self {
            p_ind,
            ..Self::default()
        }
    }

    /// The half-width actually used, shrunk so that `p_ind ± w` stays in [0, 1].
    pub fn clipped_w(&self) -> f64 {
        let mut w = self.w;
        if self.p_ind - w <= 0.0 {
            w = self.p_ind;
        }
        if self.p_ind + w >= 1.0 {
            w = 1.0 - self.p_ind;
        }
        w.max(0.0)
    }
}

/// Static heuristic factor `eta^beta` for every edge.
#[derive(Debug, Clone)]
pub struct HeuristicInfo {
    n: usize,
    eta_beta: Vec<f64>,
}

impl HeuristicInfo {
    pub fn new(d: &CostMatrix, beta: f64) -> Self {
        let n = d.n();
        let mut eta_beta = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let eta = 1.0 / (d.get(i, j) as f64).max(MIN_DISTANCE);
                    eta_beta[i * n + j] = eta.powf(beta);
                }
            }
        }
        Self { n, eta_beta }
    }
}

/// Per-edge selection weights `tau^alpha * eta^beta`, rebuilt whenever the
/// pheromone matrix changes.
#[derive(Debug, Clone)]
pub struct SelectionKernel {
    n: usize,
    weights: Vec<f64>,
}

impl SelectionKernel {
    pub fn new(psi: &PheromoneMatrix, d: &CostMatrix, params: &PheromoneParams) -> Self {
        Self::from_heuristic(psi, &HeuristicInfo::new(d, params.beta), params.alpha)
    }

    pub fn from_heuristic(psi: &PheromoneMatrix, eta: &HeuristicInfo, alpha: f64) -> Self {
        let mut k = Self {
            n: eta.n,
            weights: vec![0.0; eta.n * eta.n],
        };
        k.refresh(psi, eta, alpha);
        k
    }

    pub fn refresh(&mut self, psi: &PheromoneMatrix, eta: &HeuristicInfo, alpha: f64) {
        let n = self.n;
        for i in 0..n {
            let tau = psi.row(i);
            let e = &eta.eta_beta[i * n..(i + 1) * n];
            let out = &mut self.weights[i * n..(i + 1) * n];
            if alpha == 1.0 {
                for j in 0..n {
                    out[j] = tau[j] * e[j];
                }
            } else {
                for j in 0..n {
                    out[j] = tau[j].powf(alpha) * e[j];
                }
            }
        }
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Draws the next city among the unvisited members of `current`'s candidate
/// list, or among all unvisited cities when the list is exhausted.
pub fn select_next_city<R: Rng + ?Sized>(
    current: usize,
    visited: &[bool],
    kernel: &SelectionKernel,
    nl: &NeighborLists,
    rng: &mut R,
) -> Result<usize, ConstructionError> {
    let list = nl.of(current);
    let mut stack = [(0usize, 0.0f64); 64];
    let mut heap = Vec::new();
    let buf: &mut [(usize, f64)] = if list.len() <= stack.len() {
        &mut stack
    } else {
        heap.resize(list.len(), (0, 0.0));
        &mut heap
    };
    let mut len = 0;
    let mut total = 0.0;
    for &j in list {
        if !visited[j] {
            let w = kernel.weight(current, j);
            buf[len] = (j, w);
            total += w;
            len += 1;
        }
    }
    if len > 0 {
        return Ok(roulette(&buf[..len], total, rng));
    }

    let mut rest = Vec::new();
    total = 0.0;
    for (j, &seen) in visited.iter().enumerate() {
        if !seen {
            let w = kernel.weight(current, j);
            rest.push((j, w));
            total += w;
        }
    }
    if rest.is_empty() {
        return Err(ConstructionError::NoUnvisitedCity);
    }
    Ok(roulette(&rest, total, rng))
}

fn roulette<R: Rng + ?Sized>(cands: &[(usize, f64)], total: f64, rng: &mut R) -> usize {
    if !(total > 0.0 && total.is_finite()) {
        return cands[rng.random_range(0..cands.len())].0;
    }
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for &(j, w) in cands {
        acc += w;
        if r < acc {
            return j;
        }
    }
    // rounding left r at the very top; take the last positive weight
    cands
        .iter()
        .rev()
        .find(|c| c.1 > 0.0)
        .unwrap_or(&cands[0])
        .0
}

fn complete<R: Rng + ?Sized>(
    mut perm: Vec<usize>,
    mut visited: Vec<bool>,
    mut length: i64,
    kernel: &SelectionKernel,
    d: &CostMatrix,
    nl: &NeighborLists,
    rng: &mut R,
) -> Tour {
    let n = d.n();
    let mut cur = *perm.last().expect("start city placed");
    while perm.len() < n {
        let next = select_next_city(cur, &visited, kernel, nl, rng)
            .expect("cities remain while the tour is incomplete");
        visited[next] = true;
        length += d.get(cur, next);
        perm.push(next);
        cur = next;
    }
    length += d.get(cur, perm[0]);
    Tour::from_raw(perm, length)
}

/// Builds a tour from a uniformly random start city using only the kernel.
pub fn construct_social<R: Rng + ?Sized>(
    kernel: &SelectionKernel,
    d: &CostMatrix,
    nl: &NeighborLists,
    rng: &mut R,
) -> Tour {
    let n = d.n();
    let start = rng.random_range(0..n);
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut perm = Vec::with_capacity(n);
    perm.push(start);
    complete(perm, visited, 0, kernel, d, nl, rng)
}

/// Normal(0, sigma) conditioned on [-w, w].
pub fn sample_truncated_normal<R: Rng + ?Sized>(sigma: f64, w: f64, rng: &mut R) -> f64 {
    if sigma <= 0.0 || w <= 0.0 {
        return 0.0;
    }
    if w >= sigma {
        loop {
            let z: f64 = StandardNormal.sample(rng);
            let x = z * sigma;
            if x.abs() <= w {
                return x;
            }
        }
    }
    // narrow window: uniform proposal keeps acceptance above exp(-1/2)
    loop {
        let x = rng.random_range(-w..=w);
        if rng.random::<f64>() < (-x * x / (2.0 * sigma * sigma)).exp() {
            return x;
        }
    }
}

/// Number of parent cities to inherit for proportion `p_c` on `n` cities.
pub fn inherited_count(p_c: f64, n: usize) -> usize {
    ((p_c * n as f64 + 0.5).floor().max(0.0) as usize).min(n - 1)
}

/// Copies the cities that follow a random start city in `parent` (forward,
/// cyclically) for a sampled share of the tour, then completes it with the
/// selection rule.
pub fn construct_mixed<R: Rng + ?Sized>(
    parent: &Tour,
    kernel: &SelectionKernel,
    d: &CostMatrix,
    nl: &NeighborLists,
    mixed: &MixedRuleParams,
    rng: &mut R,
) -> Result<Tour, ConstructionError> {
    let n = d.n();
    if parent.n() != n {
        return Err(ConstructionError::ParentSize { got: parent.n(), n });
    }
    let start = rng.random_range(0..n);
    let w = mixed.clipped_w();
    let p_c = mixed.p_ind + sample_truncated_normal(mixed.sigma_c, w, rng);
    let copy = inherited_count(p_c, n);

    let pp = parent.perm();
    let l = pp
        .iter()
        .position(|&c| c == start)
        .expect("parent is a permutation");
    let mut visited = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut length = 0;
    visited[start] = true;
    perm.push(start);
    for s in 1..=copy {
        let c = pp[(l + s) % n];
        length += d.get(*perm.last().unwrap(), c);
        visited[c] = true;
        perm.push(c);
    }
    Ok(complete(perm, visited, length, kernel, d, nl, rng))
}

/// Social construction followed by 3-opt.
pub fn construct_social_3opt<R: Rng + ?Sized>(
    kernel: &SelectionKernel,
    d: &CostMatrix,
    nl: &NeighborLists,
    ls: &mut ThreeOpt,
    rng: &mut R,
) -> Tour {
    let t = construct_social(kernel, d, nl, rng);
    ls.improve(t, d, nl)
}

/// Mixed construction followed by 3-opt.
pub fn construct_mixed_3opt<R: Rng + ?Sized>(
    parent: &Tour,
    kernel: &SelectionKernel,
    d: &CostMatrix,
    nl: &NeighborLists,
    mixed: &MixedRuleParams,
    ls: &mut ThreeOpt,
    rng: &mut R,
) -> Result<Tour, ConstructionError> {
    let t = construct_mixed(parent, kernel, d, nl, mixed, rng)?;
    Ok(ls.improve(t, d, nl))
}
