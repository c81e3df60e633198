//! Tours, their evaluation, and best-so-far bookkeeping.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::tsplib::{
    build_cost_matrix, build_neighbor_lists, CostMatrix, NeighborLists, TspInstance,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LandscapeError {
    #[error("sequence of length {len} is not a permutation of {n} cities")]
    NotAPermutation { len: usize, n: usize },
    #[error("brute force supports at most {max} cities, got {n}")]
    TooLarge { n: usize, max: usize },
}

/// A closed Hamiltonian cycle with its cached length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    perm: Vec<usize>,
    length: i64,
}

impl Tour {
    pub fn new(perm: Vec<usize>, d: &CostMatrix) -> Result<Self, LandscapeError> {
        let length = tour_length(&perm, d)?;
        Ok(Self { perm, length })
    }

    /// Trusts the caller for both the permutation and the length.
    pub(crate) fn from_raw(perm: Vec<usize>, length: i64) -> Self {
        debug_assert!(is_permutation(&perm, perm.len()));
        Self { perm, length }
    }

    pub fn random<R: Rng + ?Sized>(d: &CostMatrix, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..d.n()).collect();
        perm.shuffle(rng);
        let length = closed_length(&perm, d);
        Self { perm, length }
    }

    /// Greedy nearest-neighbor tour from `start`.
    pub fn nearest_neighbor(d: &CostMatrix, start: usize) -> Self {
        let n = d.n();
        let mut visited = vec![false; n];
        let mut perm = Vec::with_capacity(n);
        let mut cur = start;
        visited[cur] = true;
        perm.push(cur);
        for _ in 1..n {
            let row = d.row(cur);
            let next = (0..n)
                .filter(|&j| !visited[j])
                .min_by_key(|&j| (row[j], j))
                .expect("an unvisited city remains");
            visited[next] = true;
            perm.push(next);
            cur = next;
        }
        let length = closed_length(&perm, d);
        Self { perm, length }
    }

    #[inline]
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    #[inline]
    pub fn length(&self) -> i64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn into_perm(self) -> Vec<usize> {
        self.perm
    }

    /// Undirected edges, each as `(min, max)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.perm.len();
        (0..n).map(move |i| {
            let a = self.perm[i];
            let b = self.perm[(i + 1) % n];
            (a.min(b), a.max(b))
        })
    }

    /// True when both tours describe the same cycle, ignoring rotation and direction.
    pub fn same_cycle(&self, other: &Tour) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let mut a: Vec<_> = self.edges().collect();
        let mut b: Vec<_> = other.edges().collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    perm.iter()
        .all(|&c| c < n && !std::mem::replace(&mut seen[c], true))
}

pub(crate) fn closed_length(perm: &[usize], d: &CostMatrix) -> i64 {
    let n = perm.len();
    let mut total = d.get(perm[n - 1], perm[0]);
    for w in perm.windows(2) {
        total += d.get(w[0], w[1]);
    }
    total
}

pub fn tour_length(perm: &[usize], d: &CostMatrix) -> Result<i64, LandscapeError> {
    if !is_permutation(perm, d.n()) {
        return Err(LandscapeError::NotAPermutation {
            len: perm.len(),
            n: d.n(),
        });
    }
    Ok(closed_length(perm, d))
}

#[inline]
pub fn quality_better(a: &Tour, b: &Tour) -> bool {
    a.length < b.length
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestSoFar {
    pub tour: Tour,
    pub found_at_cycle: usize,
}

impl BestSoFar {
    pub fn new(tour: Tour, cycle: usize) -> Self {
        Self {
            tour,
            found_at_cycle: cycle,
        }
    }

    /// Replaces the incumbent iff `candidate` is strictly shorter.
    pub fn offer(&mut self, candidate: &Tour, cycle: usize) -> bool {
        if quality_better(candidate, &self.tour) {
            self.tour = candidate.clone();
            self.found_at_cycle = cycle;
            true
        } else {
            false
        }
    }

    pub fn length(&self) -> i64 {
        self.tour.length
    }
}

pub fn update_best_so_far(mut gb: BestSoFar, candidate: &Tour, cycle: usize) -> BestSoFar {
    gb.offer(candidate, cycle);
    gb
}

pub const BRUTE_FORCE_MAX: usize = 11;

/// Exact optimum by enumerating every distinct cycle (city 0 fixed first,
/// one direction only). Partial paths already longer than the incumbent are cut.
pub fn brute_force_optimal(d: &CostMatrix) -> Result<Tour, LandscapeError> {
    let n = d.n();
    if n > BRUTE_FORCE_MAX {
        return Err(LandscapeError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    struct Search<'a> {
        d: &'a CostMatrix,
        path: Vec<usize>,
        used: Vec<bool>,
        best: Vec<usize>,
        best_len: i64,
    }
    impl Search<'_> {
        fn go(&mut self, len: i64) {
            let n = self.d.n();
            if len >= self.best_len {
                return;
            }
            let depth = self.path.len();
            let last = self.path[depth - 1];
            if depth == n {
                // each undirected cycle once: second city below the last
                if self.path[1] > last {
                    return;
                }
                let total = len + self.d.get(last, self.path[0]);
                if total < self.best_len {
                    self.best_len = total;
                    self.best.clone_from(&self.path);
                }
                return;
            }
            for c in 1..n {
                if self.used[c] {
                    continue;
                }
                self.used[c] = true;
                self.path.push(c);
                self.go(len + self.d.get(last, c));
                self.path.pop();
                self.used[c] = false;
            }
        }
    }
    let mut s = Search {
        d,
        path: vec![0],
        used: vec![false; n],
        best: (0..n).collect(),
        best_len: i64::MAX,
    };
    s.used[0] = true;
    s.go(0);
    Ok(Tour::from_raw(s.best, s.best_len))
}

/// The problem a run searches: distances plus candidate lists.
#[derive(Debug, Clone)]
pub struct Landscape {
    pub name: String,
    pub d: CostMatrix,
    pub nl: NeighborLists,
}

impl Landscape {
    pub fn new(name: impl Into<String>, d: CostMatrix, k: usize) -> Self {
        let nl = build_neighbor_lists(&d, k);
        Self {
            name: name.into(),
            d,
            nl,
        }
    }

    pub fn from_instance(inst: &TspInstance, k: usize) -> Self {
        Self::new(inst.name.clone(), build_cost_matrix(inst), k)
    }

    pub fn n(&self) -> usize {
        self.d.n()
    }
}
