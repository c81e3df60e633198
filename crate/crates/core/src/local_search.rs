//! 3-opt local search over an array tour, with candidate lists and a
//! don't-look-bit queue.
//!
//! Moves are grown sequentially: break `(t1,t2)`, join `t2` to a candidate
//! `t3`, break `(t3,t4)`, then either close with `(t4,t1)` or join `t4` to a
//! candidate `t5`, break `(t5,t6)` and close with `(t6,t1)`. A candidate is
//! only tried while the partial gain stays positive, which loses no improving
//! move because some rotation of any improving exchange has all partial sums
//! positive. Every closed move is checked against the valid reconnection
//! patterns before it is applied.

use std::collections::VecDeque;

use crate::landscape::Tour;
use crate::tsplib::{CostMatrix, NeighborLists};

/// A tour array together with its inverse and cached length.
#[derive(Debug, Clone, Default)]
pub struct TourPositions {
    perm: Vec<usize>,
    pos: Vec<usize>,
    length: i64,
}

impl TourPositions {
    pub fn from_tour(tour: Tour) -> Self {
        let mut tp = Self::default();
        tp.load(tour);
        tp
    }

    fn load(&mut self, tour: Tour) {
        self.length = tour.length();
        self.perm = tour.into_perm();
        self.pos.resize(self.perm.len(), 0);
        for (i, &c) in self.perm.iter().enumerate() {
            self.pos[c] = i;
        }
    }

    pub fn into_tour(self) -> Tour {
        Tour::from_raw(self.perm, self.length)
    }

    fn take_tour(&mut self) -> Tour {
        Tour::from_raw(std::mem::take(&mut self.perm), self.length)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    #[inline]
    pub fn position(&self, city: usize) -> usize {
        self.pos[city]
    }

    #[inline]
    pub fn city_at(&self, i: usize) -> usize {
        self.perm[i]
    }

    #[inline]
    pub fn succ(&self, city: usize) -> usize {
        let i = self.pos[city] + 1;
        self.perm[if i == self.perm.len() { 0 } else { i }]
    }

    #[inline]
    pub fn pred(&self, city: usize) -> usize {
        let i = self.pos[city];
        self.perm[if i == 0 { self.perm.len() - 1 } else { i - 1 }]
    }

    pub fn length(&self) -> i64 {
        self.length
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    #[inline]
    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.succ(a) == b || self.pred(a) == b
    }

    /// Reverses the cyclic stretch of positions `i..=j` (walking forward from
    /// `i`). The shorter of the stretch and its complement is physically
    /// reversed; both give the same cycle.
    pub fn reverse(&mut self, i: usize, j: usize, d: &CostMatrix) {
        let n = self.n();
        let len = (j + n - i) % n + 1;
        if len >= n - 1 {
            // same cycle traversed the other way, length unchanged
            self.reverse_raw(i, j, len);
            return;
        }
        let before = self.perm[(i + n - 1) % n];
        let first = self.perm[i];
        let last = self.perm[j];
        let after = self.perm[(j + 1) % n];
        self.length +=
            d.get(before, last) + d.get(first, after) - d.get(before, first) - d.get(last, after);
        if 2 * len <= n {
            self.reverse_raw(i, j, len);
        } else {
            self.reverse_raw((j + 1) % n, (i + n - 1) % n, n - len);
        }
    }

    fn reverse_raw(&mut self, mut i: usize, mut j: usize, len: usize) {
        let n = self.n();
        for _ in 0..len / 2 {
            let (a, b) = (self.perm[i], self.perm[j]);
            self.perm[i] = b;
            self.perm[j] = a;
            self.pos[b] = i;
            self.pos[a] = j;
            i = if i + 1 == n { 0 } else { i + 1 };
            j = if j == 0 { n - 1 } else { j - 1 };
        }
    }

    /// Replaces edges `(t1,t2)`, `(t3,t4)` with `(t1,t3)`, `(t2,t4)`. Needs
    /// `t2`, `t4` to follow `t1`, `t3` in the same direction.
    fn make_2opt(&mut self, t1: usize, t2: usize, t3: usize, t4: usize, d: &CostMatrix) {
        if self.succ(t1) == t2 {
            debug_assert_eq!(self.succ(t3), t4);
            self.reverse(self.pos[t2], self.pos[t3], d);
        } else {
            debug_assert!(self.pred(t1) == t2 && self.pred(t3) == t4);
            self.reverse(self.pos[t3], self.pos[t2], d);
        }
    }
}

/// Reverses the tour between positions `i` and `j` (inclusive, cyclic).
pub fn apply_segment_reversal(tour: Tour, i: usize, j: usize, d: &CostMatrix) -> Tour {
    let mut tp = TourPositions::from_tour(tour);
    tp.reverse(i, j, d);
    tp.into_tour()
}

/// FIFO of cities whose bit is off, i.e. still worth trying as anchors.
#[derive(Debug, Clone, Default)]
pub struct DontLookBits {
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

impl DontLookBits {
    pub fn reset(&mut self, order: &[usize]) {
        self.queue.clear();
        self.queued.clear();
        self.queued.resize(order.len(), true);
        self.queue.extend(order.iter().copied());
    }

    /// Clears the bit of `city` so it is tried again.
    pub fn wake(&mut self, city: usize) {
        if !self.queued[city] {
            self.queued[city] = true;
            self.queue.push_back(city);
        }
    }

    pub fn pop(&mut self) -> Option<usize> {
        let c = self.queue.pop_front()?;
        self.queued[c] = false;
        Some(c)
    }

    pub fn is_set(&self, city: usize) -> bool {
        !self.queued[city]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reconnect {
    /// a1-b1, a2-c1, b2-c2
    BothReversed,
    /// a1-b2, c1-a2, b1-c2
    Swap,
    /// a1-b2, c1-b1, a2-c2
    SwapFirstReversed,
    /// a1-c1, b2-a2, b1-c2
    SwapSecondReversed,
}

#[inline]
fn edge(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn sorted3(mut e: [(usize, usize); 3]) -> [(usize, usize); 3] {
    e.sort_unstable();
    e
}

/// Reusable 3-opt engine; buffers are kept between calls.
#[derive(Debug, Clone)]
pub struct ThreeOpt {
    tp: TourPositions,
    dlb: DontLookBits,
    touched: [usize; 6],
    /// After the queue drains, rescan every city until a full pass finds
    /// nothing, so the result is a true local optimum.
    pub confirm: bool,
}

impl Default for ThreeOpt {
    fn default() -> Self {
        Self::new(0)
    }
}

impl ThreeOpt {
    pub fn new(n: usize) -> Self {
        Self {
            tp: TourPositions {
                perm: Vec::with_capacity(n),
                pos: Vec::with_capacity(n),
                length: 0,
            },
            dlb: DontLookBits::default(),
            touched: [0; 6],
            confirm: true,
        }
    }

    pub fn improve(&mut self, tour: Tour, d: &CostMatrix, nl: &NeighborLists) -> Tour {
        if tour.n() < 4 {
            return tour;
        }
        self.tp.load(tour);
        loop {
            let order = self.tp.perm.clone();
            self.dlb.reset(&order);
            let mut moved = false;
            while let Some(t1) = self.dlb.pop() {
                if self.improve_from(t1, d, nl) {
                    moved = true;
                    for k in 0..6 {
                        self.dlb.wake(self.touched[k]);
                    }
                }
            }
            if !moved || !self.confirm {
                break;
            }
        }
        debug_assert_eq!(
            crate::landscape::closed_length(&self.tp.perm, d),
            self.tp.length
        );
        self.tp.take_tour()
    }

    fn improve_from(&mut self, t1: usize, d: &CostMatrix, nl: &NeighborLists) -> bool {
        for succ_dir in [true, false] {
            let tp = &self.tp;
            let t2 = if succ_dir { tp.succ(t1) } else { tp.pred(t1) };
            let g0 = d.get(t1, t2);
            for &t3 in nl.of(t2) {
                let g1 = g0 - d.get(t2, t3);
                if g1 <= 0 {
                    break;
                }
                if t3 == t1 || tp.adjacent(t2, t3) {
                    continue;
                }
                for t4 in [tp.succ(t3), tp.pred(t3)] {
                    if t4 == t1 || t4 == t2 {
                        continue;
                    }
                    let g2 = g1 + d.get(t3, t4);
                    if !tp.adjacent(t4, t1)
                        && g2 - d.get(t4, t1) > 0
                        && self.closes_2opt(t1, t2, t3, t4)
                    {
                        self.tp.make_2opt(t1, t2, t4, t3, d);
                        self.touched = [t1, t2, t3, t4, t1, t2];
                        return true;
                    }
                    for &t5 in nl.of(t4) {
                        let g3 = g2 - d.get(t4, t5);
                        if g3 <= 0 {
                            break;
                        }
                        if t5 == t3 || tp.adjacent(t4, t5) {
                            continue;
                        }
                        for t6 in [tp.succ(t5), tp.pred(t5)] {
                            if t6 == t1 || tp.adjacent(t6, t1) {
                                continue;
                            }
                            let gain = g3 + d.get(t5, t6) - d.get(t6, t1);
                            if gain <= 0 {
                                continue;
                            }
                            let removed = [(t1, t2), (t3, t4), (t5, t6)];
                            let added = sorted3([edge(t2, t3), edge(t4, t5), edge(t6, t1)]);
                            if let Some(plan) = self.classify3(removed, added) {
                                let before = self.tp.length;
                                self.apply3(plan, d);
                                debug_assert_eq!(before - self.tp.length, gain);
                                self.touched = [t1, t2, t3, t4, t5, t6];
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// The 2-exchange dropping `(t1,t2)`, `(t3,t4)` and adding `(t2,t3)`,
    /// `(t4,t1)` yields one cycle iff `t4` lies on the opposite side of `t3`
    /// from the side `t2` lies on of `t1`.
    fn closes_2opt(&self, t1: usize, t2: usize, t3: usize, t4: usize) -> bool {
        let tp = &self.tp;
        (tp.succ(t1) == t2 && tp.pred(t3) == t4) || (tp.pred(t1) == t2 && tp.succ(t3) == t4)
    }

    fn classify3(&self, removed: [(usize, usize); 3], added: [(usize, usize); 3]) -> Option<Plan> {
        let tp = &self.tp;
        let n = tp.n();
        let mut p = [0usize; 3];
        for (k, &(x, y)) in removed.iter().enumerate() {
            p[k] = if tp.succ(x) == y {
                tp.pos[x]
            } else {
                tp.pos[y]
            };
        }
        p.sort_unstable();
        if p[0] == p[1] || p[1] == p[2] {
            return None;
        }
        let at = |i: usize| tp.perm[i % n];
        let (a1, a2) = (at(p[0]), at(p[0] + 1));
        let (b1, b2) = (at(p[1]), at(p[1] + 1));
        let (c1, c2) = (at(p[2]), at(p[2] + 1));
        let kinds = [
            (
                Reconnect::BothReversed,
                [edge(a1, b1), edge(a2, c1), edge(b2, c2)],
            ),
            (Reconnect::Swap, [edge(a1, b2), edge(c1, a2), edge(b1, c2)]),
            (
                Reconnect::SwapFirstReversed,
                [edge(a1, b2), edge(c1, b1), edge(a2, c2)],
            ),
            (
                Reconnect::SwapSecondReversed,
                [edge(a1, c1), edge(b2, a2), edge(b1, c2)],
            ),
        ];
        kinds
            .into_iter()
            .find(|(_, e)| sorted3(*e) == added)
            .map(|(kind, _)| Plan {
                kind,
                ends: [a1, a2, b1, b2, c1, c2],
            })
    }

    fn apply3(&mut self, plan: Plan, d: &CostMatrix) {
        let [a1, a2, b1, b2, c1, c2] = plan.ends;
        let tp = &mut self.tp;
        match plan.kind {
            Reconnect::BothReversed => {
                tp.make_2opt(a1, a2, b1, b2, d);
                tp.make_2opt(a2, b2, c1, c2, d);
            }
            Reconnect::Swap => {
                tp.make_2opt(a1, a2, c1, c2, d);
                tp.make_2opt(a1, c1, b2, b1, d);
                tp.make_2opt(c1, b1, a2, c2, d);
            }
            Reconnect::SwapFirstReversed => {
                tp.make_2opt(a1, a2, c1, c2, d);
                tp.make_2opt(a1, c1, b2, b1, d);
            }
            Reconnect::SwapSecondReversed => {
                tp.make_2opt(a1, a2, c1, c2, d);
                tp.make_2opt(b2, b1, a2, c2, d);
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    kind: Reconnect,
    ends: [usize; 6],
}

/// One-shot 3-opt; see [`ThreeOpt`] for the reusable form.
pub fn three_opt_improve(tour: Tour, d: &CostMatrix, nl: &NeighborLists) -> Tour {
    ThreeOpt::new(tour.n()).improve(tour, d, nl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::tests::random_matrix;
    use crate::landscape::{brute_force_optimal, tour_length};
    use crate::tsplib::build_neighbor_lists;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edge_set(perm: &[usize]) -> Vec<(usize, usize)> {
        let n = perm.len();
        let mut e: Vec<_> = (0..n).map(|i| edge(perm[i], perm[(i + 1) % n])).collect();
        e.sort_unstable();
        e
    }

    /// Every 2-opt and pure 3-opt reconnection of `perm`, as edge sets.
    fn all_neighbors(perm: &[usize]) -> Vec<Vec<(usize, usize)>> {
        let n = perm.len();
        let mut out = Vec::new();
        let at = |i: usize| perm[i % n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a1, a2, b1, b2) = (at(i), at(i + 1), at(j), at(j + 1));
                let mut e = edge_set(perm);
                e.retain(|&x| x != edge(a1, a2) && x != edge(b1, b2));
                e.extend([edge(a1, b1), edge(a2, b2)]);
                out.push(e);
                for k in (j + 1)..n {
                    let (c1, c2) = (at(k), at(k + 1));
                    let base: Vec<_> = edge_set(perm)
                        .into_iter()
                        .filter(|&x| x != edge(a1, a2) && x != edge(b1, b2) && x != edge(c1, c2))
                        .collect();
                    for add in [
                        [edge(a1, b1), edge(a2, c1), edge(b2, c2)],
                        [edge(a1, b2), edge(c1, a2), edge(b1, c2)],
                        [edge(a1, b2), edge(c1, b1), edge(a2, c2)],
                        [edge(a1, c1), edge(b2, a2), edge(b1, c2)],
                    ] {
                        let mut e = base.clone();
                        e.extend(add);
                        out.push(e);
                    }
                }
            }
        }
        out
    }

    fn set_length(e: &[(usize, usize)], d: &CostMatrix) -> i64 {
        e.iter().map(|&(a, b)| d.get(a, b)).sum()
    }

    fn is_hamiltonian(e: &[(usize, usize)], n: usize) -> bool {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in e {
            if a == b {
                return false;
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        if adj.iter().any(|v| v.len() != 2) {
            return false;
        }
        let (mut prev, mut cur, mut steps) = (usize::MAX, 0, 0);
        loop {
            let next = if adj[cur][0] != prev {
                adj[cur][0]
            } else {
                adj[cur][1]
            };
            prev = cur;
            cur = next;
            steps += 1;
            if cur == 0 {
                return steps == n;
            }
        }
    }

    #[test]
    fn reversal_basics() {
        let d = random_matrix(12, 1);
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let t = Tour::random(&d, &mut r);
        assert_eq!(apply_segment_reversal(t.clone(), 4, 4, &d), t);
        for (i, j) in [(2, 7), (9, 3), (0, 11), (5, 4), (1, 11), (11, 0)] {
            let once = apply_segment_reversal(t.clone(), i, j, &d);
            assert_eq!(
                tour_length(once.perm(), &d).unwrap(),
                once.length(),
                "({i},{j})"
            );
            let twice = apply_segment_reversal(once, i, j, &d);
            assert!(twice.same_cycle(&t));
            assert_eq!(twice.length(), t.length());
        }
    }

    #[test]
    fn reversal_matches_naive_reversal() {
        let d = random_matrix(9, 2);
        let t = Tour::random(&d, &mut ChaCha8Rng::seed_from_u64(2));
        let n = 9;
        for i in 0..n {
            for j in 0..n {
                let got = apply_segment_reversal(t.clone(), i, j, &d);
                let mut naive = t.perm().to_vec();
                let len = (j + n - i) % n + 1;
                let idx: Vec<usize> = (0..len).map(|s| (i + s) % n).collect();
                let vals: Vec<usize> = idx.iter().map(|&p| naive[p]).collect();
                for (s, &p) in idx.iter().enumerate() {
                    naive[p] = vals[len - 1 - s];
                }
                assert_eq!(edge_set(got.perm()), edge_set(&naive), "({i},{j})");
            }
        }
    }

    #[test]
    fn recipes_produce_their_reconnection() {
        for n in 6..10 {
            let d = random_matrix(n, n as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..3 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let base = Tour::new(perm.clone(), &d).unwrap();
                for i in 0..n {
                    for j in (i + 1)..n {
                        for k in (j + 1)..n {
                            let at = |p: usize| perm[p % n];
                            let (a1, a2, b1, b2, c1, c2) =
                                (at(i), at(i + 1), at(j), at(j + 1), at(k), at(k + 1));
                            for kind in [
                                Reconnect::BothReversed,
                                Reconnect::Swap,
                                Reconnect::SwapFirstReversed,
                                Reconnect::SwapSecondReversed,
                            ] {
                                let add = match kind {
                                    Reconnect::BothReversed => {
                                        [edge(a1, b1), edge(a2, c1), edge(b2, c2)]
                                    }
                                    Reconnect::Swap => [edge(a1, b2), edge(c1, a2), edge(b1, c2)],
                                    Reconnect::SwapFirstReversed => {
                                        [edge(a1, b2), edge(c1, b1), edge(a2, c2)]
                                    }
                                    Reconnect::SwapSecondReversed => {
                                        [edge(a1, c1), edge(b2, a2), edge(b1, c2)]
                                    }
                                };
                                let mut want: Vec<_> = edge_set(&perm)
                                    .into_iter()
                                    .filter(|&x| {
                                        x != edge(a1, a2) && x != edge(b1, b2) && x != edge(c1, c2)
                                    })
                                    .collect();
                                want.extend(add);
                                want.sort_unstable();
                                // recipes are only used when no added edge is already a tour edge
                                if want.windows(2).any(|w| w[0] == w[1]) {
                                    continue;
                                }
                                let mut ls = ThreeOpt::new(n);
                                ls.tp.load(base.clone());
                                ls.apply3(
                                    Plan {
                                        kind,
                                        ends: [a1, a2, b1, b2, c1, c2],
                                    },
                                    &d,
                                );
                                assert_eq!(
                                    edge_set(&ls.tp.perm),
                                    want,
                                    "n={n} {kind:?} ({i},{j},{k})"
                                );
                                assert_eq!(ls.tp.length, set_length(&want, &d));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn neighbor_enumeration_yields_cycles() {
        let perm: Vec<usize> = (0..8).collect();
        for e in all_neighbors(&perm) {
            assert!(is_hamiltonian(&e, 8));
        }
    }

    #[test]
    fn result_is_three_opt_optimal_with_full_lists() {
        for seed in 0..40u64 {
            let n = 5 + (seed as usize % 10);
            let d = random_matrix(n, seed);
            let nl = build_neighbor_lists(&d, n - 1);
            let start = Tour::random(&d, &mut ChaCha8Rng::seed_from_u64(seed));
            let out = three_opt_improve(start.clone(), &d, &nl);
            assert!(out.length() <= start.length());
            assert_eq!(tour_length(out.perm(), &d).unwrap(), out.length());
            for e in all_neighbors(out.perm()) {
                if is_hamiltonian(&e, n) {
                    assert!(
                        set_length(&e, &d) >= out.length(),
                        "seed {seed}: improving neighbor left"
                    );
                }
            }
        }
    }

    #[test]
    fn optimal_input_is_unchanged() {
        let d = random_matrix(9, 5);
        let nl = build_neighbor_lists(&d, 20);
        let opt = brute_force_optimal(&d).unwrap();
        let out = three_opt_improve(opt.clone(), &d, &nl);
        assert!(out.same_cycle(&opt));
    }

    #[test]
    fn restarts_find_small_optima() {
        for seed in 0..10u64 {
            let n = 5 + (seed as usize % 5);
            let d = random_matrix(n, 100 + seed);
            let nl = build_neighbor_lists(&d, 20);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ls = ThreeOpt::new(n);
            let best = (0..50)
                .map(|_| ls.improve(Tour::random(&d, &mut rng), &d, &nl).length())
                .min()
                .unwrap();
            assert_eq!(best, brute_force_optimal(&d).unwrap().length());
        }
    }

    #[test]
    fn random_tours_on_200_cities_improve() {
        let d = random_matrix(200, 7);
        let nl = build_neighbor_lists(&d, 20);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ls = ThreeOpt::new(200);
        for _ in 0..10 {
            let t = Tour::random(&d, &mut rng);
            let before = t.length();
            let out = ls.improve(t, &d, &nl);
            assert!(out.length() < before);
            assert_eq!(tour_length(out.perm(), &d).unwrap(), out.length());
        }
    }

    #[test]
    fn dont_look_bits_queue() {
        let mut dlb = DontLookBits::default();
        dlb.reset(&[2, 0, 1]);
        assert_eq!(dlb.pop(), Some(2));
        assert!(dlb.is_set(2));
        dlb.wake(2);
        dlb.wake(0);
        assert!(!dlb.is_set(2));
        assert_eq!(
            [dlb.pop(), dlb.pop(), dlb.pop(), dlb.pop()],
            [Some(0), Some(1), Some(2), None]
        );
    }

    proptest! {
        #[test]
        fn monotone_consistent_idempotent(seed in any::<u64>(), n in 4usize..80, k in 2usize..12) {
            let d = random_matrix(n, seed);
            let nl = build_neighbor_lists(&d, k);
            let t = Tour::random(&d, &mut ChaCha8Rng::seed_from_u64(seed));
            let before = t.length();
            let once = three_opt_improve(t, &d, &nl);
            prop_assert!(once.length() <= before);
            prop_assert_eq!(tour_length(once.perm(), &d).unwrap(), once.length());
            let twice = three_opt_improve(once.clone(), &d, &nl);
            prop_assert_eq!(twice.length(), once.length());
        }
    }
}
