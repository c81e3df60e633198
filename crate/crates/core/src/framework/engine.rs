use std::collections::BTreeMap;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::spec::{validate, Algorithm, Esh, MemoryId, SpecMp};
use super::toolbox::{GenRule, InitRule, Rule, Toolbox, UpdateRule};
use super::{CgoError, Chunk, ConfigError};
use crate::construction::{
    construct_mixed, construct_social, HeuristicInfo, MixedRuleParams, SelectionKernel,
};
use crate::landscape::{BestSoFar, Landscape, Tour};
use crate::local_search::ThreeOpt;
use crate::metrics::{population_diversity, CycleRecord, RunTrace};
use crate::pheromone::{
    init_pheromone, select_deposit_tour, update_pheromone, DepositMode, DepositSchedule,
    PheromoneParams,
};

/// Which best-so-far tour the deposit schedule sees at cycle `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GbTiming {
    /// Includes the tours generated during cycle `t`.
    #[default]
    WithinCycle,
    /// As it stood when cycle `t` began.
    PreviousCycle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgoConfig {
    pub agents: usize,
    pub cycles: usize,
    pub pheromone: PheromoneParams,
    pub mixed: MixedRuleParams,
    pub schedule: DepositSchedule,
    pub deposit_mode: DepositMode,
    pub gb_timing: GbTiming,
    /// Generate agents' tours on the rayon pool. Results do not depend on it.
    pub parallel_agents: bool,
    pub seed: u64,
}

impl Default for CgoConfig {
    fn default() -> Self {
        Self {
            agents: 10,
            cycles: 500,
            pheromone: PheromoneParams::default(),
            mixed: MixedRuleParams::default(),
            schedule: DepositSchedule::default(),
            deposit_mode: DepositMode::MaxMin,
            gb_timing: GbTiming::WithinCycle,
            parallel_agents: false,
            seed: 1,
        }
    }
}

impl CgoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::InvalidParameter(m));
        if self.agents == 0 {
            return bad("at least one agent is required".into());
        }
        if self.cycles == 0 {
            return bad("at least one cycle is required".into());
        }
        if let Err(e) = self.pheromone.validate() {
            return bad(e.to_string());
        }
        let m = &self.mixed;
        if !(0.0..=1.0).contains(&m.p_ind) {
            return bad(format!("p_ind must lie in [0, 1], got {}", m.p_ind));
        }
        if m.sigma_c.is_nan() || m.sigma_c < 0.0 {
            return bad(format!("sigma_c must be non-negative, got {}", m.sigma_c));
        }
        if !(0.0..=1.0).contains(&m.w) {
            return bad(format!("w must lie in [0, 1], got {}", m.w));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub index: usize,
    pub m_a: BTreeMap<String, Chunk>,
    pub m_g: Option<Tour>,
    pub m_ba: BTreeMap<String, Tour>,
    rng: ChaCha8Rng,
    ls: ThreeOpt,
}

impl AgentState {
    pub fn tour(&self, slot: &str) -> Option<&Tour> {
        self.m_a.get(slot).and_then(Chunk::as_tour)
    }
}

#[derive(Debug, Clone)]
pub struct SocialState {
    pub m_s: BTreeMap<String, Chunk>,
    pub m_bs: BTreeMap<String, Vec<Tour>>,
    kernels: BTreeMap<String, SelectionKernel>,
    heuristic: HeuristicInfo,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: BestSoFar,
    pub trace: RunTrace,
}

pub struct Engine<'a> {
    land: &'a Landscape,
    spec: SpecMp,
    esh: Esh,
    toolbox: Toolbox,
    gen: GenRule,
    three_opt: bool,
    /// Rows the ESH actually depends on; the rest stay empty.
    active: Vec<usize>,
    cfg: CgoConfig,
    agents: Vec<AgentState>,
    social: SocialState,
    gb: Option<BestSoFar>,
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed of replicate `run` under master seed `master`.
pub fn run_seed(master: u64, run: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(u64::MAX - run);
    rng.next_u64()
}

impl<'a> Engine<'a> {
    pub fn new(
        land: &'a Landscape,
        algorithm: Algorithm,
        cfg: CgoConfig,
    ) -> Result<Self, CgoError> {
        Self::with_tables(
            land,
            SpecMp::ant_system(),
            algorithm.esh(),
            Toolbox::default(),
            cfg,
        )
    }

    pub fn with_tables(
        land: &'a Landscape,
        spec: SpecMp,
        esh: Esh,
        toolbox: Toolbox,
        cfg: CgoConfig,
    ) -> Result<Self, CgoError> {
        cfg.validate()?;
        validate(&spec, &esh, &toolbox)?;
        let Some(Rule::Generate { rule, three_opt }) = toolbox.get(&esh.r_ge) else {
            unreachable!("validated generating rule");
        };

        let mut needed: Vec<&str> = esh.e_ig.iter().map(String::as_str).collect();
        let mut active = Vec::new();
        while let Some(slot) = needed.pop() {
            if let Some(i) = spec.rows.iter().position(|r| r.ch_m == slot) {
                if !active.contains(&i) {
                    active.push(i);
                    needed.push(spec.rows[i].ch_u.as_str());
                }
            }
        }
        active.sort_unstable();

        let n = land.n();
        let k = cfg.agents;
        let agents = (0..k)
            .map(|i| AgentState {
                index: i,
                m_a: BTreeMap::new(),
                m_g: None,
                m_ba: BTreeMap::new(),
                rng: stream(cfg.seed, i as u64 + 1),
                ls: ThreeOpt::new(n),
            })
            .collect();
        let social = SocialState {
            m_s: BTreeMap::new(),
            m_bs: BTreeMap::new(),
            kernels: BTreeMap::new(),
            heuristic: HeuristicInfo::new(&land.d, cfg.pheromone.beta),
            rng: stream(cfg.seed, k as u64 + 1),
        };
        Ok(Self {
            land,
            spec,
            esh,
            toolbox,
            gen: rule,
            three_opt,
            active,
            cfg,
            agents,
            social,
            gb: None,
        })
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn social(&self) -> &SocialState {
        &self.social
    }

    pub fn best(&self) -> Option<&BestSoFar> {
        self.gb.as_ref()
    }

    pub fn config(&self) -> &CgoConfig {
        &self.cfg
    }

    fn rule(&self, id: &str) -> Rule {
        self.toolbox.get(id).expect("validated rule")
    }

    /// Fills every active long-term slot with its initial chunk.
    pub fn b_ini(&mut self) -> Result<(), CgoError> {
        let d = &self.land.d;
        for &ri in &self.active {
            let row = &self.spec.rows[ri];
            match (row.id_m, self.rule(&row.r_ie)) {
                (MemoryId::Agent, Rule::Init(InitRule::RandomTour)) => {
                    for agent in &mut self.agents {
                        let t = Tour::random(d, &mut self.social.rng);
                        agent.m_a.insert(row.ch_m.clone(), Chunk::Tour(t));
                    }
                }
                (MemoryId::Social, Rule::Init(InitRule::Pheromone)) => {
                    let seed_len = Tour::nearest_neighbor(d, 0).length();
                    let psi = init_pheromone(d.n(), &self.cfg.pheromone, seed_len)?;
                    self.social.kernels.insert(
                        row.ch_m.clone(),
                        SelectionKernel::from_heuristic(
                            &psi,
                            &self.social.heuristic,
                            self.cfg.pheromone.alpha,
                        ),
                    );
                    self.social
                        .m_s
                        .insert(row.ch_m.clone(), Chunk::Pheromone(psi));
                }
                (MemoryId::Agent, Rule::Init(InitRule::Pheromone)) => {
                    return Err(ConfigError::InvalidParameter(format!(
                        "{} cannot hold a per-agent pheromone matrix",
                        row.ch_m
                    ))
                    .into())
                }
                (MemoryId::Social, Rule::Init(InitRule::RandomTour)) => {
                    let t = Tour::random(d, &mut self.social.rng);
                    self.social.m_s.insert(row.ch_m.clone(), Chunk::Tour(t));
                }
                _ => unreachable!("validated initializer"),
            }
        }
        Ok(())
    }

    fn b_gen(
        agent: &mut AgentState,
        social: &SocialState,
        esh: &Esh,
        gen: GenRule,
        three_opt: bool,
        land: &Landscape,
        mixed: &MixedRuleParams,
    ) -> Result<(), CgoError> {
        let (d, nl) = (&land.d, &land.nl);
        let kernel_of = |slot: &String| {
            social
                .kernels
                .get(slot)
                .ok_or_else(|| ConfigError::UnknownSlot(slot.clone()))
        };
        let tour = match gen {
            GenRule::Social => {
                let kernel = kernel_of(&esh.e_ig[0])?;
                construct_social(kernel, d, nl, &mut agent.rng)
            }
            GenRule::Mixed => {
                let slot = &esh.e_ig[0];
                let parent = agent
                    .m_a
                    .get(slot)
                    .or_else(|| social.m_s.get(slot))
                    .and_then(Chunk::as_tour)
                    .ok_or_else(|| ConfigError::UnknownSlot(slot.clone()))?;
                let kernel = kernel_of(&esh.e_ig[1])?;
                construct_mixed(parent, kernel, d, nl, mixed, &mut agent.rng)?
            }
        };
        agent.m_g = Some(if three_opt {
            agent.ls.improve(tour, d, nl)
        } else {
            tour
        });
        Ok(())
    }

    fn b_sub(&mut self, k: usize) {
        let agent = &mut self.agents[k];
        for &ri in &self.active {
            let row = &self.spec.rows[ri];
            let chunk = if row.ch_u == self.esh.ch_og {
                agent.m_g.clone()
            } else {
                agent.tour(&row.ch_u).cloned()
            }
            .expect("submitted slot is populated");
            match row.id_m {
                MemoryId::Agent => {
                    agent.m_ba.insert(row.ch_m.clone(), chunk);
                }
                MemoryId::Social => self
                    .social
                    .m_bs
                    .entry(row.ch_m.clone())
                    .or_default()
                    .push(chunk),
            }
        }
    }

    fn b_ua(&mut self, k: usize) {
        let agent = &mut self.agents[k];
        for &ri in &self.active {
            let row = &self.spec.rows[ri];
            if row.id_m != MemoryId::Agent {
                continue;
            }
            let Some(incoming) = agent.m_ba.remove(&row.ch_m) else {
                continue;
            };
            match self.toolbox.get(&row.r_ue) {
                Some(Rule::Update(UpdateRule::Greedy)) => match agent.m_a.get_mut(&row.ch_m) {
                    Some(Chunk::Tour(cur)) => {
                        if incoming.length() < cur.length() {
                            *cur = incoming;
                        }
                    }
                    _ => {
                        agent.m_a.insert(row.ch_m.clone(), Chunk::Tour(incoming));
                    }
                },
                _ => unreachable!("validated agent updater"),
            }
        }
        agent.m_ba.clear();
    }

    fn b_us(&mut self, t: usize, gb_for_deposit: &Tour) -> Result<(), CgoError> {
        for &ri in &self.active {
            let row = &self.spec.rows[ri];
            if row.id_m != MemoryId::Social {
                continue;
            }
            let collected = self.social.m_bs.remove(&row.ch_m).unwrap_or_default();
            match self.toolbox.get(&row.r_ue) {
                Some(Rule::Update(UpdateRule::Pheromone)) => {
                    let Some(Chunk::Pheromone(psi)) = self.social.m_s.get_mut(&row.ch_m) else {
                        unreachable!("initialized pheromone slot");
                    };
                    let deposits: Vec<&Tour> = match self.cfg.deposit_mode {
                        DepositMode::MaxMin => {
                            let ib = collected
                                .iter()
                                .reduce(|a, b| if b.length() < a.length() { b } else { a })
                                .expect("every agent submits");
                            vec![select_deposit_tour(
                                &self.cfg.schedule,
                                t,
                                ib,
                                gb_for_deposit,
                            )]
                        }
                        DepositMode::AntSystem => collected.iter().collect(),
                    };
                    update_pheromone(
                        psi,
                        &deposits,
                        &self.cfg.pheromone,
                        gb_for_deposit.length(),
                        self.cfg.deposit_mode,
                    )?;
                    if let Some(kernel) = self.social.kernels.get_mut(&row.ch_m) {
                        kernel.refresh(psi, &self.social.heuristic, self.cfg.pheromone.alpha);
                    }
                }
                Some(Rule::Update(UpdateRule::Greedy)) => {
                    if let Some(best) = collected.into_iter().min_by_key(Tour::length) {
                        match self.social.m_s.get_mut(&row.ch_m) {
                            Some(Chunk::Tour(cur)) if cur.length() <= best.length() => {}
                            _ => {
                                self.social.m_s.insert(row.ch_m.clone(), Chunk::Tour(best));
                            }
                        }
                    }
                }
                _ => unreachable!("validated social updater"),
            }
        }
        self.social.m_bs.clear();
        Ok(())
    }

    /// One learning cycle; returns the tours generated in it, in agent order.
    pub fn step(&mut self, t: usize) -> Result<Vec<Tour>, CgoError> {
        let before = self.gb.as_ref().map(|g| g.tour.clone());
        {
            let Self {
                agents,
                social,
                esh,
                gen,
                three_opt,
                land,
                cfg,
                ..
            } = self;
            let gen_one = |a: &mut AgentState| {
                Self::b_gen(a, social, esh, *gen, *three_opt, land, &cfg.mixed)
            };
            if cfg.parallel_agents {
                agents.par_iter_mut().try_for_each(gen_one)?;
            } else {
                agents.iter_mut().try_for_each(gen_one)?;
            }
        }

        let mut generated = Vec::with_capacity(self.agents.len());
        for k in 0..self.agents.len() {
            self.b_sub(k);
            self.b_ua(k);
            let tour = self.agents[k].m_g.take().expect("generated this cycle");
            match &mut self.gb {
                Some(gb) => {
                    gb.offer(&tour, t);
                }
                None => self.gb = Some(BestSoFar::new(tour.clone(), t)),
            }
            generated.push(tour);
        }

        let gb_now = self.gb.as_ref().expect("set above").tour.clone();
        let gb_for_deposit = match (self.cfg.gb_timing, before) {
            (GbTiming::PreviousCycle, Some(prev)) => prev,
            _ => gb_now,
        };
        self.b_us(t, &gb_for_deposit)?;
        Ok(generated)
    }

    pub fn run(self) -> Result<RunOutcome, CgoError> {
        self.run_observed(|_, _| {})
    }

    /// Runs all cycles, handing each cycle's generated tours to `observe`.
    pub fn run_observed(
        mut self,
        mut observe: impl FnMut(usize, &[Tour]),
    ) -> Result<RunOutcome, CgoError> {
        let start = Instant::now();
        self.b_ini()?;
        let mut trace = RunTrace::default();
        for t in 1..=self.cfg.cycles {
            let generated = self.step(t)?;
            let diversity = if generated.len() >= 2 {
                population_diversity(&generated).expect("same instance")
            } else {
                0.0
            };
            observe(t, &generated);
            trace.push(CycleRecord {
                t,
                f_gb: self.gb.as_ref().expect("after a cycle").length(),
                diversity,
                elapsed: start.elapsed(),
            });
        }
        Ok(RunOutcome {
            best: self.gb.expect("at least one cycle"),
            trace,
        })
    }
}
