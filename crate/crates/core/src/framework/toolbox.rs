//! String-keyed rule registry.

use std::collections::BTreeMap;

use super::chunk::ChunkKind;

pub const R_IE_RND: &str = "R_IE^RND";
pub const R_IE_PM: &str = "R_IE^PM";
pub const R_UE_G: &str = "R_UE^G";
pub const R_UE_PM: &str = "R_UE^PM";
pub const R_GE_S: &str = "R_GE^S";
pub const R_GE_M: &str = "R_GE^M";
pub const R_GE_S3O: &str = "R_GE^S+3O";
pub const R_GE_M3O: &str = "R_GE^M+3O";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitRule {
    /// A uniformly random tour.
    RandomTour,
    /// Uniform trails at the upper limit.
    Pheromone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// Keep the incoming tour iff it is strictly shorter.
    Greedy,
    /// Evaporate and deposit from the collected tours.
    Pheromone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenRule {
    Social,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Init(InitRule),
    Update(UpdateRule),
    Generate { rule: GenRule, three_opt: bool },
}

impl Rule {
    /// Kind of chunk an initializer produces or an updater maintains.
    pub fn target_kind(&self) -> ChunkKind {
        match self {
            Rule::Init(InitRule::RandomTour) | Rule::Update(UpdateRule::Greedy) => ChunkKind::Tour,
            Rule::Init(InitRule::Pheromone) | Rule::Update(UpdateRule::Pheromone) => {
                ChunkKind::Pheromone
            }
            Rule::Generate { .. } => ChunkKind::Tour,
        }
    }

    /// Kind of each submitted chunk an updater consumes.
    pub fn source_kind(&self) -> Option<ChunkKind> {
        match self {
            Rule::Update(_) => Some(ChunkKind::Tour),
            _ => None,
        }
    }

    /// Ordered input kinds of a generating rule.
    pub fn input_kinds(&self) -> &'static [ChunkKind] {
        match self {
            Rule::Generate {
                rule: GenRule::Social,
                ..
            } => &[ChunkKind::Pheromone],
            Rule::Generate {
                rule: GenRule::Mixed,
                ..
            } => &[ChunkKind::Tour, ChunkKind::Pheromone],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Toolbox {
    rules: BTreeMap<String, Rule>,
}

impl Default for Toolbox {
    fn default() -> Self {
        let mut tb = Self {
            rules: BTreeMap::new(),
        };
        tb.register(R_IE_RND, Rule::Init(InitRule::RandomTour));
        tb.register(R_IE_PM, Rule::Init(InitRule::Pheromone));
        tb.register(R_UE_G, Rule::Update(UpdateRule::Greedy));
        tb.register(R_UE_PM, Rule::Update(UpdateRule::Pheromone));
        for (id, rule, three_opt) in [
            (R_GE_S, GenRule::Social, false),
            (R_GE_M, GenRule::Mixed, false),
            (R_GE_S3O, GenRule::Social, true),
            (R_GE_M3O, GenRule::Mixed, true),
        ] {
            tb.register(id, Rule::Generate { rule, three_opt });
        }
        tb
    }
}

impl Toolbox {
    pub fn register(&mut self, id: &str, rule: Rule) {
        self.rules.insert(id.to_string(), rule);
    }

    pub fn get(&self, id: &str) -> Option<Rule> {
        self.rules.get(id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }
}
