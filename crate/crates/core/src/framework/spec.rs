//! Memory protocol tables and embedded search heuristics, plus their
//! static validation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::chunk::ChunkKind;
use super::toolbox::{self, Rule, Toolbox};
use super::ConfigError;

pub const SLOT_PARENT: &str = "pi_P";
pub const SLOT_PHEROMONE: &str = "Psi";
pub const SLOT_CHILD: &str = "pi_C";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemoryId {
    /// Per-agent long-term memory.
    Agent,
    /// The interactive center's social memory.
    Social,
}

impl fmt::Display for MemoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Agent => "M_A",
            Self::Social => "M_S",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryProtocolRow {
    pub id_m: MemoryId,
    pub ch_m: String,
    pub r_ie: String,
    pub r_ue: String,
    pub ch_u: String,
}

impl MemoryProtocolRow {
    pub fn new(id_m: MemoryId, ch_m: &str, r_ie: &str, r_ue: &str, ch_u: &str) -> Self {
        Self {
            id_m,
            ch_m: ch_m.into(),
            r_ie: r_ie.into(),
            r_ue: r_ue.into(),
            ch_u: ch_u.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpecMp {
    pub rows: Vec<MemoryProtocolRow>,
}

impl SpecMp {
    /// Personal-best tour per agent plus the shared pheromone matrix, both
    /// fed by the freshly generated tour.
    pub fn ant_system() -> Self {
        Self {
            rows: vec![
                MemoryProtocolRow::new(
                    MemoryId::Agent,
                    SLOT_PARENT,
                    toolbox::R_IE_RND,
                    toolbox::R_UE_G,
                    SLOT_CHILD,
                ),
                MemoryProtocolRow::new(
                    MemoryId::Social,
                    SLOT_PHEROMONE,
                    toolbox::R_IE_PM,
                    toolbox::R_UE_PM,
                    SLOT_CHILD,
                ),
            ],
        }
    }

    pub fn row(&self, slot: &str) -> Option<&MemoryProtocolRow> {
        self.rows.iter().find(|r| r.ch_m == slot)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Esh {
    pub r_ge: String,
    pub e_ig: Vec<String>,
    pub ch_og: String,
}

impl Esh {
    pub fn new(r_ge: &str, e_ig: &[&str], ch_og: &str) -> Self {
        Self {
            r_ge: r_ge.into(),
            e_ig: e_ig.iter().map(|s| s.to_string()).collect(),
            ch_og: ch_og.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Mmas,
    Mmas3opt,
    CgoAs,
    CgoAs3opt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::Mmas, Self::Mmas3opt, Self::CgoAs, Self::CgoAs3opt];

    pub fn esh(self) -> Esh {
        let social = [SLOT_PHEROMONE];
        let mixed = [SLOT_PARENT, SLOT_PHEROMONE];
        match self {
            Self::Mmas => Esh::new(toolbox::R_GE_S, &social, SLOT_CHILD),
            Self::Mmas3opt => Esh::new(toolbox::R_GE_S3O, &social, SLOT_CHILD),
            Self::CgoAs => Esh::new(toolbox::R_GE_M, &mixed, SLOT_CHILD),
            Self::CgoAs3opt => Esh::new(toolbox::R_GE_M3O, &mixed, SLOT_CHILD),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mmas => "MMAS",
            Self::Mmas3opt => "MMAS_3opt",
            Self::CgoAs => "CGO-AS",
            Self::CgoAs3opt => "CGO-AS_3opt",
        }
    }

    pub fn uses_three_opt(self) -> bool {
        matches!(self, Self::Mmas3opt | Self::CgoAs3opt)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "mmas" => Ok(Self::Mmas),
            "mmas3opt" => Ok(Self::Mmas3opt),
            "cgoas" => Ok(Self::CgoAs),
            "cgoas3opt" => Ok(Self::CgoAs3opt),
            _ => Err(ConfigError::UnknownAlgorithm(s.to_string())),
        }
    }
}

/// Checks rule identifiers, chunk kinds and that every long-term slot can be
/// reached from the generated-chunk slot through update arcs.
pub fn validate(spec: &SpecMp, esh: &Esh, toolbox: &Toolbox) -> Result<(), ConfigError> {
    let lookup = |id: &str| {
        toolbox
            .get(id)
            .ok_or_else(|| ConfigError::UnknownRule(id.to_string()))
    };

    // kind of every slot: the generated slot from the ESH, memory slots from R_IE
    let gen = lookup(&esh.r_ge)?;
    if !matches!(gen, Rule::Generate { .. }) {
        return Err(ConfigError::WrongRuleRole {
            id: esh.r_ge.clone(),
            role: "generating",
        });
    }
    let mut kinds: BTreeMap<&str, ChunkKind> = BTreeMap::new();
    kinds.insert(esh.ch_og.as_str(), gen.target_kind());

    let mut seen = BTreeSet::new();
    for row in &spec.rows {
        if !seen.insert(row.ch_m.as_str()) || row.ch_m == esh.ch_og {
            return Err(ConfigError::DuplicateSlot(row.ch_m.clone()));
        }
        let init = lookup(&row.r_ie)?;
        if !matches!(init, Rule::Init(_)) {
            return Err(ConfigError::WrongRuleRole {
                id: row.r_ie.clone(),
                role: "initializing",
            });
        }
        let upd = lookup(&row.r_ue)?;
        if !matches!(upd, Rule::Update(_)) {
            return Err(ConfigError::WrongRuleRole {
                id: row.r_ue.clone(),
                role: "updating",
            });
        }
        if init.target_kind() != upd.target_kind() {
            return Err(ConfigError::KindMismatch {
                slot: row.ch_m.clone(),
                expected: upd.target_kind(),
                found: init.target_kind(),
            });
        }
        kinds.insert(row.ch_m.as_str(), init.target_kind());
    }

    for row in &spec.rows {
        let upd = lookup(&row.r_ue)?;
        let src = *kinds
            .get(row.ch_u.as_str())
            .ok_or_else(|| ConfigError::UnknownSlot(row.ch_u.clone()))?;
        let want = upd.source_kind().expect("updating rule");
        if src != want {
            return Err(ConfigError::KindMismatch {
                slot: row.ch_u.clone(),
                expected: want,
                found: src,
            });
        }
    }

    let wanted = gen.input_kinds();
    if wanted.len() != esh.e_ig.len() {
        return Err(ConfigError::ArityMismatch {
            id: esh.r_ge.clone(),
            expected: wanted.len(),
            found: esh.e_ig.len(),
        });
    }
    for (slot, &want) in esh.e_ig.iter().zip(wanted) {
        if slot == &esh.ch_og {
            return Err(ConfigError::UnknownSlot(slot.clone()));
        }
        let got = *kinds
            .get(slot.as_str())
            .ok_or_else(|| ConfigError::UnknownSlot(slot.clone()))?;
        if got != want {
            return Err(ConfigError::KindMismatch {
                slot: slot.clone(),
                expected: want,
                found: got,
            });
        }
    }

    // breadth-first search over ch_u -> ch_m arcs from the generated slot
    let mut reached = BTreeSet::from([esh.ch_og.as_str()]);
    let mut queue = VecDeque::from([esh.ch_og.as_str()]);
    while let Some(slot) = queue.pop_front() {
        for row in spec.rows.iter().filter(|r| r.ch_u == slot) {
            if reached.insert(row.ch_m.as_str()) {
                queue.push_back(row.ch_m.as_str());
            }
        }
    }
    if let Some(row) = spec
        .rows
        .iter()
        .find(|r| !reached.contains(r.ch_m.as_str()))
    {
        return Err(ConfigError::NotUpdatable(row.ch_m.clone()));
    }
    Ok(())
}
