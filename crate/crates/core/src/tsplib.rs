//! TSPLIB node-coordinate instances, integer edge weights and candidate lists.
//!
//! Cities are indexed from 0 internally. TSPLIB files number them from 1; the
//! parser and [`parse_tour_file`] translate at the boundary.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TsplibError {
    #[error("missing mandatory keyword {0}")]
    MissingKeyword(&'static str),
    #[error("unsupported EDGE_WEIGHT_TYPE {0:?}")]
    UnsupportedEdgeWeightType(String),
    #[error("DIMENSION is {expected} but {found} coordinates were read")]
    CoordinateCount { expected: usize, found: usize },
    #[error("line {line}: cannot parse {text:?}")]
    Malformed { line: usize, text: String },
    #[error("dimension {0} is too small, need at least 3 cities")]
    TooSmall(usize),
    #[error("city index {index} out of range for {n} cities")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("tour is not a permutation of the {0} cities")]
    NotAPermutation(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeightType {
    Euc2d,
    Ceil2d,
    Att,
}

impl FromStr for EdgeWeightType {
    type Err = TsplibError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "EUC_2D" => Ok(Self::Euc2d),
            "CEIL_2D" => Ok(Self::Ceil2d),
            "ATT" => Ok(Self::Att),
            other => Err(TsplibError::UnsupportedEdgeWeightType(other.to_string())),
        }
    }
}

impl fmt::Display for EdgeWeightType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Euc2d => "EUC_2D",
            Self::Ceil2d => "CEIL_2D",
            Self::Att => "ATT",
        })
    }
}

impl EdgeWeightType {
    /// Integer distance between two points under this metric.
    pub fn distance(self, a: (f64, f64), b: (f64, f64)) -> i64 {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        match self {
            Self::Euc2d => nint((dx * dx + dy * dy).sqrt()),
            Self::Ceil2d => (dx * dx + dy * dy).sqrt().ceil() as i64,
            Self::Att => {
                let r = ((dx * dx + dy * dy) / 10.0).sqrt();
                let t = nint(r);
                if (t as f64) < r {
                    t + 1
                } else {
                    t
                }
            }
        }
    }
}

fn nint(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    pub name: String,
    pub edge_weight_type: EdgeWeightType,
    pub coords: Vec<(f64, f64)>,
}

impl TspInstance {
    pub fn new(
        name: impl Into<String>,
        edge_weight_type: EdgeWeightType,
        coords: Vec<(f64, f64)>,
    ) -> Result<Self, TsplibError> {
        if coords.len() < 3 {
            return Err(TsplibError::TooSmall(coords.len()));
        }
        Ok(Self {
            name: name.into(),
            edge_weight_type,
            coords,
        })
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> Result<i64, TsplibError> {
        let n = self.dimension();
        for index in [i, j] {
            if index >= n {
                return Err(TsplibError::IndexOutOfRange { index, n });
            }
        }
        if i == j {
            return Ok(0);
        }
        Ok(self
            .edge_weight_type
            .distance(self.coords[i], self.coords[j]))
    }
}

pub fn parse_tsplib(text: &str) -> Result<TspInstance, TsplibError> {
    let mut name = None;
    let mut dimension = None;
    let mut ewt = None;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut in_coords = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let mut fields = line.split_whitespace();
            let parsed = (|| {
                let _id: usize = fields.next()?.parse().ok()?;
                let x: f64 = fields.next()?.parse().ok()?;
                let y: f64 = fields.next()?.parse().ok()?;
                Some((x, y))
            })();
            match parsed {
                Some(xy) => {
                    coords.push(xy);
                    continue;
                }
                // a keyword after the section ends it
                None if line.starts_with(|c: char| c.is_ascii_alphabetic()) => {
                    in_coords = false;
                }
                None => {
                    return Err(TsplibError::Malformed {
                        line: lineno + 1,
                        text: line.to_string(),
                    })
                }
            }
        }
        if line.starts_with("NODE_COORD_SECTION") {
            in_coords = true;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "NAME" => name = Some(value.to_string()),
            "DIMENSION" => {
                dimension = Some(value.parse::<usize>().map_err(|_| TsplibError::Malformed {
                    line: lineno + 1,
                    text: line.to_string(),
                })?)
            }
            "EDGE_WEIGHT_TYPE" => ewt = Some(value.parse::<EdgeWeightType>()?),
            _ => {}
        }
    }

    let name = name.ok_or(TsplibError::MissingKeyword("NAME"))?;
    let dimension = dimension.ok_or(TsplibError::MissingKeyword("DIMENSION"))?;
    let ewt = ewt.ok_or(TsplibError::MissingKeyword("EDGE_WEIGHT_TYPE"))?;
    if coords.is_empty() && !text.contains("NODE_COORD_SECTION") {
        return Err(TsplibError::MissingKeyword("NODE_COORD_SECTION"));
    }
    if coords.len() != dimension {
        return Err(TsplibError::CoordinateCount {
            expected: dimension,
            found: coords.len(),
        });
    }
    TspInstance::new(name, ewt, coords)
}

pub fn read_tsplib(path: impl AsRef<Path>) -> Result<TspInstance, TsplibError> {
    parse_tsplib(&fs::read_to_string(path)?)
}

/// Parses a TSPLIB `.tour` file into a 0-based city sequence.
pub fn parse_tour_file(text: &str, n: usize) -> Result<Vec<usize>, TsplibError> {
    let mut perm = Vec::with_capacity(n);
    let mut in_section = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with("TOUR_SECTION") {
            in_section = true;
            continue;
        }
        if !in_section {
            continue;
        }
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| TsplibError::Malformed {
                line: lineno + 1,
                text: line.to_string(),
            })?;
            if v == -1 {
                in_section = false;
                break;
            }
            if v < 1 || v as usize > n {
                return Err(TsplibError::IndexOutOfRange {
                    index: v.max(0) as usize,
                    n,
                });
            }
            perm.push(v as usize - 1);
        }
        if line == "EOF" {
            break;
        }
    }
    if perm.is_empty() {
        return Err(TsplibError::MissingKeyword("TOUR_SECTION"));
    }
    let mut seen = vec![false; n];
    for &c in &perm {
        if std::mem::replace(&mut seen[c], true) {
            return Err(TsplibError::NotAPermutation(n));
        }
    }
    if perm.len() != n {
        return Err(TsplibError::NotAPermutation(n));
    }
    Ok(perm)
}

/// Dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    n: usize,
    d: Vec<i64>,
}

impl CostMatrix {
    /// Builds a matrix from a row-major square array, checking the invariants.
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, TsplibError> {
        let n = rows.len();
        if n < 3 {
            return Err(TsplibError::TooSmall(n));
        }
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(TsplibError::Malformed {
                    line: i + 1,
                    text: format!("row has {} entries, expected {n}", row.len()),
                });
            }
            d.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..n {
                let v = d[i * n + j];
                let ok = if i == j {
                    v == 0
                } else {
                    v >= 0 && v == d[j * n + i]
                };
                if !ok {
                    return Err(TsplibError::Malformed {
                        line: i + 1,
                        text: format!("entry ({i},{j}) breaks symmetry, sign or zero diagonal"),
                    });
                }
            }
        }
        Ok(Self { n, d })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

pub fn build_cost_matrix(inst: &TspInstance) -> CostMatrix {
    let n = inst.dimension();
    let mut d = vec![0i64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = inst
                .edge_weight_type
                .distance(inst.coords[i], inst.coords[j]);
            d[i * n + j] = w;
            d[j * n + i] = w;
        }
    }
    CostMatrix { n, d }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborLists {
    k: usize,
    lists: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn of(&self, city: usize) -> &[usize] {
        &self.lists[city]
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

/// The `k` nearest cities of every city, ties going to the lower index.
pub fn build_neighbor_lists(d: &CostMatrix, k: usize) -> NeighborLists {
    let n = d.n();
    let take = k.min(n - 1);
    let lists = (0..n)
        .map(|i| {
            let row = d.row(i);
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by_key(|&j| (row[j], j));
            others.truncate(take);
            others
        })
        .collect();
    NeighborLists { k, lists }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TINY: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 0 3\n3 0 7\nEOF\n";

    #[test]
    fn parses_minimal_file() {
        let inst = parse_tsplib(TINY).unwrap();
        assert_eq!(inst.name, "tiny");
        assert_eq!(inst.dimension(), 3);
        assert_eq!(inst.edge_weight_type, EdgeWeightType::Euc2d);
    }

    #[test]
    fn tolerates_colon_spacing_and_missing_eof() {
        let text = "NAME: t\nDIMENSION:3\nEDGE_WEIGHT_TYPE:   CEIL_2D\nNODE_COORD_SECTION\n 1   1.5e0 2\n2 3 4\n\n3 5 6";
        let inst = parse_tsplib(text).unwrap();
        assert_eq!(inst.edge_weight_type, EdgeWeightType::Ceil2d);
        assert_eq!(inst.coords[0], (1.5, 2.0));
    }

    #[test]
    fn rejects_bad_headers() {
        let no_dim = TINY.replace("DIMENSION : 3\n", "");
        assert!(matches!(
            parse_tsplib(&no_dim),
            Err(TsplibError::MissingKeyword("DIMENSION"))
        ));
        let geo = TINY.replace("EUC_2D", "GEO");
        assert!(matches!(
            parse_tsplib(&geo),
            Err(TsplibError::UnsupportedEdgeWeightType(t)) if t == "GEO"
        ));
        let short = TINY.replace("DIMENSION : 3", "DIMENSION : 4");
        assert!(matches!(
            parse_tsplib(&short),
            Err(TsplibError::CoordinateCount {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn euclidean_rounding() {
        let e = EdgeWeightType::Euc2d;
        assert_eq!(e.distance((0.0, 0.0), (3.0, 4.0)), 5);
        assert_eq!(e.distance((0.0, 0.0), (1.0, 1.0)), 1);
        assert_eq!(e.distance((0.0, 0.0), (1.5, 0.0)), 2);
        assert_eq!(EdgeWeightType::Ceil2d.distance((0.0, 0.0), (1.0, 1.0)), 2);
    }

    #[test]
    fn att_pseudo_euclidean() {
        // r = sqrt(100/10) = 3.162..., nint 3 < r so 4
        assert_eq!(EdgeWeightType::Att.distance((0.0, 0.0), (10.0, 0.0)), 4);
        // r = sqrt(1000/10) = 10 exactly
        assert_eq!(
            EdgeWeightType::Att.distance((0.0, 0.0), (0.0, 31.6227766)),
            10
        );
        assert_eq!(EdgeWeightType::Att.distance((0.0, 0.0), (30.0, 10.0)), 10);
    }

    #[test]
    fn edge_weight_range_check() {
        let inst = parse_tsplib(TINY).unwrap();
        assert_eq!(inst.edge_weight(1, 1).unwrap(), 0);
        assert_eq!(inst.edge_weight(0, 2).unwrap(), 7);
        assert!(matches!(
            inst.edge_weight(0, 3),
            Err(TsplibError::IndexOutOfRange { index: 3, n: 3 })
        ));
    }

    #[test]
    fn collinear_matrix_and_lists() {
        let d = build_cost_matrix(&parse_tsplib(TINY).unwrap());
        assert_eq!(d.row(0), &[0, 3, 7]);
        assert_eq!(d.row(1), &[3, 0, 4]);
        assert_eq!(d.row(2), &[7, 4, 0]);
        let nl = build_neighbor_lists(&d, 1);
        assert_eq!(nl.of(0), &[1]);
        assert_eq!(nl.of(1), &[0]);
        assert_eq!(nl.of(2), &[1]);
        let full = build_neighbor_lists(&d, 20);
        assert!((0..3).all(|i| full.of(i).len() == 2));
    }

    #[test]
    fn neighbor_ties_go_to_lower_index() {
        let inst = TspInstance::new(
            "square",
            EdgeWeightType::Euc2d,
            vec![(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)],
        )
        .unwrap();
        let nl = build_neighbor_lists(&build_cost_matrix(&inst), 3);
        assert_eq!(nl.of(3), &[1, 2, 0]);
        assert_eq!(nl.of(0), &[1, 2, 3]);
    }

    #[test]
    fn from_rows_validates() {
        assert!(CostMatrix::from_rows(vec![vec![0, 1, 2], vec![1, 0, 3], vec![2, 3, 0]]).is_ok());
        assert!(CostMatrix::from_rows(vec![vec![0, 1, 2], vec![1, 0, 3], vec![2, 4, 0]]).is_err());
        assert!(CostMatrix::from_rows(vec![vec![1, 1, 2], vec![1, 0, 3], vec![2, 3, 0]]).is_err());
    }

    #[test]
    fn tour_file_round_trip() {
        let text = "NAME : t\nTYPE : TOUR\nDIMENSION : 4\nTOUR_SECTION\n1\n3\n2\n4\n-1\nEOF\n";
        assert_eq!(parse_tour_file(text, 4).unwrap(), vec![0, 2, 1, 3]);
        let dup = text.replace("\n3\n", "\n1\n");
        assert!(parse_tour_file(&dup, 4).is_err());
    }

    fn coords(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1000.0..1000.0f64, -1000.0..1000.0f64), n)
    }

    proptest! {
        #[test]
        fn weights_symmetric_nonnegative(a in coords(2), kind in 0usize..3) {
            let t = [EdgeWeightType::Euc2d, EdgeWeightType::Ceil2d, EdgeWeightType::Att][kind];
            let w = t.distance(a[0], a[1]);
            prop_assert!(w >= 0);
            prop_assert_eq!(w, t.distance(a[1], a[0]));
        }

        #[test]
        fn neighbor_lists_are_nearest(pts in coords(25), k in 1usize..30) {
            let inst = TspInstance::new("r", EdgeWeightType::Euc2d, pts).unwrap();
            let d = build_cost_matrix(&inst);
            let nl = build_neighbor_lists(&d, k);
            for i in 0..d.n() {
                let list = nl.of(i);
                prop_assert_eq!(list.len(), k.min(d.n() - 1));
                prop_assert!(!list.contains(&i));
                prop_assert!(list.windows(2).all(|w| d.get(i, w[0]) <= d.get(i, w[1])));
                let mut sorted = list.to_vec();
                sorted.sort_unstable();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), list.len());
                let worst = d.get(i, *list.last().unwrap());
                for c in (0..d.n()).filter(|c| *c != i && !list.contains(c)) {
                    prop_assert!(d.get(i, c) >= worst);
                }
            }
        }
    }
}
