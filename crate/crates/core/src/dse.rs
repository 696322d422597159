//! Exhaustive design-space sweeps, best-INT16 normalization and Pareto fronts.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arch::{validate_config, AcceleratorConfig, PeType};
use crate::costmodel::{ppa_from_stats, CostTable, PpaResult};
use crate::dataflow::network_stats;
use crate::error::{Error, Result};
use crate::workload::Network;

pub const DEFAULT_MAX_POINTS: u64 = 1_000_000;

const BUNDLED_GRID: &str = include_str!("../data/default_grid.json");

/// One scratchpad sizing, in bytes per PE.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpadSizes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ifmap_spad_bytes: u64,
    pub filter_spad_bytes: u64,
    pub psum_spad_bytes: u64,
}

/// Value lists for every configuration field. Scratchpads are enumerated as a
/// list of sizings so that the three sizes can move together.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub pe_rows: Vec<u32>,
    pub pe_cols: Vec<u32>,
    pub glb_bytes: Vec<u64>,
    pub spads: Vec<SpadSizes>,
    pub dram_bw: Vec<f64>,
    pub clock_hz: Vec<f64>,
    pub pe_types: Vec<PeType>,
    pub max_points: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    pe_rows: Vec<u32>,
    pe_cols: Vec<u32>,
    glb_bytes: Vec<u64>,
    #[serde(default)]
    spads: Option<Vec<SpadSizes>>,
    #[serde(default)]
    ifmap_spad_bytes: Option<Vec<u64>>,
    #[serde(default)]
    filter_spad_bytes: Option<Vec<u64>>,
    #[serde(default)]
    psum_spad_bytes: Option<Vec<u64>>,
    dram_bw: Vec<f64>,
    #[serde(default)]
    clock_hz: Option<Vec<f64>>,
    pe_type: Vec<PeType>,
    #[serde(default)]
    max_points: Option<u64>,
}

/// Parses a grid document. Scratchpads come either as a `spads` list of
/// sizings or as three independent `*_spad_bytes` lists (crossed).
pub fn parse_grid(text: &str) -> Result<GridSpec> {
    let raw: RawGrid =
        serde_json::from_str(text).map_err(|e| Error::parse("grid document", e.to_string()))?;
    let lists = (raw.ifmap_spad_bytes, raw.filter_spad_bytes, raw.psum_spad_bytes);
    let spads = match (raw.spads, lists) {
        (Some(s), (None, None, None)) => s,
        (None, (Some(i), Some(f), Some(p))) => {
            let mut out = Vec::with_capacity(i.len() * f.len() * p.len());
            for &ifmap in &i {
                for &filter in &f {
                    for &psum in &p {
                        out.push(SpadSizes {
                            name: None,
                            ifmap_spad_bytes: ifmap,
                            filter_spad_bytes: filter,
                            psum_spad_bytes: psum,
                        });
                    }
                }
            }
            out
        }
        _ => {
            return Err(Error::InvalidGrid(
                "give either `spads` or all three of ifmap/filter/psum_spad_bytes".into(),
            ))
        }
    };
    let grid = GridSpec {
        pe_rows: raw.pe_rows,
        pe_cols: raw.pe_cols,
        glb_bytes: raw.glb_bytes,
        spads,
        dram_bw: raw.dram_bw,
        clock_hz: raw
            .clock_hz
            .unwrap_or_else(|| vec![crate::arch::DEFAULT_CLOCK_HZ]),
        pe_types: raw.pe_type,
        max_points: raw.max_points.unwrap_or(DEFAULT_MAX_POINTS),
    };
    grid.validate()?;
    Ok(grid)
}

pub fn default_grid() -> GridSpec {
    parse_grid(BUNDLED_GRID).expect("bundled grid parses")
}

pub fn default_grid_source() -> &'static str {
    BUNDLED_GRID
}

impl GridSpec {
    pub fn size(&self) -> u128 {
        [
            self.pe_rows.len(),
            self.pe_cols.len(),
            self.glb_bytes.len(),
            self.spads.len(),
            self.dram_bw.len(),
            self.clock_hz.len(),
            self.pe_types.len(),
        ]
        .iter()
        .map(|&n| n as u128)
        .product()
    }

    pub fn validate(&self) -> Result<()> {
        let lens = [
            ("pe_rows", self.pe_rows.len()),
            ("pe_cols", self.pe_cols.len()),
            ("glb_bytes", self.glb_bytes.len()),
            ("spads", self.spads.len()),
            ("dram_bw", self.dram_bw.len()),
            ("clock_hz", self.clock_hz.len()),
            ("pe_type", self.pe_types.len()),
        ];
        if let Some((field, _)) = lens.iter().find(|(_, n)| *n == 0) {
            return Err(Error::InvalidGrid(format!("`{field}` list is empty")));
        }
        let positive_int = self.pe_rows.iter().chain(&self.pe_cols).all(|&v| v >= 1)
            && self.glb_bytes.iter().all(|&v| v >= 1)
            && self.spads.iter().all(|s| {
                s.ifmap_spad_bytes >= 1 && s.filter_spad_bytes >= 1 && s.psum_spad_bytes >= 1
            });
        let positive_real = self
            .dram_bw
            .iter()
            .chain(&self.clock_hz)
            .all(|v| v.is_finite() && *v > 0.0);
        if !(positive_int && positive_real) {
            return Err(Error::InvalidGrid("every grid value must be positive".into()));
        }
        Ok(())
    }
}

/// Full Cartesian product, `pe_rows` outermost and `pe_type` innermost, so
/// configurations that differ only in PE type are adjacent.
pub fn enumerate_space(grid: &GridSpec) -> Result<Vec<AcceleratorConfig>> {
    grid.validate()?;
    let size = grid.size();
    if size > u128::from(grid.max_points) {
        return Err(Error::GridCap {
            size,
            cap: grid.max_points,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    for &pe_rows in &grid.pe_rows {
        for &pe_cols in &grid.pe_cols {
            for &glb_bytes in &grid.glb_bytes {
                for spad in &grid.spads {
                    for &dram_bw in &grid.dram_bw {
                        for &clock_hz in &grid.clock_hz {
                            for &pe_type in &grid.pe_types {
                                out.push(AcceleratorConfig {
                                    pe_rows,
                                    pe_cols,
                                    glb_bytes,
                                    ifmap_spad_bytes: spad.ifmap_spad_bytes,
                                    filter_spad_bytes: spad.filter_spad_bytes,
                                    psum_spad_bytes: spad.psum_spad_bytes,
                                    dram_bw,
                                    clock_hz,
                                    pe_type,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub cfg: AcceleratorConfig,
    pub feasible: bool,
    pub ppa: Option<PpaResult>,
    pub norm_perf_per_area: Option<f64>,
    pub norm_energy: Option<f64>,
    /// Top-1 accuracy as a fraction.
    pub accuracy: Option<f64>,
}

impl DesignPoint {
    pub fn evaluate(net: &Network, cfg: AcceleratorConfig, table: &CostTable) -> Self {
        let ppa = if validate_config(&cfg, Some(net)).is_empty() {
            network_stats(net, &cfg)
                .ok()
                .map(|s| ppa_from_stats(&s, &cfg, table))
        } else {
            None
        };
        DesignPoint {
            feasible: ppa.is_some(),
            cfg,
            ppa,
            norm_perf_per_area: None,
            norm_energy: None,
            accuracy: None,
        }
    }

    pub fn clear_normalization(&mut self) {
        self.norm_perf_per_area = None;
        self.norm_energy = None;
    }
}

#[derive(Debug, Clone)]
pub struct Exploration {
    /// Points in enumeration order.
    pub points: Vec<DesignPoint>,
    /// Index of the best INT16 point, when one is feasible.
    pub baseline: Option<usize>,
}

impl Exploration {
    pub fn baseline(&self) -> Result<usize> {
        self.baseline.ok_or(Error::NoInt16Baseline)
    }

    pub fn feasible(&self) -> impl Iterator<Item = &DesignPoint> {
        self.points.iter().filter(|p| p.feasible)
    }
}

/// Evaluates every configuration of the grid (in parallel, results in
/// enumeration order) and normalizes against the best INT16 point when there
/// is one. Without a feasible INT16 point the raw values are still returned
/// and [`Exploration::baseline`] reports the failure.
pub fn explore(net: &Network, grid: &GridSpec, table: &CostTable) -> Result<Exploration> {
    let configs = enumerate_space(grid)?;
    let mut points: Vec<DesignPoint> = configs
        .into_par_iter()
        .map(|cfg| DesignPoint::evaluate(net, cfg, table))
        .collect();
    let baseline = normalize(&mut points).ok();
    Ok(Exploration { points, baseline })
}

/// Index of the feasible INT16 point with the highest perf/area; ties go to
/// the smaller area, then to the earlier point.
pub fn best_int16(points: &[DesignPoint]) -> Option<usize> {
    let mut best: Option<(usize, &PpaResult)> = None;
    for (i, p) in points.iter().enumerate() {
        let Some(ppa) = p.ppa.as_ref().filter(|_| p.feasible && p.cfg.pe_type == PeType::Int16)
        else {
            continue;
        };
        let better = match best {
            None => true,
            Some((_, b)) => {
                ppa.perf_per_area > b.perf_per_area
                    || (ppa.perf_per_area == b.perf_per_area && ppa.area_mm2 < b.area_mm2)
            }
        };
        if better {
            best = Some((i, ppa));
        }
    }
    best.map(|(i, _)| i)
}

/// Fills the normalized columns relative to the best INT16 point and returns
/// its index. Infeasible points keep empty normalized columns.
pub fn normalize(points: &mut [DesignPoint]) -> Result<usize> {
    let b = best_int16(points).ok_or(Error::NoInt16Baseline)?;
    let base = points[b].ppa.expect("baseline is feasible");
    for p in points.iter_mut() {
        match (&p.ppa, p.feasible) {
            (Some(ppa), true) => {
                p.norm_perf_per_area = Some(ppa.perf_per_area / base.perf_per_area);
                p.norm_energy = Some(ppa.energy_j / base.energy_j);
            }
            _ => p.clear_normalization(),
        }
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    PerfPerArea,
    Energy,
    Latency,
    Area,
    Power,
    Throughput,
    NormPerfPerArea,
    NormEnergy,
    Top1,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::PerfPerArea,
        Metric::Energy,
        Metric::Latency,
        Metric::Area,
        Metric::Power,
        Metric::Throughput,
        Metric::NormPerfPerArea,
        Metric::NormEnergy,
        Metric::Top1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PerfPerArea => "perf_per_area",
            Metric::Energy => "energy",
            Metric::Latency => "latency",
            Metric::Area => "area",
            Metric::Power => "power",
            Metric::Throughput => "throughput",
            Metric::NormPerfPerArea => "norm_perf_per_area",
            Metric::NormEnergy => "norm_energy",
            Metric::Top1 => "top1",
        }
    }

    pub fn value(self, p: &DesignPoint) -> Option<f64> {
        let ppa = p.ppa.as_ref();
        let v = match self {
            Metric::PerfPerArea => ppa.map(|x| x.perf_per_area),
            Metric::Energy => ppa.map(|x| x.energy_j),
            Metric::Latency => ppa.map(|x| x.latency_s),
            Metric::Area => ppa.map(|x| x.area_mm2),
            Metric::Power => ppa.map(|x| x.avg_power_w),
            Metric::Throughput => ppa.map(|x| x.throughput),
            Metric::NormPerfPerArea => p.norm_perf_per_area,
            Metric::NormEnergy => p.norm_energy,
            Metric::Top1 => p.accuracy,
        };
        v.filter(|x| x.is_finite())
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Objective {
    pub metric: Metric,
    pub direction: Direction,
}

impl Objective {
    pub fn max(metric: Metric) -> Self {
        Objective {
            metric,
            direction: Direction::Maximize,
        }
    }

    pub fn min(metric: Metric) -> Self {
        Objective {
            metric,
            direction: Direction::Minimize,
        }
    }
}

/// Parses `metric:max,metric:min,...`.
pub fn parse_objectives(spec: &str) -> Result<Vec<Objective>> {
    let objectives = spec
        .split(',')
        .map(|part| {
            let (metric, dir) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::parse("objective", format!("`{part}` is not metric:dir")))?;
            let direction = match dir {
                "max" => Direction::Maximize,
                "min" => Direction::Minimize,
                other => {
                    return Err(Error::parse(
                        "objective",
                        format!("direction must be max or min, got `{other}`"),
                    ))
                }
            };
            Ok(Objective {
                metric: metric.parse()?,
                direction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if objectives.is_empty() {
        return Err(Error::parse("objective", "no objectives given"));
    }
    Ok(objectives)
}

/// Orders `a` before `b` when `a` is better on `dir`.
fn better_first(a: f64, b: f64, dir: Direction) -> Ordering {
    match dir {
        Direction::Maximize => b.total_cmp(&a),
        Direction::Minimize => a.total_cmp(&b),
    }
}

/// `a` dominates `b`: no worse on every objective, strictly better on one.
pub fn dominates(a: &[f64], b: &[f64], dirs: &[Direction]) -> bool {
    let mut strict = false;
    for ((&x, &y), dir) in a.iter().zip(b).zip(dirs) {
        match better_first(x, y, *dir) {
            Ordering::Greater => return false,
            Ordering::Less => strict = true,
            Ordering::Equal => {}
        }
    }
    strict
}

/// Indices of the non-dominated rows of `values`, sorted by ascending first
/// objective (ties by index).
///
/// Rows are visited in lexicographic best-first order; a row can only be
/// dominated by one visited earlier, and anything dominated by a dropped row
/// is also dominated by the front member that dropped it, so each candidate is
/// tested against the current front only.
pub fn pareto_indices(values: &[Vec<f64>], dirs: &[Direction]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        dirs.iter()
            .enumerate()
            .map(|(k, d)| better_first(values[i][k], values[j][k], *d))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&j| dominates(&values[j], &values[i], dirs)) {
            front.push(i);
        }
    }
    front.sort_by(|&i, &j| values[i][0].total_cmp(&values[j][0]).then(i.cmp(&j)));
    front
}

/// Non-dominated feasible points under `objectives`, sorted by ascending
/// value of the first objective.
pub fn pareto_front(points: &[DesignPoint], objectives: &[Objective]) -> Result<Vec<DesignPoint>> {
    if objectives.is_empty() {
        return Err(Error::parse("objective", "no objectives given"));
    }
    let feasible: Vec<&DesignPoint> = points.iter().filter(|p| p.feasible).collect();
    let values = feasible
        .iter()
        .map(|p| {
            objectives
                .iter()
                .map(|o| {
                    o.metric
                        .value(p)
                        .ok_or_else(|| Error::MissingMetric(o.metric.name().to_string()))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let dirs: Vec<Direction> = objectives.iter().map(|o| o.direction).collect();
    Ok(pareto_indices(&values, &dirs)
        .into_iter()
        .map(|i| feasible[i].clone())
        .collect())
}

/// Best feasible point of each PE type on `objective` (first wins ties), in
/// [`PeType::ALL`] order; types with no feasible point are skipped.
pub fn best_per_type(points: &[DesignPoint], objective: Objective) -> Vec<DesignPoint> {
    PeType::ALL
        .iter()
        .filter_map(|&t| {
            let mut best: Option<(&DesignPoint, f64)> = None;
            for p in points.iter().filter(|p| p.feasible && p.cfg.pe_type == t) {
                let Some(v) = objective.metric.value(p) else {
                    continue;
                };
                if best.is_none_or(|(_, b)| better_first(v, b, objective.direction).is_lt()) {
                    best = Some((p, v));
                }
            }
            best.map(|(p, _)| p.clone())
        })
        .collect()
}

/// Top-1 accuracy per (network, PE type).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccuracyTable {
    entries: BTreeMap<(String, PeType), f64>,
}

impl AccuracyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, network: impl Into<String>, pe_type: PeType, top1: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&top1) {
            return Err(Error::parse(
                "accuracy table",
                format!("top1 must be a fraction in [0, 1], got {top1}"),
            ));
        }
        self.entries.insert((network.into(), pe_type), top1);
        Ok(())
    }

    pub fn get(&self, network: &str, pe_type: PeType) -> Option<f64> {
        self.entries.get(&(network.to_string(), pe_type)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Deserialize)]
struct AccuracyRow {
    network: String,
    pe_type: String,
    top1: f64,
}

/// Parses the `network,pe_type,top1` CSV.
pub fn parse_accuracy_csv(text: &str) -> Result<AccuracyTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["network", "pe_type", "top1"] {
        return Err(Error::parse(
            "accuracy table",
            "header must be `network,pe_type,top1`",
        ));
    }
    let mut table = AccuracyTable::new();
    for row in reader.deserialize::<AccuracyRow>() {
        let row = row?;
        table.insert(row.network, row.pe_type.parse()?, row.top1)?;
    }
    Ok(table)
}

/// Attaches accuracy to every point; each feasible point must have an entry.
pub fn join_accuracy(
    points: &[DesignPoint],
    acc: &AccuracyTable,
    network: &str,
) -> Result<Vec<DesignPoint>> {
    points
        .iter()
        .map(|p| {
            let top1 = acc.get(network, p.cfg.pe_type);
            if p.feasible && top1.is_none() {
                return Err(Error::MissingAccuracy {
                    network: network.to_string(),
                    pe_type: p.cfg.pe_type,
                });
            }
            Ok(DesignPoint {
                accuracy: top1,
                ..p.clone()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::default_arch;
    use crate::costmodel::default_cost_table;
    use crate::workload::Preset;
    use proptest::prelude::*;

    fn singleton_grid() -> GridSpec {
        let a = default_arch();
        GridSpec {
            pe_rows: vec![a.pe_rows],
            pe_cols: vec![a.pe_cols],
            glb_bytes: vec![a.glb_bytes],
            spads: vec![SpadSizes {
                name: None,
                ifmap_spad_bytes: a.ifmap_spad_bytes,
                filter_spad_bytes: a.filter_spad_bytes,
                psum_spad_bytes: a.psum_spad_bytes,
            }],
            dram_bw: vec![a.dram_bw],
            clock_hz: vec![a.clock_hz],
            pe_types: vec![PeType::Int16],
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    fn point(ppa: f64, energy: f64) -> DesignPoint {
        let p = PpaResult {
            latency_s: 1.0,
            energy_j: energy,
            avg_power_w: energy,
            area_mm2: 1.0,
            throughput: ppa,
            perf_per_area: ppa,
            mac_j: energy,
            spad_j: 0.0,
            glb_j: 0.0,
            dram_j: 0.0,
            leak_j: 0.0,
        };
        DesignPoint {
            cfg: default_arch(),
            feasible: true,
            ppa: Some(p),
            norm_perf_per_area: None,
            norm_energy: None,
            accuracy: None,
        }
    }

    #[test]
    fn enumerate_counts_and_order() {
        let mut g = singleton_grid();
        assert_eq!(enumerate_space(&g).unwrap().len(), 1);
        g.pe_rows = vec![4, 8];
        g.pe_cols = vec![2, 3, 5];
        let cfgs = enumerate_space(&g).unwrap();
        assert_eq!(cfgs.len(), 6);
        let dims: Vec<_> = cfgs.iter().map(|c| (c.pe_rows, c.pe_cols)).collect();
        assert_eq!(dims, vec![(4, 2), (4, 3), (4, 5), (8, 2), (8, 3), (8, 5)]);
    }

    #[test]
    fn grid_cap() {
        let mut g = singleton_grid();
        g.pe_rows = (1..=10).collect();
        g.max_points = 9;
        let err = enumerate_space(&g).unwrap_err();
        assert!(matches!(err, Error::GridCap { size: 10, cap: 9 }));
        assert!(err.to_string().contains('9'));
    }

    #[test]
    fn grid_document_forms() {
        let crossed = parse_grid(
            r#"{"pe_rows":[4],"pe_cols":[4],"glb_bytes":[1024],"ifmap_spad_bytes":[64,128],
            "filter_spad_bytes":[8],"psum_spad_bytes":[64,128],"dram_bw":[8],"pe_type":["INT16"]}"#,
        )
        .unwrap();
        assert_eq!(crossed.spads.len(), 4);
        assert!(parse_grid(
            r#"{"pe_rows":[4],"pe_cols":[4],"glb_bytes":[1024],"ifmap_spad_bytes":[64],
            "dram_bw":[8],"pe_type":["INT16"]}"#
        )
        .is_err());
        assert!(parse_grid(
            r#"{"pe_rows":[],"pe_cols":[4],"glb_bytes":[1024],"spads":[{"ifmap_spad_bytes":1,
            "filter_spad_bytes":1,"psum_spad_bytes":1}],"dram_bw":[8],"pe_type":["INT16"]}"#
        )
        .is_err());
        assert!(default_grid().size() > 1000);
    }

    #[test]
    fn single_int16_point_normalizes_to_one() {
        let net = Preset::Resnet20.network();
        let ex = explore(&net, &singleton_grid(), &default_cost_table().unwrap()).unwrap();
        assert_eq!(ex.baseline().unwrap(), 0);
        let p = &ex.points[0];
        assert!(p.feasible);
        assert_eq!((p.norm_perf_per_area, p.norm_energy), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn no_feasible_int16_is_reported() {
        let net = Preset::Resnet20.network();
        let mut g = singleton_grid();
        g.spads[0].ifmap_spad_bytes = 1;
        g.pe_types = vec![PeType::Int16, PeType::Light1];
        let ex = explore(&net, &g, &default_cost_table().unwrap()).unwrap();
        assert!(matches!(ex.baseline(), Err(Error::NoInt16Baseline)));
        assert!(ex.points.iter().all(|p| !p.feasible && p.ppa.is_none()));

        let mut g = singleton_grid();
        g.pe_types = vec![PeType::Light1];
        let ex = explore(&net, &g, &default_cost_table().unwrap()).unwrap();
        assert!(ex.baseline.is_none());
        assert!(ex.points[0].feasible && ex.points[0].ppa.is_some());
    }

    #[test]
    fn normalization_ratios_and_tie_break() {
        let mut pts = vec![point(2.0, 4.0), point(1.0, 2.0), point(2.0, 3.0)];
        pts[2].ppa.as_mut().unwrap().area_mm2 = 0.5;
        assert_eq!(normalize(&mut pts).unwrap(), 2);
        assert_eq!(pts[2].norm_perf_per_area, Some(1.0));
        assert_eq!(pts[2].norm_energy, Some(1.0));
        assert_eq!(pts[1].norm_energy, Some(2.0 / 3.0));

        let mut pts = vec![point(2.0, 4.0), point(1.0, 2.0)];
        normalize(&mut pts).unwrap();
        assert_eq!(pts[1].norm_energy, Some(0.5));
        assert_eq!(pts[1].norm_perf_per_area, Some(0.5));
    }

    #[test]
    fn three_point_front() {
        let pts = vec![point(1.0, 1.0), point(2.0, 2.0), point(1.5, 0.5)];
        let obj = [Objective::max(Metric::PerfPerArea), Objective::min(Metric::Energy)];
        let front = pareto_front(&pts, &obj).unwrap();
        let got: Vec<_> = front
            .iter()
            .map(|p| (p.ppa.unwrap().perf_per_area, p.ppa.unwrap().energy_j))
            .collect();
        assert_eq!(got, vec![(1.5, 0.5), (2.0, 2.0)]);
    }

    #[test]
    fn single_and_duplicate_points() {
        let obj = [Objective::max(Metric::PerfPerArea), Objective::min(Metric::Energy)];
        assert_eq!(pareto_front(&[point(1.0, 1.0)], &obj).unwrap().len(), 1);
        let dup = vec![point(1.0, 1.0), point(1.0, 1.0), point(0.5, 2.0)];
        assert_eq!(pareto_front(&dup, &obj).unwrap().len(), 2);
    }

    #[test]
    fn missing_metric() {
        let obj = [Objective::max(Metric::Top1)];
        assert!(matches!(
            pareto_front(&[point(1.0, 1.0)], &obj),
            Err(Error::MissingMetric(m)) if m == "top1"
        ));
    }

    #[test]
    fn objective_spec() {
        let o = parse_objectives("perf_per_area:max, energy:min").unwrap();
        assert_eq!(o, vec![Objective::max(Metric::PerfPerArea), Objective::min(Metric::Energy)]);
        assert!(matches!(parse_objectives("speed:max"), Err(Error::UnknownMetric(_))));
        assert!(parse_objectives("energy").is_err());
        assert!(parse_objectives("energy:down").is_err());
    }

    #[test]
    fn accuracy_join() {
        let mut acc = AccuracyTable::new();
        acc.insert("net", PeType::Int16, 0.92).unwrap();
        let p = point(1.0, 1.0);
        let joined = join_accuracy(std::slice::from_ref(&p), &acc, "net").unwrap();
        assert_eq!(joined[0].accuracy, Some(0.92));

        let mut light = p.clone();
        light.cfg.pe_type = PeType::Light1;
        let err = join_accuracy(&[p, light], &acc, "net").unwrap_err();
        assert!(err.to_string().contains("(net, LIGHT1)"), "{err}");
        assert!(join_accuracy(&[], &acc, "net").unwrap().is_empty());
        assert!(acc.insert("net", PeType::Fp32, 92.0).is_err());
    }

    #[test]
    fn accuracy_csv() {
        let t = parse_accuracy_csv("network,pe_type,top1\nresnet20,INT16,0.91\nresnet20,LIGHT1,0.90\n")
            .unwrap();
        assert_eq!(t.get("resnet20", PeType::Light1), Some(0.90));
        assert_eq!(t.len(), 2);
        assert!(parse_accuracy_csv("net,type,acc\n").is_err());
        assert!(parse_accuracy_csv("network,pe_type,top1\nx,INT8,0.5\n").is_err());
    }

    #[test]
    fn light1_best_dominates_int16_best() {
        let net = Preset::Resnet20.network();
        let ex = explore(&net, &default_grid(), &default_cost_table().unwrap()).unwrap();
        let base = &ex.points[ex.baseline().unwrap()];
        assert_eq!((base.norm_perf_per_area, base.norm_energy), (Some(1.0), Some(1.0)));
        let best = best_per_type(&ex.points, Objective::max(Metric::NormPerfPerArea));
        let l1 = best.iter().find(|p| p.cfg.pe_type == PeType::Light1).unwrap();
        assert!(l1.norm_perf_per_area.unwrap() > 1.0);
        assert!(l1.norm_energy.unwrap() < 1.0);
    }

    fn brute_front(values: &[Vec<f64>], dirs: &[Direction]) -> Vec<usize> {
        (0..values.len())
            .filter(|&i| !(0..values.len()).any(|j| j != i && dominates(&values[j], &values[i], dirs)))
            .collect()
    }

    proptest! {
        #[test]
        fn front_matches_all_pairs(
            rows in prop::collection::vec(prop::collection::vec(0u8..6, 3), 1..60),
            dir_bits in 0u8..8,
        ) {
            let values: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
            let dirs: Vec<Direction> = (0..3)
                .map(|k| if dir_bits >> k & 1 == 1 { Direction::Maximize } else { Direction::Minimize })
                .collect();
            let mut fast = pareto_indices(&values, &dirs);
            fast.sort_unstable();
            prop_assert_eq!(fast, brute_front(&values, &dirs));
        }
    }
}
