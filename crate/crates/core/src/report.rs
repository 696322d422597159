//! Plot-ready CSV point clouds and JSON run reports.
//!
//! A run report records the tool version, a SHA-256 digest of every input,
//! a unit for every numeric field of its payload, and the payload itself.
//! Built-in inputs are recorded as `builtin:<label>` and digested over their
//! bundled text.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arch::{default_arch_source, AcceleratorConfig};
use crate::costmodel::{default_cost_table_source, PpaResult};
use crate::dataflow::AccessStats;
use crate::dse::{default_grid_source, DesignPoint};
use crate::error::{Error, Result};
use crate::regression::PolynomialModel;
use crate::workload::builtin_network;
use crate::TOOL_VERSION;

pub const POINT_COLUMNS: [&str; 24] = [
    "pe_rows",
    "pe_cols",
    "glb_bytes",
    "ifmap_spad_bytes",
    "filter_spad_bytes",
    "psum_spad_bytes",
    "dram_bw",
    "clock_hz",
    "pe_type",
    "feasible",
    "latency_s",
    "energy_j",
    "avg_power_w",
    "area_mm2",
    "throughput",
    "perf_per_area",
    "mac_j",
    "spad_j",
    "glb_j",
    "dram_j",
    "leak_j",
    "norm_perf_per_area",
    "norm_energy",
    "top1",
];

const CONFIG_UNITS: [(&str, &str); 8] = [
    ("pe_rows", "PEs"),
    ("pe_cols", "PEs"),
    ("glb_bytes", "bytes"),
    ("ifmap_spad_bytes", "bytes"),
    ("filter_spad_bytes", "bytes"),
    ("psum_spad_bytes", "bytes"),
    ("dram_bw", "bytes/cycle"),
    ("clock_hz", "Hz"),
];

const PPA_UNITS: [(&str, &str); 11] = [
    ("latency_s", "s"),
    ("energy_j", "J"),
    ("avg_power_w", "W"),
    ("area_mm2", "mm^2"),
    ("throughput", "MAC/s"),
    ("perf_per_area", "MAC/s/mm^2"),
    ("mac_j", "J"),
    ("spad_j", "J"),
    ("glb_j", "J"),
    ("dram_j", "J"),
    ("leak_j", "J"),
];

const STATS_UNITS: [(&str, &str); 16] = [
    ("macs", "MACs"),
    ("compute_cycles", "cycles"),
    ("dram_cycles", "cycles"),
    ("latency_cycles", "cycles"),
    ("spad_ifmap_reads", "entries"),
    ("spad_filter_reads", "entries"),
    ("spad_psum_reads", "entries"),
    ("spad_psum_writes", "entries"),
    ("glb_ifmap_reads", "entries"),
    ("glb_filter_reads", "entries"),
    ("glb_ofmap_writes", "entries"),
    ("dram_ifmap_bytes", "bytes"),
    ("dram_filter_bytes", "bytes"),
    ("dram_ofmap_bytes", "bytes"),
    ("refetch_factor", "ratio"),
    ("utilization", "ratio"),
];

const NORM_UNITS: [(&str, &str); 3] = [
    ("norm_perf_per_area", "ratio"),
    ("norm_energy", "ratio"),
    ("top1", "fraction"),
];

/// Header plus one row per point. Absent values are empty cells; numbers use
/// the shortest decimal text that parses back to the same value.
pub fn points_csv_string(points: &[DesignPoint]) -> String {
    let mut out = POINT_COLUMNS.join(",");
    out.push('\n');
    for p in points {
        let c = &p.cfg;
        let mut cells = vec![
            c.pe_rows.to_string(),
            c.pe_cols.to_string(),
            c.glb_bytes.to_string(),
            c.ifmap_spad_bytes.to_string(),
            c.filter_spad_bytes.to_string(),
            c.psum_spad_bytes.to_string(),
            c.dram_bw.to_string(),
            c.clock_hz.to_string(),
            c.pe_type.to_string(),
            p.feasible.to_string(),
        ];
        match &p.ppa {
            Some(r) => cells.extend(ppa_values(r).iter().map(f64::to_string)),
            None => cells.extend(std::iter::repeat_n(String::new(), PPA_UNITS.len())),
        }
        for v in [p.norm_perf_per_area, p.norm_energy, p.accuracy] {
            cells.push(v.map(|x| x.to_string()).unwrap_or_default());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_points_csv(points: &[DesignPoint], path: &Path) -> Result<()> {
    std::fs::write(path, points_csv_string(points)).map_err(|e| Error::io(path, e))
}

fn ppa_values(r: &PpaResult) -> [f64; 11] {
    [
        r.latency_s,
        r.energy_j,
        r.avg_power_w,
        r.area_mm2,
        r.throughput,
        r.perf_per_area,
        r.mac_j,
        r.spad_j,
        r.glb_j,
        r.dram_j,
        r.leak_j,
    ]
}

/// Parses a points CSV written by [`points_csv_string`].
pub fn read_points_csv(text: &str) -> Result<Vec<DesignPoint>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<&str> = reader.headers()?.iter().collect();
    if header != POINT_COLUMNS {
        return Err(Error::parse(
            "points file",
            format!("header must be `{}`", POINT_COLUMNS.join(",")),
        ));
    }
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |i: usize| {
            Error::parse(
                "points file",
                format!("row {}: bad `{}` value `{}`", row + 1, POINT_COLUMNS[i], field(i)),
            )
        };
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let real = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let opt = |i: usize| -> Result<Option<f64>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                real(i).map(Some)
            }
        };
        let small = |i: usize| int(i).and_then(|v| u32::try_from(v).map_err(|_| bad(i)));
        let cfg = AcceleratorConfig {
            pe_rows: small(0)?,
            pe_cols: small(1)?,
            glb_bytes: int(2)?,
            ifmap_spad_bytes: int(3)?,
            filter_spad_bytes: int(4)?,
            psum_spad_bytes: int(5)?,
            dram_bw: real(6)?,
            clock_hz: real(7)?,
            pe_type: field(8).parse().map_err(|_| bad(8))?,
        };
        let feasible = match field(9) {
            "true" => true,
            "false" => false,
            _ => return Err(bad(9)),
        };
        let raw = (10..21).map(opt).collect::<Result<Vec<_>>>()?;
        let ppa = if raw.iter().all(Option::is_none) {
            None
        } else if let Some(v) = raw.iter().copied().collect::<Option<Vec<f64>>>() {
            Some(PpaResult {
                latency_s: v[0],
                energy_j: v[1],
                avg_power_w: v[2],
                area_mm2: v[3],
                throughput: v[4],
                perf_per_area: v[5],
                mac_j: v[6],
                spad_j: v[7],
                glb_j: v[8],
                dram_j: v[9],
                leak_j: v[10],
            })
        } else {
            return Err(Error::parse(
                "points file",
                format!("row {}: PPA columns must be all present or all empty", row + 1),
            ));
        };
        if feasible != ppa.is_some() {
            return Err(Error::parse(
                "points file",
                format!("row {}: feasible points carry PPA values, infeasible ones do not", row + 1),
            ));
        }
        points.push(DesignPoint {
            cfg,
            feasible,
            ppa,
            norm_perf_per_area: opt(21)?,
            norm_energy: opt(22)?,
            accuracy: opt(23)?,
        });
    }
    Ok(points)
}

pub fn load_points_csv(path: &Path) -> Result<Vec<DesignPoint>> {
    read_points_csv(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDigest {
    /// What the input was used as: `network`, `arch`, `cost_table`, ...
    pub role: String,
    /// File path, or `builtin:<label>`.
    pub source: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_file(role: &str, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(InputDigest {
            role: role.to_string(),
            source: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        })
    }

    pub fn of_bytes(role: &str, source: &str, bytes: &[u8]) -> Self {
        InputDigest {
            role: role.to_string(),
            source: source.to_string(),
            sha256: sha256_hex(bytes),
        }
    }

    /// Digest of a bundled input, e.g. `network:resnet20` or `grid:default`.
    pub fn of_builtin(role: &str, label: &str) -> Result<Self> {
        let text = builtin_source(label)
            .ok_or_else(|| Error::Schema(format!("no built-in input `{label}`")))?;
        Ok(Self::of_bytes(role, &format!("builtin:{label}"), text.as_bytes()))
    }
}

/// Text a built-in label stands for.
pub fn builtin_source(label: &str) -> Option<String> {
    let (kind, name) = label.split_once(':')?;
    match (kind, name) {
        ("network", preset) => builtin_network(preset).ok().map(|n| n.to_json()),
        ("arch", "default") => Some(default_arch_source().to_string()),
        ("cost_table", "default") => Some(default_cost_table_source().to_string()),
        ("grid", "default") => Some(default_grid_source().to_string()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpaPayload {
    pub network: String,
    pub config: AcceleratorConfig,
    pub stats: AccessStats,
    pub ppa: PpaResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Ppa(Box<PpaPayload>),
    Points(Vec<DesignPoint>),
    Model(Box<PolynomialModel>),
}

impl Payload {
    /// Every numeric field that needs a unit, with its standard unit.
    pub fn standard_units(&self) -> BTreeMap<String, String> {
        let pairs: Vec<(&str, String)> = match self {
            Payload::Ppa(_) => CONFIG_UNITS
                .iter()
                .chain(&STATS_UNITS)
                .chain(&PPA_UNITS)
                .map(|&(k, u)| (k, u.to_string()))
                .collect(),
            Payload::Points(_) => CONFIG_UNITS
                .iter()
                .chain(&PPA_UNITS)
                .chain(&NORM_UNITS)
                .map(|&(k, u)| (k, u.to_string()))
                .collect(),
            Payload::Model(m) => {
                let target = match m.target.as_str() {
                    "power" => "W",
                    "latency" => "s",
                    "area" => "mm^2",
                    _ => "target units",
                };
                vec![
                    ("coefficients", target.to_string()),
                    ("cv_rmse", target.to_string()),
                    ("cv_rmse_by_degree", target.to_string()),
                    ("shift", "feature units".to_string()),
                    ("scale", "feature units".to_string()),
                ]
            }
        };
        pairs.into_iter().map(|(k, u)| (k.to_string(), u)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub tool_version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub units: BTreeMap<String, String>,
    pub results: Payload,
}

impl RunReport {
    /// Report for the current tool version with the standard units filled in.
    pub fn new(command: &str, inputs: Vec<InputDigest>, results: Payload) -> Self {
        RunReport {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            inputs,
            units: results.standard_units(),
            results,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for key in self.results.standard_units().keys() {
            if !self.units.get(key).is_some_and(|u| !u.is_empty()) {
                return Err(Error::Schema(format!("no unit for `{key}`")));
            }
        }
        for input in &self.inputs {
            let hex_ok = input.sha256.len() == 64
                && input.sha256.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase());
            if !hex_ok {
                return Err(Error::Schema(format!(
                    "input `{}` has no valid sha256 digest",
                    input.source
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let text = report.to_json()?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_report(text: &str) -> Result<RunReport> {
    let report: RunReport =
        serde_json::from_str(text).map_err(|e| Error::parse("report", e.to_string()))?;
    report.validate()?;
    Ok(report)
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    parse_report(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Recomputes every input digest; returns one warning per input that is
/// missing or no longer matches.
pub fn verify_digests(report: &RunReport) -> Vec<String> {
    report
        .inputs
        .iter()
        .filter_map(|input| {
            let actual = match input.source.strip_prefix("builtin:") {
                Some(label) => builtin_source(label).map(|t| sha256_hex(t.as_bytes())),
                None => std::fs::read(&input.source).ok().map(|b| sha256_hex(&b)),
            };
            match actual {
                None => Some(format!("{} input `{}` cannot be read", input.role, input.source)),
                Some(d) if d != input.sha256 => Some(format!(
                    "{} input `{}` digest mismatch: recorded {}, actual {d}",
                    input.role, input.source, input.sha256
                )),
                Some(_) => None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{default_arch, PeType};
    use crate::costmodel::{default_cost_table, evaluate_ppa};
    use crate::dataflow::network_stats;
    use crate::regression::{fit_poly, Sample};
    use crate::workload::Preset;

    fn golden_point() -> DesignPoint {
        DesignPoint {
            cfg: AcceleratorConfig {
                pe_rows: 4,
                pe_cols: 8,
                glb_bytes: 65536,
                ifmap_spad_bytes: 64,
                filter_spad_bytes: 8,
                psum_spad_bytes: 128,
                dram_bw: 16.0,
                clock_hz: 2e8,
                pe_type: PeType::Light2,
            },
            feasible: true,
            ppa: Some(PpaResult {
                latency_s: 0.5,
                energy_j: 0.1,
                avg_power_w: 0.2,
                area_mm2: 1.25,
                throughput: 3e9,
                perf_per_area: 2.4e9,
                mac_j: 0.06,
                spad_j: 0.01,
                glb_j: 0.005,
                dram_j: 0.02,
                leak_j: 0.005,
            }),
            norm_perf_per_area: Some(2.5),
            norm_energy: Some(0.25),
            accuracy: None,
        }
    }

    #[test]
    fn golden_points_csv() {
        let mut infeasible = golden_point();
        infeasible.feasible = false;
        infeasible.ppa = None;
        infeasible.norm_perf_per_area = None;
        infeasible.norm_energy = None;
        infeasible.cfg.pe_type = PeType::Fp32;
        let text = points_csv_string(&[golden_point(), infeasible]);
        let expected = "pe_rows,pe_cols,glb_bytes,ifmap_spad_bytes,filter_spad_bytes,psum_spad_bytes,dram_bw,clock_hz,pe_type,feasible,latency_s,energy_j,avg_power_w,area_mm2,throughput,perf_per_area,mac_j,spad_j,glb_j,dram_j,leak_j,norm_perf_per_area,norm_energy,top1\n\
4,8,65536,64,8,128,16,200000000,LIGHT2,true,0.5,0.1,0.2,1.25,3000000000,2400000000,0.06,0.01,0.005,0.02,0.005,2.5,0.25,\n\
4,8,65536,64,8,128,16,200000000,FP32,false,,,,,,,,,,,,,,\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn points_csv_line_counts_and_round_trip() {
        assert_eq!(points_csv_string(&[]).lines().count(), 1);
        assert_eq!(points_csv_string(&[golden_point()]).lines().count(), 2);
        assert!(read_points_csv(&points_csv_string(&[])).unwrap().is_empty());

        let net = Preset::Resnet20.network();
        let table = default_cost_table().unwrap();
        let cfg = default_arch();
        let mut p = DesignPoint::evaluate(&net, cfg, &table);
        p.accuracy = Some(0.9137);
        p.norm_energy = Some(1.0 / 3.0);
        let back = read_points_csv(&points_csv_string(&[p.clone(), golden_point()])).unwrap();
        assert_eq!(back, vec![p, golden_point()]);
    }

    #[test]
    fn points_csv_rejects_bad_input() {
        assert!(read_points_csv("a,b\n1,2\n").is_err());
        let good = points_csv_string(&[golden_point()]);
        assert!(read_points_csv(&good.replace("LIGHT2", "LIGHT9")).is_err());
        assert!(read_points_csv(&good.replace(",true,", ",yes,")).is_err());
        assert!(read_points_csv(&good.replace(",0.5,", ",,")).is_err());
        assert!(read_points_csv(&good.replace(",true,", ",false,")).is_err());
    }

    fn ppa_report() -> RunReport {
        let net = Preset::Resnet20.network();
        let cfg = default_arch();
        let table = default_cost_table().unwrap();
        let payload = PpaPayload {
            network: net.name.clone(),
            stats: network_stats(&net, &cfg).unwrap(),
            ppa: evaluate_ppa(&net, &cfg, &table).unwrap(),
            config: cfg,
        };
        RunReport::new(
            "evaluate",
            vec![
                InputDigest::of_builtin("network", "network:resnet20").unwrap(),
                InputDigest::of_builtin("arch", "arch:default").unwrap(),
                InputDigest::of_builtin("cost_table", "cost_table:default").unwrap(),
            ],
            Payload::Ppa(Box::new(payload)),
        )
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let r = ppa_report();
        write_report(&r, &path).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back, r);
        assert!(verify_digests(&back).is_empty());

        let samples: Vec<Sample> = (0..10).map(|i| Sample::new(vec![f64::from(i)], f64::from(i * i))).collect();
        let mut model = fit_poly(&samples, 2, 2, 0).unwrap();
        model.target = "area".into();
        let r = RunReport::new("fit", vec![InputDigest::of_bytes("samples", "s.csv", b"x")], Payload::Model(Box::new(model)));
        assert_eq!(r.units["cv_rmse"], "mm^2");
        assert_eq!(parse_report(&r.to_json().unwrap()).unwrap(), r);

        let r = RunReport::new("explore", vec![], Payload::Points(vec![golden_point()]));
        assert_eq!(parse_report(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn tampered_digest_warns() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("arch.json");
        std::fs::write(&input, default_arch_source()).unwrap();
        let mut r = ppa_report();
        r.inputs.push(InputDigest::of_file("arch", &input).unwrap());
        assert!(verify_digests(&r).is_empty());

        r.inputs[0].sha256 = "0".repeat(64);
        std::fs::write(&input, "{}").unwrap();
        let warnings = verify_digests(&parse_report(&r.to_json().unwrap()).unwrap());
        assert_eq!(warnings.len(), 2);
        assert!(warnings[0].contains("digest mismatch"));

        std::fs::remove_file(&input).unwrap();
        assert!(verify_digests(&r).iter().any(|w| w.contains("cannot be read")));
    }

    #[test]
    fn missing_unit_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let mut r = ppa_report();
        r.units.remove("dram_j");
        assert!(matches!(write_report(&r, &path), Err(Error::Schema(m)) if m.contains("dram_j")));
        assert!(!path.exists());

        let mut r = ppa_report();
        r.inputs[0].sha256 = "abc".into();
        assert!(matches!(r.to_json(), Err(Error::Schema(_))));
    }

    #[test]
    fn builtin_labels() {
        assert!(builtin_source("network:resnet56").is_some());
        assert!(builtin_source("grid:default").is_some());
        assert!(builtin_source("network:nope").is_none());
        assert!(builtin_source("arch").is_none());
        assert_eq!(
            InputDigest::of_builtin("cost_table", "cost_table:default").unwrap().sha256,
            sha256_hex(default_cost_table_source().as_bytes())
        );
    }
}
