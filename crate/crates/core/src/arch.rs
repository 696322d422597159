//! One accelerator design point: PE grid, per-PE scratchpads, global buffer,
//! DRAM bandwidth, clock and PE precision type.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::{LayerConfig, Network};

/// Clock used when an architecture document does not set one.
pub const DEFAULT_CLOCK_HZ: f64 = 200e6;

/// Processing-element precision type.
///
/// LightPEs keep 8-bit activations and replace the multiplier with
/// shift-add logic; LIGHT1 uses 4-bit weights, LIGHT2 8-bit weights.
/// Every type accumulates into 32-bit partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PeType {
    #[serde(rename = "FP32")]
    Fp32,
    #[serde(rename = "INT16")]
    Int16,
    #[serde(rename = "LIGHT1")]
    Light1,
    #[serde(rename = "LIGHT2")]
    Light2,
}

impl PeType {
    pub const ALL: [PeType; 4] = [PeType::Fp32, PeType::Int16, PeType::Light1, PeType::Light2];

    pub fn act_bits(self) -> u32 {
        match self {
            PeType::Fp32 => 32,
            PeType::Int16 => 16,
            PeType::Light1 | PeType::Light2 => 8,
        }
    }

    pub fn wgt_bits(self) -> u32 {
        match self {
            PeType::Fp32 => 32,
            PeType::Int16 => 16,
            PeType::Light1 => 4,
            PeType::Light2 => 8,
        }
    }

    pub fn psum_bits(self) -> u32 {
        32
    }

    pub fn token(self) -> &'static str {
        match self {
            PeType::Fp32 => "FP32",
            PeType::Int16 => "INT16",
            PeType::Light1 => "LIGHT1",
            PeType::Light2 => "LIGHT2",
        }
    }
}

impl fmt::Display for PeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.token())
    }
}

impl FromStr for PeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PeType::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| Error::parse("PE type", format!("unknown PE type `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceleratorConfig {
    pub pe_rows: u32,
    pub pe_cols: u32,
    pub glb_bytes: u64,
    pub ifmap_spad_bytes: u64,
    pub filter_spad_bytes: u64,
    pub psum_spad_bytes: u64,
    /// Bytes per cycle.
    pub dram_bw: f64,
    #[serde(default = "default_clock")]
    pub clock_hz: f64,
    pub pe_type: PeType,
}

fn default_clock() -> f64 {
    DEFAULT_CLOCK_HZ
}

impl AcceleratorConfig {
    pub fn num_pes(&self) -> u64 {
        u64::from(self.pe_rows) * u64::from(self.pe_cols)
    }

    pub fn spad_bytes_per_pe(&self) -> u64 {
        self.ifmap_spad_bytes + self.filter_spad_bytes + self.psum_spad_bytes
    }

    pub fn with_pe_type(&self, pe_type: PeType) -> Self {
        AcceleratorConfig {
            pe_type,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses an architecture document. Field invariants are checked separately by
/// [`validate_config`] so callers can tell a malformed file from a bad value.
pub fn parse_arch(text: &str) -> Result<AcceleratorConfig> {
    serde_json::from_str(text).map_err(|e| Error::parse("architecture document", e.to_string()))
}

const BUNDLED_ARCH: &str = include_str!("../data/default_arch.json");

pub fn default_arch() -> AcceleratorConfig {
    parse_arch(BUNDLED_ARCH).expect("bundled architecture parses")
}

pub fn default_arch_source() -> &'static str {
    BUNDLED_ARCH
}

/// A failed design-point constraint. `layer` is `None` for the base invariants
/// that hold regardless of workload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub layer: Option<String>,
    pub field: &'static str,
    pub message: String,
}

impl Violation {
    pub fn is_capacity(&self) -> bool {
        self.layer.is_some()
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.layer {
            Some(layer) => write!(f, "layer `{layer}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// `floor(spad_bytes * 8 / entry_bits)`.
pub fn spad_capacity_entries(spad_bytes: u64, entry_bits: u32) -> u64 {
    spad_bytes * 8 / u64::from(entry_bits)
}

/// Checks the base invariants and, with a network, that every layer's
/// row-stationary working set (one filter row, one padded ifmap row, one psum
/// row) fits the scratchpads at this PE type's bit widths.
pub fn validate_config(cfg: &AcceleratorConfig, against: Option<&Network>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut base = |field: &'static str, ok: bool, message: &str| {
        if !ok {
            out.push(Violation {
                layer: None,
                field,
                message: message.to_string(),
            });
        }
    };
    base("pe_rows", cfg.pe_rows >= 1, "pe_rows must be ≥ 1");
    base("pe_cols", cfg.pe_cols >= 1, "pe_cols must be ≥ 1");
    base("glb_bytes", cfg.glb_bytes >= 1, "glb_bytes must be ≥ 1");
    base(
        "ifmap_spad_bytes",
        cfg.ifmap_spad_bytes >= 1,
        "ifmap_spad_bytes must be ≥ 1",
    );
    base(
        "filter_spad_bytes",
        cfg.filter_spad_bytes >= 1,
        "filter_spad_bytes must be ≥ 1",
    );
    base(
        "psum_spad_bytes",
        cfg.psum_spad_bytes >= 1,
        "psum_spad_bytes must be ≥ 1",
    );
    base(
        "dram_bw",
        cfg.dram_bw.is_finite() && cfg.dram_bw > 0.0,
        "dram_bw must be > 0",
    );
    base(
        "clock_hz",
        cfg.clock_hz.is_finite() && cfg.clock_hz > 0.0,
        "clock_hz must be > 0",
    );

    if let Some(net) = against {
        for layer in &net.layers {
            capacity_violations(cfg, layer, &mut out);
        }
    }
    out
}

/// [`validate_config`] restricted to a single layer.
pub fn validate_layer(cfg: &AcceleratorConfig, layer: &LayerConfig) -> Vec<Violation> {
    let mut out = validate_config(cfg, None);
    capacity_violations(cfg, layer, &mut out);
    out
}

fn capacity_violations(cfg: &AcceleratorConfig, layer: &LayerConfig, out: &mut Vec<Violation>) {
    let t = cfg.pe_type;
    let mut cap = |field: &'static str, spad_bytes: u64, bits: u32, need: u64, what: &str| {
        let have = spad_capacity_entries(spad_bytes, bits);
        if have < need {
            out.push(Violation {
                layer: Some(layer.name.clone()),
                field,
                message: format!(
                    "{field} holds {have} {bits}-bit entries, needs {need} for one {what}"
                ),
            });
        }
    };
    cap(
        "filter_spad_bytes",
        cfg.filter_spad_bytes,
        t.wgt_bits(),
        u64::from(layer.filter_width),
        "filter row",
    );
    cap(
        "ifmap_spad_bytes",
        cfg.ifmap_spad_bytes,
        t.act_bits(),
        layer.padded_width(),
        "padded input row",
    );
    cap(
        "psum_spad_bytes",
        cfg.psum_spad_bytes,
        t.psum_bits(),
        u64::from(layer.out_width()),
        "output row",
    );
}

/// [`validate_config`] as a `Result`.
pub fn check_config(cfg: &AcceleratorConfig, against: Option<&Network>) -> Result<()> {
    let violations = validate_config(cfg, against);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Infeasible(violations))
    }
}
