//! Power, energy, latency and area from access statistics and a per-PE-type
//! cost table.
//!
//! Table units are fixed by the file schema: energies in picojoules (per MAC
//! or per bit accessed), areas in square micrometres, leakage in milliwatts
//! per square millimetre. Results are reported in SI units and mm².

use serde::{Deserialize, Serialize};

use crate::arch::{AcceleratorConfig, PeType};
use crate::dataflow::{network_stats, AccessStats};
use crate::error::{Error, Result};
use crate::workload::Network;

const PJ: f64 = 1e-12;
const UM2_PER_MM2: f64 = 1e6;
const MW: f64 = 1e-3;

const BUNDLED_TABLE: &str = include_str!("../data/default_cost_table.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeCost {
    /// pJ per MAC.
    pub e_mac: f64,
    /// µm² of MAC datapath and control, scratchpads excluded.
    pub a_pe_logic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerType<T> {
    #[serde(rename = "FP32")]
    pub fp32: T,
    #[serde(rename = "INT16")]
    pub int16: T,
    #[serde(rename = "LIGHT1")]
    pub light1: T,
    #[serde(rename = "LIGHT2")]
    pub light2: T,
}

impl<T> PerType<T> {
    pub fn get(&self, t: PeType) -> &T {
        match t {
            PeType::Fp32 => &self.fp32,
            PeType::Int16 => &self.int16,
            PeType::Light1 => &self.light1,
            PeType::Light2 => &self.light2,
        }
    }

    pub fn get_mut(&mut self, t: PeType) -> &mut T {
        match t {
            PeType::Fp32 => &mut self.fp32,
            PeType::Int16 => &mut self.int16,
            PeType::Light1 => &mut self.light1,
            PeType::Light2 => &mut self.light2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostTable {
    pub pe: PerType<PeCost>,
    /// pJ per bit, scratchpad access.
    pub e_spad_bit: f64,
    /// pJ per bit, global buffer access.
    pub e_glb_bit: f64,
    /// pJ per bit, off-chip transfer.
    pub e_dram_bit: f64,
    /// µm² per scratchpad byte.
    pub a_spad_byte: f64,
    /// µm² per global buffer byte.
    pub a_glb_byte: f64,
    /// mW per mm².
    pub p_leak_density: f64,
    /// Multiplier on total area for interconnect and control.
    pub overhead_factor: f64,
}

/// Strict precision ordering the table must respect, most expensive first.
const COST_ORDER: [PeType; 4] = [PeType::Fp32, PeType::Int16, PeType::Light2, PeType::Light1];

impl CostTable {
    /// Checks positivity and the FP32 > INT16 > LIGHT2 > LIGHT1 ordering of
    /// MAC energy and PE logic area.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCostTable(m));
        let mut values: Vec<(String, f64)> = vec![
            ("e_spad_bit".into(), self.e_spad_bit),
            ("e_glb_bit".into(), self.e_glb_bit),
            ("e_dram_bit".into(), self.e_dram_bit),
            ("a_spad_byte".into(), self.a_spad_byte),
            ("a_glb_byte".into(), self.a_glb_byte),
            ("p_leak_density".into(), self.p_leak_density),
            ("overhead_factor".into(), self.overhead_factor),
        ];
        for t in PeType::ALL {
            let c = self.pe.get(t);
            values.push((format!("{t}.e_mac"), c.e_mac));
            values.push((format!("{t}.a_pe_logic"), c.a_pe_logic));
        }
        for (name, v) in values {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be a positive finite number, got {v}"));
            }
        }
        if self.overhead_factor < 1.0 {
            return bad(format!(
                "overhead_factor must be >= 1, got {}",
                self.overhead_factor
            ));
        }
        for pair in COST_ORDER.windows(2) {
            let (hi, lo) = (self.pe.get(pair[0]), self.pe.get(pair[1]));
            if hi.e_mac <= lo.e_mac {
                return bad(format!("e_mac must satisfy {} > {}", pair[0], pair[1]));
            }
            if hi.a_pe_logic <= lo.a_pe_logic {
                return bad(format!("a_pe_logic must satisfy {} > {}", pair[0], pair[1]));
            }
        }
        Ok(())
    }

    /// Multiplies every energy and the leakage density by `c`.
    pub fn scale_energies(&self, c: f64) -> CostTable {
        let mut t = self.clone();
        for pe in PeType::ALL {
            t.pe.get_mut(pe).e_mac *= c;
        }
        t.e_spad_bit *= c;
        t.e_glb_bit *= c;
        t.e_dram_bit *= c;
        t.p_leak_density *= c;
        t
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cost table serializes")
    }
}

/// Parses and validates a cost-table document.
pub fn parse_cost_table(text: &str) -> Result<CostTable> {
    let table: CostTable =
        serde_json::from_str(text).map_err(|e| Error::parse("cost table", e.to_string()))?;
    table.validate()?;
    Ok(table)
}

/// The bundled calibrated table.
pub fn default_cost_table() -> Result<CostTable> {
    parse_cost_table(BUNDLED_TABLE)
}

/// Raw text of the bundled table, for digests.
pub fn default_cost_table_source() -> &'static str {
    BUNDLED_TABLE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpaResult {
    pub latency_s: f64,
    pub energy_j: f64,
    pub avg_power_w: f64,
    pub area_mm2: f64,
    /// MACs per second.
    pub throughput: f64,
    /// MACs per second per mm².
    pub perf_per_area: f64,
    pub mac_j: f64,
    pub spad_j: f64,
    pub glb_j: f64,
    pub dram_j: f64,
    pub leak_j: f64,
}

/// Total silicon area in mm².
pub fn accelerator_area(cfg: &AcceleratorConfig, table: &CostTable) -> f64 {
    let pe = table.pe.get(cfg.pe_type).a_pe_logic
        + cfg.spad_bytes_per_pe() as f64 * table.a_spad_byte;
    let um2 = table.overhead_factor
        * (cfg.num_pes() as f64 * pe + cfg.glb_bytes as f64 * table.a_glb_byte);
    um2 / UM2_PER_MM2
}

pub fn evaluate_ppa(net: &Network, cfg: &AcceleratorConfig, table: &CostTable) -> Result<PpaResult> {
    let stats = network_stats(net, cfg)?;
    Ok(ppa_from_stats(&stats, cfg, table))
}

/// Energy and derived metrics for already-computed statistics.
pub fn ppa_from_stats(stats: &AccessStats, cfg: &AcceleratorConfig, table: &CostTable) -> PpaResult {
    let t = cfg.pe_type;
    let (act, wgt, psum) = (
        f64::from(t.act_bits()),
        f64::from(t.wgt_bits()),
        f64::from(t.psum_bits()),
    );

    let latency_s = stats.latency_cycles as f64 / cfg.clock_hz;
    let area_mm2 = accelerator_area(cfg, table);

    let mac_j = stats.macs as f64 * table.pe.get(t).e_mac * PJ;
    let spad_bits = stats.spad_ifmap_reads as f64 * act
        + stats.spad_filter_reads as f64 * wgt
        + (stats.spad_psum_reads + stats.spad_psum_writes) as f64 * psum;
    let spad_j = spad_bits * table.e_spad_bit * PJ;
    // final outputs are written back at activation precision
    let glb_bits = stats.glb_ifmap_reads as f64 * act
        + stats.glb_filter_reads as f64 * wgt
        + stats.glb_ofmap_writes as f64 * act;
    let glb_j = glb_bits * table.e_glb_bit * PJ;
    let dram_j = stats.dram_bytes() as f64 * 8.0 * table.e_dram_bit * PJ;
    let leak_j = table.p_leak_density * MW * area_mm2 * latency_s;

    let energy_j = mac_j + spad_j + glb_j + dram_j + leak_j;
    let throughput = stats.macs as f64 / latency_s;
    PpaResult {
        latency_s,
        energy_j,
        avg_power_w: energy_j / latency_s,
        area_mm2,
        throughput,
        perf_per_area: throughput / area_mm2,
        mac_j,
        spad_j,
        glb_j,
        dram_j,
        leak_j,
    }
}
