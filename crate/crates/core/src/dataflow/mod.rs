//! Row-stationary mapping of a layer onto the PE array.
//!
//! Schedule: each PE keeps one filter row stationary and runs a 1-D
//! convolution pass of `F·S` MACs. A *PE set* is `set_rows` PEs tall (one per
//! filter row) and `E_strip` PEs wide (one per output row); partial sums
//! accumulate vertically inside the set and temporally across input channels
//! and vertical folds, so only final outputs leave the array. `K` sets are
//! tiled onto the array and process independent passes concurrently.
//!
//! Passes are ordered `(m, c, fold, n, strip)`, filter-outermost, so each
//! filter row is fetched from the global buffer once per layer. The ifmap row
//! is refilled from the global buffer for every pass and PE; reuse across
//! output channels is not modeled. Scratchpad fills overlap compute.
//!
//! Latency is a roofline: the larger of compute cycles and DRAM transfer
//! cycles.

mod oracle;

use serde::{Deserialize, Serialize};

use crate::arch::{validate_layer, AcceleratorConfig};
use crate::error::{Error, Result};
use crate::workload::{layer_macs, LayerConfig, Network};

pub use oracle::{simulate_layer_oracle, ORACLE_MAC_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mapping {
    /// Filter rows held by one PE set, `min(R, pe_rows)`.
    pub set_rows: u64,
    /// Output rows per set, `min(E, pe_cols)`.
    pub strip_width: u64,
    /// Sets that fit on the array at once.
    pub sets_fitting: u64,
    pub vertical_folds: u64,
    pub strips: u64,
    pub set_passes_total: u64,
    pub utilization: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccessStats {
    pub macs: u64,
    pub compute_cycles: u64,
    pub dram_cycles: u64,
    pub latency_cycles: u64,
    pub spad_ifmap_reads: u64,
    pub spad_filter_reads: u64,
    pub spad_psum_reads: u64,
    pub spad_psum_writes: u64,
    pub glb_ifmap_reads: u64,
    pub glb_filter_reads: u64,
    pub glb_ofmap_writes: u64,
    pub dram_ifmap_bytes: u64,
    pub dram_filter_bytes: u64,
    pub dram_ofmap_bytes: u64,
    pub refetch_factor: u64,
    pub utilization: f64,
}

impl AccessStats {
    pub fn dram_bytes(&self) -> u64 {
        self.dram_ifmap_bytes + self.dram_filter_bytes + self.dram_ofmap_bytes
    }

    /// Integer fields in declaration order, for side-by-side reports.
    pub fn counts(&self) -> [(&'static str, u64); 15] {
        [
            ("macs", self.macs),
            ("compute_cycles", self.compute_cycles),
            ("dram_cycles", self.dram_cycles),
            ("latency_cycles", self.latency_cycles),
            ("spad_ifmap_reads", self.spad_ifmap_reads),
            ("spad_filter_reads", self.spad_filter_reads),
            ("spad_psum_reads", self.spad_psum_reads),
            ("spad_psum_writes", self.spad_psum_writes),
            ("glb_ifmap_reads", self.glb_ifmap_reads),
            ("glb_filter_reads", self.glb_filter_reads),
            ("glb_ofmap_writes", self.glb_ofmap_writes),
            ("dram_ifmap_bytes", self.dram_ifmap_bytes),
            ("dram_filter_bytes", self.dram_filter_bytes),
            ("dram_ofmap_bytes", self.dram_ofmap_bytes),
            ("refetch_factor", self.refetch_factor),
        ]
    }

    /// Name of the first field where `self` and `other` differ, comparing
    /// utilization bit-for-bit.
    pub fn first_mismatch(&self, other: &AccessStats) -> Option<&'static str> {
        self.counts()
            .iter()
            .zip(other.counts().iter())
            .find(|(a, b)| a.1 != b.1)
            .map(|(a, _)| a.0)
            .or_else(|| {
                (self.utilization.to_bits() != other.utilization.to_bits())
                    .then_some("utilization")
            })
    }
}

/// Bytes needed to hold `entries` values packed at `bits` each.
pub fn packed_bytes(entries: u64, bits: u32) -> u64 {
    u64::div_ceil(entries * u64::from(bits), 8)
}

fn precondition(layer: &LayerConfig, cfg: &AcceleratorConfig) -> Result<()> {
    layer.validate()?;
    let violations = validate_layer(cfg, layer);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Infeasible(violations))
    }
}

pub fn map_layer(layer: &LayerConfig, cfg: &AcceleratorConfig) -> Result<Mapping> {
    precondition(layer, cfg)?;
    Ok(mapping_unchecked(layer, cfg))
}

fn mapping_unchecked(layer: &LayerConfig, cfg: &AcceleratorConfig) -> Mapping {
    let rows = u64::from(cfg.pe_rows);
    let cols = u64::from(cfg.pe_cols);
    let r = u64::from(layer.filter_height);
    let e = u64::from(layer.out_height());

    let set_rows = r.min(rows);
    let vertical_folds = u64::div_ceil(r, rows);
    let strip_width = e.min(cols);
    let strips = u64::div_ceil(e, strip_width);
    let sets_fitting = (rows / set_rows) * (cols / strip_width);
    let set_passes_total = u64::from(layer.batch)
        * u64::from(layer.out_channels)
        * u64::from(layer.in_channels)
        * strips
        * vertical_folds;
    let active = set_rows * strip_width * sets_fitting.min(set_passes_total);
    Mapping {
        set_rows,
        strip_width,
        sets_fitting,
        vertical_folds,
        strips,
        set_passes_total,
        utilization: active as f64 / (rows * cols) as f64,
    }
}

/// Returns `(ifmap, filter, ofmap)` DRAM bytes, the refetch factor and DRAM cycles.
fn dram_traffic(
    ifmap_entries: u64,
    filter_entries: u64,
    ofmap_entries: u64,
    cfg: &AcceleratorConfig,
) -> (u64, u64, u64, u64, u64) {
    let t = cfg.pe_type;
    let ifmap_bytes = packed_bytes(ifmap_entries, t.act_bits());
    let filter_bytes = packed_bytes(filter_entries, t.wgt_bits());
    let refetch = u64::div_ceil(ifmap_bytes + filter_bytes, cfg.glb_bytes).max(1);
    let dram_ifmap = refetch * ifmap_bytes;
    let dram_filter = refetch * filter_bytes;
    let dram_ofmap = packed_bytes(ofmap_entries, t.act_bits());
    let total = dram_ifmap + dram_filter + dram_ofmap;
    let dram_cycles = (total as f64 / cfg.dram_bw).ceil() as u64;
    (dram_ifmap, dram_filter, dram_ofmap, refetch, dram_cycles)
}

pub fn layer_stats(layer: &LayerConfig, cfg: &AcceleratorConfig) -> Result<AccessStats> {
    let map = map_layer(layer, cfg)?;

    let n = u64::from(layer.batch);
    let m = u64::from(layer.out_channels);
    let c = u64::from(layer.in_channels);
    let (h, w) = (u64::from(layer.in_height), u64::from(layer.in_width));
    let (r, s) = (u64::from(layer.filter_height), u64::from(layer.filter_width));
    let (e, f) = (u64::from(layer.out_height()), u64::from(layer.out_width()));

    let macs = layer_macs(layer);
    let compute_cycles = u64::div_ceil(map.set_passes_total, map.sets_fitting) * f * s;
    let (dram_ifmap_bytes, dram_filter_bytes, dram_ofmap_bytes, refetch_factor, dram_cycles) =
        dram_traffic(n * c * h * w, m * c * r * s, n * m * e * f, cfg);

    Ok(AccessStats {
        macs,
        compute_cycles,
        dram_cycles,
        latency_cycles: compute_cycles.max(dram_cycles),
        spad_ifmap_reads: macs,
        spad_filter_reads: macs,
        spad_psum_reads: macs,
        spad_psum_writes: macs,
        glb_ifmap_reads: n * m * c * e * r * layer.padded_width(),
        glb_filter_reads: m * c * r * s,
        glb_ofmap_writes: n * m * e * f,
        dram_ifmap_bytes,
        dram_filter_bytes,
        dram_ofmap_bytes,
        refetch_factor,
        utilization: map.utilization,
    })
}

/// Sums per-layer statistics for sequential execution.
///
/// Latency is the sum of per-layer roofline latencies, utilization the
/// MAC-weighted mean, and `refetch_factor` the worst layer's factor.
pub fn network_stats(net: &Network, cfg: &AcceleratorConfig) -> Result<AccessStats> {
    let per_layer = net
        .layers
        .iter()
        .map(|l| layer_stats(l, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_stats(&per_layer))
}

pub(crate) fn sum_stats(layers: &[AccessStats]) -> AccessStats {
    let mut acc = AccessStats::default();
    let mut weighted_util = 0.0;
    for s in layers {
        acc.macs += s.macs;
        acc.compute_cycles += s.compute_cycles;
        acc.dram_cycles += s.dram_cycles;
        acc.latency_cycles += s.latency_cycles;
        acc.spad_ifmap_reads += s.spad_ifmap_reads;
        acc.spad_filter_reads += s.spad_filter_reads;
        acc.spad_psum_reads += s.spad_psum_reads;
        acc.spad_psum_writes += s.spad_psum_writes;
        acc.glb_ifmap_reads += s.glb_ifmap_reads;
        acc.glb_filter_reads += s.glb_filter_reads;
        acc.glb_ofmap_writes += s.glb_ofmap_writes;
        acc.dram_ifmap_bytes += s.dram_ifmap_bytes;
        acc.dram_filter_bytes += s.dram_filter_bytes;
        acc.dram_ofmap_bytes += s.dram_ofmap_bytes;
        acc.refetch_factor = acc.refetch_factor.max(s.refetch_factor);
        weighted_util += s.utilization * s.macs as f64;
    }
    if acc.macs > 0 {
        acc.utilization = weighted_util / acc.macs as f64;
    }
    acc
}
