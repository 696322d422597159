//! Acceptance criteria. Each test prints one `criterion N ... PASS|FAIL` line;
//! run with `--nocapture` to see them.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use accel_ppa::arch::{AcceleratorConfig, PeType};
use accel_ppa::costmodel::{accelerator_area, default_cost_table, PpaResult};
use accel_ppa::dataflow::{layer_stats, simulate_layer_oracle};
use accel_ppa::dse::{
    best_per_type, default_grid, enumerate_space, explore, join_accuracy, pareto_front, AccuracyTable, DesignPoint,
    Direction, Exploration, Metric, Objective,
};
use accel_ppa::regression::{design_features, fit_poly, Sample, TIE_TOLERANCE};
use accel_ppa::report::points_csv_string;
use accel_ppa::workload::{LayerConfig, Preset};

const ORACLE_CASES: usize = 1000;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const PARETO_SETS: usize = 100;
const PARETO_BUDGET: Duration = Duration::from_secs(10);
const RECOVERY_REL_TOL: f64 = 1e-9;
const AREA_CV_LIMIT: f64 = 0.01;
const SPREAD_PPA: f64 = 5.0;
const SPREAD_ENERGY: f64 = 35.0;
const SPREAD_BUDGET: Duration = Duration::from_secs(120);
const PPA_RATIO: (f64, f64) = (3.0, 7.0);
const ENERGY_RATIO: (f64, f64) = (1.0 / 7.0, 1.0 / 3.0);

fn verdict(n: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {n} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} {name} failed: {detail}");
}

fn explorations() -> &'static [(Preset, Exploration)] {
    static CELL: OnceLock<Vec<(Preset, Exploration)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = default_grid();
        let table = default_cost_table().unwrap();
        Preset::PUBLISHED
            .iter()
            .map(|&p| (p, explore(&p.network(), &grid, &table).unwrap()))
            .collect()
    })
}

fn random_case(rng: &mut ChaCha8Rng) -> (LayerConfig, AcceleratorConfig) {
    let pe_type = PeType::ALL[rng.gen_range(0..4)];
    let layer = if rng.gen_bool(0.15) {
        LayerConfig::fc("fc", rng.gen_range(1..=24), rng.gen_range(1..=12)).with_batch(rng.gen_range(1..=3))
    } else {
        let pad = rng.gen_range(0..=2);
        let h = rng.gen_range(1..=12);
        let w = rng.gen_range(1..=12);
        let r = rng.gen_range(1..=(h + 2 * pad).min(5));
        let mut l = LayerConfig::conv(
            "conv",
            rng.gen_range(1..=4),
            rng.gen_range(1..=4),
            h,
            w,
            r,
            rng.gen_range(1..=3),
            pad,
        );
        l.filter_width = rng.gen_range(1..=(w + 2 * pad).min(5));
        l.with_batch(rng.gen_range(1..=2))
    };
    let act_bytes = u64::from(pe_type.act_bits()).div_ceil(8);
    let wgt_bytes = u64::from(pe_type.wgt_bits()).div_ceil(8);
    let cfg = AcceleratorConfig {
        pe_rows: rng.gen_range(1..=8),
        pe_cols: rng.gen_range(1..=8),
        glb_bytes: rng.gen_range(1..=4096),
        ifmap_spad_bytes: layer.padded_width() * act_bytes + rng.gen_range(0..8),
        filter_spad_bytes: u64::from(layer.filter_width) * wgt_bytes + rng.gen_range(0..8),
        psum_spad_bytes: u64::from(layer.out_width()) * 4 + rng.gen_range(0..8),
        dram_bw: f64::from(rng.gen_range(1u32..=64)) / 4.0,
        clock_hz: 1e8,
        pe_type,
    };
    (layer, cfg)
}

#[test]
fn criterion_1_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bac1e);
    let start = Instant::now();
    let mut failures = Vec::new();
    for case in 0..ORACLE_CASES {
        let (layer, cfg) = random_case(&mut rng);
        let analytical = layer_stats(&layer, &cfg).unwrap();
        let simulated = simulate_layer_oracle(&layer, &cfg).unwrap();
        if analytical != simulated || analytical.first_mismatch(&simulated).is_some() {
            failures.push(format!("case {case}: {:?}", analytical.first_mismatch(&simulated)));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "oracle equivalence",
        failures.is_empty() && elapsed < ORACLE_BUDGET,
        &format!(
            "{ORACLE_CASES} random cases, {} mismatches {:?}, {:.2?} < {ORACLE_BUDGET:?}",
            failures.len(),
            failures.first(),
            elapsed
        ),
    );
}

fn pareto_point(id: u32, values: &[f64]) -> DesignPoint {
    let mut cfg = accel_ppa::arch::default_arch();
    cfg.pe_rows = id;
    let ppa = PpaResult {
        latency_s: values.get(2).copied().unwrap_or(1.0),
        energy_j: values[1],
        avg_power_w: 1.0,
        area_mm2: 1.0,
        throughput: 1.0,
        perf_per_area: values[0],
        mac_j: values[1],
        spad_j: 0.0,
        glb_j: 0.0,
        dram_j: 0.0,
        leak_j: 0.0,
    };
    DesignPoint {
        cfg,
        feasible: true,
        ppa: Some(ppa),
        norm_perf_per_area: None,
        norm_energy: None,
        accuracy: None,
    }
}

fn brute_force_front(values: &[Vec<f64>], dirs: &[Direction]) -> Vec<usize> {
    let better_eq = |a: f64, b: f64, d: Direction| match d {
        Direction::Maximize => a >= b,
        Direction::Minimize => a <= b,
    };
    (0..values.len())
        .filter(|&i| {
            !(0..values.len()).any(|j| {
                j != i
                    && dirs.iter().enumerate().all(|(k, &d)| better_eq(values[j][k], values[i][k], d))
                    && (0..dirs.len()).any(|k| values[j][k] != values[i][k])
            })
        })
        .collect()
}

#[test]
fn criterion_2_pareto_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfa7e);
    let start = Instant::now();
    let mut bad = 0;
    for set in 0..PARETO_SETS {
        let n = rng.gen_range(1..=200);
        let k = if set % 2 == 0 { 2 } else { 3 };
        let coarse = rng.gen_bool(0.5);
        let values: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..k)
                    .map(|_| if coarse { f64::from(rng.gen_range(1..=6)) } else { rng.gen_range(0.01..100.0) })
                    .collect()
            })
            .collect();
        let points: Vec<DesignPoint> = values.iter().enumerate().map(|(i, v)| pareto_point(i as u32, v)).collect();
        let mut objectives = vec![Objective::max(Metric::PerfPerArea), Objective::min(Metric::Energy)];
        if k == 3 {
            objectives.push(Objective::min(Metric::Latency));
        }
        let dirs: Vec<Direction> = objectives.iter().map(|o| o.direction).collect();
        let front = pareto_front(&points, &objectives).unwrap();
        let mut got: Vec<usize> = front.iter().map(|p| p.cfg.pe_rows as usize).collect();
        let sorted = got.windows(2).all(|w| values[w[0]][0] <= values[w[1]][0]);
        got.sort_unstable();
        if got != brute_force_front(&values, &dirs) || !sorted {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        "pareto correctness",
        bad == 0 && elapsed < PARETO_BUDGET,
        &format!("{PARETO_SETS} random sets (n <= 200, 2 and 3 objectives), {bad} differ, {elapsed:.2?} < {PARETO_BUDGET:?}"),
    );
}

#[test]
fn criterion_3_regression_recovery() {
    let configs = enumerate_space(&default_grid()).unwrap();
    let features: Vec<Vec<f64>> = configs.iter().map(design_features).collect();
    type Generator = fn(&[f64]) -> f64;
    let generators: [(usize, Generator); 3] = [
        (1, |x| 3.0 + 2.0 * x[0] - 0.5 * x[1] + x[2] / 65536.0 + 0.01 * x[3] + x[6]),
        (2, |x| 1.0 + x[0] * x[1] + (x[2] / 1024.0) * 0.25 * x[0] + x[7] * x[1] - x[0]),
        (3, |x| 5.0 + x[0] * x[1] * x[6] + x[0] * x[0] * x[1] / 8.0 + x[2] / 4096.0),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (degree, g) in generators {
        let samples: Vec<Sample> = features.iter().map(|f| Sample::new(f.clone(), g(f))).collect();
        let model = fit_poly(&samples, 3, 5, 11).unwrap();
        let worst = samples
            .iter()
            .map(|s| (model.predict(&s.features).unwrap() - s.target).abs() / s.target.abs())
            .fold(0.0, f64::max);
        ok &= model.degree == degree && worst < RECOVERY_REL_TOL;
        lines.push(format!("degree {degree}: selected {} max rel err {worst:.1e}", model.degree));
    }

    let table = default_cost_table().unwrap();
    let area: Vec<Sample> = configs
        .iter()
        .zip(&features)
        .map(|(c, f)| Sample::new(f.clone(), accelerator_area(c, &table)))
        .collect();
    let model = fit_poly(&area, 3, 5, 11).unwrap();
    let mean = area.iter().map(|s| s.target).sum::<f64>() / area.len() as f64;
    let rms = (area.iter().map(|s| s.target * s.target).sum::<f64>() / area.len() as f64).sqrt();
    let minimal = model.cv_rmse_by_degree.iter().all(|&e| model.cv_rmse <= e + TIE_TOLERANCE * rms);
    let rel_cv = model.cv_rmse / mean;
    ok &= model.degree <= 3 && rel_cv < AREA_CV_LIMIT && minimal;
    lines.push(format!("area: degree {} cv rmse/mean {rel_cv:.1e} < {AREA_CV_LIMIT}", model.degree));
    verdict(3, "regression recovery", ok, &lines.join("; "));
}

fn spans(points: &[DesignPoint]) -> (f64, f64) {
    let span = |f: fn(&PpaResult) -> f64| {
        let v: Vec<f64> = points.iter().filter_map(|p| p.ppa.as_ref().map(f)).collect();
        v.iter().copied().fold(f64::MIN, f64::max) / v.iter().copied().fold(f64::MAX, f64::min)
    };
    (span(|r| r.perf_per_area), span(|r| r.energy_j))
}

#[test]
fn criterion_4_design_space_spread() {
    let start = Instant::now();
    let result = explore(&Preset::Resnet20.network(), &default_grid(), &default_cost_table().unwrap()).unwrap();
    let elapsed = start.elapsed();
    let (ppa, energy) = spans(&result.points);
    verdict(
        4,
        "design-space spread",
        ppa > SPREAD_PPA && energy > SPREAD_ENERGY && elapsed < SPREAD_BUDGET,
        &format!(
            "resnet20 perf/area {ppa:.1}x > {SPREAD_PPA}x, energy {energy:.1}x > {SPREAD_ENERGY}x, {} feasible of {}, {elapsed:.2?}",
            result.feasible().count(),
            result.points.len()
        ),
    );
}

#[test]
fn criterion_5_pe_type_ordering() {
    let order = [PeType::Fp32, PeType::Int16, PeType::Light2, PeType::Light1];
    let mut shapes = 0usize;
    let mut violations = Vec::new();
    for (preset, ex) in explorations() {
        // Enumeration puts the PE type innermost, so each chunk is one shape.
        for chunk in ex.points.chunks(PeType::ALL.len()) {
            shapes += 1;
            let by_type: Vec<&PpaResult> = order
                .iter()
                .filter_map(|t| chunk.iter().find(|p| p.cfg.pe_type == *t).and_then(|p| p.ppa.as_ref()))
                .collect();
            for w in by_type.windows(2) {
                if !(w[0].area_mm2 > w[1].area_mm2
                    && w[0].energy_j > w[1].energy_j
                    && w[0].perf_per_area < w[1].perf_per_area)
                {
                    violations.push(format!("{} {:?}", preset.name(), chunk[0].cfg));
                }
            }
        }
    }
    verdict(
        5,
        "pe-type ordering",
        violations.is_empty(),
        &format!("{shapes} shapes over 6 networks, {} violations {:?}", violations.len(), violations.first()),
    );
}

fn accuracy_tables(network: &str) -> Vec<AccuracyTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc);
    let mut fixed: Vec<(f64, f64, f64, f64)> = vec![(0.92, 0.918, 0.915, 0.905), (0.70, 0.70, 0.70, 0.69), (0.95, 0.94, 0.96, 0.93)];
    for _ in 0..5 {
        let fp = rng.gen_range(0.6..0.95);
        let l1 = fp - rng.gen_range(0.0..=0.02);
        let l2 = rng.gen_range(l1..=fp) + 1e-4;
        fixed.push((fp, fp - rng.gen_range(0.0..0.01), l2.min(fp + 0.02), l1));
    }
    fixed
        .into_iter()
        .map(|(fp, int16, l2, l1)| {
            let mut t = AccuracyTable::new();
            t.insert(network, PeType::Fp32, fp).unwrap();
            t.insert(network, PeType::Int16, int16).unwrap();
            t.insert(network, PeType::Light2, l2).unwrap();
            t.insert(network, PeType::Light1, l1).unwrap();
            t
        })
        .collect()
}

fn best(points: &[DesignPoint], objective: Objective, t: PeType) -> DesignPoint {
    best_per_type(points, objective)
        .into_iter()
        .find(|p| p.cfg.pe_type == t)
        .unwrap()
}

#[test]
fn criterion_6_lightpes_on_front() {
    let mut ok = true;
    let mut lines = Vec::new();
    let (mut sum_ppa, mut sum_energy) = (0.0, 0.0);
    for (preset, ex) in explorations() {
        let name = preset.name();
        let mut on_front = true;
        for table in accuracy_tables(name) {
            let joined = join_accuracy(&ex.points, &table, name).unwrap();
            for hw in [Objective::max(Metric::PerfPerArea), Objective::min(Metric::Energy)] {
                let front = pareto_front(&joined, &[Objective::max(Metric::Top1), hw]).unwrap();
                for t in [PeType::Light1, PeType::Light2] {
                    on_front &= front.contains(&best(&joined, hw, t));
                }
            }
        }
        let ppa = Objective::max(Metric::PerfPerArea);
        let energy = Objective::min(Metric::Energy);
        let ratio = |o: Objective, f: fn(&PpaResult) -> f64| {
            f(best(&ex.points, o, PeType::Light1).ppa.as_ref().unwrap())
                / f(best(&ex.points, o, PeType::Int16).ppa.as_ref().unwrap())
        };
        let r_ppa = ratio(ppa, |r| r.perf_per_area);
        let r_energy = ratio(energy, |r| r.energy_j);
        sum_ppa += r_ppa;
        sum_energy += r_energy;
        let in_bracket = (PPA_RATIO.0..=PPA_RATIO.1).contains(&r_ppa)
            && (ENERGY_RATIO.0..=ENERGY_RATIO.1).contains(&r_energy);
        ok &= on_front && in_bracket;
        lines.push(format!("{name}: fronts {on_front}, perf/area {r_ppa:.2}x, energy {r_energy:.3}"));
    }
    lines.push(format!(
        "mean perf/area {:.2}x in [{}, {}], mean energy {:.3} in [{:.3}, {:.3}]",
        sum_ppa / 6.0,
        PPA_RATIO.0,
        PPA_RATIO.1,
        sum_energy / 6.0,
        ENERGY_RATIO.0,
        ENERGY_RATIO.1
    ));
    verdict(6, "lightpes on pareto front", ok, &lines.join("; "));
}

#[test]
fn criterion_7_conservation_and_determinism() {
    let mut checked = 0usize;
    let mut broken = 0usize;
    for (_, ex) in explorations() {
        for r in ex.points.iter().filter_map(|p| p.ppa.as_ref()) {
            checked += 1;
            let sum = r.mac_j + r.spad_j + r.glb_j + r.dram_j + r.leak_j;
            if sum.to_bits() != r.energy_j.to_bits() {
                broken += 1;
            }
        }
    }
    let grid = default_grid();
    let table = default_cost_table().unwrap();
    let net = Preset::Vgg16Cifar.network();
    let a = points_csv_string(&explore(&net, &grid, &table).unwrap().points);
    let b = points_csv_string(&explore(&net, &grid, &table).unwrap().points);
    verdict(
        7,
        "conservation and determinism",
        broken == 0 && a == b,
        &format!(
            "{checked} results, {broken} with component sum != total; repeated explore byte-identical: {}",
            a == b
        ),
    );
}
