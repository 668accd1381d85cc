use std::path::Path;

use spinguide_core::analysis::{
    chain_compare, sweep_corner, sweep_coupling, sweep_interference, sweep_xjunction, MetricsReport,
};
use spinguide_core::{FidelityConvention, FinalState, SplitStepPropagator, SweepTable};

use crate::config::{
    default_corner_theta, default_xjunction_theta, ChainCompareConfig, InterfereConfig, RunConfig,
    SweepConfig,
};
use crate::error::CliError;
use crate::output::{density_text, metadata_text, KeyValues, MetadataExtras, OutDir, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Corner,
    Xjunction,
    Coupling,
}

/// Settings given on the command line; they override the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub snapshot_stride: Option<usize>,
    pub convention: Option<FidelityConvention>,
}

/// Folds command-line overrides into the config so the embedded copy in the
/// metadata reproduces the run on its own.
pub fn resolve(mut cfg: RunConfig, ov: Overrides) -> RunConfig {
    if let Some(stride) = ov.snapshot_stride.or(cfg.outputs.snapshot_stride) {
        cfg.scenario.solver.snapshot_stride = stride;
    }
    cfg.outputs.snapshot_stride = None;
    if let Some(conv) = ov.convention {
        cfg.outputs.convention = conv;
    }
    cfg.outputs.directory = None;
    cfg
}

fn metrics_text(report: &MetricsReport) -> Result<String, CliError> {
    let mut kv = KeyValues::default();
    kv.text(
        "convention",
        match report.convention {
            FidelityConvention::Literal => "literal",
            FidelityConvention::PhaseMatched => "phase_matched",
        },
    );
    kv.maybe("fidelity", report.fidelity)?;
    kv.maybe("reflection", report.reflection)?;
    kv.maybe("transmission", report.transmission)?;
    kv.maybe("total_fidelity", report.total_fidelity)?;
    kv.number("left_fraction", report.left_fraction)?;
    kv.number("right_fraction", report.right_fraction)?;
    kv.number("final_norm", report.final_norm)?;
    kv.number("absorbed", report.absorbed)?;
    kv.number("norm_plus_absorbed", report.final_norm + report.absorbed)?;
    kv.list("warnings", &report.warnings);
    Ok(kv.finish())
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let scn = cfg.scenario.build()?;
    let conv = cfg.outputs.convention;
    let (psi0, mut warnings) = scn.initial_state()?;
    let record = SplitStepPropagator::new(&scn)?.evolve(&psi0, &scn)?;
    let fin = FinalState {
        psi: record.final_state.clone(),
        ledger: record.final_ledger(),
    };
    let mut report = MetricsReport::evaluate(&scn, &psi0, &fin, conv)?;
    warnings.append(&mut report.warnings);
    report.warnings = warnings;

    let dir = OutDir::create(out)?;
    if !cfg.outputs.skip_density {
        dir.write("density.txt", &density_text(&record.densities)?)?;
    }
    dir.write("metrics.txt", &metrics_text(&report)?)?;
    dir.write(
        "metadata.toml",
        &metadata_text(
            "run",
            cfg,
            MetadataExtras {
                times: Some(record.times.clone()),
                grid: Some(scn.grid),
                ..Default::default()
            },
        ),
    )?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn finish_table(
    dir: &OutDir,
    name: &str,
    table: &Table,
    failed: usize,
    total: usize,
) -> Result<(), CliError> {
    dir.write(name, &table.text())?;
    if failed > 0 {
        Err(CliError::PartialSweep { failed, total })
    } else {
        Ok(())
    }
}

fn metric_rows(
    table: &mut Table,
    sweep: &SweepTable<MetricsReport>,
    pick: impl Fn(&MetricsReport) -> Vec<f64>,
) -> Result<(), CliError> {
    for row in &sweep.rows {
        table.push(
            &row.key,
            row.outcome.as_ref().map(&pick).map_err(|e| e.to_string()),
        )?;
    }
    Ok(())
}

/// Fills in the defaults for the chosen sweep so the embedded config is
/// complete.
pub fn resolve_sweep(cfg: &mut RunConfig, kind: SweepKind) {
    let sweep = cfg.sweep.get_or_insert_with(SweepConfig::default);
    if sweep.theta.is_none() {
        match kind {
            SweepKind::Corner => sweep.theta = Some(default_corner_theta()),
            SweepKind::Xjunction => sweep.theta = Some(default_xjunction_theta()),
            SweepKind::Coupling => {}
        }
    }
}

pub fn sweep(cfg: &RunConfig, kind: SweepKind, out: &Path) -> Result<(), CliError> {
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let num = cfg.scenario.numerics();
    let conv = cfg.outputs.convention;
    let dir = OutDir::create(out)?;
    let (name, table, failed, total) = match kind {
        SweepKind::Corner => {
            let thetas = sweep
                .theta
                .clone()
                .unwrap_or_else(default_corner_theta)
                .values();
            let result = sweep_corner(&num, &sweep.r, &thetas, sweep.t_f, sweep.slope, conv)?;
            let mut header = vec!["theta".to_string()];
            header.extend(sweep.r.iter().map(|r| format!("fidelity_r{r}")));
            let mut table = Table::with_header(header);
            let n = thetas.len();
            for (i, theta) in thetas.iter().enumerate() {
                let cells: Result<Vec<f64>, String> = sweep
                    .r
                    .iter()
                    .enumerate()
                    .map(|(j, _)| match &result.rows[j * n + i].outcome {
                        Ok(m) => Ok(m.fidelity.expect("ground-state start")),
                        Err(e) => Err(e.to_string()),
                    })
                    .collect();
                table.push(&[*theta], cells)?;
            }
            (
                "sweep_corner.txt",
                table,
                result.failures(),
                result.rows.len(),
            )
        }
        SweepKind::Xjunction => {
            let thetas = sweep
                .theta
                .clone()
                .unwrap_or_else(default_xjunction_theta)
                .values();
            let result = sweep_xjunction(&num, &thetas, sweep.x_l, conv)?;
            let mut table = Table::new(&[
                "theta",
                "reflection",
                "transmission",
                "total_fidelity",
                "left_fraction",
                "right_fraction",
                "absorbed",
            ]);
            metric_rows(&mut table, &result, |m| {
                vec![
                    m.reflection.expect("X-junction"),
                    m.transmission.expect("X-junction"),
                    m.total_fidelity.expect("X-junction"),
                    m.left_fraction,
                    m.right_fraction,
                    m.absorbed,
                ]
            })?;
            (
                "sweep_xjunction.txt",
                table,
                result.failures(),
                result.rows.len(),
            )
        }
        SweepKind::Coupling => {
            let result = sweep_coupling(&num, &sweep.d.values(), sweep.periods)?;
            let mut table = Table::new(&[
                "d",
                "omega_closed_form",
                "omega_two_state",
                "omega_numerical",
                "run_time",
            ]);
            for row in &result.rows {
                table.push(
                    &row.key,
                    row.outcome
                        .as_ref()
                        .map(|c| vec![c.closed_form, c.two_state_gap, c.numerical, c.run_time])
                        .map_err(|e| e.to_string()),
                )?;
            }
            (
                "sweep_coupling.txt",
                table,
                result.failures(),
                result.rows.len(),
            )
        }
    };
    dir.write(
        "metadata.toml",
        &metadata_text(
            &format!("sweep {}", kind_name(kind)),
            cfg,
            MetadataExtras {
                grid: Some(num.grid),
                ..Default::default()
            },
        ),
    )?;
    finish_table(&dir, name, &table, failed, total)
}

pub fn kind_name(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Corner => "corner",
        SweepKind::Xjunction => "xjunction",
        SweepKind::Coupling => "coupling",
    }
}

pub fn interfere(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let ic = cfg.interfere.clone().unwrap_or_default();
    let num = cfg.scenario.numerics();
    let result = sweep_interference(&num, &ic.alpha.values(), ic.theta, ic.x_l)?;
    let mut table = Table::new(&["alpha", "left_fraction", "right_fraction", "absorbed"]);
    metric_rows(&mut table, &result, |m| {
        vec![m.left_fraction, m.right_fraction, m.absorbed]
    })?;
    let dir = OutDir::create(out)?;
    dir.write(
        "metadata.toml",
        &metadata_text(
            "interfere",
            cfg,
            MetadataExtras {
                grid: Some(num.grid),
                ..Default::default()
            },
        ),
    )?;
    finish_table(
        &dir,
        "interfere.txt",
        &table,
        result.failures(),
        result.rows.len(),
    )
}

pub fn resolve_interfere(cfg: &mut RunConfig) {
    cfg.interfere.get_or_insert_with(InterfereConfig::default);
}

pub fn resolve_chain(cfg: &mut RunConfig) {
    cfg.chain.get_or_insert_with(ChainCompareConfig::default);
}

pub fn chain_compare_cmd(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let scn = cfg.scenario.build()?;
    let spacings = cfg.chain.clone().unwrap_or_default().spacings;
    let rows = chain_compare(&scn, &spacings)?;
    let mut table = Table::new(&[
        "spacing",
        "n_spins",
        "overlap",
        "chain_norm_drift",
        "max_boundary_occupation",
        "edge_warning",
    ]);
    let mut timing = Vec::new();
    for r in &rows {
        table.push(
            &[r.spacing],
            Ok(vec![
                r.n_spins as f64,
                r.overlap,
                r.chain_norm_drift,
                r.max_boundary_occupation,
                if r.trusted { 0.0 } else { 1.0 },
            ]),
        )?;
        if !r.trusted {
            eprintln!(
                "warning: chain with spacing {} reached the edge region (occupation {:.3e})",
                r.spacing, r.max_boundary_occupation
            );
        }
        timing.push((format!("chain_a{}", r.spacing), r.chain_seconds));
    }
    if let Some(first) = rows.first() {
        timing.insert(0, ("continuum".into(), first.continuum_seconds));
    }
    let dir = OutDir::create(out)?;
    dir.write("chain_compare.txt", &table.text())?;
    dir.write(
        "metadata.toml",
        &metadata_text(
            "chain-compare",
            cfg,
            MetadataExtras {
                grid: Some(scn.grid),
                timing,
                ..Default::default()
            },
        ),
    )?;
    Ok(())
}
