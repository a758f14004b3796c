//! Named experiments: each one evolves a model, samples observables at the
//! configured output times and returns CSV tables.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::error::{Error, Result};
use crate::grids::{BandGrid, MomentumGrid};
use crate::model::{PhysicalParams, ReducedModel};
use crate::observables::{
    build_kernels, density_opo, density_single, epr_inference, flux_difference_variance, flux_variance_from,
    number_stats, point_flux, v_of_j_from, EprWindow, Occupation,
};
use crate::opo::{evolve_opo_observed, OpoModel};
use crate::optics::{coherent, fock, squeezed};
use crate::single::evolve_observed;
use crate::VERSION;

/// One output file. Leading `keys` columns identify a row; absent values are empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub keys: usize,
    pub units: &'static str,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    fn new(name: &'static str, columns: &[&'static str], keys: usize, units: &'static str) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            keys,
            units,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.columns.iter().position(|n| *n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    /// CSV text with two comment lines, a header row and LF line endings.
    pub fn to_csv(&self, cfg: &ScenarioConfig) -> String {
        let mut s = format!("# atomlaser {VERSION}; {}\n# units: {}\n", cfg.summary(), self.units);
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default())
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

fn all(values: &[f64]) -> Vec<Option<f64>> {
    values.iter().map(|&v| Some(v)).collect()
}

/// Runs the scenario without touching the filesystem.
pub fn compute(cfg: &ScenarioConfig) -> Result<Vec<Table>> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioKind::SinglePulse => single_pulse(cfg),
        ScenarioKind::VarianceVsTime => variance_vs_time(cfg),
        ScenarioKind::FluxSqueezing => flux_squeezing(cfg),
        ScenarioKind::OmegaSweep => omega_sweep(cfg),
        ScenarioKind::OpoTwinBeams => twin_beams(cfg),
        ScenarioKind::Epr => epr(cfg),
    }
}

/// Runs the scenario and writes its tables into the output directory.
pub fn run(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let tables = compute(cfg)?;
    let io = |path: &PathBuf| {
        let path = path.clone();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(&cfg.output_dir).map_err(io(&cfg.output_dir))?;
    let mut written = Vec::with_capacity(tables.len());
    for t in &tables {
        let path = cfg.output_dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv(cfg)).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

fn single_setup(cfg: &ScenarioConfig, params: PhysicalParams) -> Result<(ReducedModel, MomentumGrid)> {
    let model = ReducedModel::new(params)?;
    let grid = MomentumGrid::new(cfg.grid_n, params.k_kick, cfg.k_halfwidth)?;
    Ok((model, grid))
}

fn single_pulse(cfg: &ScenarioConfig) -> Result<Vec<Table>> {
    let (model, grid) = single_setup(cfg, cfg.params)?;
    let state = cfg.optics.moments()?;
    let mut density = Table::new("density", &["t", "x", "density"], 2, "t s; x m; density atoms/m");
    let mut pulse = Table::new(
        "pulse",
        &["t", "outcoupled_fraction", "mean_number", "number_variance"],
        1,
        "t s; outcoupled_fraction dimensionless; mean_number and number_variance atoms",
    );
    evolve_observed(
        &model,
        &grid,
        cfg.t_final,
        cfg.integrator(),
        &cfg.output_times(),
        |sol| {
            let t = sol.t();
            let profile = density_single(sol, &state);
            for (j, rho) in profile.values.iter().enumerate() {
                density.push(all(&[t, profile.grid.x(j), *rho]));
            }
            let ns = number_stats(sol, &state);
            pulse.push(all(&[t, ns.n_g, ns.mean, ns.variance]));
            Ok(())
        },
    )?;
    Ok(vec![density, pulse])
}

fn variance_vs_time(cfg: &ScenarioConfig) -> Result<Vec<Table>> {
    let (model, grid) = single_setup(cfg, cfg.params)?;
    let o = cfg.optics;
    let states = [coherent(o.alpha_sq)?, fock(o.n), squeezed(o.alpha_sq, o.r)?];
    let mut nvar = Table::new(
        "nvar",
        &["t", "outcoupled_fraction", "vN_coherent", "vN_fock", "vN_squeezed"],
        1,
        "t s; all other columns dimensionless",
    );
    evolve_observed(
        &model,
        &grid,
        cfg.t_final,
        cfg.integrator(),
        &cfg.output_times(),
        |sol| {
            let mut row = vec![Some(sol.t()), Some(sol.g_field().norm_sqr())];
            row.extend(states.iter().map(|s| number_stats(sol, s).v));
            nvar.push(row);
            Ok(())
        },
    )?;
    Ok(vec![nvar])
}

fn flux_squeezing(cfg: &ScenarioConfig) -> Result<Vec<Table>> {
    let (model, grid) = single_setup(cfg, cfg.params)?;
    let state = cfg.optics.moments()?;
    let m = cfg.params.m;
    let mut flux = Table::new(
        "flux",
        &["t", "flux", "flux_variance", "vJ"],
        1,
        "t s; flux atoms/s; flux_variance (atoms/s)^2; vJ dimensionless",
    );
    evolve_observed(
        &model,
        &grid,
        cfg.t_final,
        cfg.integrator(),
        &cfg.output_times(),
        |sol| {
            let pf = point_flux(sol, m, cfg.x0)?;
            let var = flux_variance_from(&pf, &state);
            flux.push(vec![
                Some(sol.t()),
                Some(pf.j_g * state.mean_n),
                Some(var.total),
                v_of_j_from(&pf),
            ]);
            Ok(())
        },
    )?;
    Ok(vec![flux])
}

fn omega_sweep(cfg: &ScenarioConfig) -> Result<Vec<Table>> {
    let mut sweep = Table::new(
        "sweep",
        &["omega", "min_vJ", "t_at_min"],
        1,
        "omega rad/s; min_vJ dimensionless; t_at_min s",
    );
    for &omega in &cfg.sweep_omegas {
        let (model, grid) = single_setup(cfg, PhysicalParams { omega, ..cfg.params })?;
        let m = cfg.params.m;
        let samples = evolve_observed(
            &model,
            &grid,
            cfg.t_final,
            cfg.integrator(),
            &cfg.output_times(),
            |sol| Ok((sol.t(), v_of_j_from(&point_flux(sol, m, cfg.x0)?))),
        )?;
        // first occurrence wins ties so the choice is reproducible
        let best =
            samples
                .iter()
                .filter_map(|&(t, v)| v.map(|v| (t, v)))
                .fold(None, |acc: Option<(f64, f64)>, (t, v)| match acc {
                    Some((_, bv)) if bv <= v => acc,
                    _ => Some((t, v)),
                });
        sweep.push(vec![Some(omega), best.map(|b| b.1), best.map(|b| b.0)]);
    }
    Ok(vec![sweep])
}

fn twin_setup(cfg: &ScenarioConfig) -> Result<(OpoModel, BandGrid)> {
    let mut model = OpoModel::new(cfg.params)?;
    if cfg.omega2_sign < 0.0 {
        model = model.with_flipped_omega2();
    }
    let grid = BandGrid::twin(cfg.grid_n, model.k_beam(), cfg.k_halfwidth)?;
    Ok((model, grid))
}

fn twin_beams(cfg: &ScenarioConfig) -> Result<Vec<Table>> {
    let (model, grid) = twin_setup(cfg)?;
    let m = cfg.params.m;
    let occ = Occupation::vacuum();
    let mut density = Table::new("opo_density", &["t", "x", "density"], 2, "t s; x m; density atoms/m");
    let mut fluxes = Table::new(
        "twin_flux",
        &[
            "t",
            "flux_plus",
            "flux_minus",
            "variance_plus",
            "variance_minus",
            "flux_diff_ratio",
            "signed_diff_ratio",
        ],
        1,
        "t s; flux atoms/s at +x0 and -x0; variances (atoms/s)^2; ratios dimensionless",
    );
    evolve_opo_observed(
        &model,
        &grid,
        cfg.t_final,
        cfg.integrator(),
        &cfg.output_times(),
        |sol| {
            let t = sol.t();
            let profile = density_opo(sol, &occ);
            for (j, rho) in profile.values.iter().enumerate() {
                density.push(all(&[t, profile.grid.x(j), *rho]));
            }
            let k = build_kernels(sol, &[cfg.x0, -cfg.x0], &occ, m)?;
            let fd = flux_difference_variance(&k, cfg.x0)?;
            fluxes.push(vec![
                Some(t),
                Some(k.flux(cfg.x0)?),
                Some(k.flux(-cfg.x0)?),
                Some(k.flux_variance(cfg.x0)?),
                Some(k.flux_variance(-cfg.x0)?),
                fd.ratio,
                fd.signed_ratio,
            ]);
            Ok(())
        },
    )?;
    Ok(vec![density, fluxes])
}

fn epr(cfg: &ScenarioConfig) -> Result<Vec<Table>> {
    let (model, grid) = twin_setup(cfg)?;
    let window = EprWindow::new(cfg.epr_x1, cfg.epr_x2, model.k_beam(), model.omega_a(), cfg.carrier)?;
    let occ = Occupation::vacuum();
    let m = cfg.params.m;
    let mut table = Table::new(
        "epr",
        &["t", "VXm", "VYm", "Vinf_Xm", "Vinf_Ym", "product", "flux_diff_ratio"],
        1,
        "t s; all other columns dimensionless",
    );
    evolve_opo_observed(
        &model,
        &grid,
        cfg.t_final,
        cfg.integrator(),
        &cfg.output_times(),
        |sol| {
            let r = epr_inference(sol, &window, &occ)?;
            let k = build_kernels(sol, &[cfg.x0, -cfg.x0], &occ, m)?;
            let fd = flux_difference_variance(&k, cfg.x0)?;
            table.push(vec![
                Some(sol.t()),
                Some(r.vx_minus),
                Some(r.vy_minus),
                r.vinf_x_minus,
                r.vinf_y_minus,
                r.product,
                fd.ratio,
            ]);
            Ok(())
        },
    )?;
    Ok(vec![table])
}

/// Largest relative change of one output column under one refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnChange {
    pub table: &'static str,
    pub column: &'static str,
    pub refinement: &'static str,
    /// `max |new - old|` over matching rows, divided by `max |old|` over the column.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub tolerance: f64,
    pub changes: Vec<ColumnChange>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.changes.iter().all(|c| c.change < self.tolerance)
    }

    /// Columns ordered from the largest change down.
    pub fn worst(&self) -> Vec<&ColumnChange> {
        let mut v: Vec<_> = self.changes.iter().collect();
        v.sort_by(|a, b| b.change.total_cmp(&a.change));
        v
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "convergence {} (tolerance {:e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.tolerance
        )?;
        for c in self.worst() {
            let flag = if c.change < self.tolerance { "ok" } else { "FAIL" };
            writeln!(
                f,
                "  {flag:4} {}.{} under {}: {:e}",
                c.table, c.column, c.refinement, c.change
            )?;
        }
        Ok(())
    }
}

pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

/// Reruns with `dt/2` and with twice the samples per band and compares every column.
pub fn convergence_check(cfg: &ScenarioConfig) -> Result<ConvergenceReport> {
    let base = compute(cfg)?;
    let half_dt = compute(&ScenarioConfig {
        dt: 0.5 * cfg.dt,
        ..cfg.clone()
    })?;
    let fine = compute(&ScenarioConfig {
        grid_n: 2 * cfg.grid_n,
        ..cfg.clone()
    })?;
    let mut changes = Vec::new();
    for (label, other) in [("dt/2", &half_dt), ("2n", &fine)] {
        for (a, b) in base.iter().zip(other) {
            changes.extend(compare(a, b, label));
        }
    }
    Ok(ConvergenceReport {
        tolerance: CONVERGENCE_TOLERANCE,
        changes,
    })
}

type RowPair<'a> = (&'a [Option<f64>], &'a [Option<f64>]);

fn compare(base: &Table, other: &Table, label: &'static str) -> Vec<ColumnChange> {
    let key = |row: &[Option<f64>]| -> Vec<u64> { row.iter().map(|v| v.map_or(u64::MAX, f64::to_bits)).collect() };
    let index: HashMap<Vec<u64>, usize> = other
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (key(&r[..other.keys]), i))
        .collect();
    let pairs: Vec<RowPair> = base
        .rows
        .iter()
        .filter_map(|r| index.get(&key(&r[..base.keys])).map(|&i| (&r[..], &other.rows[i][..])))
        .collect();
    (base.keys..base.columns.len())
        .map(|c| {
            let scale = base
                .rows
                .iter()
                .filter_map(|r| r[c])
                .fold(0.0, |m: f64, v| m.max(v.abs()));
            let mut diff: f64 = 0.0;
            for (a, b) in &pairs {
                diff = diff.max(match (a[c], b[c]) {
                    (Some(x), Some(y)) => (x - y).abs(),
                    (None, None) => 0.0,
                    _ => f64::INFINITY,
                });
            }
            let change = if diff == 0.0 { 0.0 } else { diff / scale };
            ColumnChange {
                table: base.name,
                column: base.columns[c],
                refinement: label,
                change,
            }
        })
        .collect()
}
