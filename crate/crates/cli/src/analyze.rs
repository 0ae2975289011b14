use std::collections::BTreeMap;
use std::time::Instant;

use netred::bounds::{full_report_with, hinf_error_single_integrator, ReportOptions};
use netred::engines::{NormKind, NormRegistry};
use netred::graph::{is_almost_equitable, project_to_aep_laplacian, reduced_eigenvalues, Partition};
use netred::netsys::{assemble_error_system, assemble_full, is_synchronized, NetworkSystem};
use netred::norms::{h2_norm, h2_norm_quadrature, hinf_norm_dc, hinf_norm_sweep, network_witness};

use crate::schema::{
    matrix_rows, AepProjectionReport, Eigenvalues, NetworkFile, OracleCheck, OracleReport, ReportFile, Tolerances,
    SCHEMA_VERSION,
};
use crate::CliError;

/// Values below this are compared absolutely in oracle checks.
const ORACLE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    /// Overrides the norms listed in the file.
    pub norms: Option<Vec<NormKind>>,
    pub triangle: bool,
    pub oracle_check: bool,
    pub h2_engine: String,
    pub hinf_engine: String,
}

impl Default for AnalyzeArgs {
    fn default() -> Self {
        Self {
            norms: None,
            triangle: false,
            oracle_check: false,
            h2_engine: NormRegistry::default_name(NormKind::H2).into(),
            hinf_engine: NormRegistry::default_name(NormKind::Hinf).into(),
        }
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn analyze(file: &NetworkFile, args: &AnalyzeArgs) -> Result<ReportFile, CliError> {
    let started = Instant::now();
    let model = file.validate()?;
    let (ns, pi) = (&model.network, &model.partition);
    let norms = args.norms.clone().unwrap_or_else(|| file.options.norms.clone());
    if norms.is_empty() {
        return Err(CliError::Validation("norms: at least one of h2, hinf is required".into()));
    }
    let registry = NormRegistry::default();
    for (name, kind) in [(&args.h2_engine, NormKind::H2), (&args.hinf_engine, NormKind::Hinf)] {
        registry.get_kind(name, kind).map_err(|e| {
            CliError::Validation(format!("{kind} engine: {e} (available: {})", registry.names(kind).join(", ")))
        })?;
    }

    let l = ns.laplacian();
    if !l.is_connected() {
        return Err(CliError::Precondition("graph is disconnected; the bounds need a connected graph".into()));
    }
    if !is_synchronized(ns) {
        return Err(CliError::Precondition(
            "network is not synchronized: A - lambda B is not Hurwitz for some nonzero Laplacian eigenvalue".into(),
        ));
    }
    let aep = is_almost_equitable(l, pi);
    if !aep && !args.triangle {
        return Err(CliError::Precondition(
            "partition is not almost equitable; rerun with --triangle for the general-partition bound".into(),
        ));
    }
    let validated = ms(started);

    let bounds_start = Instant::now();
    let opts = ReportOptions {
        h2: norms.contains(&NormKind::H2),
        hinf: norms.contains(&NormKind::Hinf),
        triangle: args.triangle,
        h2_engine: args.h2_engine.clone(),
        hinf_engine: args.hinf_engine.clone(),
    };
    let bounds = full_report_with(ns, pi, &opts, &registry).map_err(|e| CliError::Validation(e.to_string()))?;
    let l_aep = (!aep).then(|| {
        let proj = project_to_aep_laplacian(l, pi);
        AepProjectionReport {
            matrix: matrix_rows(&proj.matrix),
            delta_frobenius: proj.delta_frobenius,
            has_negative_weights: proj.has_negative_weights,
        }
    });
    let eigenvalues = Eigenvalues { laplacian: l.eigenvalues().to_vec(), reduced: reduced_eigenvalues(l, pi) };
    let bounds_ms = ms(bounds_start);

    let mut timings = BTreeMap::from([("validate".to_string(), validated), ("bounds".to_string(), bounds_ms)]);
    let oracle = if args.oracle_check || file.options.oracle_check {
        let oracle_start = Instant::now();
        let report = oracle_checks(ns, pi, aep, &opts, &file.options.tolerances);
        timings.insert("oracle".into(), ms(oracle_start));
        Some(report)
    } else {
        None
    };
    timings.insert("total".into(), ms(started));

    Ok(ReportFile {
        schema_version: SCHEMA_VERSION.into(),
        input: file.clone(),
        aep,
        synchronized: true,
        eigenvalues,
        bounds,
        l_aep,
        oracle,
        timings_ms: timings,
    })
}

fn check(quantity: &str, primary: f64, oracle: f64, tolerance: f64) -> OracleCheck {
    let diff = (primary - oracle).abs();
    OracleCheck {
        quantity: quantity.into(),
        primary,
        oracle,
        rel_diff: if oracle.abs() > ORACLE_FLOOR { diff / oracle.abs() } else { diff },
        tolerance,
        pass: diff <= tolerance * oracle.abs() + ORACLE_FLOOR,
    }
}

/// Independent second computations of the norms that feed the report.
fn oracle_checks(ns: &NetworkSystem, pi: &Partition, aep: bool, opts: &ReportOptions, tol: &Tolerances) -> OracleReport {
    let mut checks = Vec::new();
    let full = assemble_full(ns);
    let error = assemble_error_system(ns, pi).ok();
    let mut systems = vec![("full", &full)];
    if let Some(e) = &error {
        systems.push(("error", e));
    }

    if opts.h2 {
        for (label, sys) in &systems {
            if let (Ok(lyap), Ok(quad)) = (h2_norm(sys), h2_norm_quadrature(sys)) {
                checks.push(check(&format!("h2 {label}: lyapunov vs quadrature"), lyap.value, quad.value, tol.h2_quadrature_rel));
            }
        }
    }
    if opts.hinf {
        let symmetric = ns.dynamics().is_symmetric();
        let witness = network_witness(ns);
        for (label, sys) in &systems {
            // The network witness intertwines the error system only for AEP partitions.
            if !symmetric || (*label == "error" && !aep) {
                continue;
            }
            if let (Ok(dc), Ok(sweep)) = (hinf_norm_dc(sys, &witness), hinf_norm_sweep(sys)) {
                checks.push(check(&format!("hinf {label}: dc closed form vs sweep"), dc.value, sweep.value, tol.hinf_sweep_rel));
            }
        }
        if let (Ok(exact), Some(sys)) = (hinf_error_single_integrator(ns, pi), &error) {
            if let Ok(sweep) = hinf_norm_sweep(sys) {
                checks.push(check("hinf error: single-integrator formula vs sweep", exact.error, sweep.value, tol.hinf_sweep_rel));
            }
        }
    }
    OracleReport { all_pass: checks.iter().all(|c| c.pass), checks }
}
