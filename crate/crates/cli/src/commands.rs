use std::io::Write;

use frolov_core::cubature::non_admissible_warning;
use frolov_core::{
    builtin_integrand, convergence_study, count_nodes, enumerate_nodes_with, overhead_limit, ChebyshevSystem,
    EnumerationOptions, BUILTIN_NAMES,
};

use crate::output::{node_header, sig17, two_decimals, BasisRecord, BoundsRecord, StatsRecord};
use crate::{Cli, CliError, Command, Format, GlobalOpts, Scan};

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Basis { dim } => basis(g, *dim, out),
        Command::Nodes { dim, n } => nodes(g, *dim, *n, out),
        Command::Table(scan) => table(g, scan, out),
        Command::Bounds(scan) => bounds(g, scan, out),
        Command::Integrate { scan, integrand } => integrate(g, scan, integrand, out),
    }
}

fn options(g: &GlobalOpts) -> Result<EnumerationOptions, CliError> {
    if !(g.tolerance.is_finite() && g.tolerance > -0.5) {
        return Err(CliError::Usage(format!("--tolerance must be finite and > -0.5, got {}", g.tolerance)));
    }
    Ok(EnumerationOptions { tolerance: g.tolerance, threads: g.threads.map(|t| t as usize) })
}

fn system(dim: usize) -> Result<ChebyshevSystem, CliError> {
    Ok(ChebyshevSystem::new(dim)?)
}

/// Refuse `d >= 8` runs whose leading-order candidate count `n vol((sqrt d/2) B_2^d)`
/// exceeds the budget.
fn guard(g: &GlobalOpts, dim: usize, ns: &[u64]) -> Result<(), CliError> {
    if g.force || dim < 8 {
        return Ok(());
    }
    let limit = overhead_limit(dim).limit;
    for &n in ns {
        let estimate = n as f64 * limit;
        if estimate > g.budget as f64 {
            return Err(CliError::ResourceGuard(format!(
                "d = {dim}, n = {n} would touch about {estimate:.3e} candidates (budget {}); pass --force to run anyway",
                g.budget
            )));
        }
    }
    Ok(())
}

fn basis(g: &GlobalOpts, dim: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let record = BasisRecord::new(&system(dim)?);
    match g.format.unwrap_or(Format::Json) {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&record)?)?,
        Format::Csv => out.write_all(record.to_csv().as_bytes())?,
    }
    Ok(())
}

fn nodes(g: &GlobalOpts, dim: usize, n: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = system(dim)?;
    let opts = options(g)?;
    guard(g, dim, &[n])?;
    let set = enumerate_nodes_with(&sys, n, &opts)?;
    let stats = StatsRecord::new(dim, n, set.stats());
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "{}", node_header(dim))?;
            for x in set.nodes() {
                let row: Vec<String> = x.iter().map(|&v| sig17(v)).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Format::Json => {
            let nodes: Vec<&[f64]> = set.nodes().collect();
            let doc = serde_json::json!({ "stats": stats, "nodes": nodes });
            writeln!(out, "{doc}")?;
        }
    }
    let line = serde_json::to_string(&stats)?;
    if g.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

fn stats_rows(g: &GlobalOpts, scan: &Scan) -> Result<Vec<StatsRecord>, CliError> {
    let sys = system(scan.dim)?;
    let opts = options(g)?;
    let ns = scan.values();
    guard(g, scan.dim, &ns)?;
    ns.iter().map(|&n| Ok(StatsRecord::new(scan.dim, n, &count_nodes(&sys, n, &opts)?))).collect()
}

fn table(g: &GlobalOpts, scan: &Scan, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = stats_rows(g, scan)?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "n,cube_points,ellipsoid_points,overhead")?;
            for r in &rows {
                writeln!(out, "{},{},{},{}", r.n, r.cube_points, r.ellipsoid_points, two_decimals(r.overhead))?;
            }
        }
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
    }
    Ok(())
}

fn bounds(g: &GlobalOpts, scan: &Scan, out: &mut dyn Write) -> Result<(), CliError> {
    let rows: Vec<BoundsRecord> = stats_rows(g, scan)?
        .into_iter()
        .map(|stats| {
            let holds = stats.sandwich_holds();
            BoundsRecord { stats, holds }
        })
        .collect();
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "n,bound_lower,ellipsoid_points,bound_upper,in_regime,holds")?;
            for r in &rows {
                let s = &r.stats;
                let lower = s.bound_lower.map(|x| format!("{x:.3}")).unwrap_or_default();
                let upper = s.bound_upper.map(|x| format!("{x:.3}")).unwrap_or_default();
                writeln!(out, "{},{lower},{},{upper},{},{}", s.n, s.ellipsoid_points, s.in_regime, r.holds)?;
            }
        }
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
    }
    Ok(())
}

fn integrate(g: &GlobalOpts, scan: &Scan, name: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let f = builtin_integrand(name, scan.dim).ok_or_else(|| {
        CliError::Usage(format!("unknown integrand '{name}'; available: {}", BUILTIN_NAMES.join(", ")))
    })?;
    let sys = system(scan.dim)?;
    let opts = options(g)?;
    if scan.n.is_none() && scan.n_list.is_none() {
        return Err(CliError::Usage("integrate needs --n or --n-list".into()));
    }
    let ns = scan.values();
    guard(g, scan.dim, &ns)?;
    if !sys.admissible() {
        eprintln!("warning: {}", non_admissible_warning(scan.dim));
    }
    let rows = convergence_study(&sys, &f, &ns, &opts)?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "n,nodes,value,error")?;
            for r in &rows {
                let err = r.error.map(|e| e.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{},{err}", r.n, r.node_count, r.value)?;
            }
        }
        Format::Json => {
            let doc: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "n": r.n, "nodes": r.node_count, "value": r.value, "error": r.error,
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}
