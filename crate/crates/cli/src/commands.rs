use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::args::{parse_range, EffectiveArgs, Fig3Args, SweepArgs, SweepVariable};
use crate::csv::{float, record_table, round_printed, Table};
use crate::error::CliError;
use crate::plot::{chsh_panel, probability_panel, CurvePoint};
use crate::point::{evaluate, GainPolicy, PointSpec, RunRecord};

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("plot description serializes");
    std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(table: &Table, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => table.write(path),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(table.render().as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Evenly spaced points, each rounded to the printed precision.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("a range needs at least 2 points, got {n}")));
    }
    Ok((0..n)
        .map(|k| round_printed(lo + (hi - lo) * k as f64 / (n - 1) as f64))
        .collect())
}

pub fn cmd_effective(mut args: EffectiveArgs) -> Result<RunRecord, CliError> {
    args.params.merge_config()?;
    let spec = PointSpec::from_args(&args.params)?;
    let rec = evaluate(&spec).into_result()?;
    let o = &rec.outputs;
    let lines = [
        ("g", o.g),
        ("eta", o.eta),
        ("chi_ch", o.chi_ch),
        ("Delta", o.delta),
        ("g_eff", o.g_eff),
        ("G", o.big_g),
        ("prefactor", o.prefactor),
        ("lambda_out", o.lambda_out),
        ("p_PS_single", o.p_single),
        ("p_PS_total", o.p_total),
        ("S_loss", o.s_loss),
        ("S_tele", o.s_tele),
        ("C_loss", o.c_loss),
        ("C_tele", o.c_tele),
    ];
    println!("input {} over {} teleporter(s)", spec.input, spec.teleporters);
    for (name, value) in lines {
        println!("{name:<12} {}", float(value));
    }
    if let Some(path) = &args.params.out {
        record_table(std::slice::from_ref(&rec)).write(path)?;
    }
    Ok(rec)
}

pub fn sweep_records(mut args: SweepArgs) -> Result<Vec<RunRecord>, CliError> {
    args.merge_config()?;
    let var = args
        .var
        .ok_or_else(|| CliError::Usage("sweep needs --var chi | T | g | Delta".into()))?;
    let range = args
        .range
        .as_deref()
        .ok_or_else(|| CliError::Usage("sweep needs --range lo,hi".into()))?;
    let (lo, hi) = parse_range(range)?;
    let values = linspace(lo, hi, args.points.unwrap_or(11))?;

    let mut params = args.params.clone();
    if var == SweepVariable::G {
        if params.gain.as_deref() == Some("gopt") {
            return Err(CliError::Usage("cannot sweep g under the g_opt policy".into()));
        }
        params.gain = None;
        params.g = Some(lo);
    }
    let base = PointSpec::from_args(&params)?;
    let specs: Vec<PointSpec> = values
        .iter()
        .map(|&v| {
            let mut s = base.clone();
            match var {
                SweepVariable::Chi => s.chi = v,
                SweepVariable::T => s.transmission = v,
                SweepVariable::G => s.gain = GainPolicy::Fixed(v),
                SweepVariable::Delta => s.delta = Some(v),
            }
            s
        })
        .collect();
    Ok(specs.par_iter().map(evaluate).collect())
}

pub fn cmd_sweep(args: SweepArgs) -> Result<Vec<RunRecord>, CliError> {
    let out = args.params.out.clone();
    let records = sweep_records(args)?;
    emit(&record_table(&records), out.as_deref())?;
    let bad = records.iter().filter(|r| !r.feasible()).count();
    if bad > 0 {
        eprintln!("{bad} of {} points infeasible (flagged in the output)", records.len());
    }
    Ok(records)
}

pub struct Fig3Output {
    pub records: Vec<RunRecord>,
    pub files: Vec<PathBuf>,
}

pub const FIG3A_COLUMNS: &[&str] = &["T", "chi", "g_opt", "Delta", "S_loss", "S_tele", "C_loss", "C_tele", "feasible"];
pub const FIG3B_COLUMNS: &[&str] = &["T", "chi", "g_opt", "p_PS_single", "p_PS_total", "feasible"];

pub fn cmd_fig3(mut args: Fig3Args) -> Result<Fig3Output, CliError> {
    args.merge_config()?;
    let mut params = args.params.clone();
    if params.g.is_some() || params.gain.as_deref().is_some_and(|g| g != "gopt") {
        return Err(CliError::Usage("fig3 always runs at g_opt".into()));
    }
    if params.input.as_deref().is_some_and(|i| i != "bell") {
        return Err(CliError::Usage("fig3 always uses the Bell-state input".into()));
    }
    params.gain = Some("gopt".into());
    params.input = Some("bell".into());
    params.teleporters.get_or_insert(2);
    let base = PointSpec::from_args(&params)?;
    let (lo, hi) = match args.range.as_deref() {
        Some(raw) => parse_range(raw)?,
        None => (0.01, 0.6),
    };
    let chis = linspace(lo, hi, args.points.unwrap_or(120))?;
    let specs: Vec<PointSpec> = chis
        .iter()
        .map(|&chi| PointSpec { chi, ..base.clone() })
        .collect();
    let records: Vec<RunRecord> = specs.par_iter().map(evaluate).collect();

    let mut a = Table::new(FIG3A_COLUMNS);
    let mut b = Table::new(FIG3B_COLUMNS);
    let mut curve = Vec::with_capacity(records.len());
    for rec in &records {
        let o = &rec.outputs;
        let t = float(rec.spec.transmission);
        let chi = float(rec.spec.chi);
        let feasible = rec.feasible().to_string();
        a.push(vec![
            t.clone(),
            chi.clone(),
            float(o.g),
            float(o.delta),
            float(o.s_loss),
            float(o.s_tele),
            float(o.c_loss),
            float(o.c_tele),
            feasible.clone(),
        ]);
        b.push(vec![t, chi, float(o.g), float(o.p_single), float(o.p_total), feasible]);
        curve.push(CurvePoint {
            chi: rec.spec.chi,
            s_loss: o.s_loss,
            s_tele: o.s_tele,
            p_total: o.p_total,
        });
    }

    let dir = params.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let files = vec![
        dir.join("fig3a.csv"),
        dir.join("fig3b.csv"),
        dir.join("fig3a.vl.json"),
        dir.join("fig3b.vl.json"),
    ];
    a.write(&files[0])?;
    b.write(&files[1])?;
    write_json(&files[2], &chsh_panel(&curve, base.transmission))?;
    write_json(&files[3], &probability_panel(&curve, base.transmission))?;

    if let Some(w) = records
        .windows(2)
        .find(|w| (w[0].outputs.s_tele - 2.0).signum() != (w[1].outputs.s_tele - 2.0).signum())
    {
        println!("S_tele crosses 2 between chi = {} and {}", w[0].spec.chi, w[1].spec.chi);
    }
    for f in &files {
        println!("wrote {}", f.display());
    }
    let bad = records.iter().filter(|r| !r.feasible()).count();
    if bad > 0 {
        eprintln!("{bad} of {} points infeasible (flagged in the output)", records.len());
    }
    Ok(Fig3Output { records, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.1, 0.9, 5).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[4], 0.9);
        assert!(linspace(0.1, 0.9, 1).is_err());
    }
}
