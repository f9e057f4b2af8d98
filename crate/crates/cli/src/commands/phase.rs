//! Phase classification of exponent tuples and sweeps over two exponents.

use std::path::{Path, PathBuf};

use lindyn::phase::{
    cell_exponents, classify_phase, delta_exponent, empirical_phase_probe, exponents::rational, Block, PqCase,
    ProbeConfig, ProbeInit, ScalingExponents, Scaling,
};
use lindyn::Rational64;
use rayon::prelude::*;
use serde::Deserialize;

use super::{emit, to_json};
use crate::error::{json_error, CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
pub struct PhaseInput {
    #[serde(flatten)]
    pub exponents: ScalingExponents,
    #[serde(default)]
    pub pq_case: PqCase,
}

/// Where the tuple comes from: a JSON file, inline JSON, or a tabulated cell.
#[derive(Debug, Clone, Default)]
pub struct TupleSource {
    pub file: Option<PathBuf>,
    pub inline: Option<String>,
    pub scaling: Option<String>,
    pub block: Option<String>,
}

pub fn parse_scaling(name: &str) -> CliResult<Scaling> {
    Scaling::ALL
        .iter()
        .copied()
        .find(|s| s.name() == name)
        .ok_or_else(|| CliError::Config(format!("unknown scaling {name:?}; expected ntk, mf, xavier, kaiming or lazy")))
}

pub fn parse_block(name: &str) -> CliResult<Block> {
    match name {
        "base" => Ok(Block::Base),
        "stable" => Ok(Block::StableRate),
        "plus" | "feature" => Ok(Block::FeatureLearning),
        "minus" | "kernel" => Ok(Block::Kernel),
        _ => Err(CliError::Config(format!("unknown block {name:?}; expected base, stable, plus or minus"))),
    }
}

fn parse_input(text: &str, origin: &str) -> CliResult<PhaseInput> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}:{}", json_error(&e))))
}

impl TupleSource {
    pub fn resolve(&self, pq_override: Option<PqCase>) -> CliResult<PhaseInput> {
        let mut input = match (&self.file, &self.inline, &self.scaling) {
            (Some(path), None, None) => {
                let text = read(path)?;
                parse_input(&text, &path.display().to_string())?
            }
            (None, Some(text), None) => parse_input(text, "--tuple")?,
            (None, None, Some(name)) => {
                let scaling = parse_scaling(name)?;
                let block = self.block.as_deref().map(parse_block).transpose()?.unwrap_or(Block::Base);
                PhaseInput { exponents: cell_exponents(scaling, block), pq_case: scaling.pq_case() }
            }
            _ => return Err(CliError::Config("give exactly one of a tuple file, --tuple or --scaling".into())),
        };
        if let Some(case) = pq_override {
            input.pq_case = case;
        }
        Ok(input)
    }
}

fn read(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        return Ok(std::io::read_to_string(std::io::stdin())?);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_pq_case(text: &str) -> CliResult<PqCase> {
    serde_json::from_value(serde_json::Value::String(text.into()))
        .map_err(|_| CliError::Config(format!("unknown pq case {text:?}")))
}

pub struct ProbeArgs {
    pub kappas: Vec<f64>,
    pub seed: u64,
    pub replicates: usize,
    pub independent: bool,
}

pub fn cmd_phase(input: &PhaseInput, probe: Option<ProbeArgs>) -> CliResult<()> {
    let text = match probe {
        None => to_json(&classify_phase(&input.exponents, input.pq_case))?,
        Some(args) => {
            let cfg = ProbeConfig {
                replicates: args.replicates,
                init: if args.independent { ProbeInit::Independent } else { ProbeInit::Mirrored },
                ..ProbeConfig::default()
            };
            to_json(&empirical_phase_probe(&input.exponents, &args.kappas, args.seed, &cfg, input.pq_case)?)?
        }
    };
    emit(None, &text)
}

/// `lo:hi:step` with rational endpoints.
pub fn parse_range(text: &str) -> CliResult<Vec<Rational64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(CliError::Config(format!("range {text:?} must look like lo:hi:step")));
    };
    let p = |s: &str| rational::parse(s).map_err(CliError::Config);
    let (lo, hi, step) = (p(lo)?, p(hi)?, p(step)?);
    if step <= Rational64::from_integer(0) || hi < lo {
        return Err(CliError::Config(format!("range {text:?} needs lo <= hi and step > 0")));
    }
    let mut out = Vec::new();
    let mut v = lo;
    while v <= hi {
        out.push(v);
        v += step;
        if out.len() > 100_000 {
            return Err(CliError::Config(format!("range {text:?} has too many points")));
        }
    }
    Ok(out)
}

fn set_exponent(s: &mut ScalingExponents, name: &str, v: Rational64) -> CliResult<()> {
    match name {
        "c_d" => s.c_d = v,
        "c_gamma" => s.c_gamma = v,
        "c_u" => s.c_u = v,
        "c_w" => s.c_w = v,
        "c_eta_u" => s.c_eta_u = v,
        "c_eta_w" => s.c_eta_w = v,
        "c_eta" => {
            s.c_eta_u = v;
            s.c_eta_w = v;
        }
        _ => {
            return Err(CliError::Config(format!(
                "unknown exponent {name:?}; expected c_d, c_gamma, c_u, c_w, c_eta_u, c_eta_w or c_eta"
            )))
        }
    }
    Ok(())
}

pub struct ScanArgs {
    pub x: String,
    pub y: String,
    pub x_range: String,
    pub y_range: String,
    pub csv: Option<PathBuf>,
}

pub fn cmd_scan(input: &PhaseInput, args: &ScanArgs) -> CliResult<()> {
    let xs = parse_range(&args.x_range)?;
    let ys = parse_range(&args.y_range)?;
    let mut probe = input.exponents;
    set_exponent(&mut probe, &args.x, xs[0])?;
    set_exponent(&mut probe, &args.y, ys[0])?;
    let cells: Vec<(Rational64, Rational64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let rows: Vec<String> = cells
        .par_iter()
        .map(|&(x, y)| {
            let mut s = input.exponents;
            set_exponent(&mut s, &args.x, x).expect("validated");
            set_exponent(&mut s, &args.y, y).expect("validated");
            let label = classify_phase(&s, input.pq_case);
            let delta = delta_exponent(&s, &label).map(|d| d.to_string()).unwrap_or_default();
            format!("{x},{y},{},{delta}\n", label.phase.as_str())
        })
        .collect();
    let mut out = String::from("x_exp,y_exp,phase,delta\n");
    out.extend(rows);
    emit(args.csv.as_deref(), &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = parse_range("-1:1:1/2").unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r[1], Rational64::new(-1, 2));
        assert!(parse_range("1:0:1").is_err());
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn inline_tuple_with_case() {
        let src = TupleSource {
            inline: Some(r#"{"c_d":0,"c_gamma":1,"c_u":0,"c_w":0,"c_eta_u":-2,"c_eta_w":-2,"pq_case":"zero_output_init"}"#.into()),
            ..TupleSource::default()
        };
        let input = src.resolve(None).unwrap();
        assert_eq!(input.pq_case, PqCase::ZeroOutputInit);
        assert_eq!(classify_phase(&input.exponents, input.pq_case).phase, lindyn::phase::Phase::Kernel);
    }
}
